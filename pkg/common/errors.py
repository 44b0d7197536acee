"""
Ієрархія винятків бібліотеки.
Кожна операція повідомляє про порушення передумов одним із цих класів,
а CLI перетворює їх на коди завершення.
"""


class InteractionError(Exception):
    """Базовий виняток для всіх помилок бібліотеки."""


class ArityError(InteractionError, ValueError):
    """Некоректна кількість змінних, порядок k або розмір задачі."""


class ShapeError(InteractionError, ValueError):
    """Точки або міри не відповідають формі простору."""


class DomainError(InteractionError, ValueError):
    """Аргумент поза областю визначення (від'ємні t, нескінченності тощо)."""


class DegenerateSupportError(DomainError):
    """Атом лежить у виродженій множині ∂_k^n (не більше k додатних координат)."""


class MassError(InteractionError, ValueError):
    """Міра не є ймовірністю (повна маса не 1 або від'ємні ваги)."""


class WitnessError(InteractionError, ValueError):
    """Множники не задовольняють умову побудови ймовірності-свідка."""


class MarginalIndexError(InteractionError, IndexError):
    """Порожній або некоректний набір індексів для маргіналізації."""


class InputError(InteractionError, ValueError):
    """Некоректні вхідні дані: CSV, матриці, аргументи командного рядка."""


class KernelSpecError(InputError):
    """JSON-документ ядра не відповідає схемі."""
