"""
Розбиття множини змінних {0, …, n-1}, числа Белла та коефіцієнти Штрайтберга.
"""
import math
from dataclasses import dataclass
from typing import Iterator, List, Tuple

from common.errors import ArityError
from measures.measures import assemble, marginal, require_probability

MAX_ENUMERATE_N = 12
MAX_BELL_N = 25


@dataclass(frozen=True)
class Partition:
    """Розбиття на непорожні блоки; блоки відсортовані за найменшим елементом."""

    blocks: Tuple[Tuple[int, ...], ...]

    @property
    def n(self) -> int:
        return sum(len(block) for block in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    @classmethod
    def from_blocks(cls, blocks) -> "Partition":
        """Канонізація довільного набору блоків з перевіркою покриття."""
        normalized = [tuple(sorted(int(i) for i in block)) for block in blocks]
        if any(len(block) == 0 for block in normalized):
            raise ArityError("Блок розбиття не може бути порожнім")
        elements = sorted(i for block in normalized for i in block)
        if elements != list(range(len(elements))):
            raise ArityError(f"Блоки мають покривати 0..n-1 без повторів, отримано {elements}")
        normalized.sort(key=lambda block: block[0])
        return cls(tuple(normalized))

    def to_dict(self, one_based: bool = False) -> dict:
        shift = 1 if one_based else 0
        return {
            "blocks": [[i + shift for i in block] for block in self.blocks],
            "coefficient": streitberg_coefficient(self),
        }


def _from_growth_string(labels: List[int]) -> Partition:
    blocks: List[List[int]] = [[] for _ in range(max(labels) + 1)]
    for element, label in enumerate(labels):
        blocks[label].append(element)
    return Partition(tuple(tuple(block) for block in blocks))


def iter_partitions(n: int) -> Iterator[Partition]:
    """Лінивий перелік розбиттів у лексикографічному порядку рядків обмеженого росту."""
    if n < 1:
        raise ArityError(f"Кількість змінних має бути n ≥ 1, отримано {n}")
    labels = [0] * n
    maxima = [0] * n
    while True:
        yield _from_growth_string(labels)
        # шукаємо найправішу позицію, яку можна збільшити
        i = n - 1
        while i > 0 and labels[i] > maxima[i - 1]:
            i -= 1
        if i == 0:
            return
        labels[i] += 1
        maxima[i] = max(maxima[i - 1], labels[i])
        for j in range(i + 1, n):
            labels[j] = 0
            maxima[j] = maxima[i]


def enumerate_partitions(n: int) -> List[Partition]:
    """Усі B_n розбиттів множини з n елементів."""
    if n < 1 or n > MAX_ENUMERATE_N:
        raise ArityError(f"Перелік розбиттів підтримується для 1 ≤ n ≤ {MAX_ENUMERATE_N}, отримано n={n}")
    return list(iter_partitions(n))


def bell(n: int) -> int:
    """Число Белла: B_0 = 1, B_{n+1} = Σ_j C(n, j) B_j."""
    if n < 0 or n > MAX_BELL_N:
        raise ArityError(f"Числа Белла підтримуються для 0 ≤ n ≤ {MAX_BELL_N}, отримано n={n}")
    numbers = [1]
    for m in range(n):
        numbers.append(sum(math.comb(m, j) * numbers[j] for j in range(m + 1)))
    return numbers[n]


def streitberg_coefficient(partition: Partition) -> int:
    """a_π = (-1)^{|π|-1} (|π|-1)!"""
    size = len(partition)
    return (-1) ** (size - 1) * math.factorial(size - 1)


def partition_factor(P, partition: Partition):
    """P_π: добуток маргіналів P на блоках розбиття у вихідному порядку змінних."""
    require_probability(P)
    if partition.n != P.shape.n:
        raise ArityError(f"Розбиття на {partition.n} змінних не відповідає мірі на {P.shape.n} змінних")
    if len(partition) == 1:
        return P
    parts = [(block, marginal(P, block)) for block in partition.blocks]
    return assemble(P.shape, parts)
