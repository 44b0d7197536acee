"""
Людиночитний вивід результатів перевірок у консоль.
"""
import sys
from typing import Any, Iterable, TextIO


# Кольори для виводу в консоль
class Colors:
    HEADER = '\033[95m'
    BLUE = '\033[94m'
    CYAN = '\033[96m'
    GREEN = '\033[92m'
    WARNING = '\033[93m'
    FAIL = '\033[91m'
    ENDC = '\033[0m'
    BOLD = '\033[1m'


def _paint(text: str, color: str, stream: TextIO) -> str:
    if getattr(stream, "isatty", lambda: False)():
        return f"{color}{text}{Colors.ENDC}"
    return text


def print_results_summary(title: str, reports: Iterable[Any], stream: TextIO = sys.stderr) -> None:
    """Вивід підсумкової таблиці перевірок (об'єкти з полями name, passed, worst_violation, tolerance)."""
    reports = list(reports)
    print("\n" + "=" * 80, file=stream)
    print(_paint(title, Colors.BOLD, stream), file=stream)
    print("=" * 80, file=stream)

    passed = [r for r in reports if r.passed]
    failed = [r for r in reports if not r.passed]

    for report in reports:
        mark = _paint("✓", Colors.GREEN, stream) if report.passed else _paint("✗", Colors.FAIL, stream)
        print(
            f"  {mark} {report.name}: порушення {report.worst_violation:.3e}, "
            f"допуск {report.tolerance:.3e}, випробувань {report.trials}",
            file=stream,
        )

    print("\n" + "=" * 80, file=stream)
    print(f"Загальний результат: {len(passed)} пройдено, {len(failed)} не пройдено", file=stream)
    print("=" * 80 + "\n", file=stream)

    if failed:
        print(_paint("УВАГА! Ядро не пройшло всі перевірки.", Colors.FAIL, stream), file=stream)
