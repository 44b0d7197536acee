"""
Головний модуль interaction-kernels.
Командний рядок для обчислення статистик взаємодії, переліку розбиттів
і числової перевірки ядер.

Коди завершення: 0 успіх, 2 помилка вхідних даних, 3 перевірку не пройдено.
"""
import argparse
import csv
import json
import logging
import sys
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from algebra.partitions import iter_partitions, MAX_ENUMERATE_N
from common.config import VERSION, get_settings
from common.console import print_results_summary
from common.errors import InputError, InteractionError, KernelSpecError
from common.utils import dump_json, load_json, save_json
from kernels.families import SumCMSpec, kernel_descriptor, parse_kernel_spec
from kernels.kernels import factor_parts
from measures.measures import SpaceShape
from stats.statistics import Sample, interaction_statistic, permutation_pvalue
from stats.verify import (
    cnd_check,
    complete_monotone_check,
    frechet_check,
    inequality_suite,
    pdi_random_check,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_FAILED = 3


class RunConfig(BaseModel):
    """Повністю розв'язана конфігурація запуску, що потрапляє у звіт."""

    subcommand: str
    input: Optional[str] = None
    groups: Optional[List[int]] = None
    order: Optional[int] = None
    mode: Optional[str] = None
    kernel: Optional[str] = None
    permutations: int = 0
    seed: Optional[int] = None
    header: bool = True
    settings: Dict[str, Any] = {}


def parse_int_list(text: str, name: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InputError(f"{name}: очікується список цілих чисел через кому, отримано '{text}'")
    if not values:
        raise InputError(f"{name}: порожній список")
    return values


def parse_float_list(text: str, name: str) -> List[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InputError(f"{name}: очікується список чисел через кому, отримано '{text}'")
    if not values:
        raise InputError(f"{name}: порожній список")
    return values


def read_sample_csv(path: str, groups: List[int], header: bool = True) -> Tuple[bool, Any]:
    """Читання числової CSV-таблиці у Sample; стовпці розподіляються між змінними зліва направо."""
    if any(d < 1 for d in groups):
        return False, f"Розміри груп мають бути ≥ 1: {groups}"
    width = sum(groups)
    rows: List[List[float]] = []
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            for record in reader:
                if not record or all(cell.strip() == "" for cell in record):
                    continue
                if header:
                    header = False
                    continue
                if len(record) != width:
                    return False, (
                        f"{path}: рядок {reader.line_num}: {len(record)} стовпців, "
                        f"а групи {groups} потребують {width}"
                    )
                values = []
                for column, cell in enumerate(record, start=1):
                    try:
                        value = float(cell.strip())
                    except ValueError:
                        return False, f"{path}: рядок {reader.line_num}, стовпець {column}: '{cell}' не є числом"
                    if not np.isfinite(value):
                        return False, f"{path}: рядок {reader.line_num}, стовпець {column}: нескінченне значення"
                    values.append(value)
                rows.append(values)
    except OSError as e:
        return False, f"Помилка читання файлу {path}: {e}"
    except (UnicodeDecodeError, csv.Error) as e:
        return False, f"{path}: некоректний CSV: {e}"
    if not rows:
        return False, f"{path}: файл не містить даних"
    return True, Sample(SpaceShape(tuple(groups)), np.array(rows))


def load_kernel(path: str) -> Tuple[bool, Any]:
    """Завантаження та перевірка JSON-документа ядра."""
    success, document = load_json(path)
    if not success:
        return False, document
    try:
        return True, parse_kernel_spec(document)
    except KernelSpecError as e:
        return False, f"{path}: {e}"


def emit(report: Dict[str, Any], out: Optional[str]) -> int:
    """JSON у stdout або у файл --out."""
    if out:
        success, message = save_json(report, out)
        if not success:
            print(message, file=sys.stderr)
            return EXIT_INPUT
        print(f"Звіт збережено: {message}", file=sys.stderr)
    else:
        sys.stdout.write(dump_json(report))
    return EXIT_OK


def cmd_interaction(args) -> int:
    settings = get_settings()
    groups = parse_int_list(args.groups, "--groups")
    success, sample = read_sample_csv(args.input, groups, header=not args.no_header)
    if not success:
        print(sample, file=sys.stderr)
        return EXIT_INPUT
    success, spec = load_kernel(args.kernel)
    if not success:
        print(spec, file=sys.stderr)
        return EXIT_INPUT

    order = args.order if args.order is not None else spec.order
    permutations = settings.permutations if args.permutations is None else args.permutations
    seed = settings.seed if args.seed is None else args.seed
    config = RunConfig(
        subcommand="interaction", input=args.input, groups=groups, order=order, mode=args.mode,
        kernel=args.kernel, permutations=permutations, seed=seed if permutations > 0 else None,
        header=not args.no_header, settings=settings.as_dict(),
    )
    print(f"Вибірка: {sample.m} спостережень, {sample.shape.n} змінних", file=sys.stderr)

    if permutations > 0:
        energy = permutation_pvalue(sample, order, spec, permutations, seed, mode=args.mode)
    else:
        energy = interaction_statistic(sample, order, spec, mode=args.mode)

    report = energy.model_dump()
    report["version"] = VERSION
    report["config"] = config.model_dump()
    print(f"Статистика: {energy.statistic:.10g}", file=sys.stderr)
    if energy.p_value is not None:
        print(f"p-значення: {energy.p_value:.6g} (B={permutations}, seed={seed})", file=sys.stderr)
    return emit(report, args.out)


def cmd_partitions(args) -> int:
    if not 1 <= args.n <= MAX_ENUMERATE_N:
        raise InputError(f"--n має лежати в [1, {MAX_ENUMERATE_N}]")
    for partition in iter_partitions(args.n):
        sys.stdout.write(json.dumps(partition.to_dict(one_based=True), sort_keys=True) + "\n")
    return EXIT_OK


def _finish_verification(title: str, reports, extra: Dict[str, Any], out: Optional[str]) -> int:
    passed = all(report.passed for report in reports)
    print_results_summary(title, reports, sys.stderr)
    report = {
        "version": VERSION,
        "passed": passed,
        "reports": [r.model_dump() for r in reports],
        "config": get_settings().as_dict(),
    }
    report.update(extra)
    code = emit(report, out)
    if code != EXIT_OK:
        return code
    return EXIT_OK if passed else EXIT_FAILED


def cmd_verify_kernel(args) -> int:
    success, spec = load_kernel(args.kernel)
    if not success:
        print(spec, file=sys.stderr)
        return EXIT_INPUT
    order = args.order if args.order is not None else spec.order
    settings = get_settings()
    seed = settings.seed if args.seed is None else args.seed

    reports = [
        pdi_random_check(spec, order, args.trials, seed, d=args.dim),
        inequality_suite(seed, args.trials),
    ]
    rng = np.random.default_rng(seed)
    points = rng.normal(size=(12, args.dim))
    for part in factor_parts(spec):
        report = cnd_check(part, points)
        reports.append(report.model_copy(update={"name": f"cnd[{part.type}]"}))
    if isinstance(spec, SumCMSpec):
        reports.append(complete_monotone_check(spec.psi, spec.ell, np.geomspace(0.1, 10.0, 8)))

    extra = {"kernel": kernel_descriptor(spec), "order": order, "seed": seed, "trials": args.trials}
    return _finish_verification("ПЕРЕВІРКА ЯДРА", reports, extra, args.out)


def cmd_frechet(args) -> int:
    t = parse_float_list(args.t, "--t")
    degrees = [args.k] if args.k is not None else list(range(args.ell + 1))
    reports = []
    for k in degrees:
        report = frechet_check(args.ell, t, k)
        reports.append(report.model_copy(update={"name": f"frechet[k={k}]"}))
    extra = {"ell": args.ell, "t": t}
    return _finish_verification("ТОТОЖНОСТІ ФРЕШЕ", reports, extra, args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="interaction-kernels",
        description="Статистики взаємодії Ланкастера/Штрайтберга та перевірка ядер PDI",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("interaction", help="Енергія міри взаємодії за CSV-вибіркою")
    p.add_argument("--input", required=True, help="CSV-файл з вибіркою")
    p.add_argument("--groups", required=True, help="Розмірності змінних d1,...,dn")
    p.add_argument("--order", type=int, default=None, help="Порядок k (за замовчуванням порядок ядра)")
    p.add_argument("--mode", choices=["lancaster", "streitberg"], default="lancaster")
    p.add_argument("--kernel", required=True, help="JSON-документ ядра")
    p.add_argument("--permutations", type=int, default=None, help="Кількість перестановок B")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="Файл для JSON-звіту")
    p.add_argument("--no-header", action="store_true", help="CSV без рядка заголовка")
    p.set_defaults(handler=cmd_interaction)

    p = sub.add_parser("partitions", help="Перелік розбиттів {1..n} з коефіцієнтами Штрайтберга")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(handler=cmd_partitions)

    p = sub.add_parser("verify-kernel", help="Випадкова перевірка PDI та супутніх тверджень")
    p.add_argument("--kernel", required=True, help="JSON-документ ядра")
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_verify_kernel)

    p = sub.add_parser("frechet", help="Тотожності Фреше для степенів суми")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--t", required=True, help="Значення t1,...,tℓ")
    p.add_argument("--k", type=int, default=None, help="Степінь (за замовчуванням усі 0..ℓ)")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_frechet)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Розбір аргументів і виконання підкоманди; повертає код завершення."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_INPUT
    try:
        return args.handler(args)
    except InteractionError as e:
        print(f"Помилка: {e}", file=sys.stderr)
        return EXIT_INPUT


def main():
    """Функція запуску командного рядка."""
    logging.basicConfig(
        level=getattr(logging, get_settings().log_level, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
