"""
Енергетична статистика (-1)^k ∬ g dμ dμ для знакозмінних мір, статистика
взаємодії за вибіркою та перестановочні p-значення.
"""
import logging
import math
from itertools import combinations
from typing import Callable, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field
from scipy.spatial.distance import cdist

from algebra.symfun import lancaster_weight
from common.config import get_settings
from common.errors import ArityError, InputError, ShapeError
from common.workers import map_indexed
from kernels.families import OrderKSpec, ProductSpec, kernel_descriptor
from kernels.kernels import AnySpec, evaluate, separable_terms
from measures.interactions import InteractionOrder, lancaster_general, streitberg
from measures.measures import DiscreteMeasure, SpaceShape, empirical, require_probability

logger = logging.getLogger(__name__)

# Обмеження кількості елементів проміжного масиву аргументів ядра
CHUNK_ELEMENTS = 2_000_000
# Відносний допуск при порівнянні перестановочних статистик зі спостереженою
TIE_TOL = 1e-12


class Sample:
    """Вибірка з m спостережень на просторі SpaceShape; рядок = конкатенація блоків."""

    def __init__(self, shape: SpaceShape, rows):
        rows = np.array(rows, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != shape.total_dim:
            raise ShapeError(f"Очікується матриця з {shape.total_dim} стовпцями, отримано форму {rows.shape}")
        if rows.shape[0] < 1:
            raise ArityError("Вибірка має містити хоча б одне спостереження")
        if not np.all(np.isfinite(rows)):
            raise InputError("Вибірка містить нескінченні або відсутні значення")
        rows.flags.writeable = False
        self.shape = shape
        self.rows = rows

    @property
    def m(self) -> int:
        return int(self.rows.shape[0])

    def measure(self) -> DiscreteMeasure:
        """Емпірична ймовірність з вагою 1/m на кожному рядку."""
        return empirical(self.shape, self.rows)

    def permuted(self, rng: np.random.Generator) -> "Sample":
        """Незалежна перестановка рядків у кожному блоці змінних."""
        offsets = self.shape.offsets
        rows = np.empty_like(self.rows)
        for i in range(self.shape.n):
            lo, hi = offsets[i], offsets[i + 1]
            rows[:, lo:hi] = self.rows[rng.permutation(self.m), lo:hi]
        return Sample(self.shape, rows)


class EnergyReport(BaseModel):
    statistic: float
    order: int
    mode: str
    kernel: dict
    atoms: int
    method: Literal["materialized", "expanded"]
    p_value: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    permutations: Optional[int] = None
    seed: Optional[int] = None


def _block_tables(mu: DiscreteMeasure) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Для кожного блоку: індекси різних значень атомів і таблиця квадратів відстаней між ними."""
    tables = []
    for i in range(mu.shape.n):
        unique, inverse = np.unique(mu.block(i), axis=0, return_inverse=True)
        tables.append((inverse.reshape(-1), cdist(unique, unique, metric="sqeuclidean")))
    return tables


def quadratic_form_energy(g: Callable[[np.ndarray], np.ndarray], mu: DiscreteMeasure, k: int) -> float:
    """(-1)^k Σ_{u,v} w_u w_v g(‖u_1 - v_1‖², …, ‖u_n - v_n‖²) для довільної векторизованої g."""
    atoms = len(mu)
    if atoms == 0:
        return 0.0
    n = mu.shape.n
    w = mu.weights
    tables = _block_tables(mu)
    chunk = max(1, CHUNK_ELEMENTS // (atoms * n))
    partials = []
    for start in range(0, atoms, chunk):
        rows = slice(start, min(start + chunk, atoms))
        T = np.empty((rows.stop - rows.start, atoms, n))
        for i, (inverse, table) in enumerate(tables):
            T[:, :, i] = table[np.ix_(inverse[rows], inverse)]
        partials.append(float(w[rows] @ np.asarray(g(T)) @ w))
    return (-1.0) ** k * math.fsum(partials)


def _check_kernel(spec: AnySpec, shape: SpaceShape, k: int) -> None:
    if spec.n != shape.n:
        raise ShapeError(f"Ядро на {spec.n} змінних, міра на {shape.n} змінних")
    if k != spec.order:
        raise ArityError(f"Порядок k={k} не збігається з порядком ядра {spec.order}")


def quadratic_energy(spec: AnySpec, mu: DiscreteMeasure, k: int) -> float:
    """(-1)^k ∬ g dμ dμ; для μ ∈ M_k і коректного ядра результат ≥ 0 з точністю до округлення."""
    _check_kernel(spec, mu.shape, k)
    return quadratic_form_energy(lambda T: evaluate(spec, T), mu, k)


def _separable_lancaster(grams: List[Optional[np.ndarray]], w: np.ndarray,
                         sets: List[Tuple[frozenset, float]]) -> float:
    """Σ_{F,G} c_F c_G ⟨A_F, A_G⟩ для ядра ∏_i K^i; None означає K^i ≡ 1."""
    n = len(grams)
    mass = float(w.sum())
    row_means = [None if K is None else K @ w for K in grams]
    grand_means = [mass * mass if r is None else float(w @ r) for r in row_means]

    def inner(F: frozenset, G: frozenset) -> float:
        left = w.copy()
        right = w.copy()
        for i in F - G:
            left = left * (mass if row_means[i] is None else row_means[i])
        for i in G - F:
            right = right * (mass if row_means[i] is None else row_means[i])
        common = [i for i in sorted(F & G) if grams[i] is not None]
        constant = math.prod(grand_means[i] for i in range(n) if i not in F and i not in G)
        if not common:
            return constant * float(left.sum() * right.sum())
        H = grams[common[0]]
        for i in common[1:]:
            H = H * grams[i]
        return constant * float(left @ H @ right)

    partials = []
    for a, (F, cF) in enumerate(sets):
        for b in range(a, len(sets)):
            G, cG = sets[b]
            factor = 1.0 if a == b else 2.0
            partials.append(factor * cF * cG * inner(F, G))
    return math.fsum(partials)


def lancaster_energy_expanded(spec: Union[ProductSpec, OrderKSpec], P: DiscreteMeasure, k: int) -> float:
    """
    Енергія Λ_k^n[P] для добуткового ядра або ядра порядку k без матеріалізації міри.

    Ядро розкладається на доданки c_j ∏_i f_j^i(t_i). Λ_k^n[P] = Σ_F c_F A_F, де
    A_F = P_F × ⨉_{i∉F} P_i. Скалярний добуток ⟨A_F, A_G⟩ для кожного доданка
    розкладається на суми за атомами P з множниками K^i на F∩G, середніми по
    рядках r^i = K^i w на симетричній різниці і повними середніми s^i = w·r^i
    на решті змінних. Вартість O(J S² n A²), J доданків, S = 1 + Σ_{j<k} C(n, j).
    """
    if not isinstance(spec, (ProductSpec, OrderKSpec)):
        raise InputError("Розклад енергії доступний лише для добуткових ядер і ядер порядку k")
    _check_kernel(spec, P.shape, spec.order)
    order = InteractionOrder(P.shape.n, k)
    require_probability(P)
    n = order.n
    w = P.weights

    sets: List[Tuple[frozenset, float]] = [(frozenset(range(n)), 1.0)]
    for size in range(order.k):
        coefficient = float(lancaster_weight(n, order.k, size))
        sets += [(frozenset(subset), coefficient) for subset in combinations(range(n), size)]

    tables = _block_tables(P)
    partials = []
    for coefficient, factors in separable_terms(spec):
        grams = [
            None if f is None else np.asarray(f(table), dtype=float)[np.ix_(inverse, inverse)]
            for f, (inverse, table) in zip(factors, tables)
        ]
        partials.append(coefficient * _separable_lancaster(grams, w, sets))
    logger.debug("Енергія через розклад: %d доданків, %d множин", len(partials), len(sets))
    return (-1.0) ** order.k * math.fsum(partials)


def _normalize_mode(mode: str) -> str:
    if mode in ("lancaster", "lancaster_k"):
        return "lancaster"
    if mode == "streitberg":
        return mode
    raise InputError(f"Невідомий режим '{mode}', очікується lancaster або streitberg")


def _estimated_atoms(P: DiscreteMeasure) -> int:
    return math.prod(len(np.unique(P.block(i), axis=0)) for i in range(P.shape.n))


def interaction_statistic(
    sample: Sample,
    k: int,
    spec: AnySpec,
    mode: str = "lancaster",
    expansion_threshold: Optional[int] = None,
) -> EnergyReport:
    """Енергія Λ_k^n[P̂] або Σ[P̂] емпіричної ймовірності вибірки."""
    mode = _normalize_mode(mode)
    n = sample.shape.n
    if mode == "streitberg" and k != n:
        raise ArityError(f"Режим streitberg вимагає k = n = {n}, отримано k={k}")
    _check_kernel(spec, sample.shape, k)
    if expansion_threshold is None:
        expansion_threshold = get_settings().expansion_threshold

    P = sample.measure()
    descriptor = kernel_descriptor(spec)
    if mode == "lancaster" and isinstance(spec, (ProductSpec, OrderKSpec)):
        estimate = _estimated_atoms(P)
        if estimate > expansion_threshold:
            logger.debug("Оцінка %d атомів перевищує поріг %d, розклад енергії", estimate, expansion_threshold)
            value = lancaster_energy_expanded(spec, P, k)
            return EnergyReport(
                statistic=value, order=k, mode=mode, kernel=descriptor, atoms=len(P), method="expanded"
            )

    if mode == "lancaster":
        measure = lancaster_general(P, None, InteractionOrder(n, k))
    else:
        measure = streitberg(P)
    value = quadratic_energy(spec, measure, k)
    return EnergyReport(
        statistic=value, order=k, mode=mode, kernel=descriptor, atoms=len(measure), method="materialized"
    )


def permutation_pvalue(
    sample: Sample,
    k: int,
    spec: AnySpec,
    B: int,
    seed: int,
    mode: str = "lancaster",
    workers: Optional[int] = None,
    expansion_threshold: Optional[int] = None,
) -> EnergyReport:
    """
    p = (1 + #{b: S_b ≥ S}) / (B + 1), де S_b є статистикою після незалежної
    перестановки кожного блоку змінних. Реплікація b використовує b-тий
    нащадок SeedSequence(seed), тому результат не залежить від кількості потоків.
    """
    if B < 1:
        raise ArityError(f"Кількість перестановок має бути ≥ 1, отримано {B}")
    if seed < 0:
        raise ArityError(f"seed має бути невід'ємним, отримано {seed}")
    if sample.m < 2:
        raise ArityError("Перестановочний тест потребує щонайменше двох спостережень")
    settings = get_settings()
    workers = settings.workers if workers is None else workers
    if expansion_threshold is None:
        expansion_threshold = settings.expansion_threshold

    observed = interaction_statistic(sample, k, spec, mode, expansion_threshold)
    children = np.random.SeedSequence(seed).spawn(B)

    def replicate(b: int) -> float:
        rng = np.random.default_rng(children[b])
        return interaction_statistic(sample.permuted(rng), k, spec, mode, expansion_threshold).statistic

    permuted = np.array(map_indexed(replicate, B, workers))
    threshold = observed.statistic - TIE_TOL * max(1.0, abs(observed.statistic))
    exceed = int(np.count_nonzero(permuted >= threshold))
    p_value = (1 + exceed) / (B + 1)
    logger.info("Перестановочний тест: статистика %.6g, p = %.4f (B=%d)", observed.statistic, p_value, B)
    return observed.model_copy(update={"p_value": p_value, "permutations": B, "seed": seed})
