"""
Міри взаємодії дискретних ймовірностей: узагальнена взаємодія Ланкастера Λ_k^n[P, Q],
взаємодія Штрайтберга Σ[P], канонічні міри μ_k^n[x, y] та побудова
ймовірності-свідка для добутку мір з нульовою масою.
"""
import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from algebra.partitions import enumerate_partitions, partition_factor, streitberg_coefficient
from algebra.symfun import lancaster_weight
from common.errors import ArityError, ShapeError, WitnessError
from measures.measures import (
    DiscreteMeasure,
    ProductPoint,
    SpaceShape,
    assemble,
    dirac,
    from_atoms,
    from_arrays,
    hahn_jordan,
    linear_combination,
    marginal,
    product,
    require_probability,
)

logger = logging.getLogger(__name__)

MAX_INTERACTION_N = 16
MAX_STREITBERG_N = 10
MEAN_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class InteractionOrder:
    """Пара (n, k) з 1 ≤ k ≤ n ≤ 16."""

    n: int
    k: int

    def __post_init__(self):
        if not 1 <= self.n <= MAX_INTERACTION_N:
            raise ArityError(f"Кількість змінних n={self.n} поза межами [1, {MAX_INTERACTION_N}]")
        if not 1 <= self.k <= self.n:
            raise ArityError(f"Порядок k={self.k} поза межами [1, {self.n}]")


def lancaster_coefficients(order: InteractionOrder) -> Dict[int, int]:
    """Коефіцієнт при доданках з |F| = j: 1 для j = n і (-1)^{k-j} C(n-j-1, n-k) для j < k."""
    coefficients = {j: lancaster_weight(order.n, order.k, j) for j in range(order.k)}
    coefficients[order.n] = 1
    return coefficients


def _subsets(order: InteractionOrder) -> List[Tuple[Tuple[int, ...], int]]:
    """Підмножини F з |F| < k разом із коефіцієнтами."""
    coefficients = lancaster_coefficients(order)
    return [
        (subset, coefficients[size])
        for size in range(order.k)
        for subset in combinations(range(order.n), size)
    ]


def mu_kn(x: ProductPoint, y: ProductPoint, order: InteractionOrder) -> DiscreteMeasure:
    """μ_k^n[x, y]: δ_x + Σ_{|F|<k} (-1)^{k-|F|} C(n-|F|-1, n-k) δ_{(x_F, y_{F^c})}."""
    if x.shape != y.shape:
        raise ShapeError(f"Точки з різних просторів: {x.shape.dims} і {y.shape.dims}")
    if x.n != order.n:
        raise ShapeError(f"Точки мають {x.n} блоків, очікується {order.n}")
    pairs = [(x, 1.0)]
    for subset, coefficient in _subsets(order):
        blocks = tuple(x.blocks[i] if i in subset else y.blocks[i] for i in range(order.n))
        pairs.append((ProductPoint(blocks), float(coefficient)))
    return from_atoms(x.shape, pairs)


def _single_marginals(P: DiscreteMeasure) -> List[DiscreteMeasure]:
    return [marginal(P, (i,)) for i in range(P.shape.n)]


def lancaster_general(
    P: DiscreteMeasure, Q: Optional[DiscreteMeasure], order: InteractionOrder
) -> DiscreteMeasure:
    """
    Λ_k^n[P, Q] = P + Σ_{j<k} (-1)^{k-j} C(n-j-1, n-k) Σ_{|F|=j} P_F × Q_{F^c}.

    Без Q використовується добуток одновимірних маргіналів P; він не
    матеріалізується окремо, а кожен доданок P_F × ⨉_{i∉F} P_i збирається напряму.
    Довільне Q дозволене, але статистичний зміст має лише типовий вибір.
    """
    if P.shape.n != order.n:
        raise ShapeError(f"Міра на {P.shape.n} змінних, очікується {order.n}")
    require_probability(P)
    if Q is not None:
        if Q.shape != P.shape:
            raise ShapeError("P і Q задані на різних просторах")
        require_probability(Q, name="Q")
    singles = _single_marginals(P) if Q is None else None

    terms = [(1.0, P)]
    for subset, coefficient in _subsets(order):
        rest = tuple(i for i in range(order.n) if i not in subset)
        parts = [(subset, marginal(P, subset))] if subset else []
        if Q is None:
            parts += [((i,), singles[i]) for i in rest]
        elif rest:
            parts.append((rest, marginal(Q, rest)))
        terms.append((float(coefficient), assemble(P.shape, parts)))
    return linear_combination(terms)


def lancaster(P: DiscreteMeasure) -> DiscreteMeasure:
    """Класична взаємодія Ланкастера Λ[P] = Λ_n^n[P]."""
    return lancaster_general(P, None, InteractionOrder(P.shape.n, P.shape.n))


def streitberg(P: DiscreteMeasure) -> DiscreteMeasure:
    """Σ[P] = Σ_π a_π P_π по всіх розбиттях π множини змінних."""
    n = P.shape.n
    if n > MAX_STREITBERG_N:
        raise ArityError(f"Взаємодія Штрайтберга підтримується для n ≤ {MAX_STREITBERG_N}, отримано n={n}")
    require_probability(P)
    partitions = enumerate_partitions(n)
    logger.debug("Штрайтберг: %d розбиттів для n=%d", len(partitions), n)
    return linear_combination(
        [(float(streitberg_coefficient(pi)), partition_factor(P, pi)) for pi in partitions]
    )


def _scale(mu: DiscreteMeasure, factor: float) -> DiscreteMeasure:
    return from_arrays(mu.shape, mu.coords, mu.weights * factor)


def _parity_split(
    first: Tuple[DiscreteMeasure, DiscreteMeasure], rest: Sequence[Tuple[DiscreteMeasure, DiscreteMeasure]]
) -> Tuple[DiscreteMeasure, DiscreteMeasure]:
    """Суми добутків A_i^{α_i} з парною та непарною кількістю виборів другого члена."""
    even, odd = first
    for one, two in rest:
        even, odd = (
            linear_combination([(1.0, product([even, one])), (1.0, product([odd, two]))]),
            linear_combination([(1.0, product([even, two])), (1.0, product([odd, one]))]),
        )
    return even, odd


def _fallback_point(mu: DiscreteMeasure) -> ProductPoint:
    if len(mu):
        return mu.points[0]
    return ProductPoint(tuple((0.0,) * d for d in mu.shape.dims))


def witness_from_factors(factors: Sequence[DiscreteMeasure], k: int) -> Tuple[DiscreteMeasure, float]:
    """
    Ймовірність P і M ≥ 0 з Λ_k^n[P] = M (-1)^n ⨉ μ_i.

    Потрібно щонайменше max(k, 2) множників з нульовою повною масою. Множники з
    нульовою масою розкладаються як b_i (S_i^1 - S_i^2), решта як
    μ_i^+ - μ_i^-; P будується розщепленням за парністю кількості других членів.
    """
    n = len(factors)
    order = InteractionOrder(n, k)
    for i, mu in enumerate(factors):
        if mu.shape.n != 1:
            raise ShapeError(f"Множник {i} має бути мірою на одній змінній")
    shape = SpaceShape(tuple(mu.shape.dims[0] for mu in factors))

    # Λ_1^1[P] = P - P тотожно нульова, тому при n = 1 підходить лише M = 0
    if n == 1 or any(mu.is_zero(MEAN_ZERO_TOL) for mu in factors):
        logger.info("Тривіальний випадок, M = 0")
        point = ProductPoint(tuple(_fallback_point(mu).blocks[0] for mu in factors))
        return dirac(point), 0.0

    mean_zero = [
        i for i, mu in enumerate(factors)
        if abs(mu.total_mass) <= MEAN_ZERO_TOL * max(1.0, mu.total_variation)
    ]
    # одновимірні маргінали P симетризуються лише за двох і більше таких множників
    required = max(order.k, 2)
    if len(mean_zero) < required:
        raise WitnessError(
            f"Потрібно щонайменше {required} множників з нульовою масою, знайдено {len(mean_zero)}"
        )
    others = [i for i in range(n) if i not in mean_zero]

    normalized = []
    b_product = 1.0
    for i in mean_zero:
        positive, negative = hahn_jordan(factors[i])
        b = positive.total_mass
        b_product *= b
        normalized.append((_scale(positive, 1.0 / b), _scale(negative, 1.0 / negative.total_mass)))
    if n % 2 == 1:
        normalized[0] = (normalized[0][1], normalized[0][0])

    even_s, odd_s = _parity_split(normalized[0], normalized[1:])
    denominator = 2.0 ** (len(mean_zero) - 1)
    if others:
        signed = [hahn_jordan(factors[i]) for i in others]
        denominator *= float(np.prod([factors[i].total_variation for i in others]))
        even_r, odd_r = _parity_split(signed[0], signed[1:])
        joint = linear_combination([(1.0, product([even_s, even_r])), (1.0, product([odd_s, odd_r]))])
    else:
        joint = even_s
    joint = _scale(joint, 1.0 / denominator)

    # змінні joint ідуть у порядку mean_zero + others
    layout = mean_zero + others
    position = {var: slot for slot, var in enumerate(layout)}
    witness = marginal(joint, [position[i] for i in range(n)])
    if witness.shape != shape:
        raise ShapeError("Внутрішня помилка збирання ймовірності-свідка")
    M = 1.0 / (2.0 * denominator * b_product)
    return witness, M
