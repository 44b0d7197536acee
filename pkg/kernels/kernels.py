"""
Обчислення радіальних ядер g(t_1, …, t_n) у квадратах відстаней між блоками,
поправка на межі та матриці Грама.

Усі функції векторизовані: аргумент T має форму (..., n), результат (...).
"""
import logging
from itertools import combinations
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial.distance import cdist

from algebra.symfun import e_kernel_core, lancaster_weight, shifted_ratio
from common.errors import ArityError, DomainError, ShapeError
from kernels.families import OrderKSpec, ProductSpec, SumCMSpec
from measures.measures import ProductPoint, SpaceShape

logger = logging.getLogger(__name__)

AnySpec = Union[ProductSpec, OrderKSpec, SumCMSpec]
Evaluator = Callable[[np.ndarray], np.ndarray]


def _as_arguments(t, n: int) -> np.ndarray:
    T = np.asarray(t, dtype=float)
    if T.ndim == 0 or T.shape[-1] != n:
        raise ShapeError(f"Ядро очікує {n} аргументів, отримано форму {T.shape}")
    if not np.all(np.isfinite(T)) or np.any(T < 0):
        raise DomainError("Аргументи ядра мають бути скінченними і невід'ємними")
    return T


def border_correct(g: Evaluator, k: int, t) -> np.ndarray:
    """
    G(t) = g(t) + Σ_{j<k} (-1)^{k-j} C(n-j-1, n-k) Σ_{|F|=j} g(t_F),
    де t_F обнуляє координати поза F. G зникає на ∂_{k-1}^n.
    """
    T = np.asarray(t, dtype=float)
    n = T.shape[-1]
    if not 1 <= k <= n:
        raise ArityError(f"Порядок поправки k={k} поза межами [1, {n}]")
    total = np.array(g(T), dtype=float)
    for size in range(k):
        coefficient = lancaster_weight(n, k, size)
        for subset in combinations(range(n), size):
            mask = np.zeros(n)
            mask[list(subset)] = 1.0
            total = total + coefficient * np.asarray(g(T * mask), dtype=float)
    return total


def _product_values(parts, T: np.ndarray) -> np.ndarray:
    values = np.ones(T.shape[:-1])
    for i, part in enumerate(parts):
        values = values * part.evaluate(T[..., i])
    return values


def _orderk_values(spec: OrderKSpec, T: np.ndarray) -> np.ndarray:
    values = np.zeros(T.shape[:-1])
    for term in spec.cross:
        values = values + term.w * _product_values(term.parts, T[..., term.subset])
    sign = (-1.0) ** spec.k
    for atom in spec.eta:
        r = np.asarray(atom.r, dtype=float)
        ratio = shifted_ratio(r, spec.k)
        values = values + atom.w * sign * ratio * np.asarray(e_kernel_core(T * r, spec.k))
    return values


def _sumcm_raw(spec: SumCMSpec) -> Evaluator:
    return lambda T: spec.psi.signed(np.sum(T, axis=-1), spec.ell)


def evaluate(spec: AnySpec, t) -> np.ndarray:
    """Векторизоване обчислення g на масиві аргументів форми (..., n)."""
    T = _as_arguments(t, spec.n)
    if isinstance(spec, ProductSpec):
        return spec.scale * _product_values(spec.parts, T)
    if isinstance(spec, OrderKSpec):
        return _orderk_values(spec, T)
    if isinstance(spec, SumCMSpec):
        return border_correct(_sumcm_raw(spec), spec.ell, T)
    raise TypeError(f"Невідомий тип ядра: {type(spec).__name__}")


def eval_kernel(spec: AnySpec, t: Sequence[float]) -> float:
    """g(t) для одного вектора t ∈ [0, ∞)^n."""
    T = _as_arguments(t, spec.n)
    if T.ndim != 1:
        raise ShapeError("eval_kernel приймає один вектор; для масивів використовуйте evaluate")
    return float(evaluate(spec, T))


def truncated_exp_pair(ell: int, s) -> Tuple[float, float]:
    """(ω_ℓ(s), e_ℓ(s)): ω_ℓ(s) = Σ_{j<ℓ} (-s)^j/j!, e_ℓ(s) = e^{-s} Σ_{j<ℓ} s^j/j!."""
    if ell < 1:
        raise ArityError(f"ℓ має бути ≥ 1, отримано {ell}")
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise DomainError("Аргумент s має бути невід'ємним")
    omega = np.zeros_like(s)
    partial = np.zeros_like(s)
    term = np.ones_like(s)
    for j in range(ell):
        omega = omega + (-1.0) ** j * term
        partial = partial + term
        term = term * s / (j + 1)
    e = np.exp(-s) * partial
    if s.ndim == 0:
        return float(omega), float(e)
    return omega, e


def bernstein_normalized(r, t) -> np.ndarray:
    """(1 - e^{-rt})(1 + r)/r зі значенням t при r = 0."""
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    safe = np.where(r > 0, r, 1.0)
    value = -np.expm1(-safe * t) * (1.0 + safe) / safe
    return np.where(r > 0, value, t)


def block_sqdist(shape: SpaceShape, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Квадрати відстаней між блоками: масив (len(X), len(Y), n)."""
    offsets = shape.offsets
    out = np.empty((X.shape[0], Y.shape[0], shape.n))
    for i in range(shape.n):
        lo, hi = offsets[i], offsets[i + 1]
        out[:, :, i] = cdist(X[:, lo:hi], Y[:, lo:hi], metric="sqeuclidean")
    return out


def _points_matrix(points: Sequence[ProductPoint], shape: Optional[SpaceShape]) -> Tuple[SpaceShape, np.ndarray]:
    if not points:
        raise ShapeError("Порожній набір точок")
    shape = shape or points[0].shape
    for point in points:
        if not point.conforms(shape):
            raise ShapeError(f"Точка з блоками {point.shape.dims} не відповідає формі {shape.dims}")
    return shape, np.array([point.flat() for point in points], dtype=float)


def gram(spec: AnySpec, points: Sequence[ProductPoint], shape: Optional[SpaceShape] = None) -> np.ndarray:
    """Матриця [g(‖x_1 - y_1‖², …, ‖x_n - y_n‖²)] по всіх парах точок."""
    shape, X = _points_matrix(points, shape)
    if shape.n != spec.n:
        raise ShapeError(f"Ядро на {spec.n} змінних, точки мають {shape.n} блоків")
    return evaluate(spec, block_sqdist(shape, X, X))


def factor_parts(spec: AnySpec) -> List:
    """Одновимірні функції Бернштейна, з яких складено ядро (для перевірки CND)."""
    if isinstance(spec, ProductSpec):
        return list(spec.parts)
    if isinstance(spec, OrderKSpec):
        return [part for term in spec.cross for part in term.parts]
    return []


# (коефіцієнт, функції блоків); None означає множник 1 для цього блоку
SeparableTerm = Tuple[float, List[Optional[Evaluator]]]


def _one_minus_exp(rate: float) -> Evaluator:
    return lambda t: -np.expm1(-rate * np.asarray(t, dtype=float))


def separable_terms(spec: Union[ProductSpec, OrderKSpec]) -> List[SeparableTerm]:
    """
    Розклад g(t) = Σ_j c_j ∏_i f_j^i(t_i) на доданки з відокремленими змінними.

    Для атома eta: (-1)^k E_k^n(r ⊙ t) = Σ_{|S|≥k} (-1)^{|S|+k} ∏_{i∈S} (1 - e^{-r_i t_i});
    підмножини S з r_i = 0 дають нуль і пропускаються.
    """
    n = spec.n
    if isinstance(spec, ProductSpec):
        return [(spec.scale, [part.evaluate for part in spec.parts])]
    if not isinstance(spec, OrderKSpec):
        raise TypeError(f"Ядро {type(spec).__name__} не розкладається на доданки з відокремленими змінними")
    terms: List[SeparableTerm] = []
    for term in spec.cross:
        factors: List[Optional[Evaluator]] = [None] * n
        for i, part in zip(term.subset, term.parts):
            factors[i] = part.evaluate
        terms.append((term.w, factors))
    for atom in spec.eta:
        r = np.asarray(atom.r, dtype=float)
        ratio = shifted_ratio(r, spec.k)
        support = [i for i in range(n) if r[i] > 0]
        for size in range(spec.k, len(support) + 1):
            coefficient = atom.w * ratio * (-1.0) ** (size + spec.k)
            for subset in combinations(support, size):
                factors = [None] * n
                for i in subset:
                    factors[i] = _one_minus_exp(float(r[i]))
                terms.append((coefficient, factors))
    return terms
