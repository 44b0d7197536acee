"""
Елементарні симетричні многочлени та похідні від них величини.

p_k^n(r) обчислюється рекурентно p_j^{n+1}(r, r_{n+1}) = p_j^n(r) + r_{n+1} p_{j-1}^n(r)
за O(nk) операцій. Усі функції приймають масиви з довільними провідними осями:
остання вісь містить n аргументів.
"""
import math
from typing import Sequence, Union

import numpy as np

from common.errors import ArityError, DegenerateSupportError, DomainError

ArrayLike = Union[Sequence[float], np.ndarray]

# Найбільше n, для якого всі C(n, k) вміщуються у 64-бітне ціле
MAX_BINOMIAL_N = 62


def binomial(n: int, k: int) -> int:
    """Точний біноміальний коефіцієнт C(n, k); нуль поза 0 ≤ k ≤ n."""
    if n < 0 or n > MAX_BINOMIAL_N:
        raise ArityError(f"Біноміальний коефіцієнт підтримується для 0 ≤ n ≤ {MAX_BINOMIAL_N}, отримано n={n}")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def _as_values(values: ArrayLike) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.shape[-1] < 1:
        raise ArityError("Потрібен хоча б один аргумент (n ≥ 1)")
    return arr


def _check_order(n: int, k: int, lowest: int = 0) -> None:
    if k < lowest or k > n:
        raise ArityError(f"Порядок k={k} поза межами [{lowest}, {n}]")


def _scalar_or_array(arr: np.ndarray):
    return float(arr) if arr.ndim == 0 else arr


def elem_sym_table(r: ArrayLike, k: int) -> np.ndarray:
    """Таблиця p_0^n(r), …, p_k^n(r) вздовж нової останньої осі."""
    r = _as_values(r)
    n = r.shape[-1]
    _check_order(n, k)
    table = np.zeros(r.shape[:-1] + (k + 1,), dtype=float)
    table[..., 0] = 1.0
    for i in range(n):
        ri = r[..., i]
        # спадний порядок j, щоб p_{j-1} ще не містив r_i
        for j in range(min(i + 1, k), 0, -1):
            table[..., j] += ri * table[..., j - 1]
    return table


def elem_sym_poly(r: ArrayLike, k: int):
    """p_k^n(r): сума добутків по всіх k-елементних підмножинах індексів."""
    return _scalar_or_array(elem_sym_table(r, k)[..., k])


def lancaster_weight(n: int, k: int, j: int) -> int:
    """Коефіцієнт (-1)^{k-j} C(n-j-1, n-k) при підмножинах розміру j < k."""
    return (-1) ** (k - j) * binomial(n - j - 1, n - k)


def h_poly(r: ArrayLike, k: int):
    """H_k^n(r) = p_n^n(r) + Σ_{j<k} (-1)^{k-j} C(n-j-1, n-k) p_j^n(r)."""
    r = _as_values(r)
    n = r.shape[-1]
    _check_order(n, k, lowest=1)
    table = elem_sym_table(r, n)
    result = table[..., n].copy()
    for j in range(k):
        result += lancaster_weight(n, k, j) * table[..., j]
    return _scalar_or_array(result)


def h_poly_complement(a: ArrayLike, k: int):
    """
    H_k^n(1 - a) = Σ_{j=k}^{n} (-1)^j p_j^n(a).

    Ця форма не містить скорочень великих доданків біля a = 0, тому нулі на
    межі (менше k ненульових a_i) точні.
    """
    a = _as_values(a)
    n = a.shape[-1]
    _check_order(n, k, lowest=1)
    table = elem_sym_table(a, n)
    signs = np.array([(-1.0) ** j for j in range(k, n + 1)])
    return _scalar_or_array(table[..., k:] @ signs)


def e_kernel_core(s: ArrayLike, k: int):
    """E_k^n(s) = H_k^n(e^{-s_1}, …, e^{-s_n}); (-1)^k E_k^n(s) ≥ 0 на [0, ∞)^n."""
    s = _as_values(s)
    if not np.all(np.isfinite(s)):
        raise DomainError("Аргументи E_k^n мають бути скінченними")
    if np.any(s < 0):
        raise DomainError("Аргументи E_k^n мають бути невід'ємними")
    return h_poly_complement(-np.expm1(-s), k)


def _check_support(r: np.ndarray, k: int) -> None:
    if np.any(r < 0) or not np.all(np.isfinite(r)):
        raise DomainError("Вектор r має лежати у [0, ∞)^n")
    positive = int(np.count_nonzero(r > 0))
    if positive < k + 1:
        raise DegenerateSupportError(
            f"Потрібно щонайменше {k + 1} додатних координат, знайдено {positive}"
        )


def shifted_ratio_expansion(r: ArrayLike, k: int) -> float:
    """p_k^n(1 + r) через розклад Σ_{j≤k} C(n-j, n-k) p_j^n(r)."""
    r = _as_values(r)
    if r.ndim != 1:
        raise ArityError("Очікується одновимірний вектор r")
    n = r.shape[-1]
    _check_order(n, k)
    table = elem_sym_table(r, k)
    return float(sum(binomial(n - j, n - k) * table[j] for j in range(k + 1)))


def shifted_ratio(r: ArrayLike, k: int) -> float:
    """p_k^n(1 + r) / p_k^n(r) для r поза виродженою множиною ∂_k^n."""
    r = _as_values(r)
    if r.ndim != 1:
        raise ArityError("Очікується одновимірний вектор r")
    _check_order(r.shape[-1], k)
    _check_support(r, k)
    return float(elem_sym_poly(1.0 + r, k) / elem_sym_poly(r, k))
