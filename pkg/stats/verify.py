"""
Числові перевірки тверджень про ядра: власні значення матриць Грама,
умовна від'ємна визначеність, повна монотонність скінченними різницями,
тотожності Фреше, випадковий аудит PDI та набір нерівностей для
симетричних многочленів і функцій Бернштейна.

Кожна перевірка детермінована при заданих (seed, trials).
"""
import logging
import math
from itertools import combinations, product as cartesian
from typing import Any, Callable, Dict, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy.linalg import eigvalsh
from scipy.spatial.distance import cdist

from algebra.symfun import binomial, elem_sym_poly, h_poly, shifted_ratio_expansion
from common.config import get_settings
from common.errors import ArityError, DomainError, InputError
from common.workers import map_indexed
from kernels.families import ExpBernstein, ProductSpec, cm_psi
from kernels.kernels import AnySpec, bernstein_normalized, evaluate, truncated_exp_pair
from measures.interactions import InteractionOrder, lancaster_general, mu_kn
from measures.measures import (
    DiscreteMeasure,
    ProductPoint,
    SpaceShape,
    from_arrays,
    linear_combination,
    product,
)
from stats.statistics import quadratic_energy

logger = logging.getLogger(__name__)

ASYMMETRY_TOL = 1e-10
MAX_DIFFERENCE_ORDER = 8
CND_RATES = (0.1, 1.0, 10.0)


class VerifyReport(BaseModel):
    name: str
    trials: int
    worst_violation: float
    tolerance: float
    passed: bool
    seed: Optional[int] = None
    details: Dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _consistent(self):
        if self.passed != (self.worst_violation <= self.tolerance):
            raise ValueError("passed має збігатися з worst_violation ≤ tolerance")
        return self


def _check_trials(trials: int, seed: int) -> None:
    if trials < 1:
        raise ArityError(f"Кількість випробувань має бути ≥ 1, отримано {trials}")
    if seed < 0:
        raise ArityError(f"seed має бути невід'ємним, отримано {seed}")


def _report(name: str, trials: int, worst: float, tolerance: float,
            seed: Optional[int] = None, details: Optional[Dict[str, float]] = None) -> VerifyReport:
    worst = float(worst)
    return VerifyReport(
        name=name,
        trials=trials,
        worst_violation=worst,
        tolerance=float(tolerance),
        passed=worst <= tolerance,
        seed=seed,
        details=details or {},
    )


# --- матриці -----------------------------------------------------------------------

def _psd_margin(matrix) -> tuple:
    """(λ_min, ‖K‖) для симетричної матриці; ‖K‖ є максимальна сума модулів у рядку."""
    K = np.asarray(matrix, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise InputError(f"Очікується квадратна матриця, отримано форму {K.shape}")
    if not np.all(np.isfinite(K)):
        raise InputError("Матриця містить нескінченні значення")
    asymmetry = float(np.max(np.abs(K - K.T))) if K.size else 0.0
    if asymmetry > ASYMMETRY_TOL * max(1.0, float(np.max(np.abs(K))) if K.size else 1.0):
        raise InputError(f"Матриця несиметрична (відхилення {asymmetry:.3e})")
    if K.size == 0:
        return 0.0, 0.0
    smallest = float(eigvalsh(0.5 * (K + K.T), subset_by_index=[0, 0])[0])
    norm = float(np.max(np.sum(np.abs(K), axis=1)))
    return smallest, norm


def gram_psd_check(matrix, tol: float = 1e-10) -> VerifyReport:
    """Невід'ємна визначеність: λ_min ≥ -tol·‖K‖."""
    smallest, norm = _psd_margin(matrix)
    return _report("gram_psd", 1, max(0.0, -smallest), tol * norm, details={"lambda_min": smallest})


def _relative_psd_violation(matrix) -> float:
    smallest, norm = _psd_margin(matrix)
    return max(0.0, -smallest) / norm if norm > 0 else 0.0


def cnd_check(psi: Union[Callable, Any], points, tol: float = 1e-10) -> VerifyReport:
    """
    γ(x, y) = ψ(‖x - y‖²) умовно від'ємно визначена: матриці e^{-rγ} для кількох r
    та K_γ^w(x, y) = γ(x, w) + γ(w, y) - γ(x, y) - γ(w, w) з w = перша точка
    мають бути невід'ємно визначеними. Порушення нормовані на ‖K‖.
    """
    f = psi.evaluate if hasattr(psi, "evaluate") else psi
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] < 2:
        raise ArityError("Перевірка CND потребує щонайменше двох точок")
    gamma = np.asarray(f(cdist(X, X, metric="sqeuclidean")), dtype=float)

    details = {}
    for r in CND_RATES:
        with np.errstate(over="ignore"):
            matrix = np.exp(-r * gamma)
        # переповнення означає необмежене зростання e^{-rγ}, що несумісне з CND
        details[f"exp_r={r:g}"] = _relative_psd_violation(matrix) if np.all(np.isfinite(matrix)) else math.inf
    shifted = gamma[:, :1] + gamma[:1, :] - gamma - gamma[0, 0]
    details["k_gamma_w"] = _relative_psd_violation(shifted)
    return _report("cnd", len(details), max(details.values()), tol, details=details)


# --- одновимірні функції -------------------------------------------------------------

def _central_difference(f: Callable, t: float, order: int, h: float) -> tuple:
    """(наближення f^{(order)}(t), масштаб Σ C(m, j)|f|/h^m)."""
    nodes = t + (order / 2.0 - np.arange(order + 1)) * h
    values = np.asarray(f(nodes), dtype=float)
    coefficients = np.array([(-1) ** j * math.comb(order, j) for j in range(order + 1)], dtype=float)
    scale = float(np.sum(np.abs(coefficients * values))) / h ** order
    return float(coefficients @ values) / h ** order, scale


def complete_monotone_check(psi: Union[Callable, Any], ell: int, grid: Sequence[float],
                            max_order: int = 4, tol: float = 1e-10) -> VerifyReport:
    """
    Знак (-1)^m ψ^{(m)} ≥ 0 для m = ℓ, …, ℓ + max_order у вузлах сітки.

    Похідні обчислюються як центральні різниці з кроком h = 0.01·t; порушення ділиться на
    масштаб доданків різниці, тому шум округлення лишається на рівні 1e-16.
    Перевірка часткова: сертифікується лише скінченне вікно похідних.
    """
    if not 0 <= max_order <= MAX_DIFFERENCE_ORDER:
        raise ArityError(f"max_order має лежати в [0, {MAX_DIFFERENCE_ORDER}]")
    if ell < 0:
        raise ArityError(f"ℓ має бути ≥ 0, отримано {ell}")
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0) or not np.all(np.isfinite(grid)):
        raise DomainError("Сітка має складатися з додатних скінченних точок")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("Сітка має бути строго зростаючою")
    f = cm_psi(psi, ell) if hasattr(psi, "signed") else psi

    worst = 0.0
    details = {}
    for m in range(ell, ell + max_order + 1):
        order_worst = 0.0
        for t in grid:
            derivative, scale = _central_difference(f, float(t), m, 0.01 * float(t))
            wrong = max(0.0, -((-1) ** m) * derivative)
            if scale > 0:
                order_worst = max(order_worst, wrong / scale)
        details[f"order_{m}"] = order_worst
        worst = max(worst, order_worst)
    return _report("complete_monotone", grid.size * (max_order + 1), worst, tol, details=details)


def frechet_check(ell: int, t: Sequence[float], k: int, tol: float = 1e-10) -> VerifyReport:
    """Σ_{F⊆{1..ℓ}} (-1)^{ℓ-|F|} (Σ_{i∈F} t_i)^k дорівнює 0 при k < ℓ і ℓ!·∏t_i при k = ℓ."""
    t = [float(v) for v in t]
    if len(t) != ell:
        raise ArityError(f"Потрібно ℓ={ell} значень t, отримано {len(t)}")
    if not 0 <= k <= ell:
        raise ArityError(f"Степінь k={k} поза межами [0, {ell}]")
    if any(v <= 0 or not math.isfinite(v) for v in t):
        raise DomainError("Значення t мають бути додатними")
    terms = [
        (-1) ** (ell - size) * math.fsum(t[i] for i in subset) ** k
        for size in range(ell + 1)
        for subset in combinations(range(ell), size)
    ]
    value = math.fsum(terms)
    expected = math.factorial(ell) * math.prod(t) if k == ell else 0.0
    scale = max(abs(expected), math.fsum(abs(term) for term in terms), 1e-300)
    return _report(
        "frechet", 1, abs(value - expected) / scale, tol,
        details={"value": value, "expected": expected},
    )


# --- випадкові міри з M_k --------------------------------------------------------------

def _random_factor(rng: np.random.Generator, d: int, mean_zero: bool) -> DiscreteMeasure:
    atoms = int(rng.integers(2, 4))
    weights = rng.normal(size=atoms)
    if mean_zero:
        weights = weights - weights.mean()
    return from_arrays(SpaceShape((d,)), rng.normal(size=(atoms, d)), weights)


def _random_probability(rng: np.random.Generator, shape: SpaceShape, atoms: int) -> DiscreteMeasure:
    # невеликий набір значень на кожну змінну дає нетривіальні маргінали
    pool = rng.normal(size=(3, shape.total_dim))
    coords = pool[rng.integers(0, 3, size=(atoms, shape.total_dim)), np.arange(shape.total_dim)]
    weights = rng.dirichlet(np.ones(atoms))
    P = from_arrays(shape, coords, weights)
    return from_arrays(shape, P.coords, P.weights / P.total_mass)


def random_mk_measure(rng: np.random.Generator, n: int, k: int, d: int = 1,
                      construction: Optional[int] = None) -> DiscreteMeasure:
    """
    Випадкова міра з M_k на (ℝ^d)^n однією з трьох побудов:
    0: добуток множників, щонайменше k з яких мають нульову масу;
    1: Λ_k^n[P, Q] для випадкових P і Q (або типового Q);
    2: лінійна комбінація мір μ_k^n[x, y].
    """
    order = InteractionOrder(n, k)
    shape = SpaceShape((d,) * n)
    kind = int(rng.integers(0, 3)) if construction is None else construction % 3
    if kind == 0:
        zero_count = int(rng.integers(order.k, n + 1))
        chosen = set(rng.choice(n, size=zero_count, replace=False).tolist())
        return product([_random_factor(rng, d, i in chosen) for i in range(n)])
    if kind == 1:
        P = _random_probability(rng, shape, int(rng.integers(2, 6)))
        Q = _random_probability(rng, shape, int(rng.integers(2, 6))) if rng.random() < 0.5 else None
        return lancaster_general(P, Q, order)
    terms = []
    for _ in range(int(rng.integers(1, 3))):
        x = ProductPoint(tuple(tuple(rng.normal(size=d)) for _ in range(n)))
        y = ProductPoint(tuple(tuple(rng.normal(size=d)) for _ in range(n)))
        terms.append((float(rng.normal()), mu_kn(x, y, order)))
    return linear_combination(terms)


def pdi_random_check(spec: AnySpec, k: int, trials: int, seed: int, d: int = 1,
                     tol: Optional[float] = None, workers: Optional[int] = None) -> VerifyReport:
    """Мінімум (-1)^k ∬ g dμ dμ / (Σ|w|)² по випадкових μ ∈ M_k; trial i використовує seed + i."""
    _check_trials(trials, seed)
    if d < 1:
        raise ArityError(f"Розмірність d має бути ≥ 1, отримано {d}")
    settings = get_settings()
    tol = settings.pdi_tolerance if tol is None else tol
    workers = settings.workers if workers is None else workers

    def trial(i: int) -> float:
        rng = np.random.default_rng(seed + i)
        mu = random_mk_measure(rng, spec.n, k, d, construction=i)
        if len(mu) == 0:
            return 0.0
        energy = quadratic_energy(spec, mu, k)
        return max(0.0, -energy) / mu.total_variation ** 2

    violations = map_indexed(trial, trials, workers)
    worst = max(violations)
    if worst > tol:
        logger.warning("PDI порушено: найгірше відносне значення %.3e (допуск %.1e)", worst, tol)
    return _report("pdi_random", trials, worst, tol, seed=seed)


# --- нерівності ---------------------------------------------------------------------

def _excess(lhs: float, rhs: float) -> float:
    """Відносне перевищення lhs над rhs."""
    return max(0.0, lhs - rhs) / max(1.0, abs(lhs), abs(rhs))


def _basic_radial(r: np.ndarray) -> ProductSpec:
    # g(t) = ∏ (1 - e^{-r_i t_i}) з множником ∏ (1 + r_i)/r_i
    return ProductSpec(parts=[ExpBernstein(rate=float(v)) for v in r],
                       scale=float(np.prod((1.0 + r) / r)))


def _inequality_trial(rng: np.random.Generator) -> Dict[str, float]:
    n = int(rng.integers(2, 7))
    k = int(rng.integers(1, n + 1))
    r = rng.exponential(size=n) + 1e-3
    s = rng.exponential(size=n)
    t = rng.exponential(size=n)
    a = rng.uniform(size=n)
    found: Dict[str, float] = {}

    # функції Бернштейна однієї змінної
    s0, r0, t0 = float(s[0]), float(r[0]), float(t[0])
    value = float(bernstein_normalized(s0, 1.0))
    found["bern1"] = max(_excess(1.0, value), _excess(value, 2.0))
    for rate in (r0, 0.0):
        value = float(bernstein_normalized(rate, t0))
        found["bern1_rt"] = max(found.get("bern1_rt", 0.0),
                                _excess(min(1.0, t0), value), _excess(value, 2.0 * max(1.0, t0)))

    # симетричні многочлени
    pk = lambda v, j=k: float(elem_sym_poly(v, j))
    c = binomial(n, k)
    middle = (-1) ** k * float(h_poly(a, k))
    found["sandwich"] = max(_excess(0.0, pk(1 - a) / c), _excess(pk(1 - a) / c, middle),
                            _excess(middle, pk(1 - a)))
    found["submultiplicative"] = _excess(pk(s * t), pk(s) * pk(t))

    partial = math.fsum(float(elem_sym_poly(r, j)) for j in range(k + 1))
    shifted = pk(1 + r)
    found["shifted_bounds"] = max(_excess(partial, shifted), _excess(shifted, c * partial))
    found["shifted_expansion"] = abs(shifted_ratio_expansion(r, k) - shifted) / max(1.0, shifted)

    F = list(rng.choice(n, size=k, replace=False))
    found["ratio_subset"] = _excess(partial * float(np.prod(r[F])), pk(r) * float(np.prod(1 + r[F])))
    l = int(rng.integers(0, min(k, n - 1) + 1))
    L = list(rng.choice(n, size=l, replace=False))
    rest = np.delete(r, L)
    found["ratio_complement"] = _excess(
        shifted * float(elem_sym_poly(rest, k - l)) * float(np.prod(r[L])),
        c * pk(r) * float(elem_sym_poly(1 + rest, k - l)) * float(np.prod(1 + r[L])),
    )
    found["ratio_squared"] = _excess(pk(r / (1 + r)), c ** 2 * pk(r) / shifted)

    # добуткове ядро (1 - e^{-r_i t_i})(1 + r_i)/r_i
    spec = _basic_radial(r)
    g = lambda v: float(evaluate(spec, np.asarray(v, dtype=float)))
    t1 = rng.exponential(size=n) + 1e-3
    t2 = rng.exponential(size=n) + 1e-3
    found["scaling"] = _excess(g(t1), float(np.prod(np.maximum(1.0, t1 / t2))) * g(t2))
    found["growth"] = _excess(g(t1), g(np.ones(n)) * float(np.prod(1 + t1)))
    mixed = math.fsum(g(np.where(np.array(alpha) == 0, t1, t2)) for alpha in cartesian((0, 1), repeat=n))
    found["subadditive"] = _excess(g(t1 + t2), mixed)
    return found


def inequality_suite(seed: int, trials: int, tol: float = 1e-10) -> VerifyReport:
    """Випадкова перевірка нерівностей для функцій Бернштейна та p_k^n."""
    _check_trials(trials, seed)
    details: Dict[str, float] = {}
    for i in range(trials):
        for name, value in _inequality_trial(np.random.default_rng(seed + i)).items():
            details[name] = max(details.get(name, 0.0), value)
    return _report("inequality_suite", trials, max(details.values()), tol, seed=seed, details=details)


def cm_representation_check(ell: int, trials: int, seed: int, tol: float = 1e-10) -> VerifyReport:
    """
    ψ(t) = Σ_j w_j (e^{-r_j t} - e_ℓ(r_j) ω_ℓ(r_j t)) (1 + r_j)^ℓ / r_j^ℓ з випадковими
    атомами (r_j, w_j) має належати CM_ℓ.
    """
    _check_trials(trials, seed)
    grid = np.geomspace(0.1, 10.0, 8)
    worst = 0.0
    for i in range(trials):
        rng = np.random.default_rng(seed + i)
        rates = rng.exponential(size=3) + 0.05
        weights = rng.uniform(0.1, 1.0, size=3)

        def psi(t, rates=rates, weights=weights):
            t = np.asarray(t, dtype=float)
            total = np.zeros_like(t)
            for rate, w in zip(rates, weights):
                _, e = truncated_exp_pair(ell, float(rate))
                omega, _ = truncated_exp_pair(ell, rate * t)
                total = total + w * (np.exp(-rate * t) - e * omega) * ((1 + rate) / rate) ** ell
            return total

        report = complete_monotone_check(psi, ell, grid, max_order=4, tol=tol)
        worst = max(worst, report.worst_violation)
    return _report("cm_representation", trials, worst, tol, seed=seed)
