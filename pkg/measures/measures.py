"""
Дискретні знакозмінні міри на добутку евклідових просторів ℝ^{d_1} × … × ℝ^{d_n}.

Міра зберігається як матриця координат атомів (рядок = конкатенація блоків)
і вектор ваг. Рядки впорядковані лексикографічно, дублікати злиті, нульові
ваги відкинуті, тому однакові міри мають однакове представлення.
"""
import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from common.errors import ArityError, DomainError, MarginalIndexError, MassError, ShapeError

logger = logging.getLogger(__name__)

# Найбільше n, для якого is_member_Mk перебирає підмножини змінних
MAX_MEMBERSHIP_N = 16
MEMBERSHIP_TOL = 1e-12
PROBABILITY_TOL = 1e-9


@dataclass(frozen=True)
class SpaceShape:
    """Розмірності блоків (d_1, …, d_n)."""

    dims: Tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) < 1:
            raise ShapeError("Простір має містити хоча б одну змінну")
        if any(d < 1 for d in dims):
            raise ShapeError(f"Розмірності блоків мають бути ≥ 1, отримано {dims}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def scalar(cls, n: int) -> "SpaceShape":
        """n одновимірних змінних."""
        return cls((1,) * n)

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    @property
    def offsets(self) -> Tuple[int, ...]:
        return tuple(np.concatenate([[0], np.cumsum(self.dims)]).tolist())

    def columns(self, indices: Sequence[int]) -> List[int]:
        """Номери стовпців матриці координат для вказаних блоків."""
        offsets = self.offsets
        return [c for i in indices for c in range(offsets[i], offsets[i + 1])]

    def sub(self, indices: Sequence[int]) -> "SpaceShape":
        return SpaceShape(tuple(self.dims[i] for i in indices))

    def concat(self, other: "SpaceShape") -> "SpaceShape":
        return SpaceShape(self.dims + other.dims)


def _canonical(value: float) -> float:
    # -0.0 + 0.0 == +0.0
    return float(value) + 0.0


@dataclass(frozen=True)
class ProductPoint:
    """Точка x = (x_1, …, x_n) добутку просторів; блок i має довжину d_i."""

    blocks: Tuple[Tuple[float, ...], ...]

    def __post_init__(self):
        blocks = tuple(tuple(_canonical(v) for v in np.atleast_1d(block)) for block in self.blocks)
        if any(not np.all(np.isfinite(block)) for block in blocks):
            raise DomainError("Координати точки мають бути скінченними")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def of(cls, *blocks) -> "ProductPoint":
        """ProductPoint.of(1.0, (2.0, 3.0)): скаляри стають одновимірними блоками."""
        return cls(tuple(blocks))

    @property
    def n(self) -> int:
        return len(self.blocks)

    @property
    def shape(self) -> SpaceShape:
        return SpaceShape(tuple(len(block) for block in self.blocks))

    def flat(self) -> Tuple[float, ...]:
        return tuple(v for block in self.blocks for v in block)

    def conforms(self, shape: SpaceShape) -> bool:
        return tuple(len(block) for block in self.blocks) == shape.dims


def _split_row(row: np.ndarray, shape: SpaceShape) -> ProductPoint:
    offsets = shape.offsets
    return ProductPoint(tuple(tuple(row[offsets[i]:offsets[i + 1]].tolist()) for i in range(shape.n)))


class DiscreteMeasure:
    """Скінченна зважена сума точкових мір на добутку просторів. Незмінна після створення."""

    def __init__(self, shape: SpaceShape, coords: np.ndarray, weights: np.ndarray):
        # Використовуйте from_atoms / from_arrays: тут дані вже агреговані
        self._shape = shape
        self._coords = coords
        self._weights = weights
        self._coords.flags.writeable = False
        self._weights.flags.writeable = False

    @property
    def shape(self) -> SpaceShape:
        return self._shape

    @property
    def coords(self) -> np.ndarray:
        return self._coords

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    def __len__(self) -> int:
        return int(self._weights.shape[0])

    def __repr__(self) -> str:
        return f"DiscreteMeasure(dims={self._shape.dims}, atoms={len(self)}, mass={self.total_mass:.6g})"

    def block(self, i: int) -> np.ndarray:
        """Координати всіх атомів у блоці i, масив (A, d_i)."""
        offsets = self._shape.offsets
        return self._coords[:, offsets[i]:offsets[i + 1]]

    @property
    def points(self) -> List[ProductPoint]:
        return [_split_row(row, self._shape) for row in self._coords]

    @property
    def atoms(self) -> Dict[ProductPoint, float]:
        return dict(zip(self.points, self._weights.tolist()))

    def weight_of(self, point: ProductPoint) -> float:
        if not point.conforms(self._shape):
            raise ShapeError("Точка не відповідає формі простору міри")
        if len(self) == 0:
            return 0.0
        matches = np.all(self._coords == np.asarray(point.flat()), axis=1)
        return float(self._weights[matches].sum())

    @property
    def total_mass(self) -> float:
        return float(np.sum(self._weights))

    @property
    def total_variation(self) -> float:
        return float(np.sum(np.abs(self._weights)))

    @property
    def max_abs_weight(self) -> float:
        return float(np.max(np.abs(self._weights))) if len(self) else 0.0

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.max_abs_weight <= tol

    def chop(self, tol: float) -> "DiscreteMeasure":
        """Міра без атомів з |w| ≤ tol."""
        keep = np.abs(self._weights) > tol
        return DiscreteMeasure(self._shape, self._coords[keep].copy(), self._weights[keep].copy())


def _aggregate(shape: SpaceShape, coords: np.ndarray, weights: np.ndarray) -> DiscreteMeasure:
    coords = np.asarray(coords, dtype=float).reshape(-1, shape.total_dim) + 0.0
    weights = np.asarray(weights, dtype=float).reshape(-1)
    if coords.shape[0] != weights.shape[0]:
        raise ShapeError("Кількість атомів і ваг не збігається")
    if not np.all(np.isfinite(coords)):
        raise DomainError("Координати атомів мають бути скінченними")
    if not np.all(np.isfinite(weights)):
        raise DomainError("Ваги атомів мають бути скінченними")
    if coords.shape[0] == 0:
        return DiscreteMeasure(shape, np.zeros((0, shape.total_dim)), np.zeros(0))
    unique, inverse = np.unique(coords, axis=0, return_inverse=True)
    summed = np.zeros(unique.shape[0])
    np.add.at(summed, inverse.reshape(-1), weights)
    keep = summed != 0.0
    return DiscreteMeasure(shape, unique[keep], summed[keep])


def from_arrays(shape: SpaceShape, coords, weights) -> DiscreteMeasure:
    """Міра з матриці координат (A, Σd_i) і вектора ваг (A,)."""
    return _aggregate(shape, coords, weights)


def from_atoms(shape: SpaceShape, pairs: Iterable[Tuple[ProductPoint, float]]) -> DiscreteMeasure:
    """Міра з пар (точка, вага): дублікати сумуються, нульові ваги відкидаються."""
    pairs = list(pairs)
    for point, _ in pairs:
        if not point.conforms(shape):
            raise ShapeError(f"Точка з блоками {point.shape.dims} не відповідає формі {shape.dims}")
    coords = np.array([point.flat() for point, _ in pairs], dtype=float).reshape(-1, shape.total_dim)
    weights = np.array([w for _, w in pairs], dtype=float)
    return _aggregate(shape, coords, weights)


def dirac(point: ProductPoint, weight: float = 1.0) -> DiscreteMeasure:
    return from_atoms(point.shape, [(point, weight)])


def empty(shape: SpaceShape) -> DiscreteMeasure:
    return _aggregate(shape, np.zeros((0, shape.total_dim)), np.zeros(0))


def empirical(shape: SpaceShape, rows) -> DiscreteMeasure:
    """Емпірична ймовірність: вага 1/m на кожному з m рядків вибірки."""
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2 or rows.shape[1] != shape.total_dim:
        raise ShapeError(f"Очікується матриця з {shape.total_dim} стовпцями")
    if rows.shape[0] == 0:
        raise ArityError("Вибірка порожня")
    return _aggregate(shape, rows, np.full(rows.shape[0], 1.0 / rows.shape[0]))


def _require_same_shape(*measures: DiscreteMeasure) -> None:
    shapes = {mu.shape for mu in measures}
    if len(shapes) > 1:
        raise ShapeError(f"Міри задані на різних просторах: {[s.dims for s in shapes]}")


def linear_combination(terms: Sequence[Tuple[float, DiscreteMeasure]]) -> DiscreteMeasure:
    """Σ c_i μ_i зі скороченням однакових атомів."""
    if not terms:
        raise ArityError("Порожня лінійна комбінація")
    _require_same_shape(*(mu for _, mu in terms))
    shape = terms[0][1].shape
    coords = np.concatenate([mu.coords for _, mu in terms], axis=0)
    weights = np.concatenate([float(c) * mu.weights for c, mu in terms])
    return _aggregate(shape, coords, weights)


def combine(a: float, mu: DiscreteMeasure, b: float, nu: DiscreteMeasure) -> DiscreteMeasure:
    """aμ + bν."""
    return linear_combination([(a, mu), (b, nu)])


def _check_indices(n: int, indices: Sequence[int]) -> Tuple[int, ...]:
    indices = tuple(int(i) for i in indices)
    if not indices:
        raise MarginalIndexError("Набір змінних для маргіналізації порожній")
    if any(i < 0 or i >= n for i in indices):
        raise MarginalIndexError(f"Індекси {indices} виходять за межі 0..{n - 1}")
    if len(set(indices)) != len(indices):
        raise MarginalIndexError(f"Індекси {indices} повторюються")
    return indices


def marginal(mu: DiscreteMeasure, keep: Sequence[int]) -> DiscreteMeasure:
    """Маргінал на блоках keep (у вказаному порядку)."""
    keep = _check_indices(mu.shape.n, keep)
    shape = mu.shape.sub(keep)
    return _aggregate(shape, mu.coords[:, mu.shape.columns(keep)], mu.weights)


def product(factors: Sequence[DiscreteMeasure]) -> DiscreteMeasure:
    """Добуток мір; простір є конкатенацією просторів множників."""
    if not factors:
        raise ArityError("Добуток потребує хоча б одного множника")
    shape = factors[0].shape
    coords = factors[0].coords
    weights = factors[0].weights
    for factor in factors[1:]:
        shape = shape.concat(factor.shape)
        a, b = coords.shape[0], factor.coords.shape[0]
        coords = np.concatenate(
            [np.repeat(coords, b, axis=0), np.tile(factor.coords, (a, 1))], axis=1
        )
        weights = np.outer(weights, factor.weights).reshape(-1)
    return _aggregate(shape, coords, weights)


def assemble(shape: SpaceShape, parts: Sequence[Tuple[Sequence[int], DiscreteMeasure]]) -> DiscreteMeasure:
    """Добуток мір на диз'юнктних наборах змінних, зібраний у вихідному порядку змінних."""
    order: List[int] = [i for indices, _ in parts for i in indices]
    if sorted(order) != list(range(shape.n)):
        raise MarginalIndexError(f"Набори змінних {order} не утворюють розбиття 0..{shape.n - 1}")
    for indices, mu in parts:
        if mu.shape != shape.sub(indices):
            raise ShapeError(f"Міра на {mu.shape.dims} не відповідає блокам {tuple(indices)}")
    joined = product([mu for _, mu in parts])
    # стовпці joined йдуть у порядку order; повертаємо природний порядок змінних
    joined_shape = shape.sub(order)
    position = {var: slot for slot, var in enumerate(order)}
    columns = joined_shape.columns([position[i] for i in range(shape.n)])
    return _aggregate(shape, joined.coords[:, columns], joined.weights)


def is_member_Mk(mu: DiscreteMeasure, k: int, tol: float = MEMBERSHIP_TOL) -> bool:
    """Чи належить μ до M_k: повна маса та маргінали на ≤ k-1 змінних нульові."""
    n = mu.shape.n
    if k < 0 or k > n:
        raise ArityError(f"Порядок k={k} поза межами [0, {n}]")
    if n > MAX_MEMBERSHIP_N:
        raise ArityError(f"Перевірка належності підтримується для n ≤ {MAX_MEMBERSHIP_N}")
    if k == 0:
        return True
    if abs(mu.total_mass) > tol:
        return False
    for size in range(1, k):
        for subset in combinations(range(n), size):
            if not marginal(mu, subset).is_zero(tol):
                logger.debug("Маргінал на %s ненульовий", subset)
                return False
    return True


def hahn_jordan(mu: DiscreteMeasure) -> Tuple[DiscreteMeasure, DiscreteMeasure]:
    """(μ⁺, μ⁻) з μ = μ⁺ - μ⁻ і диз'юнктними носіями."""
    positive = mu.weights > 0
    negative = mu.weights < 0
    return (
        DiscreteMeasure(mu.shape, mu.coords[positive].copy(), mu.weights[positive].copy()),
        DiscreteMeasure(mu.shape, mu.coords[negative].copy(), -mu.weights[negative].copy()),
    )


def integrate(mu: DiscreteMeasure, f: Callable[[ProductPoint], float]) -> float:
    """∫ f dμ."""
    values = np.array([f(point) for point in mu.points], dtype=float)
    return float(np.dot(values, mu.weights)) if len(mu) else 0.0


def require_probability(P: DiscreteMeasure, tol: float = PROBABILITY_TOL, name: Optional[str] = None) -> None:
    """MassError, якщо P не ймовірність."""
    label = name or "P"
    if len(P) == 0 or abs(P.total_mass - 1.0) > tol:
        raise MassError(f"{label} має повну масу {P.total_mass:.12g}, очікується 1")
    if np.any(P.weights < 0):
        raise MassError(f"{label} має від'ємні ваги")
