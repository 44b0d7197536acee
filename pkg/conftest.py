"""
Спільні фікстури тестів: детермінований генератор і побудова випадкових ймовірностей.
"""
import numpy as np
import pytest

from measures.measures import SpaceShape, from_arrays, product


def _probability(rng: np.random.Generator, dims, atoms: int = 5, pool: int = 3):
    # значення кожної змінної беруться з малого пулу, щоб маргінали мали спільні атоми
    shape = SpaceShape(tuple(dims))
    values = rng.normal(size=(pool, shape.total_dim))
    coords = values[rng.integers(0, pool, size=(atoms, shape.total_dim)), np.arange(shape.total_dim)]
    P = from_arrays(shape, coords, rng.dirichlet(np.ones(atoms)))
    return from_arrays(shape, P.coords, P.weights / P.total_mass)


def _signed_factor(rng: np.random.Generator, d: int = 1, mean_zero: bool = True, atoms: int = 3):
    weights = rng.normal(size=atoms)
    if mean_zero:
        weights = weights - weights.mean()
    return from_arrays(SpaceShape((d,)), rng.normal(size=(atoms, d)), weights)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def make_probability():
    """Фабрика випадкової ймовірності на просторі з розмірностями dims."""
    return _probability


@pytest.fixture
def make_product_probability():
    """Фабрика ймовірності з незалежними змінними."""
    def build(rng, n: int, atoms: int = 3):
        return product([_probability(rng, (1,), atoms=atoms) for _ in range(n)])
    return build


@pytest.fixture
def make_factor():
    """Фабрика одновимірної знакозмінної міри (за замовчуванням з нульовою масою)."""
    return _signed_factor
