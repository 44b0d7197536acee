"""
Тести енергетичної статистики, статистик взаємодії за вибіркою та перестановочних p-значень.
"""
import math

import numpy as np
import pytest
from pydantic import ValidationError

import stats.statistics as statistics
from common.errors import ArityError, InputError, ShapeError
from common.workers import map_indexed
from kernels.families import ExpBernstein, OrderKSpec, PowerBernstein, ProductSpec, SumCMSpec
from kernels.kernels import border_correct, evaluate
from measures.interactions import InteractionOrder, lancaster_general
from measures.measures import ProductPoint, SpaceShape, dirac, empty, from_atoms, product
from stats.statistics import (
    EnergyReport,
    Sample,
    interaction_statistic,
    lancaster_energy_expanded,
    permutation_pvalue,
    quadratic_energy,
    quadratic_form_energy,
)
from stats.verify import random_mk_measure

GAUSSIAN_2 = ProductSpec(parts=[ExpBernstein(rate=1.0), ExpBernstein(rate=1.0)])
GAUSSIAN_3 = ProductSpec(parts=[ExpBernstein(rate=1.0), ExpBernstein(rate=0.5), ExpBernstein(rate=2.0)])


def dipole(a=0.0, b=1.0):
    return from_atoms(SpaceShape.scalar(1), [(ProductPoint.of(a), 1.0), (ProductPoint.of(b), -1.0)])


def random_orderk(rng):
    eta = [{"r": (rng.uniform(0.2, 3.0, size=3)).tolist(), "w": float(rng.uniform(0.5, 1.5))} for _ in range(2)]
    return OrderKSpec(n=3, k=2, eta=eta)


def coupled_sample(rng, m):
    x = rng.normal(size=m)
    return Sample(SpaceShape.scalar(2), np.column_stack([x, x]))


def test_energy_worked_example():
    mu = product([dipole(), dipole()])
    value = quadratic_energy(GAUSSIAN_2, mu, 2)
    assert value == pytest.approx(4.0 * (1.0 - math.exp(-1.0)) ** 2, abs=1e-9)
    assert value == pytest.approx(1.59854, abs=1e-5)


def test_energy_trivial_cases():
    assert quadratic_energy(GAUSSIAN_2, empty(SpaceShape.scalar(2)), 2) == 0.0
    assert quadratic_energy(GAUSSIAN_2, dirac(ProductPoint.of(0.3, -1.0)), 2) == 0.0


def test_energy_checks_kernel():
    mu = product([dipole(), dipole()])
    with pytest.raises(ArityError):
        quadratic_energy(GAUSSIAN_2, mu, 1)
    with pytest.raises(ShapeError):
        quadratic_energy(GAUSSIAN_3, mu, 3)


def test_chunked_energy_matches(rng, make_factor, monkeypatch):
    mu = product([make_factor(rng, atoms=4) for _ in range(3)])
    g = lambda T: evaluate(GAUSSIAN_3, T)
    whole = quadratic_form_energy(g, mu, 3)
    monkeypatch.setattr(statistics, "CHUNK_ELEMENTS", 10)
    assert quadratic_form_energy(g, mu, 3) == pytest.approx(whole, abs=1e-12 * mu.total_variation ** 2)


def test_border_correction_keeps_energy(rng, make_factor, make_probability):
    spec = SumCMSpec(n=3, ell=2, psi={"type": "power", "ell": 2, "a": 1.5})
    raw = lambda T: spec.psi.signed(np.sum(T, axis=-1), spec.ell)
    arbitrary = lambda T: np.exp(-np.sum(T, axis=-1)) * (1.0 + T[..., 0])
    for _ in range(20):
        mu = product([make_factor(rng, mean_zero=i < 2) for i in range(3)])
        scale = mu.total_variation ** 2
        corrected = quadratic_energy(spec, mu, 2)
        assert quadratic_form_energy(raw, mu, 2) == pytest.approx(corrected, abs=1e-9 * scale * 100.0)
        direct = quadratic_form_energy(arbitrary, mu, 2)
        fixed = quadratic_form_energy(lambda T: border_correct(arbitrary, 2, T), mu, 2)
        assert fixed == pytest.approx(direct, abs=1e-10 * scale)

    P = make_probability(rng, (1, 1, 1), atoms=5)
    lam = lancaster_general(P, None, InteractionOrder(3, 2))
    assert quadratic_form_energy(raw, lam, 2) == pytest.approx(quadratic_energy(spec, lam, 2), abs=1e-9)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_expanded_energy_matches_materialized(rng, make_probability, n):
    parts = [ExpBernstein(rate=1.0), PowerBernstein(a=0.5), ExpBernstein(rate=2.0), ExpBernstein(rate=0.3)][:n]
    spec = ProductSpec(parts=parts, scale=1.5)
    P = make_probability(rng, (1,) * (n - 1) + (2,), atoms=6)
    g = lambda T: evaluate(spec, T)
    for k in range(1, n + 1):
        expected = quadratic_form_energy(g, lancaster_general(P, None, InteractionOrder(n, k)), k)
        assert lancaster_energy_expanded(spec, P, k) == pytest.approx(expected, rel=1e-9, abs=1e-12)


def test_expanded_requires_separable_kernel(make_probability):
    rng = np.random.default_rng(3)
    P = make_probability(rng, (1, 1, 1))
    spec = SumCMSpec(n=3, ell=2, psi={"type": "power", "ell": 2, "a": 1.5})
    with pytest.raises(InputError):
        lancaster_energy_expanded(spec, P, 2)


def orderk_with_cross(rng):
    cross = [{"subset": [0, 2], "parts": [{"type": "exp", "rate": 0.7}, {"type": "power", "a": 0.5}], "w": 0.8}]
    return OrderKSpec(n=3, k=2, eta=random_orderk(rng).eta, cross=cross)


@pytest.mark.parametrize("build", ["eta", "cross", "sparse"])
def test_expanded_orderk_matches_materialized(rng, make_probability, build):
    if build == "eta":
        spec = random_orderk(rng)
    elif build == "cross":
        spec = orderk_with_cross(rng)
    else:
        spec = OrderKSpec(n=4, k=2, eta=[{"r": [1.0, 0.0, 2.0, 0.5], "w": 1.3}])
    P = make_probability(rng, (1,) * (spec.n - 1) + (2,), atoms=7)
    expected = quadratic_energy(spec, lancaster_general(P, None, InteractionOrder(spec.n, 2)), 2)
    assert lancaster_energy_expanded(spec, P, 2) == pytest.approx(expected, rel=1e-9, abs=1e-12)


def test_orderk_statistic_paths_agree(rng):
    rows = rng.normal(size=(14, 3))
    rows[:, 1] = rows[:, 0] + 0.2 * rows[:, 1]
    sample = Sample(SpaceShape.scalar(3), rows)
    spec = orderk_with_cross(rng)
    materialized = interaction_statistic(sample, 2, spec, expansion_threshold=10 ** 9)
    expanded = interaction_statistic(sample, 2, spec, expansion_threshold=0)
    assert materialized.method == "materialized"
    assert expanded.method == "expanded"
    assert expanded.statistic == pytest.approx(materialized.statistic, rel=1e-9)
    assert expanded.statistic > 0


def test_orderk_energy_strictly_positive(rng):
    spec = random_orderk(rng)
    checked = 0
    for _ in range(100):
        mu = random_mk_measure(rng, 3, 2)
        if len(mu) == 0:
            continue
        assert quadratic_energy(spec, mu, 2) > 0
        checked += 1
    assert checked > 0


def test_statistic_paths_agree(rng):
    rows = rng.normal(size=(12, 3))
    rows[:, 2] = rows[:, 0] * rows[:, 1] + 0.1 * rows[:, 2]
    sample = Sample(SpaceShape.scalar(3), rows)
    materialized = interaction_statistic(sample, 3, GAUSSIAN_3, expansion_threshold=10 ** 9)
    expanded = interaction_statistic(sample, 3, GAUSSIAN_3, expansion_threshold=0)
    assert materialized.method == "materialized"
    assert expanded.method == "expanded"
    assert expanded.statistic == pytest.approx(materialized.statistic, rel=1e-9)
    assert expanded.atoms == 12


def test_statistic_examples(rng):
    rows = rng.normal(size=(10, 3))
    rows[:, 2] = 1.0
    rows[:, 1] = rows[:, 0] ** 2
    constant = interaction_statistic(Sample(SpaceShape.scalar(3), rows), 3, GAUSSIAN_3, expansion_threshold=10 ** 9)
    assert abs(constant.statistic) <= 1e-12

    single = interaction_statistic(Sample(SpaceShape.scalar(3), rows[:1]), 3, GAUSSIAN_3)
    assert single.statistic == 0.0

    binary = Sample(SpaceShape.scalar(2), [[0.0, 0.0], [1.0, 1.0], [0.0, 0.0], [1.0, 1.0]])
    report = interaction_statistic(binary, 2, GAUSSIAN_2)
    # Λ = (1/4)(δ_0 - δ_1)×(δ_0 - δ_1), енергія = 4(1 - e^{-1})² / 16
    assert report.statistic == pytest.approx((1.0 - math.exp(-1.0)) ** 2 / 4.0, rel=1e-12)
    assert report.statistic > 0
    assert report.order == 2 and report.mode == "lancaster"
    assert report.kernel["family"] == "product"
    assert report.p_value is None


def test_streitberg_mode(rng):
    rows = rng.normal(size=(6, 3))
    sample = Sample(SpaceShape.scalar(3), rows)
    streit = interaction_statistic(sample, 3, GAUSSIAN_3, mode="streitberg")
    assert streit.mode == "streitberg"
    assert streit.statistic >= -1e-12
    pair = Sample(SpaceShape.scalar(2), rows[:, :2])
    assert interaction_statistic(pair, 2, GAUSSIAN_2, mode="streitberg").statistic == pytest.approx(
        interaction_statistic(pair, 2, GAUSSIAN_2, mode="lancaster_k").statistic, rel=1e-12
    )
    spec = random_orderk(rng)
    with pytest.raises(ArityError):
        interaction_statistic(sample, 2, spec, mode="streitberg")
    with pytest.raises(InputError):
        interaction_statistic(sample, 3, GAUSSIAN_3, mode="marginal")
    with pytest.raises(ArityError):
        interaction_statistic(sample, 2, GAUSSIAN_3)


def test_statistic_invariant_under_row_shuffle(rng):
    rows = rng.normal(size=(9, 3))
    spec = random_orderk(rng)
    sample = Sample(SpaceShape.scalar(3), rows)
    shuffled = Sample(SpaceShape.scalar(3), rows[rng.permutation(9)])
    assert interaction_statistic(sample, 2, spec).statistic == interaction_statistic(shuffled, 2, spec).statistic


def test_orderk_discriminates(rng):
    for _ in range(50):
        spec = random_orderk(rng)
        dependent = Sample(SpaceShape.scalar(3), rng.normal(size=(4, 3)))
        assert interaction_statistic(dependent, 2, spec).statistic > 1e-6

        values = rng.normal(size=(3, 2))
        grid = np.array([[values[0, a], values[1, b], values[2, c]]
                         for a in range(2) for b in range(2) for c in range(2)])
        independent = Sample(SpaceShape.scalar(3), grid)
        assert abs(interaction_statistic(independent, 2, spec).statistic) < 1e-10


def test_sample_validation(rng):
    with pytest.raises(ShapeError):
        Sample(SpaceShape((1, 2)), rng.normal(size=(4, 2)))
    with pytest.raises(ArityError):
        Sample(SpaceShape((1, 1)), np.zeros((0, 2)))
    with pytest.raises(InputError):
        Sample(SpaceShape((1, 1)), [[0.0, math.nan]])


def test_sample_permutation_keeps_blocks(rng):
    rows = np.arange(20, dtype=float).reshape(5, 4)
    sample = Sample(SpaceShape((1, 2, 1)), rows)
    permuted = sample.permuted(rng)
    assert sorted(permuted.rows[:, 0].tolist()) == sorted(rows[:, 0].tolist())
    # двовимірний блок переставляється цілими рядками
    pairs = {tuple(row) for row in permuted.rows[:, 1:3].tolist()}
    assert pairs == {tuple(row) for row in rows[:, 1:3].tolist()}
    assert sample.rows.tolist() == rows.tolist()


def test_permutation_deterministic(rng):
    sample = Sample(SpaceShape.scalar(2), rng.normal(size=(15, 2)))
    first = permutation_pvalue(sample, 2, GAUSSIAN_2, 49, seed=7, workers=1, expansion_threshold=0)
    second = permutation_pvalue(sample, 2, GAUSSIAN_2, 49, seed=7, workers=4, expansion_threshold=0)
    assert first.p_value == second.p_value
    assert first.seed == 7 and first.permutations == 49
    assert 1.0 / 50 <= first.p_value <= 1.0


def test_permutation_detects_coupling(rng):
    sample = coupled_sample(rng, 50)
    report = permutation_pvalue(sample, 2, GAUSSIAN_2, 199, seed=3, expansion_threshold=0)
    assert report.p_value <= 0.05


@pytest.mark.slow
def test_permutation_calibrated_under_independence():
    p_values = []
    for seed in range(20):
        local = np.random.default_rng(1000 + seed)
        sample = Sample(SpaceShape.scalar(2), local.normal(size=(30, 2)))
        report = permutation_pvalue(sample, 2, GAUSSIAN_2, 99, seed=seed, expansion_threshold=0)
        p_values.append(report.p_value)
    assert 0.3 <= float(np.mean(p_values)) <= 0.7


def test_permutation_arguments(rng):
    sample = Sample(SpaceShape.scalar(2), rng.normal(size=(5, 2)))
    with pytest.raises(ArityError):
        permutation_pvalue(sample, 2, GAUSSIAN_2, 0, seed=1)
    with pytest.raises(ArityError):
        permutation_pvalue(Sample(SpaceShape.scalar(2), [[0.0, 1.0]]), 2, GAUSSIAN_2, 10, seed=1)
    with pytest.raises(ArityError, match="seed"):
        permutation_pvalue(sample, 2, GAUSSIAN_2, 5, seed=-1)


def test_energy_report_validation():
    with pytest.raises(ValidationError):
        EnergyReport(statistic=0.0, order=2, mode="lancaster", kernel={}, atoms=1, method="materialized", p_value=1.5)
    with pytest.raises(ValidationError):
        EnergyReport(statistic=0.0, order=2, mode="lancaster", kernel={}, atoms=1, method="guess")


def test_map_indexed_order():
    squares = map_indexed(lambda i: i * i, 10, workers=3)
    assert squares == [i * i for i in range(10)]
    assert map_indexed(lambda i: i, 0, workers=3) == []
    assert map_indexed(lambda i: -i, 3, workers=1) == [0, -1, -2]


def test_map_indexed_raises_task_error():
    def task(i):
        if i == 4:
            raise ArityError(f"задача {i}")
        return i

    with pytest.raises(ArityError, match="задача 4"):
        map_indexed(task, 8, workers=3)
    with pytest.raises(ArityError):
        map_indexed(task, 8, workers=1)
