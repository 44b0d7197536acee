"""
Тести сімейств ядер: схема JSON, обчислення, поправка на межі, матриці Грама.
"""
import json
import math
from itertools import combinations
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from algebra.symfun import binomial
from common.errors import DomainError, KernelSpecError, ShapeError
from kernels.families import (
    ExpBernstein,
    ExpCM,
    LogShiftBernstein,
    OrderKSpec,
    PowerBernstein,
    ProductSpec,
    SumCMSpec,
    cm_psi,
    kernel_descriptor,
    parse_kernel_spec,
)
from kernels.kernels import (
    bernstein_normalized,
    block_sqdist,
    border_correct,
    eval_kernel,
    evaluate,
    factor_parts,
    gram,
    separable_terms,
    truncated_exp_pair,
)
from measures.measures import ProductPoint, SpaceShape

SPECS = Path(__file__).parent / "specs"
VALID_SPECS = ["gaussian_product.json", "gaussian_product_3.json", "orderk_3_2.json", "sumcm_power.json"]


def load_spec(name):
    with open(SPECS / name, encoding="utf-8") as f:
        return parse_kernel_spec(json.load(f))


def restricted(t, subset):
    mask = np.zeros(len(t))
    mask[list(subset)] = 1.0
    return np.asarray(t, dtype=float) * mask


def test_shipped_specs_parse():
    families = [load_spec(name).family for name in VALID_SPECS]
    assert families == ["product", "product", "orderk", "sumcm"]
    broken = load_spec("broken_negative.json")
    assert broken.scale == -1.0


def test_descriptor_round_trip():
    for name in VALID_SPECS:
        spec = load_spec(name)
        assert parse_kernel_spec(kernel_descriptor(spec)) == spec
        json.dumps(kernel_descriptor(spec))


@pytest.mark.parametrize("document", [
    {"family": "product", "parts": []},
    {"family": "product", "parts": [{"type": "exp", "rate": -1.0}]},
    {"family": "product", "parts": [{"type": "power", "a": 1.5}]},
    {"family": "product", "parts": [{"type": "gauss"}]},
    {"family": "product", "parts": [{"type": "exp", "rate": 1.0}], "extra": 1},
    {"family": "orderk", "n": 3, "k": 3, "eta": [{"r": [1, 1, 1], "w": 1}]},
    {"family": "orderk", "n": 3, "k": 2},
    {"family": "orderk", "n": 3, "k": 2, "eta": [{"r": [1, 1], "w": 1}]},
    {"family": "orderk", "n": 3, "k": 2, "eta": [{"r": [1, 1, 1], "w": 0}]},
    {"family": "orderk", "n": 3, "k": 2, "eta": [{"r": [1, 1, 0], "w": 1}]},
    {"family": "orderk", "n": 3, "k": 1, "eta": [{"r": [0, 0, 2.5], "w": 1}]},
    {"family": "orderk", "n": 3, "k": 2, "eta": [{"r": [1, -1, 1], "w": 1}]},
    {"family": "orderk", "n": 3, "k": 2, "eta": [{"r": [1, float("inf"), 1], "w": 1}]},
    {"family": "orderk", "n": 3, "k": 2, "cross": [{"subset": [0, 3], "parts": [{"type": "exp", "rate": 1}] * 2}]},
    {"family": "orderk", "n": 3, "k": 2, "cross": [{"subset": [0, 0], "parts": [{"type": "exp", "rate": 1}] * 2}]},
    {"family": "orderk", "n": 3, "k": 2, "cross": [{"subset": [0], "parts": [{"type": "exp", "rate": 1}]}]},
    {"family": "sumcm", "n": 2, "ell": 3, "psi": {"type": "exp", "r": 1.0}},
    {"family": "sumcm", "n": 3, "ell": 2, "psi": {"type": "power", "ell": 2, "a": 2.5}},
    {"family": "sumcm", "n": 3, "ell": 2, "psi": {"type": "power", "ell": 1, "a": 0.5}},
    {"family": "sumcm", "n": 3, "ell": 1, "psi": {"type": "log", "ell": 1}},
    {"family": "unknown"},
    "product",
])
def test_invalid_documents(document):
    with pytest.raises(KernelSpecError):
        parse_kernel_spec(document)


def test_bernstein_parts():
    t = np.array([0.0, 0.5, 2.0])
    assert ExpBernstein(rate=2.0).evaluate(t) == pytest.approx(1.0 - np.exp(-2.0 * t))
    assert PowerBernstein(a=0.5).evaluate(t) == pytest.approx(np.sqrt(t))
    assert LogShiftBernstein(c=2.0).evaluate(t) == pytest.approx(np.log1p(t / 2.0))


def test_product_examples():
    spec = load_spec("gaussian_product.json")
    assert eval_kernel(spec, [0.0, 0.0]) == 0.0
    assert eval_kernel(spec, [1.0, 4.0]) == pytest.approx((1 - math.exp(-1)) * (1 - math.exp(-4)))
    scaled = ProductSpec(parts=spec.parts, scale=3.0)
    assert eval_kernel(scaled, [1.0, 4.0]) == pytest.approx(3.0 * eval_kernel(spec, [1.0, 4.0]))


def test_orderk_example():
    spec = OrderKSpec(n=3, k=2, eta=[{"r": [1.0, 1.0, 1.0], "w": 1.0}])
    ln2 = math.log(2.0)
    assert eval_kernel(spec, [ln2, ln2, ln2]) == pytest.approx(2.5, rel=1e-12)


def test_orderk_degenerate_atom():
    with pytest.raises(ValidationError):
        OrderKSpec(n=3, k=2, eta=[{"r": [1.0, 1.0, 0.0], "w": 1.0}])
    with pytest.raises(KernelSpecError, match="додатних координат"):
        parse_kernel_spec({"family": "orderk", "n": 3, "k": 2, "eta": [{"r": [1.0, 1.0, 0.0], "w": 1.0}]})
    spec = OrderKSpec(n=4, k=2, eta=[{"r": [1.0, 0.0, 2.0, 0.5], "w": 1.0}])
    assert math.isfinite(eval_kernel(spec, [1.0, 1.0, 1.0, 1.0]))


def test_sumcm_example():
    spec = SumCMSpec(n=2, ell=2, psi={"type": "power", "ell": 2, "a": 1.5})
    assert eval_kernel(spec, [1.0, 1.0]) == pytest.approx(2.0 ** 1.5 - 2.0, rel=1e-12)
    assert eval_kernel(spec, [1.0, 1.0]) == pytest.approx(0.8284, abs=1e-4)


def test_sumcm_exp_and_log():
    spec = SumCMSpec(n=1, ell=1, psi=ExpCM(r=2.0))
    assert eval_kernel(spec, [0.7]) == pytest.approx(1.0 - math.exp(-1.4))
    log_spec = SumCMSpec(n=2, ell=2, psi={"type": "log", "ell": 2})
    t1, t2 = 0.4, 1.3
    s = t1 + t2
    expected = s * math.log(s) - t1 * math.log(t1) - t2 * math.log(t2)
    assert eval_kernel(log_spec, [t1, t2]) == pytest.approx(expected, rel=1e-12)
    assert eval_kernel(log_spec, [0.0, 1.3]) == pytest.approx(0.0, abs=1e-15)


def test_cm_psi_sign():
    psi = ExpCM(r=1.0)
    for ell in (0, 1, 2, 3):
        assert cm_psi(psi, ell)(0.5) == pytest.approx(math.exp(-0.5))


def test_eval_kernel_argument_checks():
    spec = load_spec("gaussian_product.json")
    with pytest.raises(DomainError):
        eval_kernel(spec, [-1.0, 0.0])
    with pytest.raises(DomainError):
        eval_kernel(spec, [math.nan, 0.0])
    with pytest.raises(ShapeError):
        eval_kernel(spec, [1.0, 2.0, 3.0])
    with pytest.raises(ShapeError):
        eval_kernel(spec, [[1.0, 2.0], [3.0, 4.0]])


def test_border_correct_examples(rng):
    t = rng.exponential(size=(5, 1))
    g = lambda T: np.sin(T[..., 0]) + 2.0
    assert border_correct(g, 1, t) == pytest.approx(np.sin(t[:, 0]))

    linear = lambda T: T[..., 0] + T[..., 1]
    assert border_correct(linear, 2, rng.exponential(size=(4, 2))) == pytest.approx(np.zeros(4), abs=1e-14)


def test_border_correct_is_identity_on_vanishing_kernels(rng):
    spec = load_spec("gaussian_product_3.json")
    T = rng.exponential(size=(20, 3))
    assert border_correct(lambda X: evaluate(spec, X), 3, T) == pytest.approx(evaluate(spec, T), abs=1e-14)
    orderk = load_spec("orderk_3_2.json")
    assert border_correct(lambda X: evaluate(orderk, X), 2, T) == pytest.approx(evaluate(orderk, T), abs=1e-12)


@pytest.mark.parametrize("name", VALID_SPECS)
def test_boundary_vanishing(name, rng):
    spec = load_spec(name)
    for _ in range(50):
        t = rng.exponential(size=spec.n)
        size = int(rng.integers(0, spec.order))
        keep = rng.choice(spec.n, size=size, replace=False)
        assert abs(eval_kernel(spec, restricted(t, keep))) <= 1e-12


@pytest.mark.parametrize("name", VALID_SPECS)
def test_nonnegative_and_monotone(name, rng):
    spec = load_spec(name)
    for _ in range(50):
        t = rng.exponential(size=spec.n)
        previous = eval_kernel(spec, t)
        assert previous >= -1e-12
        for _ in range(5):
            t = t.copy()
            t[int(rng.integers(0, spec.n))] += float(rng.exponential())
            current = eval_kernel(spec, t)
            assert current >= previous - 1e-12 * max(1.0, abs(previous))
            previous = current


def test_growth_sandwich_orderk(rng):
    for _ in range(200):
        n = int(rng.integers(2, 6))
        k = int(rng.integers(1, n))
        eta = [{"r": (rng.exponential(size=n) + 0.05).tolist(), "w": float(rng.uniform(0.1, 2.0))}
               for _ in range(int(rng.integers(1, 3)))]
        subset = sorted(rng.choice(n, size=k, replace=False).tolist())
        cross = [{"subset": subset, "parts": [{"type": "exp", "rate": 1.0}] * k, "w": 0.5}]
        spec = OrderKSpec(n=n, k=k, eta=eta, cross=cross if rng.random() < 0.5 else [])
        t = rng.exponential(size=n)
        value = eval_kernel(spec, t)
        parts = math.fsum(eval_kernel(spec, restricted(t, F)) for F in combinations(range(n), k))
        slack = 1e-10 * max(1.0, parts)
        assert parts / binomial(n, k) <= value + slack
        assert value <= parts + slack


def test_product_subadditive_and_scaling(rng):
    for _ in range(100):
        n = int(rng.integers(1, 5))
        spec = ProductSpec(parts=[ExpBernstein(rate=float(r)) for r in rng.exponential(size=n) + 0.01])
        t = rng.exponential(size=n)
        s = rng.exponential(size=n)
        mixed = math.fsum(
            eval_kernel(spec, np.where(np.array(alpha) == 0, t, s))
            for alpha in np.ndindex(*(2,) * n)
        )
        assert eval_kernel(spec, t + s) <= mixed * (1 + 1e-12)
        assert eval_kernel(spec, t) <= eval_kernel(spec, np.ones(n)) * float(np.prod(1.0 + t)) * (1 + 1e-12)


@pytest.mark.parametrize("ell, s, omega, e", [
    (1, 0.7, 1.0, math.exp(-0.7)),
    (2, 1.0, 0.0, 2.0 * math.exp(-1.0)),
    (3, 0.0, 1.0, 1.0),
])
def test_truncated_exp_pair(ell, s, omega, e):
    got_omega, got_e = truncated_exp_pair(ell, s)
    assert isinstance(got_omega, float)
    assert got_omega == pytest.approx(omega, abs=1e-15)
    assert got_e == pytest.approx(e, rel=1e-14)


def test_truncated_exp_pair_vectorized():
    omega, e = truncated_exp_pair(2, np.array([0.0, 1.0, 2.0]))
    assert omega == pytest.approx([1.0, 0.0, -1.0])
    assert e == pytest.approx([1.0, 2.0 * math.exp(-1.0), 3.0 * math.exp(-2.0)])


def test_bernstein_normalized():
    assert float(bernstein_normalized(0.0, 2.5)) == 2.5
    assert float(bernstein_normalized(1.0, 1.0)) == pytest.approx(2.0 * (1 - math.exp(-1)))
    value = float(bernstein_normalized(1.0, 1.0))
    assert 1.0 <= value <= 2.0


def test_block_sqdist():
    shape = SpaceShape((1, 2))
    X = np.array([[0.0, 0.0, 0.0], [1.0, 3.0, 4.0]])
    D = block_sqdist(shape, X, X)
    assert D.shape == (2, 2, 2)
    assert D[0, 1].tolist() == [1.0, 25.0]
    assert D[1, 1].tolist() == [0.0, 0.0]


def test_gram_examples():
    spec = load_spec("gaussian_product.json")
    x = ProductPoint.of(0.0, 0.0)
    y = ProductPoint.of(1.0, 2.0)
    assert gram(spec, [x]).tolist() == [[0.0]]
    K = gram(spec, [x, y, x])
    expected = (1 - math.exp(-1.0)) * (1 - math.exp(-4.0))
    assert K[0, 1] == pytest.approx(expected)
    assert np.array_equal(K, K.T)
    assert np.array_equal(K[0], K[2])
    assert np.all(np.diag(K) == 0.0)
    with pytest.raises(ShapeError):
        gram(spec, [x, ProductPoint.of(0.0, (1.0, 2.0))])
    with pytest.raises(ShapeError):
        gram(spec, [ProductPoint.of(0.0, 1.0, 2.0)])
    with pytest.raises(ShapeError):
        gram(spec, [])


def test_factor_parts():
    assert len(factor_parts(load_spec("gaussian_product_3.json"))) == 3
    assert [p.type for p in factor_parts(load_spec("orderk_3_2.json"))] == ["exp", "power"]
    assert factor_parts(load_spec("sumcm_power.json")) == []


@pytest.mark.parametrize("spec", [
    ProductSpec(parts=[ExpBernstein(rate=1.0), PowerBernstein(a=0.5)], scale=2.0),
    OrderKSpec(n=4, k=2, eta=[{"r": [1.0, 0.0, 2.0, 0.5], "w": 1.3}, {"r": [0.3, 0.9, 1.1, 2.0], "w": 0.4}],
               cross=[{"subset": [1, 3], "parts": [{"type": "exp", "rate": 0.7}, {"type": "logshift", "c": 1.0}]}]),
])
def test_separable_terms_reproduce_kernel(rng, spec):
    T = rng.exponential(size=(20, spec.n))
    total = np.zeros(20)
    for coefficient, factors in separable_terms(spec):
        value = np.full(20, coefficient)
        for i, f in enumerate(factors):
            if f is not None:
                value = value * f(T[:, i])
        total = total + value
    np.testing.assert_allclose(total, evaluate(spec, T), rtol=1e-10, atol=1e-12)


def test_separable_terms_rejects_sumcm():
    spec = SumCMSpec(n=3, ell=2, psi={"type": "power", "ell": 2, "a": 1.5})
    with pytest.raises(TypeError):
        separable_terms(spec)
