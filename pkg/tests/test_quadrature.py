import math

import numpy as np
import pytest
from numpy.polynomial import hermite_e as He

from wick_holder.chaos import ChaosExpansion, ExponentialVector
from wick_holder.errors import CapacityError, DegenerateIntegralError
from wick_holder.quadrature import (
    adaptive_lp_norm,
    exact_order_for_polynomial,
    gauss_hermite_rule,
    gaussian_expectation,
    gaussian_integral_closed_form,
    gaussian_integral_lagrange,
    gaussian_integral_quadrature,
    lagrange_sum,
    lp_norm_quadrature,
    mc_lp_norm,
    tensor_grid,
)


def double_factorial(n):
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def test_low_order_rules():
    r1 = gauss_hermite_rule(1)
    assert list(r1.nodes) == [0.0] and list(r1.weights) == [1.0]
    r2 = gauss_hermite_rule(2)
    np.testing.assert_allclose(r2.nodes, [-1.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(r2.weights, [0.5, 0.5], atol=1e-15)
    assert float(np.dot(r2.weights, r2.nodes**2)) == pytest.approx(1.0, abs=1e-15)
    r10 = gauss_hermite_rule(10)
    assert float(np.dot(r10.weights, r10.nodes**8)) == pytest.approx(105.0, abs=1e-10)


@pytest.mark.parametrize("order", [3, 17, 64, 200])
def test_rule_invariants(order):
    rule = gauss_hermite_rule(order)
    assert abs(rule.weights.sum() - 1.0) <= 1e-13
    assert np.all(rule.weights > 0)
    np.testing.assert_array_equal(rule.nodes, -rule.nodes[::-1])
    for k in range(min(order, 12)):
        # exact up to degree 2 order - 1
        m = float(np.dot(rule.weights, rule.nodes ** (2 * k)))
        assert m == pytest.approx(double_factorial(2 * k - 1), rel=1e-12)


@pytest.mark.parametrize("order", [5, 20, 60])
def test_rule_matches_numpy_hermegauss(order):
    x, w = He.hermegauss(order)
    rule = gauss_hermite_rule(order)
    np.testing.assert_allclose(rule.nodes, x, atol=1e-12)
    np.testing.assert_allclose(rule.weights, w / math.sqrt(2 * math.pi), rtol=1e-10, atol=1e-300)


@pytest.mark.parametrize("order", [0, 201, 2.5])
def test_rule_order_range(order):
    with pytest.raises(ValueError):
        gauss_hermite_rule(order)


def test_tensor_grid_budget():
    pts, w = tensor_grid(gauss_hermite_rule(4), 3)
    assert pts.shape == (64, 3) and w.sum() == pytest.approx(1.0)
    with pytest.raises(CapacityError):
        tensor_grid(gauss_hermite_rule(200), 4)


def test_lp_norm_examples():
    rule = gauss_hermite_rule(40)
    one = lambda x: np.ones(len(x))
    for p in (1.0, 2.5, 7.0):
        assert lp_norm_quadrature(one, p, rule, 2) == pytest.approx(1.0, abs=1e-14)
    xi = ExponentialVector((0.6, 0.8))
    assert lp_norm_quadrature(xi, 2, rule, 2) == pytest.approx(math.exp(0.5), abs=1e-8)
    h2 = ChaosExpansion.basis((2,))
    assert lp_norm_quadrature(h2, 2, gauss_hermite_rule(3), 1) == pytest.approx(math.sqrt(2), abs=1e-12)


def test_even_power_exact_for_polynomials():
    rng = np.random.default_rng(0)
    for p in (2, 4, 6):
        for deg in (1, 3, 5):
            phi = ChaosExpansion(2, {(i, j): float(rng.normal()) for i in range(deg + 1) for j in range(deg + 1 - i)})
            order = exact_order_for_polynomial(p, deg)
            val = lp_norm_quadrature(phi, p, gauss_hermite_rule(order), 2)
            ref = lp_norm_quadrature(phi, p, gauss_hermite_rule(order + 15), 2)
            assert val == pytest.approx(ref, rel=1e-12)
    phi = ChaosExpansion(1, {(1,): 1.0, (3,): 0.5})
    assert lp_norm_quadrature(phi, 2, gauss_hermite_rule(4), 1) == pytest.approx(phi.l2_norm(), rel=1e-13)


def test_adaptive_reports_convergence():
    xi = ExponentialVector((0.5, -0.5))
    res = adaptive_lp_norm(xi, 3.0, 2)
    assert res.converged and res.achieved_rtol < 1e-9
    assert res.value == pytest.approx(xi.lp_norm(3.0), rel=1e-9)


def test_mc_examples():
    est, se = mc_lp_norm(lambda x: np.full(len(x), -2.5), 3.0, 1000, seed=1)
    assert (est, se) == (2.5, 0.0)
    xi = ExponentialVector((1.0,))
    est, se = mc_lp_norm(xi, 2.0, 10**6, seed=7)
    assert abs(est - math.exp(0.5)) <= 3 * se
    h1 = ChaosExpansion.basis((1,))
    est, se = mc_lp_norm(h1, 2.0, 10**5, seed=3)
    assert abs(est - 1.0) <= 3 * se


def test_mc_reproducible_and_thread_invariant():
    f = ExponentialVector((0.3, 0.4))
    a = mc_lp_norm(f, 2.5, 300_000, seed=11, d=2, jobs=1)
    b = mc_lp_norm(f, 2.5, 300_000, seed=11, d=2, jobs=8)
    c = mc_lp_norm(f, 2.5, 300_000, seed=12, d=2, jobs=1)
    assert a == b
    assert a != c


def test_mc_guards():
    with pytest.raises(ValueError):
        mc_lp_norm(lambda x: x[:, 0], 2.0, 10, seed=0)


def test_gaussian_expectation_moment():
    rule = gauss_hermite_rule(10)
    assert gaussian_expectation(lambda x: x[:, 0] ** 2 * x[:, 1] ** 4, rule, 2) == pytest.approx(3.0, rel=1e-13)


@pytest.mark.parametrize(
    "a, b, expected",
    [((1.0,), (0.0,), 1.0), ((1.0, 0.0), (0.0, 1.0), math.exp(-0.5)), ((1.0, 1.0), (1.0, -1.0), math.exp(-1) / math.sqrt(2))],
)
def test_closed_form_integral_examples(a, b, expected):
    assert gaussian_integral_closed_form(a, b) == pytest.approx(expected, rel=1e-15)
    assert gaussian_integral_lagrange(a, b) == pytest.approx(expected, rel=1e-15)
    assert gaussian_integral_quadrature(a, b) == pytest.approx(expected, rel=1e-12)


def test_lagrange_identity():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(1, 6))
        a, b = rng.uniform(-2, 2, n), rng.uniform(-2, 2, n)
        cs = np.dot(a, a) * np.dot(b, b) - np.dot(a, b) ** 2
        assert lagrange_sum(a, b) == pytest.approx(cs, abs=1e-12 * np.dot(a, a) * np.dot(b, b))


def test_degenerate_integral():
    with pytest.raises(DegenerateIntegralError):
        gaussian_integral_closed_form([0.0, 0.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        gaussian_integral_closed_form([1.0], [1.0, 2.0])
