import math
import threading

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import roots_jacobi

from kfrac.errors import InvalidExponentError, MaxDepthError, NonFiniteError
from kfrac.quadrature import adaptive_oracle, graded_rule, integrate, jacobi_rule
from oracles import beta_fn

exponents = st.floats(min_value=-0.9, max_value=2.0)


def test_one_point_midpoint():
    r = jacobi_rule(1, 0, 0)
    assert r.nodes == pytest.approx([0.5], abs=1e-15)
    assert r.weights == pytest.approx([1.0], abs=1e-15)


def test_two_point_legendre():
    r = jacobi_rule(2, 0, 0)
    h = 1.0 / (2.0 * math.sqrt(3.0))
    assert r.nodes == pytest.approx([0.5 - h, 0.5 + h], abs=1e-15)
    assert r.weights == pytest.approx([0.5, 0.5], abs=1e-15)


@pytest.mark.parametrize("n", [1, 5, 30])
def test_weight_sum_is_beta(n):
    r = jacobi_rule(n, 0.5, -0.5)
    assert r.weights.sum() == pytest.approx(math.pi / 2, rel=1e-12)


@pytest.mark.parametrize("n, p, q", [(7, 0.3, -0.7), (20, -0.5, 1.5), (64, 1.2, 0.0), (64, -0.6, 0.4)])
def test_matches_scipy(n, p, q):
    x, w = roots_jacobi(n, q, p)  # scipy weight (1-x)**alpha (1+x)**beta on [-1, 1]
    r = jacobi_rule(n, p, q)
    assert r.nodes == pytest.approx((1 + x) / 2, abs=1e-13)
    # scipy's weights carry ~1e-11 relative error of their own
    assert r.weights == pytest.approx(w / 2 ** (p + q + 1), rel=1e-10)


def test_strong_singularities_by_moments():
    # scipy itself drifts by ~1e-10 here, so check exact Beta moments instead
    p, q = -0.95, -0.9
    r = jacobi_rule(64, p, q)
    for j in (0, 1, 5, 40, 100, 127):
        assert np.dot(r.weights, r.nodes**j) == pytest.approx(beta_fn(p + j + 1, q + 1), rel=1e-12)


def test_integrate_examples():
    assert integrate(jacobi_rule(4, 0, 0), lambda s: s) == pytest.approx(0.5, rel=1e-14)
    assert integrate(jacobi_rule(4, -0.5, 0), lambda s: 1.0) == pytest.approx(2.0, rel=1e-13)
    assert integrate(jacobi_rule(8, 0.3, -0.7), lambda s: s**2) == pytest.approx(beta_fn(3.3, 0.3), rel=1e-12)


@given(st.integers(2, 12), exponents, exponents, st.integers(0, 2**32 - 1))
def test_polynomial_exactness(n, p, q, seed):
    rng = np.random.default_rng(seed)
    deg = int(rng.integers(0, 2 * n))
    coef = rng.uniform(0.0, 1.0, deg + 1)  # positive coefficients keep the reference well conditioned
    exact = math.fsum(c * beta_fn(p + j + 1, q + 1) for j, c in enumerate(coef))
    got = integrate(jacobi_rule(n, p, q), lambda s: np.polyval(coef[::-1], s))
    assert got == pytest.approx(exact, rel=1e-10)


@given(st.lists(st.tuples(exponents, exponents), min_size=1, max_size=1))
def test_rule_invariants(pq):
    (p, q), = pq
    r = jacobi_rule(16, p, q)
    assert np.all(np.diff(r.nodes) > 0)
    assert r.nodes[0] > 0 and r.nodes[-1] < 1
    assert np.all(r.weights > 0)
    assert r.weights.sum() == pytest.approx(beta_fn(p + 1, q + 1), rel=1e-12)


def test_convergence_mostly_monotone():
    rng = np.random.default_rng(11)
    good = 0
    cases = 60
    for _ in range(cases):
        p, q = rng.uniform(-0.9, 2.0, 2)
        a, w = rng.uniform(-2, 2), rng.uniform(5, 40)
        g = lambda s: np.exp(a * s) * np.cos(w * s)
        vals = [integrate(jacobi_rule(n, p, q), g) for n in (8, 16, 32, 64, 128)]
        deltas = [abs(u - v) for u, v in zip(vals, vals[1:])]
        # once a difference sits at rounding level of int |g| the sequence has converged
        floor = 1e-14 * integrate(jacobi_rule(128, p, q), lambda s: np.abs(g(s)))
        good += all(d2 <= d1 or d2 <= floor for d1, d2 in zip(deltas, deltas[1:]))
    assert good >= 0.95 * cases


@pytest.mark.parametrize("p, q, expected", [(0, 0, 1.0), (-0.5, 0, 2.0)])
def test_oracle_trivial(p, q, expected):
    assert adaptive_oracle(lambda s: np.ones_like(s), p, q, 1e-12) == pytest.approx(expected, rel=1e-12)


def test_oracle_cross_validation():
    ref = adaptive_oracle(np.exp, 0.25, -0.4, 1e-11)
    assert integrate(jacobi_rule(64, 0.25, -0.4), np.exp) == pytest.approx(ref, rel=1e-9)


@given(exponents, exponents, st.floats(-3, 3), st.floats(-3, 3))
def test_oracle_agrees_with_rule(p, q, a, b):
    g = lambda s: np.exp(a * s) / (1.0 + b * b * s * s)
    ref = adaptive_oracle(g, p, q, 1e-11)
    assert integrate(jacobi_rule(64, p, q), g) == pytest.approx(ref, rel=1e-8)


def test_errors():
    with pytest.raises(InvalidExponentError):
        jacobi_rule(4, -1.0, 0.0)
    with pytest.raises(InvalidExponentError):
        jacobi_rule(4, 0.0, -1.5)
    with pytest.raises(NonFiniteError):
        integrate(jacobi_rule(4, 0, 0), lambda s: np.where(s > 0.5, np.nan, s))
    with pytest.raises(MaxDepthError):
        # a jump at an irrational point can never be bisected onto
        c = 1.0 / math.pi
        adaptive_oracle(lambda s: np.where(s < c, 0.0, 1.0), 0.0, 0.0, 1e-300)


def test_cache_returns_same_rule_across_threads():
    out = []

    def build():
        out.append(jacobi_rule(37, 0.123, 0.456))

    threads = [threading.Thread(target=build) for _ in range(8)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert all(r is out[0] for r in out)


@pytest.mark.parametrize("lam, q", [(-0.9, 0.0), (0.0, -0.6), (2.5, 1.5), (-0.3, -0.95)])
def test_graded_rule_power_moments(lam, q):
    rule = graded_rule(q, lam + 1.0, 64)
    got = np.exp(rule.log_w + lam * rule.log_s).sum()
    assert got == pytest.approx(beta_fn(lam + 1, q + 1), rel=1e-12)


def test_graded_rule_log_moment():
    # int_0^1 s**lam log(s) ds = -1/(lam+1)**2
    lam = -0.7
    rule = graded_rule(0.0, lam + 1.0, 64)
    got = np.sum(np.exp(rule.log_w + lam * rule.log_s) * rule.log_s)
    assert got == pytest.approx(-1.0 / (lam + 1) ** 2, rel=1e-12)
