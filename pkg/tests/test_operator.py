import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from kfrac.errors import ParameterDomainError
from kfrac.functions import X, Const, Exp, Pow, Scale, parse, random_monotone_pair, random_weight
from kfrac.operator import (
    FLAG_DEGENERATE,
    FLAG_UNBOUNDED,
    KernelSingularityWarning,
    OperatorInstance,
    OperatorParams,
    default_quad_n,
    kernel_F,
    kfrac_integral,
    monomial_image,
    rl_generalized_integral,
)
from kfrac.rng import SplitMix64
from kfrac.special_functions import gamma
from oracles import mp_operator, rel_err, tau_form_operator

PLAIN = OperatorParams(alpha=1.0, beta=-1.0, eta=-0.5, mu=0.0, k=0.0)


@st.composite
def valid_params(draw, bounded=None):
    beta = draw(st.floats(-2.0, 0.9))
    mu = draw(st.floats(-0.95, 2.0))
    k = draw(st.floats(0.0, 3.0))
    alpha = max(0.0, -beta - mu) + draw(st.floats(0.05, 3.0))
    eta = (beta - 1.0) * draw(st.floats(0.02, 0.98))
    p = OperatorParams(alpha, beta, eta, mu, k)
    if bounded is not None:
        assume((p.excess > 0.05) == bounded)
    return p


def sampled_params(rng):
    beta = rng.uniform(-2.0, 0.9)
    mu = 2.0 - 3.0 * rng.random()
    k = rng.uniform(0.0, 3.0)
    alpha = max(0.0, -beta - mu) + 3.0 - 3.0 * rng.random()
    eta = rng.uniform_open(beta - 1.0, 0.0)
    return OperatorParams(alpha, beta, eta, mu, k)


# ---------------------------------------------------------------- params


def test_domain_messages():
    with pytest.raises(ParameterDomainError, match=r"alpha > max\{0,-beta-mu\} violated"):
        OperatorParams(0.5, -0.7, -0.5, -0.1).validate()
    with pytest.raises(ParameterDomainError, match="beta < 1 violated"):
        OperatorParams(0.5, 1.0, -0.5, 0.0).validate()
    with pytest.raises(ParameterDomainError, match="mu > -1 violated"):
        OperatorParams(2.0, 0.0, -0.5, -1.0).validate()
    with pytest.raises(ParameterDomainError, match="beta - 1 < eta < 0 violated"):
        OperatorParams(1.0, 0.0, 0.0, 0.0).validate()
    with pytest.raises(ParameterDomainError, match="k >= 0 violated"):
        OperatorParams(1.0, 0.0, -0.5, 0.0, -0.1).validate()


def test_reduction_boundary_is_admitted():
    # alpha = -beta - mu is where the operator becomes Riemann-Liouville
    assert PLAIN.is_valid
    assert not OperatorParams(0.0, 0.0, -0.5, 0.0).is_valid


def test_params_round_trip():
    p = OperatorParams(0.7, -0.2, -0.4, 0.3, 1.5)
    assert OperatorParams.from_dict(p.as_dict()) == p


def test_flags():
    assert OperatorInstance(PLAIN, 1.0).flags == ()
    unbounded = OperatorParams(1.0, 0.2, -0.1, 0.5)
    assert FLAG_UNBOUNDED in OperatorInstance(unbounded, 1.0).flags
    degenerate = OperatorParams(1.0, -0.2, -0.9, 0.3)  # c - a - b = -1
    assert FLAG_DEGENERATE in OperatorInstance(degenerate, 1.0).flags


def test_quad_n_env(monkeypatch):
    monkeypatch.setenv("KFRAC_QUAD_N", "32")
    assert default_quad_n() == 32
    assert OperatorInstance(PLAIN, 1.0).n == 32
    monkeypatch.setenv("KFRAC_QUAD_N", "zero")
    with pytest.raises(ParameterDomainError):
        default_quad_n()


def test_bad_t():
    with pytest.raises(ParameterDomainError):
        OperatorInstance(PLAIN, 0.0)


# ---------------------------------------------------------------- kernel


def test_kernel_trivial_case():
    assert kernel_F(1.0, 0.5, PLAIN) == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("tau", [0.05, 0.3, 0.77, 1.4])
def test_kernel_reduces_to_rl_kernel(tau):
    p = OperatorParams(0.5, -0.5, -0.3, 0.0, 1.0)
    t, a, k = 1.5, 0.5, 1.0
    rl = (k + 1) ** (1 - a) * (t ** (k + 1) - tau ** (k + 1)) ** (a - 1) / gamma(a)
    assert kernel_F(t, tau, p) == pytest.approx(rl, rel=1e-13)


def test_kernel_matches_mpmath():
    p = OperatorParams(0.8, -0.3, -0.4, 0.5, 1.0)
    t, tau = 2.0, 0.37
    A, B, E, M, K = (mp.mpf(v) for v in (0.8, -0.3, -0.4, 0.5, 1.0))
    T, U = mp.mpf(t), mp.mpf(tau)
    ref = ((K + 1) ** (M + B + 1) * T ** ((K + 1) * (-A - B - 2 * M)) / mp.gamma(A)
           * U ** ((K + 1) * M) * (T ** (K + 1) - U ** (K + 1)) ** (A - 1)
           * mp.hyp2f1(A + B + M, -E, A, 1 - (U / T) ** (K + 1)))
    assert kernel_F(t, tau, p) == pytest.approx(float(ref), rel=1e-12)


def test_kernel_positive_on_random_params():
    rng = SplitMix64(2024)
    u = np.logspace(-11, 0, 52)[1:-1]  # log-spaced, away from the endpoint neighborhoods
    for _ in range(100):
        p = sampled_params(rng)
        t = rng.uniform(0.5, 3.0)
        taus = np.concatenate([t * u[:25], t * (1.0 - u[:25])])
        assert all(kernel_F(t, float(tau), p) > 0.0 for tau in taus)


def test_kernel_warns_near_endpoint():
    with pytest.warns(KernelSingularityWarning):
        kernel_F(1.0, 1e-13, PLAIN)
    with pytest.raises(ParameterDomainError):
        kernel_F(1.0, 1.0, PLAIN)


# ---------------------------------------------------------------- integrals


def test_constant_is_plain_length():
    assert kfrac_integral(Const(1.0), OperatorInstance(PLAIN, 2.0)) == pytest.approx(2.0, rel=1e-14)


def test_constant_under_rl_parameters():
    p = OperatorParams(0.5, -0.5, -0.25, 0.0, 0.0)
    got = kfrac_integral(Const(1.0), OperatorInstance(p, 1.0))
    assert got == pytest.approx(1.0 / gamma(1.5), rel=1e-13)


@pytest.mark.parametrize("text, t", [("(pow x 2)", 1.0), ("(+ 1 (* 3 x) (pow x 5))", 2.5), ("(pow x 11)", 0.8)])
def test_plain_integration_of_polynomials(text, t):
    f = parse(text)
    got = kfrac_integral(f, OperatorInstance(PLAIN, t))
    coeffs = {"(pow x 2)": {2: 1}, "(+ 1 (* 3 x) (pow x 5))": {0: 1, 1: 3, 5: 1}, "(pow x 11)": {11: 1}}[text]
    exact = sum(c * t ** (j + 1) / (j + 1) for j, c in coeffs.items())
    assert got == pytest.approx(exact, rel=1e-11)


def test_rl_examples():
    assert rl_generalized_integral(X, 1.0, 1.0, 0.0) == pytest.approx(0.5, rel=1e-14)
    assert rl_generalized_integral(Const(1.0), 1.0, 0.5, 1.0) == pytest.approx(0.797884561, rel=1e-9)
    assert rl_generalized_integral(Const(1.0), 1.0, 0.5, 1.0) == pytest.approx(2**-0.5 / gamma(1.5), rel=1e-14)


def test_rl_errors():
    for bad in ({"alpha": 0.0}, {"k": -1.0}, {"x": 0.0}):
        kw = {"x": 1.0, "alpha": 0.5, "k": 0.0, **bad}
        with pytest.raises(ParameterDomainError):
            rl_generalized_integral(Const(1.0), kw["x"], kw["alpha"], kw["k"])


def _mp_callable(e):
    """The same expression evaluated in mpmath (for the handful used below)."""
    return lambda tau: mp.mpf(float(e(float(tau))))


@pytest.mark.parametrize("params, t", [
    (OperatorParams(0.8, -0.6, -0.1, 0.2, 0.5), 1.7),
    (OperatorParams(2.5, -1.5, -0.9, -0.5, 2.0), 0.9),
    (OperatorParams(0.6, 0.5, -0.05, -0.9, 0.0), 2.2),
])
def test_substituted_form_matches_tau_form(params, t):
    assert params.excess > 0
    inst = OperatorInstance(params, t)
    for f in (np.exp, lambda x: 1.0 + x * x):
        assert inst.integrate(f) == pytest.approx(tau_form_operator(params, t, f), rel=1e-10)


@pytest.mark.parametrize("params, t", [
    (OperatorParams(0.8, -0.3, -0.4, 0.5, 1.0), 2.0),    # unbounded 2F1
    (OperatorParams(1.0, -0.2, -0.9, 0.3, 0.3), 1.3),    # degenerate c - a - b = -1
    (OperatorParams(0.2, 0.8, -0.05, 1.9, 2.7), 0.6),    # strongly unbounded, small alpha
    (OperatorParams(2.9, -1.9, -2.5, -0.95, 0.0), 2.9),  # mu near -1
])
def test_matches_mpmath_reference(params, t):
    f = lambda x: mp.exp(x) / (1 + x)
    got = OperatorInstance(params, t).integrate(lambda x: np.exp(x) / (1 + x))
    tol = 1e-8 if FLAG_DEGENERATE in OperatorInstance(params, t).flags else 1e-10
    assert got == pytest.approx(mp_operator(params, t, f), rel=tol)


def test_monomial_image_confirmed_by_tau_form():
    # the closed form was derived by hand; confirm it against direct tau-form integration
    rng = SplitMix64(5)
    checked = 0
    while checked < 12:
        p = sampled_params(rng)
        if p.excess <= 0.1 or p.mu < -0.8:
            continue
        t = rng.uniform(0.5, 2.0)
        sigma = rng.uniform(0.0, 3.0)
        ref = tau_form_operator(p, t, lambda x: x ** ((p.k + 1) * sigma), tol=1e-12)
        assert monomial_image(p, t, sigma) == pytest.approx(ref, rel=1e-8)
        checked += 1


def test_monomial_image_against_quadrature():
    rng = SplitMix64(99)
    for _ in range(100):
        p = sampled_params(rng)
        t = rng.uniform(0.5, 3.0)
        sigma = rng.uniform(0.0, 3.0)
        inst = OperatorInstance(p, t)
        got = inst.integrate(Pow(X, (p.k + 1) * sigma))
        assert rel_err(got, monomial_image(p, t, sigma)) <= 1e-7


def test_far_nodes_use_log_tau():
    # decay 1 + eta - beta ~ 0.004: much of the mass sits where tau < 1e-308
    p = OperatorParams(1.8119558805673712, 0.0011799121611653085, -0.9944116085123229,
                       1.927480188578827, 2.2006784128313264)
    t, sigma = 0.6930922959318224, 0.001572349089298708
    inst = OperatorInstance(p, t)
    assert inst.nodes.min() == 0.0
    got = inst.integrate(Pow(X, (p.k + 1) * sigma))
    assert got == pytest.approx(monomial_image(p, t, sigma), rel=1e-12)


def test_monomial_image_domain():
    with pytest.raises(ParameterDomainError):
        monomial_image(PLAIN, 1.0, -0.5)


def test_rl_reduction_identity():
    rng = SplitMix64(314)
    for i in range(50):
        alpha = rng.uniform(0.05, 3.0)
        p = OperatorParams(alpha, -alpha, rng.uniform_open(-alpha - 1.0, 0.0), 0.0, rng.uniform(0.0, 3.0))
        t = rng.uniform(0.5, 3.0)
        f, _ = random_monotone_pair(rng.next_u64(), "same", t_max=t)
        a = kfrac_integral(f, OperatorInstance(p, t))
        b = rl_generalized_integral(f, t, alpha, p.k)
        assert abs(a - b) <= 1e-9 * max(1.0, abs(b))


@given(valid_params(), st.floats(0.5, 3.0), st.integers(0, 2**64 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_linearity(p, t, seed, a, b):
    f, g = random_monotone_pair(seed, "same", t_max=t)
    inst = OperatorInstance(p, t)
    lhs = inst.integrate(a * f + b * g)
    rhs = a * inst.integrate(f) + b * inst.integrate(g)
    scale = abs(a) * abs(inst.integrate(f)) + abs(b) * abs(inst.integrate(g))
    assert abs(lhs - rhs) <= 1e-11 * max(scale, 1e-300)


@given(valid_params(), st.floats(0.5, 3.0), st.integers(0, 2**64 - 1))
def test_positivity_and_monotonicity(p, t, seed):
    inst = OperatorInstance(p, t)
    f = random_weight(seed)
    g = f + random_weight(seed ^ 0x5555)
    If, Ig = inst.integrate(f), inst.integrate(g)
    assert If >= -1e-12 * abs(If)
    assert If <= Ig + 1e-12 * abs(Ig)


@given(valid_params(), st.floats(0.5, 3.0), st.integers(0, 2**64 - 1))
def test_refinement_saturates(p, t, seed):
    f, g = random_monotone_pair(seed, "opposite", t_max=t)
    inst = OperatorInstance(p, t)
    fine = inst.refined()
    assert fine.n == 2 * inst.n
    e = f * g
    a, b = inst.integrate(e), fine.integrate(e)
    assert abs(a - b) <= 1e-9 * abs(b)


def test_refined_is_cached():
    inst = OperatorInstance(PLAIN, 1.0)
    assert inst.refined() is inst.refined()


def test_nodes_lie_in_interval():
    p = OperatorParams(0.8, -0.3, -0.4, 0.5, 1.0)
    inst = OperatorInstance(p, 2.0)
    assert np.all(inst.nodes > 0.0) and np.all(inst.nodes < 2.0)
    assert np.all(np.isfinite(inst.weights)) and np.all(inst.weights >= 0.0)
