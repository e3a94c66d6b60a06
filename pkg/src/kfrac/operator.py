"""The generalized k-fractional integral, its kernel, and the generalized
Riemann-Liouville integral.

With s = (tau/t)**(k+1) the operator becomes

    (k+1)**(mu+beta) t**((k+1)(-beta-mu)) / Gamma(alpha)
        * int_0^1 s**mu (1-s)**(alpha-1) 2F1(alpha+beta+mu, -eta; alpha; 1-s) f(t s**(1/(k+1))) ds

and the hypergeometric factor is split near s = 0 into pieces carrying
s**0 and s**(eta-beta-mu), so the whole integrand is a sum of algebraic
powers times analytic functions.  ``graded_rule`` integrates that form.
"""
from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NonConvergenceError,
    NonFiniteError,
    ParameterConditioningError,
    ParameterDomainError,
)
from .functions import Expr
from .quadrature import GradedRule, graded_rule
from .special_functions import (
    gamma,
    hyp2f1_one_minus_terms,
    hyp2f1_series,
    is_degenerate,
    rgamma,
)

DEFAULT_QUAD_N = 64
ENDPOINT_TOL = 1e-12

FLAG_UNBOUNDED = "hyp2f1-unbounded"
FLAG_DEGENERATE = "hyp2f1-degenerate"


def default_quad_n() -> int:
    raw = os.environ.get("KFRAC_QUAD_N")
    if raw is None or raw == "":
        return DEFAULT_QUAD_N
    try:
        n = int(raw)
    except ValueError:
        raise ParameterDomainError(f"KFRAC_QUAD_N must be an integer, got {raw!r}") from None
    if n < 1:
        raise ParameterDomainError(f"KFRAC_QUAD_N must be positive, got {n}")
    return n


class KernelSingularityWarning(UserWarning):
    """Kernel evaluated within 1e-12*t of a singular endpoint."""


@dataclass(frozen=True)
class OperatorParams:
    alpha: float
    beta: float
    eta: float
    mu: float
    k: float = 0.0

    def violations(self) -> list[str]:
        out = []
        if not self.k >= 0.0:
            out.append("k >= 0")
        # the boundary alpha = -beta-mu (2F1 identically 1) is admitted: it is
        # where the operator reduces to the Riemann-Liouville integral
        if not (self.alpha > 0.0 and self.alpha >= -self.beta - self.mu):
            out.append("alpha > max{0,-beta-mu}")
        if not self.beta < 1.0:
            out.append("beta < 1")
        if not self.mu > -1.0:
            out.append("mu > -1")
        if not self.beta - 1.0 < self.eta < 0.0:
            out.append("beta - 1 < eta < 0")
        return out

    def validate(self) -> "OperatorParams":
        bad = self.violations()
        if bad:
            raise ParameterDomainError("; ".join(f"{c} violated" for c in bad))
        return self

    @property
    def is_valid(self) -> bool:
        return not self.violations()

    @property
    def hyp_a(self) -> float:
        return self.alpha + self.beta + self.mu

    @property
    def hyp_b(self) -> float:
        return -self.eta

    @property
    def excess(self) -> float:
        """c - a - b of the kernel's 2F1; negative means unbounded as tau -> 0."""
        return self.eta - self.beta - self.mu

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "eta": self.eta, "mu": self.mu, "k": self.k}

    @classmethod
    def from_dict(cls, d: dict) -> "OperatorParams":
        return cls(float(d["alpha"]), float(d["beta"]), float(d["eta"]), float(d["mu"]), float(d.get("k", 0.0)))


def conditioning_flags(params: OperatorParams) -> tuple[str, ...]:
    flags = []
    trivial = params.hyp_a == 0.0 or params.hyp_b == 0.0
    if not trivial and params.excess <= 0.0:
        flags.append(FLAG_UNBOUNDED)
    if is_degenerate(params.hyp_a, params.hyp_b, params.alpha):
        flags.append(FLAG_DEGENERATE)
    return tuple(flags)


def _weighted(rule: GradedRule, terms, lam: float, lo: int, hi: int) -> np.ndarray:
    log_w = rule.log_w[lo:hi]
    log_s = rule.log_s[lo:hi]
    out = np.zeros(hi - lo)
    for coef, e in terms:
        out += coef * np.exp(log_w + (lam + e) * log_s)
    return out


@dataclass
class OperatorInstance:
    """One operator I^{alpha,beta,eta,mu}_{t,k} at a fixed upper limit t.

    Node positions and effective weights are built once; every integral is
    then a single weighted sum of f at the nodes.
    """

    params: OperatorParams
    t: float
    n: int = field(default_factory=default_quad_n)

    def __post_init__(self):
        self.params.validate()
        if not (self.t > 0.0 and math.isfinite(self.t)):
            raise ParameterDomainError(f"t > 0 violated (t={self.t!r})")
        self.flags = conditioning_flags(self.params)
        self._refined = None
        p = self.params
        a, b, c = p.hyp_a, p.hyp_b, p.alpha
        excess_terms = [0.0]
        if not (a == 0.0 or b == 0.0):
            excess_terms.append(p.excess - (1e-6 if FLAG_DEGENERATE in self.flags else 0.0))
        decay = p.mu + 1.0 + min(excess_terms)
        rule = graded_rule(p.alpha - 1.0, decay, self.n)
        left = rule.left
        total = len(rule.s)
        try:
            near_one = hyp2f1_one_minus_terms(a, b, c, rule.s[:left])
            if a == 0.0 or b == 0.0:
                far = [(np.ones(total - left), 0.0)]
            else:
                far = [(hyp2f1_series(a, b, c, 1.0 - rule.s[left:]), 0.0)]
        except NonConvergenceError as exc:
            raise ParameterConditioningError(str(exc)) from exc
        weights = np.concatenate([
            _weighted(rule, near_one, p.mu, 0, left),
            _weighted(rule, far, p.mu, left, total),
        ])
        kp1 = p.k + 1.0
        prefactor = kp1 ** (p.mu + p.beta) * self.t ** (kp1 * (-p.beta - p.mu)) * rgamma(p.alpha)
        self.weights = prefactor * weights
        self.log_nodes = math.log(self.t) + rule.log_s / kp1
        self.nodes = np.exp(self.log_nodes)
        if not np.all(np.isfinite(self.weights)):
            raise ParameterConditioningError(f"non-finite kernel weights for {p}")

    def integrate(self, f) -> float:
        return _weighted_sum(self.weights, self.nodes, self.log_nodes, f)

    def refined(self) -> "OperatorInstance":
        """The same operator with twice the node count."""
        if self._refined is None:
            self._refined = OperatorInstance(self.params, self.t, 2 * self.n)
        return self._refined


def _weighted_sum(weights, nodes, log_nodes, f) -> float:
    # expressions get log(tau) so far-left nodes are not flushed to tau = 0
    raw = f.eval_log(log_nodes) if isinstance(f, Expr) else f(nodes)
    values = np.asarray(raw, dtype=float)
    if values.shape != nodes.shape:
        values = np.broadcast_to(values, nodes.shape)
    if not np.all(np.isfinite(values)):
        bad = nodes[~np.isfinite(values)][0]
        raise NonFiniteError(f"integrand not finite at tau={bad!r}")
    return float(np.dot(weights, values))


def kfrac_integral(f, inst: OperatorInstance) -> float:
    """I^{alpha,beta,eta,mu}_{t,k}[f](t) for an Expr (or any vectorised callable) f.

    Plain callables see tau itself, which underflows to 0 at the far-left
    nodes when the kernel decays slowly; an Expr is evaluated from log(tau).
    """
    return inst.integrate(f)


def kernel_F(t: float, tau: float, params: OperatorParams) -> float:
    """Closed-form kernel F(t, tau), excluding the tau**k Jacobian factor."""
    params.validate()
    if not 0.0 < tau < t:
        raise ParameterDomainError(f"0 < tau < t violated (tau={tau!r}, t={t!r})")
    if tau <= ENDPOINT_TOL * t or t - tau <= ENDPOINT_TOL * t:
        warnings.warn(
            f"kernel evaluated at tau={tau!r}, within {ENDPOINT_TOL}*t of an endpoint",
            KernelSingularityWarning,
            stacklevel=2,
        )
    p = params
    kp1 = p.k + 1.0
    log_ratio = kp1 * math.log(tau / t)
    s = math.exp(log_ratio)
    one_minus_s = -math.expm1(log_ratio)
    a, b = p.hyp_a, p.hyp_b
    if a == 0.0 or b == 0.0:
        hyp = 1.0
    elif s >= 0.5:
        hyp = float(hyp2f1_series(a, b, p.alpha, one_minus_s))
    else:
        hyp = float(sum(coef * s**e for coef, e in hyp2f1_one_minus_terms(a, b, p.alpha, s)))
    pref = kp1 ** (p.mu + p.beta + 1.0) * t ** (kp1 * (-p.alpha - p.beta - 2.0 * p.mu)) * rgamma(p.alpha)
    return pref * tau ** (kp1 * p.mu) * (t**kp1 * one_minus_s) ** (p.alpha - 1.0) * hyp


def rl_generalized_integral(f, x: float, alpha: float, k: float = 0.0, n: int | None = None) -> float:
    """Generalized Riemann-Liouville integral I^{alpha,k} f(x)."""
    if not alpha > 0.0:
        raise ParameterDomainError("alpha > 0 violated")
    if not k >= 0.0:
        raise ParameterDomainError("k >= 0 violated")
    if not x > 0.0:
        raise ParameterDomainError(f"x > 0 violated (x={x!r})")
    n = default_quad_n() if n is None else n
    rule = graded_rule(alpha - 1.0, 1.0, n)
    kp1 = k + 1.0
    pref = x ** (kp1 * alpha) * kp1 ** (-alpha) * rgamma(alpha)
    weights = pref * np.exp(rule.log_w)
    log_nodes = math.log(x) + rule.log_s / kp1
    return _weighted_sum(weights, np.exp(log_nodes), log_nodes, f)


def monomial_image(params: OperatorParams, t: float, sigma: float) -> float:
    """Closed form of I[tau**((k+1) sigma)](t), sigma >= 0.

    After s = (tau/t)**(k+1) and u = 1 - s the integral is the Beta-type
    moment  int_0^1 u**(alpha-1) (1-u)**(mu+sigma) 2F1(a, b; alpha; u) du,
    which Gauss summation turns into a ratio of Gamma functions.
    """
    params.validate()
    if sigma < 0.0:
        raise ParameterDomainError("sigma >= 0 violated")
    p = params
    kp1 = p.k + 1.0
    ratio = (
        gamma(p.mu + sigma + 1.0)
        * gamma(sigma + 1.0 - p.beta + p.eta)
        * rgamma(sigma + 1.0 - p.beta)
        * rgamma(p.alpha + p.mu + sigma + 1.0 + p.eta)
    )
    return kp1 ** (p.mu + p.beta) * ratio * t ** (kp1 * (sigma - p.beta - p.mu))
