"""Weighted Gauss quadrature on [0, 1] and a slow adaptive reference integrator.

``jacobi_rule`` integrates against s**p * (1-s)**q.  ``graded_rule`` is the
composite rule used by the operator: it handles the (1-s)**q endpoint with a
Jacobi rule on [1/2, 1] and maps [0, 1/2] to x = -log(s), where any mix of
s**lam and s**lam * log(s) factors becomes a smooth exponentially decaying
function that geometrically growing Gauss-Legendre panels resolve.
"""
from __future__ import annotations

import heapq
import math
import threading
from dataclasses import dataclass

import numpy as np

from .errors import InvalidExponentError, MaxDepthError, NonFiniteError
from .special_functions import beta

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureRule:
    """n-point Gauss rule for the weight s**p (1-s)**q on (0, 1)."""

    p: float
    q: float
    n: int
    nodes: np.ndarray
    weights: np.ndarray


def _recurrence(n: int, a: float, b: float):
    """Monic Jacobi recurrence on [-1, 1] for the weight (1-x)**a (1+x)**b."""
    diag = np.empty(n)
    off = np.empty(max(n - 1, 0))
    ab = a + b
    diag[0] = (b - a) / (ab + 2.0)
    for k in range(1, n):
        diag[k] = (b * b - a * a) / ((2 * k + ab) * (2 * k + ab + 2.0))
    for k in range(1, n):
        if k == 1:
            bk = 4.0 * (a + 1.0) * (b + 1.0) / ((ab + 2.0) ** 2 * (ab + 3.0))
        else:
            s = 2 * k + ab
            bk = 4.0 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0))
        off[k - 1] = math.sqrt(bk)
    return diag, off


def _tridiagonal_eig(diag, off):
    """Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal matrix.

    Returns the eigenvalues and the first component of each normalised
    eigenvector, which is all Golub-Welsch needs.
    """
    d = [float(v) for v in diag]
    n = len(d)
    e = [float(v) for v in off] + [0.0]
    z = [1.0] + [0.0] * (n - 1)
    for l in range(n):
        iterations = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _EPS * dd:
                    break
                m += 1
            if m == l:
                break
            iterations += 1
            if iterations > 60:
                raise ArithmeticError("tridiagonal QL failed to converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi1 = z[i + 1]
                z[i + 1] = s * z[i] + c * zi1
                z[i] = c * z[i] - s * zi1
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return np.array(d), np.array(z)


def _build_jacobi(n: int, p: float, q: float) -> QuadratureRule:
    # on [-1, 1] the s**p factor sits at x = -1, i.e. the (1+x)**b slot
    diag, off = _recurrence(n, q, p)
    x, first = _tridiagonal_eig(diag, off)
    order = np.argsort(x)
    x = x[order]
    first = first[order]
    nodes = 0.5 * (1.0 + x)
    weights = beta(p + 1.0, q + 1.0) * first**2
    return QuadratureRule(p=p, q=q, n=n, nodes=nodes, weights=weights)


_rule_cache: dict[tuple, QuadratureRule] = {}
_rule_lock = threading.Lock()


def _key(*values):
    return tuple(round(v, 12) if isinstance(v, float) else v for v in values)


def jacobi_rule(n: int, p: float = 0.0, q: float = 0.0) -> QuadratureRule:
    """Gauss-Jacobi rule exact for s**p (1-s)**q * poly, deg(poly) <= 2n-1."""
    if n < 1:
        raise ValueError(f"node count must be positive, got {n}")
    if p <= -1.0 or q <= -1.0:
        raise InvalidExponentError(f"weight exponents must exceed -1, got p={p}, q={q}")
    key = _key(int(n), float(p), float(q))
    rule = _rule_cache.get(key)
    if rule is None:
        rule = _build_jacobi(int(n), float(p), float(q))
        with _rule_lock:
            rule = _rule_cache.setdefault(key, rule)
    return rule


def integrate(rule: QuadratureRule, g) -> float:
    """Sum of w_i g(s_i).  The weight s**p (1-s)**q lives in the weights."""
    values = np.asarray(g(rule.nodes), dtype=float)
    if values.shape != rule.nodes.shape:
        values = np.broadcast_to(values, rule.nodes.shape)
    if not np.all(np.isfinite(values)):
        bad = rule.nodes[~np.isfinite(values)][0]
        raise NonFiniteError(f"integrand is not finite at s={bad!r}")
    return float(np.dot(rule.weights, values))


@dataclass(frozen=True)
class GradedRule:
    """Composite rule for  int_0^1 (1-s)**q G(s) ds  ~  sum exp(log_w_i) G(s_i).

    ``log_s`` is kept alongside ``s`` because far-left nodes underflow in s;
    callers with algebraic factors s**lam should add ``lam * log_s`` to
    ``log_w`` rather than multiply by ``s**lam``.
    """

    q: float
    decay: float
    n: int
    s: np.ndarray
    log_s: np.ndarray
    log_w: np.ndarray
    left: int  # nodes [0, left) lie in (0, 1/2]; the rest in (1/2, 1)


TAIL_LOG_TOL = 41.5  # exp(-41.5) ~ 1e-18


def panel_breaks(x0: float, x_end: float) -> list[float]:
    """Break points in x = -log(s).  Panels grow geometrically but stay short
    enough to resolve a function analytic in a strip of half-width ~pi."""
    breaks = [x0]
    b = x0
    while b < x_end:
        length = min(0.5 * b, max(4.0, 0.5 * (b - 8.0)))
        length = max(length, 0.25)
        b = min(b + length, x_end)
        breaks.append(b)
    return breaks


def _build_graded(q: float, decay: float, n: int) -> GradedRule:
    panel_n = max(8, n // 4)
    gl = jacobi_rule(panel_n, 0.0, 0.0)
    x0 = math.log(2.0)
    x_end = x0 + TAIL_LOG_TOL / decay
    breaks = panel_breaks(x0, x_end)
    xs = []
    ws = []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        xs.append(lo + (hi - lo) * gl.nodes)
        ws.append((hi - lo) * gl.weights)
    x = np.concatenate(xs)
    wx = np.concatenate(ws)
    s_left = np.exp(-x)
    # ds = s dx, and the (1-s)**q factor is smooth on this half
    log_w_left = np.log(wx) - x + q * np.log1p(-s_left)

    jr = jacobi_rule(n, 0.0, q)
    # s = 1/2 + u/2 maps the [0, 1] rule onto [1/2, 1]
    s_right = 0.5 + 0.5 * jr.nodes
    log_w_right = np.log(jr.weights) - (q + 1.0) * math.log(2.0)

    s = np.concatenate([s_left, s_right])
    log_s = np.concatenate([-x, np.log(s_right)])
    log_w = np.concatenate([log_w_left, log_w_right])
    return GradedRule(q=q, decay=decay, n=n, s=s, log_s=log_s, log_w=log_w, left=len(x))


_graded_cache: dict[tuple, GradedRule] = {}


def graded_rule(q: float, decay: float, n: int = 64) -> GradedRule:
    """Composite rule for (1-s)**q G(s) on (0, 1).

    ``decay`` is a lower bound on lam + 1 over the algebraic factors s**lam
    present in G near s = 0; it sets where the left tail is truncated.
    """
    if q <= -1.0:
        raise InvalidExponentError(f"weight exponent q must exceed -1, got {q}")
    if decay <= 0.0:
        raise InvalidExponentError(f"integrand is not integrable at 0 (decay {decay})")
    key = _key(float(q), float(decay), int(n))
    rule = _graded_cache.get(key)
    if rule is None:
        rule = _build_graded(float(q), float(decay), int(n))
        with _rule_lock:
            rule = _graded_cache.setdefault(key, rule)
    return rule


# Gauss-Kronrod 7-15 pair (QUADPACK qk15 abscissae and weights)
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_GK_X = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_GK_W = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes are the odd-indexed Kronrod abscissae
_G_W = np.zeros(15)
_G_W[[1, 3, 5]] = _WG[:3]
_G_W[[13, 11, 9]] = _WG[:3]
_G_W[7] = _WG[3]

MAX_DEPTH = 60
MAX_INTERVALS = 200000


def _gk15(h, a, b):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    vals = np.asarray(h(mid + half * _GK_X), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise NonFiniteError(f"integrand not finite on [{a!r}, {b!r}]")
    k = half * float(np.dot(_GK_W, vals))
    g = half * float(np.dot(_G_W, vals))
    return k, abs(k - g)


def _adaptive(h, a, b, tol):
    k, err = _gk15(h, a, b)
    heap = [(-err, a, b, k, 0)]
    total_err = err
    total = k
    while total_err > tol:
        if len(heap) > MAX_INTERVALS:
            raise MaxDepthError("adaptive integration exceeded the interval budget")
        neg_err, lo, hi, val, depth = heapq.heappop(heap)
        if depth >= MAX_DEPTH:
            raise MaxDepthError(f"subdivision depth {MAX_DEPTH} reached near [{lo!r}, {hi!r}]")
        mid = 0.5 * (lo + hi)
        k1, e1 = _gk15(h, lo, mid)
        k2, e2 = _gk15(h, mid, hi)
        total += k1 + k2 - val
        total_err += e1 + e2 + neg_err
        heapq.heappush(heap, (-e1, lo, mid, k1, depth + 1))
        heapq.heappush(heap, (-e2, mid, hi, k2, depth + 1))
    # re-sum to shed accumulated update rounding
    return math.fsum(item[3] for item in heap)


def adaptive_oracle(g, p: float, q: float, tol: float = 1e-11) -> float:
    """Reference value of int_0^1 s**p (1-s)**q g(s) ds.

    Splits at 1/2 and substitutes u = s**(p+1) on the left and
    v = (1-s)**(q+1) on the right so the weight singularities disappear,
    then runs globally adaptive Gauss-Kronrod bisection.  Slow; for tests.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if p <= -1.0 or q <= -1.0:
        raise InvalidExponentError(f"weight exponents must exceed -1, got p={p}, q={q}")
    p1 = p + 1.0
    q1 = q + 1.0

    def left(u):
        s = u ** (1.0 / p1)
        return (1.0 - s) ** q * np.asarray(g(s), dtype=float) / p1

    def right(v):
        one_minus = v ** (1.0 / q1)
        s = 1.0 - one_minus
        return s**p * np.asarray(g(s), dtype=float) / q1

    return _adaptive(left, 0.0, 0.5**p1, 0.5 * tol) + _adaptive(right, 0.0, 0.5**q1, 0.5 * tol)
