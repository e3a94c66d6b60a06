"""A small closed expression language for test functions of tau, plus
synchronicity checks and seeded generators of function families.

Text syntax is prefix s-expressions with ``x`` standing for tau::

    (+ 1 (pow x 2))          1 + tau**2
    (* 0.5 (exp x) x)        0.5 tau e**tau
    (- 3 (log1p x))          3 - log(1 + tau)
    (scale 2 (affine 0.5 1 (log1p x)))    2 log(1 + (0.5 tau + 1))
    (min x 1)  (max x 1)     clipping against a constant

Expressions evaluate elementwise on numpy arrays.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ExprDomainError, ParseError
from .rng import SplitMix64


def _fmt(v: float) -> str:
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def _mul_bounds(a, b):
    prods = []
    for u in a:
        for v in b:
            if (u == 0.0 and math.isinf(v)) or (v == 0.0 and math.isinf(u)):
                prods.append(0.0)
            else:
                prods.append(u * v)
    return min(prods), max(prods)


class Expr:
    """Base node.  Subclasses are frozen dataclasses, so equality is structural."""

    def __call__(self, tau):
        raise NotImplementedError

    def bounds(self, lo: float, hi: float) -> tuple[float, float]:
        """Guaranteed (min, max) of the expression for tau in [lo, hi]."""
        raise NotImplementedError

    def eval_log(self, log_tau):
        """Evaluate at tau = exp(log_tau).

        Operator nodes can sit far below the smallest double; powers of tau
        are then formed from log_tau instead of from an underflowed tau.
        """
        return self(np.exp(log_tau))

    def to_text(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.to_text()

    def __add__(self, other):
        return Sum((self, _lift(other)))

    __radd__ = __add__

    def __mul__(self, other):
        return Product((self, _lift(other)))

    def __rmul__(self, other):
        return Product((_lift(other), self))

    def __neg__(self):
        return Scale(-1.0, self)

    def __sub__(self, other):
        return Sum((self, Scale(-1.0, _lift(other))))

    def __rsub__(self, other):
        return Sum((_lift(other), Scale(-1.0, self)))

    @property
    def nonnegative(self) -> bool:
        """Certificate: construction guarantees a value >= 0 on [0, inf)."""
        return certified_nonnegative(self)


def _lift(v) -> Expr:
    return v if isinstance(v, Expr) else Const(float(v))


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def __call__(self, tau):
        return np.full(np.shape(tau), self.value) if np.ndim(tau) else self.value

    def bounds(self, lo, hi):
        return self.value, self.value

    def to_text(self):
        return _fmt(self.value)


@dataclass(frozen=True)
class Var(Expr):
    def __call__(self, tau):
        return tau

    def bounds(self, lo, hi):
        return lo, hi

    def to_text(self):
        return "x"


@dataclass(frozen=True)
class Sum(Expr):
    terms: tuple

    def __call__(self, tau):
        out = self.terms[0](tau)
        for e in self.terms[1:]:
            out = out + e(tau)
        return out

    def eval_log(self, log_tau):
        out = self.terms[0].eval_log(log_tau)
        for e in self.terms[1:]:
            out = out + e.eval_log(log_tau)
        return out

    def bounds(self, lo, hi):
        b = [e.bounds(lo, hi) for e in self.terms]
        return sum(x[0] for x in b), sum(x[1] for x in b)

    def to_text(self):
        return "(+ " + " ".join(e.to_text() for e in self.terms) + ")"


@dataclass(frozen=True)
class Product(Expr):
    factors: tuple

    def __call__(self, tau):
        out = self.factors[0](tau)
        for e in self.factors[1:]:
            out = out * e(tau)
        return out

    def eval_log(self, log_tau):
        out = self.factors[0].eval_log(log_tau)
        for e in self.factors[1:]:
            out = out * e.eval_log(log_tau)
        return out

    def bounds(self, lo, hi):
        acc = self.factors[0].bounds(lo, hi)
        for e in self.factors[1:]:
            acc = _mul_bounds(acc, e.bounds(lo, hi))
        return acc

    def to_text(self):
        return "(* " + " ".join(e.to_text() for e in self.factors) + ")"


@dataclass(frozen=True)
class Scale(Expr):
    factor: float
    expr: Expr

    def __call__(self, tau):
        return self.factor * self.expr(tau)

    def eval_log(self, log_tau):
        return self.factor * self.expr.eval_log(log_tau)

    def bounds(self, lo, hi):
        return _mul_bounds((self.factor, self.factor), self.expr.bounds(lo, hi))

    def to_text(self):
        return f"(scale {_fmt(self.factor)} {self.expr.to_text()})"


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: float

    def __post_init__(self):
        if not self.exponent >= 0.0:
            raise ExprDomainError(f"pow exponent must be >= 0, got {self.exponent}")

    def __call__(self, tau):
        b = self.base(tau)
        if np.any(np.asarray(b) < 0.0):
            raise ExprDomainError("pow applied to a negative base")
        return np.power(b, self.exponent)

    def eval_log(self, log_tau):
        if isinstance(self.base, Var):
            return np.exp(self.exponent * np.asarray(log_tau, dtype=float))
        b = self.base.eval_log(log_tau)
        if np.any(np.asarray(b) < 0.0):
            raise ExprDomainError("pow applied to a negative base")
        return np.power(b, self.exponent)

    def bounds(self, lo, hi):
        b0, b1 = self.base.bounds(lo, hi)
        return max(b0, 0.0) ** self.exponent, max(b1, 0.0) ** self.exponent

    def to_text(self):
        return f"(pow {self.base.to_text()} {_fmt(self.exponent)})"


@dataclass(frozen=True)
class Exp(Expr):
    expr: Expr

    def __call__(self, tau):
        return np.exp(self.expr(tau))

    def eval_log(self, log_tau):
        return np.exp(self.expr.eval_log(log_tau))

    def bounds(self, lo, hi):
        b0, b1 = self.expr.bounds(lo, hi)
        return math.exp(b0) if b0 < 710 else math.inf, math.exp(b1) if b1 < 710 else math.inf

    def to_text(self):
        return f"(exp {self.expr.to_text()})"


@dataclass(frozen=True)
class Log1p(Expr):
    expr: Expr

    def __call__(self, tau):
        return self._apply(self.expr(tau))

    def eval_log(self, log_tau):
        return self._apply(self.expr.eval_log(log_tau))

    @staticmethod
    def _apply(v):
        if np.any(np.asarray(v) <= -1.0):
            raise ExprDomainError("log1p of a value <= -1")
        return np.log1p(v)

    def bounds(self, lo, hi):
        b0, b1 = self.expr.bounds(lo, hi)
        low = math.log1p(b0) if b0 > -1.0 else -math.inf
        return low, math.log1p(b1) if b1 > -1.0 else -math.inf

    def to_text(self):
        return f"(log1p {self.expr.to_text()})"


@dataclass(frozen=True)
class MinConst(Expr):
    expr: Expr
    cap: float

    def __call__(self, tau):
        return np.minimum(self.expr(tau), self.cap)

    def eval_log(self, log_tau):
        return np.minimum(self.expr.eval_log(log_tau), self.cap)

    def bounds(self, lo, hi):
        b0, b1 = self.expr.bounds(lo, hi)
        return min(b0, self.cap), min(b1, self.cap)

    def to_text(self):
        return f"(min {self.expr.to_text()} {_fmt(self.cap)})"


@dataclass(frozen=True)
class MaxConst(Expr):
    expr: Expr
    floor: float

    def __call__(self, tau):
        return np.maximum(self.expr(tau), self.floor)

    def eval_log(self, log_tau):
        return np.maximum(self.expr.eval_log(log_tau), self.floor)

    def bounds(self, lo, hi):
        b0, b1 = self.expr.bounds(lo, hi)
        return max(b0, self.floor), max(b1, self.floor)

    def to_text(self):
        return f"(max {self.expr.to_text()} {_fmt(self.floor)})"


@dataclass(frozen=True)
class Affine(Expr):
    """expr evaluated at slope * tau + shift (slope, shift >= 0)."""

    slope: float
    shift: float
    expr: Expr

    def __post_init__(self):
        if self.slope < 0.0 or self.shift < 0.0:
            raise ExprDomainError("affine map needs slope >= 0 and shift >= 0")

    def __call__(self, tau):
        return self.expr(self.slope * np.asarray(tau, dtype=float) + self.shift)

    def bounds(self, lo, hi):
        inner_hi = self.slope * hi + self.shift if self.slope > 0.0 else self.shift
        return self.expr.bounds(self.slope * lo + self.shift, inner_hi)

    def to_text(self):
        return f"(affine {_fmt(self.slope)} {_fmt(self.shift)} {self.expr.to_text()})"


X = Var()


def certified_nonnegative(e: Expr, t_max: float = math.inf) -> bool:
    return e.bounds(0.0, t_max)[0] >= 0.0


def evaluate(e: Expr, tau):
    """Evaluate and reject non-finite results."""
    with np.errstate(all="ignore"):
        v = e(np.asarray(tau, dtype=float))
    if not np.all(np.isfinite(v)):
        raise ExprDomainError(f"{e.to_text()} is not finite on the requested points")
    return v if np.ndim(v) else float(v)


# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.lastindex is None:
            break
        out.append((m.group(m.lastindex), m.start(m.lastindex)))
        pos = m.end()
    if text[pos:].strip():
        raise ParseError("unexpected character", pos)
    return out


def _number(tok, pos) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(f"expected a number, got {tok!r}", pos) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite number {tok!r}", pos)
    return v


def parse(text: str) -> Expr:
    tokens = _tokenize(text)
    if not tokens:
        raise ParseError("empty expression", 0)
    expr, i = _parse_at(tokens, 0, text)
    if i != len(tokens):
        raise ParseError(f"trailing token {tokens[i][0]!r}", tokens[i][1])
    return expr


def _parse_at(tokens, i, text):
    if i >= len(tokens):
        raise ParseError("unexpected end of input", len(text))
    tok, pos = tokens[i]
    if tok == ")":
        raise ParseError("unexpected ')'", pos)
    if tok != "(":
        if tok in ("x", "tau"):
            return X, i + 1
        return Const(_number(tok, pos)), i + 1
    if i + 1 >= len(tokens):
        raise ParseError("unexpected end of input", len(text))
    head, hpos = tokens[i + 1]
    j = i + 2
    args = []
    while True:
        if j >= len(tokens):
            raise ParseError("missing ')'", len(text))
        if tokens[j][0] == ")":
            break
        args.append((tokens[j], j))
        sub, j = _parse_at(tokens, j, text)
        args[-1] = (args[-1][0], sub)
    end = j + 1

    def arity(n):
        if len(args) != n:
            raise ParseError(f"'{head}' takes {n} argument(s), got {len(args)}", hpos)

    def num(idx):
        (tok_, pos_), sub = args[idx]
        if not isinstance(sub, Const):
            raise ParseError(f"'{head}' needs a numeric literal here", pos_)
        return sub.value

    subs = [a[1] for a in args]
    try:
        if head == "+":
            if not subs:
                raise ParseError("'+' needs at least one argument", hpos)
            return (subs[0] if len(subs) == 1 else Sum(tuple(subs))), end
        if head == "*":
            if not subs:
                raise ParseError("'*' needs at least one argument", hpos)
            return (subs[0] if len(subs) == 1 else Product(tuple(subs))), end
        if head == "-":
            if not subs:
                raise ParseError("'-' needs at least one argument", hpos)
            if len(subs) == 1:
                return Scale(-1.0, subs[0]), end
            return Sum((subs[0],) + tuple(Scale(-1.0, s) for s in subs[1:])), end
        if head == "scale":
            arity(2)
            return Scale(num(0), subs[1]), end
        if head == "pow":
            arity(2)
            return Pow(subs[0], num(1)), end
        if head == "exp":
            arity(1)
            return Exp(subs[0]), end
        if head == "log1p":
            arity(1)
            return Log1p(subs[0]), end
        if head == "min":
            arity(2)
            return MinConst(subs[0], num(1)), end
        if head == "max":
            arity(2)
            return MaxConst(subs[0], num(1)), end
        if head == "affine":
            arity(3)
            return Affine(num(0), num(1), subs[2]), end
    except ExprDomainError as exc:
        raise ParseError(str(exc), hpos) from None
    raise ParseError(f"unknown operator {head!r}", hpos)


# --------------------------------------------------------------------------
# synchronicity

SYNC_TOL = 1e-12


@dataclass(frozen=True)
class SyncCertificate:
    verdict: str  # "synchronous" | "asynchronous" | "indeterminate"
    grid_size: int
    worst_pair: tuple[float, float, float]
    min_product: float
    max_product: float

    @property
    def is_synchronous(self) -> bool:
        return self.min_product >= -SYNC_TOL

    @property
    def is_asynchronous(self) -> bool:
        return self.max_product <= SYNC_TOL


def sample_grid(t: float, m: int) -> np.ndarray:
    """m uniform points on (0, t]."""
    return t * np.arange(1, m + 1) / m


def check_synchronous(f: Expr, g: Expr, t: float, m: int = 200) -> SyncCertificate:
    """Sign pattern of (f(u)-f(v))(g(u)-g(v)) over all pairs of an m-point grid."""
    if m < 2:
        raise ValueError("grid size must be at least 2")
    grid = sample_grid(t, m)
    fv = np.broadcast_to(evaluate(f, grid), grid.shape)
    gv = np.broadcast_to(evaluate(g, grid), grid.shape)
    prod = (fv[:, None] - fv[None, :]) * (gv[:, None] - gv[None, :])
    lo = float(prod.min())
    hi = float(prod.max())
    if lo >= -SYNC_TOL:
        verdict, idx = "synchronous", np.unravel_index(np.argmin(prod), prod.shape)
    elif hi <= SYNC_TOL:
        verdict, idx = "asynchronous", np.unravel_index(np.argmax(prod), prod.shape)
    else:
        verdict, idx = "indeterminate", np.unravel_index(np.argmin(prod), prod.shape)
    worst = (float(grid[idx[0]]), float(grid[idx[1]]), float(prod[idx]))
    return SyncCertificate(verdict, m, worst, lo, hi)


# --------------------------------------------------------------------------
# generators


def _increasing(rng: SplitMix64) -> Expr:
    """Positive constant plus a positive combination of increasing atoms."""
    terms = [Const(rng.uniform(0.05, 1.0))]
    for _ in range(1 + rng.randbelow(3)):
        kind = rng.randbelow(4)
        coef = rng.uniform(0.1, 2.0)
        if kind == 0:
            atom = X
        elif kind == 1:
            atom = Pow(X, rng.uniform(1.0, 3.0))
        elif kind == 2:
            atom = Exp(X)
        else:
            atom = Log1p(X)
        terms.append(Scale(coef, atom))
    return Sum(tuple(terms))


def _reflect(e: Expr, rng: SplitMix64, t_max: float) -> Expr:
    """c - e with c chosen so the result stays positive on [0, t_max]."""
    top = e.bounds(0.0, t_max)[1]
    return Sum((Const(top + rng.uniform(0.05, 1.0)), Scale(-1.0, e)))


def random_monotone_pair(seed: int, direction: str = "same", t_max: float = 3.0) -> tuple[Expr, Expr]:
    """Two positive monotone functions on [0, t_max].

    ``same``: both increasing or both decreasing (synchronous).
    ``opposite``: first increasing, second decreasing (asynchronous).
    Decreasing members are reflections c - e, positive on [0, t_max] only.
    """
    if direction not in ("same", "opposite"):
        raise ValueError(f"direction must be 'same' or 'opposite', got {direction!r}")
    rng = SplitMix64(seed)
    f = _increasing(rng)
    g = _increasing(rng)
    if direction == "opposite":
        g = _reflect(g, rng, t_max)
    elif rng.randbelow(2):
        f = _reflect(f, rng, t_max)
        g = _reflect(g, rng, t_max)
    return f, g


def random_weight(seed: int) -> Expr:
    """A strictly positive weight on [0, inf), certified by construction."""
    rng = SplitMix64(seed)
    kind = rng.randbelow(5)
    if kind == 0:
        return Const(1.0)
    if kind == 1:
        return Const(rng.uniform(0.1, 3.0))
    if kind == 2:
        return _increasing(rng)
    decay = Exp(Scale(-rng.uniform(0.1, 2.0), X))
    if kind == 3:
        return Scale(rng.uniform(0.1, 3.0), decay)
    return Product((_increasing(rng), decay))
