"""Chebyshev-type inequalities for the generalized k-fractional integral.

Each checker evaluates both sides of one inequality under one or two operator
instances and returns an :class:`InequalityReport`.  Products such as x*f*g
are formed as expressions and integrated once, never as products of integrals.

Notation below: ``I`` is the operator with ``params1``; ``J`` the one with
``params2`` (the second parameter set gamma, delta, zeta, upsilon).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConditionClassificationError, HypothesisViolation
from .functions import (
    SYNC_TOL,
    Expr,
    Product,
    certified_nonnegative,
    check_synchronous,
    evaluate,
    parse,
    sample_grid,
)
from .operator import OperatorInstance, OperatorParams, default_quad_n

THEOREMS = ("lemma31", "thm32", "lemma33", "thm34", "thm41", "thm42")
TWO_PARAM = frozenset({"lemma33", "thm34", "thm41", "thm42"})
FUNCTION_SLOTS = {
    "lemma31": ("f", "g"),
    "thm32": ("f", "g"),
    "lemma33": ("f", "g"),
    "thm34": ("f", "g"),
    "thm41": ("f", "g", "h"),
    "thm42": ("f", "g", "h"),
}
WEIGHT_SLOTS = {
    "lemma31": ("x", "y"),
    "thm32": ("r", "p", "q"),
    "lemma33": ("x", "y"),
    "thm34": ("r", "p", "q"),
    "thm41": ("x",),
    "thm42": ("x", "y"),
}
REVERSIBLE = ("thm32", "thm34")
REVERSAL_CONDITIONS = ("asynchronous", "negative", "mixed")

TOL_REL = 1e-9
TOL_ABS = 1e-12
SYNC_GRID = 200
REFINE_TOL = 1e-9
FLAG_REFINEMENT = "refinement-delta"


@dataclass(frozen=True, eq=False)
class InequalityCase:
    theorem: str
    functions: dict
    weights: dict
    t: float
    params1: OperatorParams
    params2: OperatorParams | None = None
    direction: str = "standard"

    def validate(self) -> "InequalityCase":
        if self.theorem not in THEOREMS:
            raise ValueError(f"unknown theorem id {self.theorem!r}")
        if self.direction not in ("standard", "reversed"):
            raise ValueError(f"direction must be 'standard' or 'reversed', got {self.direction!r}")
        missing = [s for s in FUNCTION_SLOTS[self.theorem] if s not in self.functions]
        missing += [s for s in WEIGHT_SLOTS[self.theorem] if s not in self.weights]
        if missing:
            raise ValueError(f"{self.theorem} is missing slot(s): {', '.join(missing)}")
        if (self.params2 is not None) != (self.theorem in TWO_PARAM):
            need = "requires" if self.theorem in TWO_PARAM else "does not take"
            raise ValueError(f"{self.theorem} {need} a second parameter set")
        if not (self.t > 0.0 and math.isfinite(self.t)):
            raise ValueError(f"t > 0 violated (t={self.t!r})")
        self.params1.validate()
        if self.params2 is not None:
            self.params2.validate()
        return self

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "functions": {k: v.to_text() for k, v in sorted(self.functions.items())},
            "weights": {k: v.to_text() for k, v in sorted(self.weights.items())},
            "t": self.t,
            "params1": self.params1.as_dict(),
            "params2": None if self.params2 is None else self.params2.as_dict(),
            "direction": self.direction,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InequalityCase":
        p2 = d.get("params2")
        return cls(
            theorem=d["theorem"],
            functions={k: parse(v) for k, v in d["functions"].items()},
            weights={k: parse(v) for k, v in d["weights"].items()},
            t=float(d["t"]),
            params1=OperatorParams.from_dict(d["params1"]),
            params2=None if p2 is None else OperatorParams.from_dict(p2),
            direction=d.get("direction", "standard"),
        )


@dataclass
class InequalityReport:
    lhs: float
    rhs: float
    margin: float
    scale: float
    holds: bool
    flags: list = field(default_factory=list)
    inputs: dict = field(default_factory=dict)
    refinement_delta: float | None = None
    reversal_condition: str | None = None

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "scale": self.scale,
            "holds": self.holds,
            "flags": list(self.flags),
            "inputs": self.inputs,
            "refinement_delta": self.refinement_delta,
            "reversal_condition": self.reversal_condition,
        }


def verdict(margin: float, scale: float, direction: str, tol_rel=TOL_REL, tol_abs=TOL_ABS) -> bool:
    slack = tol_rel * scale + tol_abs
    if direction == "standard":
        return margin >= -slack
    return margin <= slack


# --------------------------------------------------------------------------
# evaluation


class _Integrals:
    """Memoised integrals of expressions under the one or two operators of a case."""

    def __init__(self, case: InequalityCase, n: int):
        self.ops = [OperatorInstance(case.params1, case.t, n)]
        if case.params2 is not None:
            self.ops.append(OperatorInstance(case.params2, case.t, n))
        self._memo = {}

    @property
    def flags(self):
        out = []
        for op in self.ops:
            out.extend(f for f in op.flags if f not in out)
        return out

    def __call__(self, which: int, *factors: Expr) -> float:
        e = factors[0] if len(factors) == 1 else Product(tuple(factors))
        key = (which, e)
        if key not in self._memo:
            self._memo[key] = self.ops[which].integrate(e)
        return self._memo[key]


def _sides(theorem: str, fn: dict, w: dict, ig: _Integrals) -> tuple[float, float]:
    f, g = fn["f"], fn["g"]

    def I(*e):
        return ig(0, *e)

    def J(*e):
        return ig(1, *e)

    if theorem == "lemma31":
        x, y = w["x"], w["y"]
        lhs = I(x) * I(y, f, g) + I(y) * I(x, f, g)
        rhs = I(x, f) * I(y, g) + I(y, f) * I(x, g)
    elif theorem == "thm32":
        r, p, q = w["r"], w["p"], w["q"]
        lhs = 2.0 * I(r) * (I(p) * I(q, f, g) + I(q) * I(p, f, g)) + 2.0 * I(p) * I(q) * I(r, f, g)
        rhs = (
            I(r) * (I(p, f) * I(q, g) + I(q, f) * I(p, g))
            + I(p) * (I(r, f) * I(q, g) + I(q, f) * I(r, g))
            + I(q) * (I(r, f) * I(p, g) + I(p, f) * I(r, g))
        )
    elif theorem == "lemma33":
        x, y = w["x"], w["y"]
        lhs = I(x) * J(y, f, g) + J(y) * I(x, f, g)
        rhs = I(x, f) * J(y, g) + J(y, f) * I(x, g)
    elif theorem == "thm34":
        r, p, q = w["r"], w["p"], w["q"]
        lhs = (
            I(r) * (I(q) * J(p, f, g) + 2.0 * I(p) * J(q, f, g) + J(q) * I(p, f, g))
            + (I(p) * J(q) + J(p) * I(q)) * I(r, f, g)
        )
        rhs = (
            I(r) * (I(p, f) * J(q, g) + J(q, f) * I(p, g))
            + I(p) * (I(r, f) * J(q, g) + J(q, f) * I(r, g))
            + I(q) * (I(r, f) * J(p, g) + J(p, f) * I(r, g))
        )
    else:
        h = fn["h"]
        x = w["x"]
        y = w["y"] if theorem == "thm42" else x
        lhs = I(x) * J(y, f, g, h) + I(x, h) * J(y, f, g) + I(x, f, g) * J(y, h) + I(x, f, g, h) * J(y)
        rhs = I(x, f) * J(y, g, h) + I(x, g) * J(y, f, h) + I(x, g, h) * J(y, f) + I(x, f, h) * J(y, g)
    return lhs, rhs


def evaluate_case(case: InequalityCase, n: int | None = None, tol_rel=TOL_REL, tol_abs=TOL_ABS,
                  refine_tol=REFINE_TOL) -> InequalityReport:
    """Both sides of the case's inequality, without any hypothesis checks.

    When an operator carries a conditioning flag the case is re-evaluated with
    twice the node count and the change in margin (relative to scale) is
    recorded; a change above ``refine_tol`` adds a flag of its own.
    """
    case.validate()
    n = default_quad_n() if n is None else n
    ig = _Integrals(case, n)
    lhs, rhs = _sides(case.theorem, case.functions, case.weights, ig)
    margin = lhs - rhs
    scale = max(abs(lhs), abs(rhs), 1e-300)
    flags = ig.flags
    delta = None
    if flags:
        fine = _Integrals(case, 2 * n)
        lhs2, rhs2 = _sides(case.theorem, case.functions, case.weights, fine)
        delta = abs((lhs2 - rhs2) - margin) / scale
        if delta > refine_tol:
            flags.append(FLAG_REFINEMENT)
    return InequalityReport(
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        scale=scale,
        holds=verdict(margin, scale, case.direction, tol_rel, tol_abs),
        flags=flags,
        inputs=case.to_dict(),
        refinement_delta=delta,
    )


# --------------------------------------------------------------------------
# hypotheses


def weight_sign(w: Expr, t: float, m: int = SYNC_GRID) -> str:
    """'nonnegative', 'nonpositive' or 'mixed' on (0, t].

    A construction certificate settles nonnegativity; otherwise the weight is
    sampled on the grid used for synchronicity.
    """
    if certified_nonnegative(w, t):
        return "nonnegative"
    v = np.broadcast_to(evaluate(w, sample_grid(t, m)), (m,))
    if v.min() >= 0.0:
        return "nonnegative"
    if v.max() <= 0.0:
        return "nonpositive"
    return "mixed"


def _require_nonnegative_weights(case: InequalityCase):
    for name in WEIGHT_SLOTS[case.theorem]:
        if weight_sign(case.weights[name], case.t) != "nonnegative":
            raise HypothesisViolation(f"weight {name} is not nonnegative on (0, t]")


def _require_synchronous(case: InequalityCase):
    cert = check_synchronous(case.functions["f"], case.functions["g"], case.t, SYNC_GRID)
    if not cert.is_synchronous:
        u, v, prod = cert.worst_pair
        raise HypothesisViolation(
            f"f, g are not synchronous on (0, t]: product {prod:.3g} at ({u:.6g}, {v:.6g})"
        )
    return cert


def _require_condition_41(case: InequalityCase):
    """f, g, h positive and (f(a)-f(b))(g(a)-g(b))(h(a)+h(b)) >= 0 on the grid."""
    grid = sample_grid(case.t, SYNC_GRID)
    vals = {}
    for name in ("f", "g", "h"):
        v = np.broadcast_to(evaluate(case.functions[name], grid), grid.shape)
        if v.min() <= 0.0:
            raise HypothesisViolation(f"{name} is not positive on (0, t]")
        vals[name] = v
    f, g, h = vals["f"], vals["g"], vals["h"]
    prod = (f[:, None] - f[None, :]) * (g[:, None] - g[None, :]) * (h[:, None] + h[None, :])
    if prod.min() < -SYNC_TOL:
        raise HypothesisViolation(f"condition on f, g, h fails on the grid (min product {prod.min():.3g})")


def _standard(theorem: str):
    def checker(case: InequalityCase, **opts) -> InequalityReport:
        if case.theorem != theorem:
            raise ValueError(f"check_{theorem} received a {case.theorem} case")
        case.validate()
        if case.direction == "reversed":
            return check_reversal(case, **opts)
        if theorem in ("thm41", "thm42"):
            _require_condition_41(case)
        else:
            _require_synchronous(case)
        _require_nonnegative_weights(case)
        return evaluate_case(case, **opts)

    checker.__name__ = f"check_{theorem}"
    checker.__doc__ = f"Check the {theorem} inequality in the standard direction."
    return checker


check_lemma31 = _standard("lemma31")
check_thm32 = _standard("thm32")
check_lemma33 = _standard("lemma33")
check_thm34 = _standard("thm34")
check_thm41 = _standard("thm41")
check_thm42 = _standard("thm42")

CHECKERS = {
    "lemma31": check_lemma31,
    "thm32": check_thm32,
    "lemma33": check_lemma33,
    "thm34": check_thm34,
    "thm41": check_thm41,
    "thm42": check_thm42,
}


def classify_reversal(case: InequalityCase) -> str:
    """Which sign condition makes the three-weight inequality reverse.

    ``asynchronous``: f, g asynchronous and r, p, q nonnegative.
    ``negative``: f, g synchronous and r, p, q all nonpositive.
    ``mixed``: f, g synchronous, two weights nonnegative and one nonpositive.
    """
    if case.theorem not in REVERSIBLE:
        raise ConditionClassificationError(f"{case.theorem} has no reversed form")
    signs = [weight_sign(case.weights[s], case.t) for s in WEIGHT_SLOTS[case.theorem]]
    cert = check_synchronous(case.functions["f"], case.functions["g"], case.t, SYNC_GRID)
    if cert.is_asynchronous and all(s == "nonnegative" for s in signs):
        return "asynchronous"
    if cert.is_synchronous and "mixed" not in signs:
        npos = signs.count("nonnegative")
        if npos == 0:
            return "negative"
        if npos == 2:
            return "mixed"
    raise ConditionClassificationError(
        f"no reversal condition matches (sync verdict {cert.verdict}, weight signs {signs})"
    )


def check_reversal(case: InequalityCase, **opts) -> InequalityReport:
    """Check that thm32 or thm34 reverses under one of the sign conditions."""
    case.validate()
    condition = classify_reversal(case)
    if case.direction != "reversed":
        case = InequalityCase(case.theorem, case.functions, case.weights, case.t,
                              case.params1, case.params2, "reversed")
    report = evaluate_case(case, **opts)
    report.reversal_condition = condition
    return report


def check(case: InequalityCase, **opts) -> InequalityReport:
    if case.theorem not in CHECKERS:
        raise ValueError(f"unknown theorem id {case.theorem!r}")
    return CHECKERS[case.theorem](case, **opts)
