"""Seeded randomized verification campaigns.

A campaign draws one 64-bit seed per trial from a master splitmix64 stream,
then builds parameters, t, functions and weights for that trial from its own
stream.  Trials are therefore independent of execution order and worker count.
"""
from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

from .errors import ConfigError, KfracError
from .functions import Scale, random_monotone_pair, random_weight
from .inequalities import (
    FUNCTION_SLOTS,
    REVERSAL_CONDITIONS,
    REVERSIBLE,
    THEOREMS,
    TWO_PARAM,
    WEIGHT_SLOTS,
    InequalityCase,
    check,
)
from .operator import OperatorParams
from .rng import SplitMix64

CSV_COLUMNS = (
    "trial_index", "theorem", "t",
    "alpha", "beta", "eta", "mu", "k",
    "gamma", "delta", "zeta", "upsilon",
    "lhs", "rhs", "margin", "scale", "holds", "flags",
)


@dataclass
class TrialConfig:
    theorem: str = "lemma31"
    trials: int = 200
    seed: int = 0
    t_range: tuple = (0.5, 3.0)
    beta_range: tuple = (-2.0, 0.9)
    mu_range: tuple = (-1.0, 2.0)
    k_range: tuple = (0.0, 3.0)
    alpha_margin_range: tuple = (0.0, 3.0)
    quad_n: int = 64
    tol_rel: float = 1e-9
    tol_abs: float = 1e-12
    direction: str = "standard"
    reversal_condition: str = "asynchronous"
    flag_threshold: float = 1e-6
    workers: int = 1

    def validate(self) -> "TrialConfig":
        if self.theorem not in THEOREMS:
            raise ConfigError(f"theorem must be one of {', '.join(THEOREMS)}, got {self.theorem!r}")
        if not (isinstance(self.trials, int) and self.trials >= 1):
            raise ConfigError(f"trials must be an integer >= 1, got {self.trials!r}")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if not (isinstance(self.quad_n, int) and self.quad_n >= 1):
            raise ConfigError(f"quad_n must be a positive integer, got {self.quad_n!r}")
        if not (isinstance(self.workers, int) and self.workers >= 1):
            raise ConfigError(f"workers must be a positive integer, got {self.workers!r}")
        if self.direction not in ("standard", "reversed"):
            raise ConfigError(f"direction must be 'standard' or 'reversed', got {self.direction!r}")
        if self.direction == "reversed" and self.theorem not in REVERSIBLE:
            raise ConfigError(f"only {', '.join(REVERSIBLE)} have a reversed form")
        if self.reversal_condition not in REVERSAL_CONDITIONS:
            raise ConfigError(f"reversal_condition must be one of {', '.join(REVERSAL_CONDITIONS)}")
        for name, lo_bound, hi_bound in (
            ("t_range", 0.0, math.inf),
            ("beta_range", -math.inf, 1.0),
            ("mu_range", -1.0, math.inf),
            ("k_range", 0.0, math.inf),
            ("alpha_margin_range", 0.0, math.inf),
        ):
            rng = getattr(self, name)
            if len(rng) != 2 or not all(math.isfinite(v) for v in rng):
                raise ConfigError(f"{name} must be two finite numbers")
            lo, hi = rng
            if not lo <= hi:
                raise ConfigError(f"{name} lower end exceeds upper end")
            if lo < lo_bound or hi > hi_bound:
                raise ConfigError(f"{name} must lie within [{lo_bound}, {hi_bound}]")
        if self.t_range[0] <= 0.0:
            raise ConfigError("t_range must be positive")
        if self.beta_range[1] >= 1.0:
            raise ConfigError("beta_range must stay below 1")
        if self.alpha_margin_range[1] <= 0.0:
            raise ConfigError("alpha_margin_range must reach above 0")
        if self.mu_range[1] <= -1.0:
            raise ConfigError("mu_range must reach above -1")
        for name in ("tol_rel", "tol_abs", "flag_threshold"):
            if not getattr(self, name) >= 0.0:
                raise ConfigError(f"{name} must be nonnegative")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        for name in ("t_range", "beta_range", "mu_range", "k_range", "alpha_margin_range"):
            d[name] = list(d[name])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrialConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
        kw = dict(d)
        for name in ("t_range", "beta_range", "mu_range", "k_range", "alpha_margin_range"):
            if name in kw:
                try:
                    kw[name] = tuple(float(v) for v in kw[name])
                except (TypeError, ValueError):
                    raise ConfigError(f"{name} must be a pair of numbers") from None
        return cls(**kw).validate()


def _half_open_above(rng: SplitMix64, lo: float, hi: float) -> float:
    """Uniform on (lo, hi]."""
    return hi - (hi - lo) * rng.random()


def sample_params(rng: SplitMix64, cfg: TrialConfig, k: float | None = None) -> OperatorParams:
    """A parameter tuple inside the admissible region by construction."""
    beta = rng.uniform(*cfg.beta_range)
    mu = _half_open_above(rng, *cfg.mu_range)
    if k is None:
        k = rng.uniform(*cfg.k_range)
    alpha = max(0.0, -beta - mu) + _half_open_above(rng, *cfg.alpha_margin_range)
    eta = rng.uniform_open(beta - 1.0, 0.0)
    return OperatorParams(alpha, beta, eta, mu, k)


def build_case(cfg: TrialConfig, seed: int) -> InequalityCase:
    rng = SplitMix64(seed)
    t = rng.uniform(*cfg.t_range)
    params1 = sample_params(rng, cfg)
    params2 = sample_params(rng, cfg, k=params1.k) if cfg.theorem in TWO_PARAM else None
    reversed_ = cfg.direction == "reversed"
    pair_dir = "opposite" if reversed_ and cfg.reversal_condition == "asynchronous" else "same"
    f, g = random_monotone_pair(rng.next_u64(), pair_dir, t_max=t)
    functions = {"f": f, "g": g}
    if "h" in FUNCTION_SLOTS[cfg.theorem]:
        functions["h"] = random_weight(rng.next_u64())
    slots = WEIGHT_SLOTS[cfg.theorem]
    weights = {s: random_weight(rng.next_u64()) for s in slots}
    if reversed_ and cfg.reversal_condition == "negative":
        weights = {s: Scale(-1.0, w) for s, w in weights.items()}
    elif reversed_ and cfg.reversal_condition == "mixed":
        flip = slots[rng.randbelow(len(slots))]
        weights[flip] = Scale(-1.0, weights[flip])
    return InequalityCase(cfg.theorem, functions, weights, t, params1, params2, cfg.direction)


def trial_seeds(cfg: TrialConfig) -> list[int]:
    master = SplitMix64(cfg.seed)
    return [master.next_u64() for _ in range(cfg.trials)]


def _run_one(args) -> dict:
    cfg, index, seed = args
    case = build_case(cfg, seed)
    try:
        rep = check(case, n=cfg.quad_n, tol_rel=cfg.tol_rel, tol_abs=cfg.tol_abs).to_dict()
    except KfracError as exc:
        # evaluation could not be carried out; never counted as a failure
        rep = {"lhs": None, "rhs": None, "margin": None, "scale": None, "holds": None,
               "flags": [f"error: {type(exc).__name__}: {exc}"], "inputs": case.to_dict(),
               "refinement_delta": None, "reversal_condition": None}
        status = "ill_conditioned"
    else:
        if rep["holds"]:
            status = "hold"
        elif rep["flags"] and abs(rep["margin"]) < cfg.flag_threshold * rep["scale"]:
            status = "ill_conditioned"
        else:
            status = "fail"
    rep.update(trial_index=index, seed=seed, status=status)
    return rep


@dataclass
class TrialSummary:
    config: TrialConfig
    reports: list
    counts: dict
    min_margin_over_scale: float | None
    wall_time: float = field(default=0.0, compare=False)

    @property
    def fail_count(self) -> int:
        return self.counts["fail"]

    def to_dict(self, include_wall_time: bool = True) -> dict:
        d = {
            "config": self.config.to_dict(),
            "reports": self.reports,
            "counts": dict(self.counts),
            "min_margin_over_scale": self.min_margin_over_scale,
        }
        if include_wall_time:
            d["wall_time"] = self.wall_time
        return d

    def to_json(self, include_wall_time: bool = True) -> str:
        return json.dumps(self.to_dict(include_wall_time), sort_keys=True, indent=1)


def run_trials(cfg: TrialConfig) -> TrialSummary:
    cfg.validate()
    start = time.perf_counter()
    jobs = [(cfg, i, s) for i, s in enumerate(trial_seeds(cfg))]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            reports = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * cfg.workers))))
    else:
        reports = [_run_one(j) for j in jobs]
    counts = {"hold": 0, "fail": 0, "ill_conditioned": 0}
    for r in reports:
        counts[r["status"]] += 1
    # signed so that the worst case is always the minimum, in either direction
    sign = 1.0 if cfg.direction == "standard" else -1.0
    ratios = [sign * r["margin"] / r["scale"] for r in reports if r["margin"] is not None]
    return TrialSummary(
        config=cfg,
        reports=reports,
        counts=counts,
        min_margin_over_scale=min(ratios) if ratios else None,
        wall_time=time.perf_counter() - start,
    )


def _csv_row(r: dict) -> list:
    inp = r["inputs"]
    p1 = inp["params1"]
    p2 = inp["params2"] or {}
    return [
        r["trial_index"], inp["theorem"], repr(inp["t"]),
        *(repr(p1[k]) for k in ("alpha", "beta", "eta", "mu", "k")),
        *(repr(p2[k]) if k in p2 else "" for k in ("alpha", "beta", "eta", "mu")),
        *("" if r[k] is None else repr(r[k]) for k in ("lhs", "rhs", "margin", "scale")),
        "" if r["holds"] is None else str(r["holds"]).lower(),
        ";".join(r["flags"]),
    ]


def emit_report(summary: TrialSummary, fmt: str, path) -> None:
    """Write ``json`` (full summary), ``csv`` (one row per trial) or ``plot``
    (trial index against margin/scale)."""
    if fmt == "json":
        with open(path, "w") as fh:
            fh.write(summary.to_json())
            fh.write("\n")
        return
    if fmt not in ("csv", "plot"):
        raise ValueError(f"unknown report format {fmt!r}")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if fmt == "csv":
            w.writerow(CSV_COLUMNS)
            for r in summary.reports:
                w.writerow(_csv_row(r))
        else:
            w.writerow(("trial_index", "margin_over_scale"))
            for r in summary.reports:
                ratio = "" if r["margin"] is None else repr(r["margin"] / r["scale"])
                w.writerow((r["trial_index"], ratio))
