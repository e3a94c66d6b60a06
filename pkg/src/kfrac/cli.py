"""Command-line front end.

    kfrac integrate --f "(pow x 2)" --alpha 1 --beta -1 --eta -0.5 --mu 0 --t 1
    kfrac check --config case.json
    kfrac verify --theorem lemma31 --trials 200 --seed 7 --json out.json
    kfrac table --alpha 0.8 --beta -0.3 --eta -0.4 --mu 0.5 --k 1 --t 2

Exit codes: 0 success / every trial holds, 1 some check fails, 2 bad input.
The environment variable KFRAC_QUAD_N overrides the default node count.
"""
from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError, KfracError
from .functions import parse
from .inequalities import REVERSAL_CONDITIONS, THEOREMS, InequalityCase, check
from .operator import OperatorInstance, OperatorParams, default_quad_n, monomial_image
from .trials import TrialConfig, emit_report, run_trials

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _add_params(p, suffix="", required=True):
    for name in ("alpha", "beta", "eta", "mu"):
        p.add_argument(f"--{name}{suffix}", type=float, required=required)
    if not suffix:
        p.add_argument("--k", type=float, default=0.0)


def _params(ns, suffix="") -> OperatorParams:
    return OperatorParams(
        getattr(ns, f"alpha{suffix}"), getattr(ns, f"beta{suffix}"),
        getattr(ns, f"eta{suffix}"), getattr(ns, f"mu{suffix}"), ns.k,
    )


def _quad_n(ns) -> int:
    return default_quad_n() if ns.n is None else ns.n


def cmd_integrate(ns) -> int:
    f = parse(ns.f)
    inst = OperatorInstance(_params(ns).validate(), ns.t, _quad_n(ns))
    value = inst.integrate(f)
    print(repr(value))
    if inst.flags:
        print("flags: " + ", ".join(inst.flags))
    return EXIT_OK


def cmd_check(ns) -> int:
    if ns.config:
        with open(ns.config) as fh:
            data = json.load(fh)
    else:
        data = {}
    if ns.theorem:
        data["theorem"] = ns.theorem
    for slot in ("f", "g", "h"):
        if getattr(ns, slot) is not None:
            data.setdefault("functions", {})[slot] = getattr(ns, slot)
    for w in ns.weight or []:
        name, _, text = w.partition("=")
        data.setdefault("weights", {})[name.strip()] = text
    if ns.t is not None:
        data["t"] = ns.t
    if ns.alpha is not None:
        data["params1"] = _params(ns).as_dict()
    if ns.alpha2 is not None:
        p2 = _params(ns, "2").as_dict()
        data["params2"] = p2
    if ns.direction:
        data["direction"] = ns.direction
    try:
        case = InequalityCase.from_dict(data)
    except KeyError as exc:
        raise ConfigError(f"case is missing field {exc.args[0]!r}") from None
    try:
        case.validate()
    except ValueError as exc:
        if isinstance(exc, KfracError):
            raise
        raise ConfigError(str(exc)) from None
    report = check(case, n=_quad_n(ns))
    print(json.dumps(report.to_dict(), sort_keys=True, indent=1))
    return EXIT_OK if report.holds else EXIT_FAIL


def _config_from(ns) -> TrialConfig:
    data = {}
    if ns.config:
        with open(ns.config) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    for name in ("theorem", "trials", "seed", "direction", "reversal_condition", "workers",
                 "tol_rel", "tol_abs", "flag_threshold"):
        v = getattr(ns, name)
        if v is not None:
            data[name] = v
    if ns.n is not None:
        data["quad_n"] = ns.n
    elif "quad_n" not in data:
        data["quad_n"] = default_quad_n()
    if ns.t_range is not None:
        data["t_range"] = ns.t_range
    return TrialConfig.from_dict(data)


def cmd_verify(ns) -> int:
    cfg = _config_from(ns)
    summary = run_trials(cfg)
    for fmt in ("json", "csv", "plot"):
        path = getattr(ns, fmt)
        if path:
            emit_report(summary, fmt, path)
    c = summary.counts
    print(
        f"{cfg.theorem} {cfg.direction}: {c['hold']} hold, {c['fail']} fail, "
        f"{c['ill_conditioned']} ill-conditioned; min margin/scale "
        f"{summary.min_margin_over_scale!r}; {summary.wall_time:.2f}s"
    )
    return EXIT_FAIL if summary.fail_count else EXIT_OK


def cmd_table(ns) -> int:
    params = _params(ns).validate()
    inst = OperatorInstance(params, ns.t, _quad_n(ns))
    kp1 = params.k + 1.0
    print(f"{'sigma':>6}  {'closed form':>24}  {'quadrature':>24}  {'rel err':>9}")
    worst = 0.0
    for sigma in ns.sigma:
        exact = monomial_image(params, ns.t, sigma)
        approx = inst.integrate(lambda tau, s=sigma: tau ** (kp1 * s))
        err = abs(approx - exact) / abs(exact)
        worst = max(worst, err)
        print(f"{sigma:6.3g}  {exact:24.17g}  {approx:24.17g}  {err:9.2e}")
    if inst.flags:
        print("flags: " + ", ".join(inst.flags))
    return EXIT_OK if worst <= ns.tol else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="kfrac", description="Generalized k-fractional integrals and Chebyshev-type inequalities.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("integrate", help="evaluate the operator applied to one expression")
    p.add_argument("--f", required=True, help='expression text, e.g. "(pow x 2)"')
    _add_params(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--n", type=int, default=None, help="quadrature size (default 64 or KFRAC_QUAD_N)")
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("check", help="check one inequality from flags and/or a JSON case file")
    p.add_argument("--config", help="JSON case with the fields of InequalityCase.to_dict")
    p.add_argument("--theorem", choices=THEOREMS)
    p.add_argument("--f")
    p.add_argument("--g")
    p.add_argument("--h")
    p.add_argument("--weight", action="append", metavar="NAME=EXPR", help="repeatable, e.g. --weight x=1")
    p.add_argument("--t", type=float)
    _add_params(p, required=False)
    _add_params(p, suffix="2", required=False)
    p.add_argument("--direction", choices=("standard", "reversed"))
    p.add_argument("--n", type=int, default=None)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("verify", help="run a seeded randomized campaign")
    p.add_argument("--config", help="JSON file with TrialConfig fields; flags override it")
    p.add_argument("--theorem", choices=THEOREMS)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--t-range", dest="t_range", type=float, nargs=2)
    p.add_argument("--direction", choices=("standard", "reversed"))
    p.add_argument("--reversal-condition", dest="reversal_condition", choices=REVERSAL_CONDITIONS)
    p.add_argument("--tol-rel", dest="tol_rel", type=float)
    p.add_argument("--tol-abs", dest="tol_abs", type=float)
    p.add_argument("--flag-threshold", dest="flag_threshold", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--json", help="write the full summary here")
    p.add_argument("--csv", help="write one row per trial here")
    p.add_argument("--plot", help="write trial index against margin/scale here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("table", help="monomial closed form against quadrature")
    _add_params(p)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--sigma", type=float, nargs="+", default=[0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0])
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--n", type=int, default=None)
    p.set_defaults(func=cmd_table)
    return ap


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return ns.func(ns)
    except (KfracError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
