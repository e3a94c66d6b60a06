"""Run every standard and reversed campaign and write JSON/CSV reports.

    python scripts/run_campaigns.py --out reports --trials 200 --seed 7 --workers 4
"""
import argparse
import pathlib
import sys

from kfrac.inequalities import REVERSAL_CONDITIONS, REVERSIBLE, THEOREMS
from kfrac.trials import TrialConfig, emit_report, run_trials


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="reports")
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    jobs = [(th, "standard", "asynchronous") for th in THEOREMS]
    jobs += [(th, "reversed", cond) for th in REVERSIBLE for cond in REVERSAL_CONDITIONS]
    failed = 0
    for i, (th, direction, cond) in enumerate(jobs):
        cfg = TrialConfig(theorem=th, trials=args.trials, seed=args.seed + i, direction=direction,
                          reversal_condition=cond, workers=args.workers)
        summary = run_trials(cfg)
        stem = th if direction == "standard" else f"{th}-reversed-{cond}"
        emit_report(summary, "json", out / f"{stem}.json")
        emit_report(summary, "csv", out / f"{stem}.csv")
        emit_report(summary, "plot", out / f"{stem}-plot.csv")
        c = summary.counts
        print(f"{stem:32s} hold={c['hold']:4d} fail={c['fail']:3d} ill={c['ill_conditioned']:3d} "
              f"min margin/scale={summary.min_margin_over_scale:.3e} ({summary.wall_time:.1f}s)")
        failed += c["fail"]
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
