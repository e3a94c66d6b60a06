"""Closed-form monomial images against quadrature over random parameter sets.

Prints the worst relative error per node count, and the parameter set that
produced it, so the quadrature's saturation can be checked at a glance.

    python scripts/monomial_table.py --sets 300 --seed 1
"""
import argparse

from kfrac.functions import X, Pow
from kfrac.operator import OperatorInstance, monomial_image
from kfrac.rng import SplitMix64
from kfrac.trials import TrialConfig, sample_params


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sets", type=int, default=300)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--n", type=int, nargs="+", default=[16, 32, 64, 128])
    args = ap.parse_args()

    rng = SplitMix64(args.seed)
    cfg = TrialConfig()
    cases = []
    for _ in range(args.sets):
        p = sample_params(rng, cfg)
        cases.append((p, rng.uniform(*cfg.t_range), rng.uniform(0.0, 3.0)))

    print(f"{'n':>5}  {'worst rel err':>14}  {'flagged':>7}  worst case")
    for n in args.n:
        worst, where, flagged = 0.0, None, 0
        for p, t, sigma in cases:
            inst = OperatorInstance(p, t, n)
            flagged += bool(inst.flags)
            exact = monomial_image(p, t, sigma)
            err = abs(inst.integrate(Pow(X, (p.k + 1.0) * sigma)) / exact - 1.0)
            if err > worst:
                worst, where = err, (p, t, sigma)
        p, t, sigma = where
        print(f"{n:5d}  {worst:14.3e}  {flagged:7d}  alpha={p.alpha:.4g} beta={p.beta:.4g} eta={p.eta:.4g} "
              f"mu={p.mu:.4g} k={p.k:.4g} t={t:.4g} sigma={sigma:.4g}")


if __name__ == "__main__":
    main()
