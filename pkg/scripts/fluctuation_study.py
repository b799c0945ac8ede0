"""Spread of the fidelity bound when the confusion matrices drift.

Each trial perturbs every f00/f11 by Gaussian noise of std ``delta`` and
re-evaluates the bound on ideal LC_n distributions.  Writes one histogram
per n and prints mean/std, together with the first-order estimate.

    python3 scripts/fluctuation_study.py --n 4,8,12 --trials 10000 --out fluct
"""
import argparse
from pathlib import Path

from lcsim import cluster, config, io, readout, witness


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--n", default="4,8,12")
    ap.add_argument("--f00", type=float, default=0.96)
    ap.add_argument("--f11", type=float, default=0.87)
    ap.add_argument("--delta", type=float, nargs=2, default=(0.01, 0.01))
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--bins", type=int, default=40)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out")
    args = ap.parse_args()

    for n in config.parse_range(args.n):
        pxz, pzx = cluster.ideal_distributions(n)
        wc = cluster.witness_coefficients(n)
        t = [readout.TransitionMatrix(args.f00, args.f11)] * n
        s = witness.transition_fluctuation_sigma(pxz, pzx, wc, t, tuple(args.delta),
                                                 args.trials, [args.seed, n], bins=args.bins,
                                                 workers=args.workers)
        lin = witness.transition_sigma_linear(pxz, pzx, wc, t, tuple(args.delta))
        print(f"n={n:2d}  mean={s.mean_distortion:+.2e}  std={s.std_distortion:.4f}  "
              f"linear={lin:.4f}  rejected={s.rejected}", flush=True)
        if args.out:
            io.write(Path(args.out) / f"hist_n{n:02d}.csv", io.histogram_csv(s))


if __name__ == "__main__":
    main()
