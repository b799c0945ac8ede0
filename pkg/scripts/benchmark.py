"""Wall-clock timing of the 12-qubit pipeline stages.

    python3 scripts/benchmark.py --shots 250000 --bootstrap 1000
"""
import argparse
import time

from lcsim import cluster, noise, readout, witness


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--n", type=int, default=12)
    ap.add_argument("--shots", type=int, default=250_000)
    ap.add_argument("--bootstrap", type=int, default=1000)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    model = noise.NoiseModel.from_device(readout.bundled_device()).restrict(args.n)
    wc = cluster.witness_coefficients(args.n)
    t0 = time.perf_counter()
    cxz, czx = noise.noisy_lc_experiment(args.n, model, args.shots, args.seed, args.workers)
    t1 = time.perf_counter()
    bound = witness.mitigated_bound(cxz.frequencies(), czx.frequencies(), wc, model.readout)
    t2 = time.perf_counter()
    boot = witness.bootstrap_sigma(cxz, czx, model.readout, wc, args.bootstrap, args.seed + 1,
                                   workers=args.workers)
    t3 = time.perf_counter()
    print(f"simulate {t1 - t0:7.2f} s   ({2 * args.shots} shots)")
    print(f"mitigate {t2 - t1:7.2f} s   bound {bound:.4f}")
    print(f"bootstrap {t3 - t2:6.2f} s   sigma {boot:.4f} ({args.bootstrap} resamples)")
    print(f"total    {t3 - t0:7.2f} s")


if __name__ == "__main__":
    main()
