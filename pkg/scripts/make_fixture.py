"""Regenerate the stored 12-qubit regression fixture.

Two stages:

1. simulate the noisy 12-qubit preparation (bundled device parameters plus
   a Gaussian CZ phase jitter) with many shots to get a reference raw
   distribution per basis;
2. draw the stored counts from that reference with ``--shots`` per basis,
   scanning seeds until the mitigated bound rounds to ``--target`` and the
   significance lands in ``--nsigma`` range.

The selected counts and the values computed from them are written to
``src/lcsim/data``; the test suite checks them against the frozen numbers.

    python3 scripts/make_fixture.py --phase-std 0.2 --write
"""
from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

from lcsim import cluster, io, noise, readout, witness
from lcsim.statevec import Counts

DATA = Path(__file__).resolve().parents[1] / "src" / "lcsim" / "data"


def reference_distributions(phase_std, shots, seed):
    dev = readout.bundled_device()
    model = noise.NoiseModel.from_device(dev, cz_phase_std_rad=phase_std)
    a, b = noise.noisy_lc_experiment(12, model, shots, seed)
    return a.frequencies(), b.frequencies(), model.readout


def analyse(cxz, czx, t):
    coeffs = cluster.witness_coefficients(12)
    res, _ = witness.analyse_counts(cxz, czx, t, coeffs)
    return res


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--phase-std", type=float, default=0.2)
    ap.add_argument("--reference-shots", type=int, default=4_000_000)
    ap.add_argument("--shots", type=int, default=880_000)
    ap.add_argument("--target", type=float, default=0.5544)
    ap.add_argument("--nsigma", type=float, nargs=2, default=(21.0, 22.0))
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--max-draws", type=int, default=2000)
    ap.add_argument("--write", action="store_true", help="store the fixture in the package")
    args = ap.parse_args()

    ref_xz, ref_zx, t = reference_distributions(args.phase_std, args.reference_shots, args.seed)
    coeffs = cluster.witness_coefficients(12)
    print(f"reference bound {witness.mitigated_bound(ref_xz, ref_zx, coeffs, t):.5f}")

    for k in range(args.max_draws):
        rng = np.random.default_rng([args.seed, k])
        cxz = Counts(12, rng.multinomial(args.shots, ref_xz.p))
        czx = Counts(12, rng.multinomial(args.shots, ref_zx.p))
        res = analyse(cxz, czx, t)
        ok_bound = round(res.fidelity_bound, 4) == args.target
        ok_sig = args.nsigma[0] <= res.n_sigma_above_half <= args.nsigma[1]
        if ok_bound and ok_sig:
            print(f"draw {k}: bound {res.fidelity_bound:.6f}, sigma {res.sigma_shot:.5f}, "
                  f"n_sigma {res.n_sigma_above_half:.2f}")
            break
    else:
        raise SystemExit("no draw met the targets; adjust --phase-std or --shots")

    if args.write:
        io.write(DATA / "fixture_lc12_xz.csv", io.counts_csv(cxz))
        io.write(DATA / "fixture_lc12_zx.csv", io.counts_csv(czx))
        meta = {
            "n_qubits": 12,
            "shots_per_basis": args.shots,
            "fidelity_bound": res.fidelity_bound,
            "sigma_shot": res.sigma_shot,
            "n_sigma_above_half": res.n_sigma_above_half,
            "generator": {"phase_std_rad": args.phase_std,
                          "reference_shots": args.reference_shots,
                          "seed": args.seed, "draw": k},
        }
        (DATA / "fixture_lc12.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        print(f"wrote fixture to {DATA}")


if __name__ == "__main__":
    main()
