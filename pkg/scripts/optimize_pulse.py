"""Optimise the CZ flux waveform and tomograph the resulting gate.

Prints the gate figures of merit, the leakage of slowed-down copies of the
optimum, and the process fidelity of a noisy CZ built from the device
decoherence of the chosen pair.

    python3 scripts/optimize_pulse.py --max-iters 400 --out pulse
"""
import argparse
from pathlib import Path

from lcsim import io, noise, readout
from lcsim.pulse import optimizer, qpt
from lcsim.pulse import transmon as tm


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--max-iters", type=int, default=400)
    ap.add_argument("--coupling-mhz", type=float, default=12.0)
    ap.add_argument("--plateau-ns", type=float, default=40.0)
    ap.add_argument("--pair", type=int, nargs=2, default=(2, 3), help="1-based device qubits")
    ap.add_argument("--out")
    args = ap.parse_args()

    pair = tm.TransmonPair(coupling_mhz=args.coupling_mhz)
    wf = tm.default_waveform(plateau_ns=args.plateau_ns)
    log = lambda it, f, x: print(f"  iter {it:4d}  objective {f:.3e}", flush=True) \
        if it % 50 == 0 else None
    res = optimizer.optimize(wf, pair, max_iters=args.max_iters, callback=log)
    m = res.metrics
    print(f"conditional phase {m.conditional_phase:.6f} rad, leakage {m.leakage:.2e}, "
          f"process fidelity {m.process_fidelity:.6f}")
    for factor in (2.0, 4.0):
        slow = tm.gate_metrics(tm.evolve(pair, res.waveform.stretched(factor), 0.02))
        print(f"  slowed {factor:.0f}x: phase {slow.conditional_phase:.4f}, "
              f"leakage {slow.leakage:.3e}")
    tomo = qpt.qpt_two_qubit(qpt.propagator_executor(m))
    print(f"QPT of the simulated gate: F_pro {tomo.process_fidelity:.6f}")

    idx = [q - 1 for q in args.pair]
    model = noise.NoiseModel.from_device(readout.bundled_device(), idx)
    noisy = qpt.qpt_two_qubit(noise.cz_channel(model))
    print(f"noisy CZ on Q{args.pair[0]}/Q{args.pair[1]}: F_pro {noisy.process_fidelity:.4f}, "
          f"|++> fidelity {noisy.plusplus_fidelity:.4f}")
    if args.out:
        out = Path(args.out)
        io.write(out / "trace.csv", res.search.trace_csv())
        io.write(out / "summary.json", io.json_text(res.summary()))


if __name__ == "__main__":
    main()
