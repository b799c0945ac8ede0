"""Command-line front end.

Subcommands::

    lcsim run-lc           simulate LC_n, mitigate, and report the witness
    lcsim run-fluctuation  transition-matrix fluctuation study
    lcsim run-pulse-opt    optimise the CZ waveform and tomograph the gate
    lcsim mitigate         readout-mitigate a counts/distribution file
    lcsim witness          witness report from two outcome files

Exit status: 0 success, 1 invalid input or configuration, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import cluster, config as cfgmod, io, noise, readout, witness
from . import statevec as sv
from .errors import (
    ConditioningError,
    IntegrationError,
    LCSimError,
    OptimizationError,
    TomographyError,
)
from .pulse import optimizer as popt
from .pulse import qpt
from .pulse import transmon as tm

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2
_RUNTIME_ERRORS = (IntegrationError, OptimizationError, TomographyError, ConditioningError)


class UsageError(LCSimError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p, with_seed=True):
    p.add_argument("--config", help="TOML configuration file")
    p.add_argument("--set", action="append", default=[], metavar="TABLE.KEY=VALUE",
                   help="override any configuration scalar (repeatable)")
    if with_seed:
        p.add_argument("--seed", type=int, help="master seed (required here or in the config)")
    p.add_argument("--device", help="device parameter file (default: bundled 12-qubit table)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", choices=("text", "json"), help="report format on stdout")
    p.add_argument("--workers", type=int, help="worker threads")


def build_parser():
    parser = _Parser(prog="lcsim", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run-lc", help="simulate, mitigate and certify LC_n")
    _common(p)
    p.add_argument("--n", help="chain length(s): 12, 4-12 or 4,8,12")
    p.add_argument("--shots", type=int, help="shots per basis")
    p.add_argument("--gate-set", choices=("CZ", "CX", "cz", "cx"))
    p.add_argument("--noise", choices=("device", "none"))
    p.add_argument("--readout", choices=("device", "perfect"))
    p.add_argument("--bootstrap", type=int, help="bootstrap resamples (0: off)")

    p = sub.add_parser("run-fluctuation", help="transition-matrix fluctuation study")
    _common(p)
    p.add_argument("--n", help="chain length(s)")
    p.add_argument("--trials", type=int)

    p = sub.add_parser("run-pulse-opt", help="optimise the CZ waveform")
    _common(p)
    p.add_argument("--max-iters", type=int)

    p = sub.add_parser("mitigate", help="apply inverse readout confusion to a file")
    _common(p, with_seed=False)
    p.add_argument("input", help="counts or distribution CSV")
    p.add_argument("output", help="mitigated distribution CSV")
    p.add_argument("--qubits", help="device qubits used, 1-based (default: first n)")
    p.add_argument("--perfect", action="store_true", help="identity readout (no-op)")

    p = sub.add_parser("witness", help="witness report from two outcome files")
    _common(p, with_seed=False)
    p.add_argument("xz", help="XZ-basis counts or distribution CSV")
    p.add_argument("zx", help="ZX-basis counts or distribution CSV")
    p.add_argument("--qubits", help="device qubits used, 1-based (default: first n)")
    p.add_argument("--perfect", action="store_true", help="identity readout")
    p.add_argument("--mitigated", action="store_true",
                   help="distribution files are already mitigated")
    p.add_argument("--shots", type=int, help="shots per basis for distribution inputs")
    p.add_argument("--delta", type=float, nargs=2, metavar=("D00", "D11"),
                   help="std of f00/f11 drifts for the transition sigma")
    p.add_argument("--z", type=float, default=0.0, help="certification margin in sigmas")
    p.add_argument("--seed", type=int, default=0, help="seed for the fluctuation study")
    return parser


def _load(args):
    cfg = cfgmod.load_config(args.config)
    for a in args.set:
        cfgmod.apply_override(cfg, a)
    mapping = {"seed": "seed", "device": "device", "out": "output_dir", "format": "format",
               "workers": "workers"}
    for attr, key in mapping.items():
        v = getattr(args, attr, None)
        if v is not None:
            setattr(cfg, key, v)
            if attr == "device":
                cfg.base_dir = Path(".")
    return cfg


def _emit_report(cfg, text, data):
    print(io.json_text(data) if cfg.format == "json" else text, end="")


# ---------------------------------------------------------------------------


def run_lc(cfg):
    ex = cfg.experiment
    dev = cfg.load_device()
    out = Path(cfg.output_dir)
    rows, reports = [], []
    text = []
    for n in ex.n_qubits:
        if n > len(dev) and (ex.noise == "device" or ex.readout == "device"):
            raise cfgmod.ConfigError(
                f"experiment.n_qubits: device has {len(dev)} qubits, asked for {n}")
        if ex.noise == "device":
            model = noise.NoiseModel.from_device(dev, range(n), **cfg.noise)
        else:
            model = noise.NoiseModel.ideal(n)
        if ex.readout == "device":
            model.readout = dev.readout(range(n))
        else:
            model.readout = readout.perfect_readout(n)
        seed = np.random.SeedSequence([cfg.seed, n])
        cxz, czx = noise.noisy_lc_experiment(n, model, ex.shots, seed, cfg.workers, ex.gate_set)
        coeffs = cluster.witness_coefficients(n)
        delta = ex.delta if any(d > 0 for d in ex.delta) else None
        res, extras = witness.analyse_counts(
            cxz, czx, model.readout, coeffs, delta=delta, fluct_trials=ex.fluct_trials,
            bootstrap=ex.bootstrap, seed=np.random.SeedSequence([cfg.seed, n, 1]), z=ex.z,
            workers=cfg.workers)
        d = out / f"n{n:02d}"
        io.write(d / "counts_xz.csv", io.counts_csv(cxz))
        io.write(d / "counts_zx.csv", io.counts_csv(czx))
        io.write(d / "mitigated_xz.csv", io.distribution_csv(extras["p_xz"]))
        io.write(d / "mitigated_zx.csv", io.distribution_csv(extras["p_zx"]))
        rep = res.to_dict()
        rep.update(shots=ex.shots, sigma_bootstrap=extras["sigma_bootstrap"],
                   negative_mass=extras["negative_mass"], noise=ex.noise, readout=ex.readout,
                   gate_set=ex.gate_set)
        io.write(d / "report.json", io.json_text(rep))
        reports.append(rep)
        rows.append([n, res.fidelity_bound, res.sigma_shot, res.sigma_transition,
                     res.sigma_total, res.n_sigma_above_half, int(res.gme_certified)])
        text.append(res.to_text())
    io.write(out / "summary.csv", io.table_csv(
        ["n_qubits", "fidelity_bound", "sigma_shot", "sigma_transition", "sigma_total",
         "n_sigma_above_half", "gme_certified"], rows))
    _emit_report(cfg, "\n".join(text), reports if len(reports) > 1 else reports[0])


def run_fluctuation(cfg):
    fc = cfg.fluctuation
    out = Path(cfg.output_dir)
    rows, text = [], []
    for n in fc.n_qubits:
        t = [readout.TransitionMatrix(fc.f00, fc.f11)] * n
        pxz, pzx = cluster.ideal_distributions(n)
        coeffs = cluster.witness_coefficients(n)
        study = witness.transition_fluctuation_sigma(
            pxz, pzx, coeffs, t, tuple(fc.delta), fc.trials,
            np.random.SeedSequence([cfg.seed, n]), bins=fc.bins, workers=cfg.workers)
        lin = witness.transition_sigma_linear(pxz, pzx, coeffs, t, tuple(fc.delta))
        io.write(out / f"fluctuation_n{n:02d}.csv", io.histogram_csv(study))
        rows.append([n, study.trials, study.mean_distortion, study.std_distortion, lin,
                     study.rejected])
        text.append(f"n={n:2d}  mean={study.mean_distortion:+.3e}  std={study.std_distortion:.4e}"
                    f"  linear={lin:.4e}  rejected={study.rejected}")
    header = ["n_qubits", "trials", "mean", "std", "std_linear", "rejected"]
    io.write(out / "fluctuation_summary.csv", io.table_csv(header, rows))
    _emit_report(cfg, "\n".join(text) + "\n", [dict(zip(header, r)) for r in rows])


def run_pulse_opt(cfg):
    dev = cfg.load_device()
    pc = cfgmod.pulse_settings(cfg, dev)
    pair = tm.TransmonPair(pc.tuned_anharm_mhz, pc.partner_anharm_mhz, pc.coupling_mhz)
    wf = tm.default_waveform(
        tuned_idle_ghz=pc.tuned_idle_ghz, tuned_op_ghz=pc.tuned_op_ghz,
        partner_idle_ghz=pc.partner_idle_ghz, partner_op_ghz=pc.partner_op_ghz,
        plateau_ns=pc.plateau_ns, edge_ns=pc.edge_offset_ns)
    res = popt.optimize(wf, pair, max_iters=pc.max_iters, dt_ns=pc.dt_ns,
                        calibrate=pc.calibrate)
    shots = pc.qpt_shots or None
    tomo = qpt.qpt_two_qubit(qpt.propagator_executor(res.metrics), shots=shots,
                             seed=cfg.seed, workers=cfg.workers)
    out = Path(cfg.output_dir)
    io.write(out / "pulse_trace.csv", res.search.trace_csv())
    io.write(out / "pulse_trajectory.csv", io.table_csv(
        ["t_ns", "w_tuned_ghz", "w_partner_ghz"],
        [[float(v) for v in r] for r in tm.sample_trajectory(res.waveform)]))
    chi = tomo.physical.chi
    io.write(out / "chi.csv", io.table_csv(
        ["row", "col", "re", "im"],
        [[qpt.PAULI_LABELS[i], qpt.PAULI_LABELS[j], float(chi[i, j].real),
          float(chi[i, j].imag)] for i in range(16) for j in range(16)]))
    rep = res.summary()
    rep.update(qpt_process_fidelity=tomo.process_fidelity,
               qpt_plusplus_fidelity=tomo.plusplus_fidelity,
               qpt_clipped_mass=tomo.clipped_mass, calibration_scale=res.calibration_scale)
    io.write(out / "pulse_report.json", io.json_text(rep))
    text = (
        f"objective            {rep['objective']:.3e}\n"
        f"conditional phase    {rep['conditional_phase_rad']:.6f} rad "
        f"(error {rep['phase_error_rad']:+.2e})\n"
        f"leakage              {rep['leakage']:.3e}\n"
        f"process fidelity     {rep['process_fidelity']:.6f} (QPT {tomo.process_fidelity:.6f})\n"
        f"|++> fidelity (QPT)  {tomo.plusplus_fidelity:.6f}\n"
        f"iterations           {rep['iterations']} ({rep['evaluations']} evaluations)\n"
    )
    _emit_report(cfg, text, rep)


def _qubit_readout(args, cfg, n):
    if args.perfect:
        return readout.perfect_readout(n)
    dev = cfg.load_device()
    idx = list(range(n)) if args.qubits is None else [
        q - 1 for q in cfgmod.parse_range(args.qubits)]
    if len(idx) != n or min(idx) < 0 or max(idx) >= len(dev):
        raise cfgmod.ConfigError(f"--qubits: need {n} device qubits in 1..{len(dev)}")
    return dev.readout(idx)


def mitigate_cmd(args, cfg):
    data = io.read_outcome_file(Path(args.input))
    dist = data.frequencies() if isinstance(data, sv.Counts) else data
    t = _qubit_readout(args, cfg, dist.n_qubits)
    mitigated = readout.mitigate(dist, t)
    io.write(args.output, io.distribution_csv(mitigated))
    info = {"n_qubits": dist.n_qubits, "negative_mass": mitigated.negative_mass(),
            "total": mitigated.total()}
    _emit_report(cfg, f"wrote {args.output} (negative mass {info['negative_mass']:.3e})\n", info)


def witness_cmd(args, cfg):
    a = io.read_outcome_file(Path(args.xz))
    b = io.read_outcome_file(Path(args.zx))
    if a.n_qubits != b.n_qubits:
        raise cfgmod.ConfigError("xz and zx files have different qubit counts")
    n = a.n_qubits
    coeffs = cluster.witness_coefficients(n)
    t = _qubit_readout(args, cfg, n)
    counts_in = isinstance(a, sv.Counts) and isinstance(b, sv.Counts)
    if counts_in:
        res, _ = witness.analyse_counts(a, b, t, coeffs, delta=args.delta, seed=args.seed,
                                        z=args.z, workers=cfg.workers)
    else:
        if isinstance(a, sv.Counts) or isinstance(b, sv.Counts):
            raise cfgmod.ConfigError("give either two counts files or two distribution files")
        if args.shots is None:
            raise cfgmod.ConfigError("--shots is required for distribution inputs")
        if args.mitigated:
            pxz, pzx = a, b
            raw_xz, raw_zx = readout.apply_readout_noise(a, t), readout.apply_readout_noise(b, t)
        else:
            raw_xz, raw_zx = a, b
            pxz, pzx = readout.mitigate(a, t), readout.mitigate(b, t)
        bound = witness.fidelity_bound(pxz, pzx, coeffs)
        s_shot = witness.shot_noise_sigma(raw_xz, raw_zx, t, coeffs, args.shots)
        s_tr = 0.0
        if args.delta is not None and any(d > 0 for d in args.delta):
            s_tr = witness.transition_fluctuation_sigma(
                pxz, pzx, coeffs, t, tuple(args.delta), seed=args.seed,
                workers=cfg.workers).std_distortion
        res = witness.certify_gme(n, bound, s_shot, s_tr, args.z)
    _emit_report(cfg, res.to_text(), res.to_dict())


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _load(args)
        if args.command == "run-lc":
            ex = cfg.experiment
            if args.n is not None:
                ex.n_qubits = cfgmod.parse_range(args.n)
            for attr, key in (("shots", "shots"), ("noise", "noise"), ("readout", "readout"),
                              ("bootstrap", "bootstrap"), ("gate_set", "gate_set")):
                if getattr(args, attr) is not None:
                    setattr(ex, key, getattr(args, attr))
            cfg.validate()
            run_lc(cfg)
        elif args.command == "run-fluctuation":
            if args.n is not None:
                cfg.fluctuation.n_qubits = cfgmod.parse_range(args.n)
            if args.trials is not None:
                cfg.fluctuation.trials = args.trials
            cfg.validate()
            run_fluctuation(cfg)
        elif args.command == "run-pulse-opt":
            if args.max_iters is not None:
                cfg.pulse.max_iters = args.max_iters
                cfg.explicit.add("pulse.max_iters")
            cfg.validate()
            run_pulse_opt(cfg)
        elif args.command == "mitigate":
            cfg.validate(need_seed=False)
            mitigate_cmd(args, cfg)
        else:
            cfg.validate(need_seed=False)
            witness_cmd(args, cfg)
    except _RUNTIME_ERRORS as exc:
        print(f"lcsim: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (LCSimError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"lcsim: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - anything else is a runtime failure
        print(f"lcsim: runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
