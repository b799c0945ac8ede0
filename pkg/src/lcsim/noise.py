"""Decoherence and gate-error channels for the cluster-preparation circuit.

Noise is inserted after every circuit layer on every qubit: amplitude
damping (T1), phase flips (T_phi), a Gaussian conditional-phase error on
each CZ and a coherent ZZ phase on adjacent pairs that are not being
entangled in that layer.

Shots are simulated as quantum trajectories, but shots that have seen the
same error history share one statevector.  At each stochastic location the
shot counts on a branch are split binomially using that branch's own jump
probability, which is exactly the per-shot law; the tree is walked
depth-first from one seeded stream, so results are deterministic.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import cluster, densmat, readout
from . import statevec as sv
from .errors import DomainError, SizeError, ValidityError
from .statevec import Counts

BLOCK_SHOTS = 1 << 16
TPHI_CEILING_US = 1e6
_CZ_FLIP = np.diag([1, 1, 1, -1]).astype(complex)


def channel_amplitude_damping(t_ns, t1_us):
    """Jump probability ``1 - exp(-t/T1)`` for a wait of ``t_ns``."""
    if not (t_ns > 0 and t1_us > 0):
        raise DomainError(f"t and T1 must be positive, got t={t_ns} ns, T1={t1_us} us")
    return -math.expm1(-t_ns * 1e-3 / t1_us)


def channel_phase_flip(t_ns, tphi_us):
    """Z-flip probability whose channel shrinks coherences by ``exp(-t/T_phi)``."""
    if not (t_ns > 0 and tphi_us > 0):
        raise DomainError(f"t and T_phi must be positive, got t={t_ns} ns, T_phi={tphi_us} us")
    return -0.5 * math.expm1(-t_ns * 1e-3 / tphi_us)


def derive_tphi(t1_us, t2star_us, ceiling_us=TPHI_CEILING_US):
    """Pure-dephasing time from ``1/T_phi = 1/T2* - 1/(2 T1)``.

    A non-positive rate (T2* at or above the 2 T1 limit) is clamped to
    ``ceiling_us`` with a warning.  Infinite T1 and T2* mean "no
    decoherence" and give an infinite T_phi silently.
    """
    if not (t1_us > 0 and t2star_us > 0):
        raise DomainError(f"T1 and T2* must be positive, got {t1_us}, {t2star_us}")
    if math.isinf(t1_us) and math.isinf(t2star_us):
        return math.inf
    rate = 1.0 / t2star_us - 0.5 / t1_us
    if rate * ceiling_us <= 1.0:
        warnings.warn(
            f"T2* = {t2star_us} us is at the T1 limit (T1 = {t1_us} us); "
            f"T_phi clamped to {ceiling_us} us",
            stacklevel=2,
        )
        return float(ceiling_us)
    return 1.0 / rate


@dataclass
class NoiseModel:
    """Per-qubit decoherence, per-layer timing and two-qubit phase errors.

    ``t1_us``/``t2star_us`` may contain ``inf`` to switch a channel off.
    ``zz_rate_mhz`` is a scalar or one value per adjacent pair.
    """

    t1_us: np.ndarray
    t2star_us: np.ndarray
    readout: list
    y2_layer_ns: float = 30.0
    cz_layer_ns: float = 64.0
    cz_phase_mean_rad: float = 0.0
    cz_phase_std_rad: float = 0.0
    zz_rate_mhz: float | np.ndarray = 0.0
    tphi_ceiling_us: float = TPHI_CEILING_US
    tphi_us: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.t1_us = np.asarray(self.t1_us, dtype=float)
        self.t2star_us = np.asarray(self.t2star_us, dtype=float)
        self.readout = list(self.readout)
        n = self.t1_us.size
        if self.t1_us.shape != (n,) or self.t2star_us.shape != (n,) or n == 0:
            raise ValidityError("t1_us and t2star_us must be 1-D arrays of equal length")
        if len(self.readout) != n:
            raise ValidityError(f"{len(self.readout)} readout matrices for {n} qubits")
        if np.any(~(self.t1_us > 0)) or np.any(~(self.t2star_us > 0)):
            raise ValidityError("T1 and T2* must be positive")
        if not (self.y2_layer_ns > 0 and self.cz_layer_ns > 0):
            raise ValidityError("layer durations must be positive")
        if not (self.cz_phase_std_rad >= 0) or not math.isfinite(self.cz_phase_mean_rad):
            raise ValidityError("CZ phase error needs a finite mean and a std >= 0")
        zz = np.broadcast_to(np.asarray(self.zz_rate_mhz, dtype=float), (max(n - 1, 0),))
        if np.any(~np.isfinite(zz)):
            raise ValidityError("ZZ rates must be finite")
        self.zz_rate_mhz = zz.copy()
        if not self.tphi_ceiling_us > 0:
            raise ValidityError("T_phi ceiling must be positive")
        self.tphi_us = np.array(
            [derive_tphi(a, b, self.tphi_ceiling_us) for a, b in zip(self.t1_us, self.t2star_us)]
        )

    @property
    def n_qubits(self):
        return self.t1_us.size

    @classmethod
    def ideal(cls, n, t=None):
        """No decoherence and no gate errors; perfect readout unless ``t`` is given."""
        return cls(
            t1_us=np.full(n, np.inf),
            t2star_us=np.full(n, np.inf),
            readout=readout.perfect_readout(n) if t is None else t,
        )

    @classmethod
    def from_device(cls, device, qubits=None, **overrides):
        """Model for the chain ``qubits`` (0-based indices; default all).

        Layer timing and error knobs come from the device file's ``[noise]``
        table; keyword arguments override them.
        """
        idx = range(len(device)) if qubits is None else list(qubits)
        sel = [device[i] for i in idx]
        section = dict(device.sections.get("noise", {}))
        section.update(overrides)
        known = {"y2_layer_ns", "cz_layer_ns", "cz_phase_mean_rad", "cz_phase_std_rad",
                 "zz_rate_mhz", "tphi_ceiling_us"}
        unknown = set(section) - known
        if unknown:
            raise ValidityError(f"unknown noise settings {sorted(unknown)}")
        return cls(
            t1_us=[q.t1_us for q in sel],
            t2star_us=[q.t2star_us for q in sel],
            readout=[q.readout for q in sel],
            **section,
        )

    def restrict(self, n):
        """Model for the first ``n`` qubits of the chain."""
        if n > self.n_qubits:
            raise ValidityError(f"model covers {self.n_qubits} qubits, asked for {n}")
        return NoiseModel(
            t1_us=self.t1_us[:n],
            t2star_us=self.t2star_us[:n],
            readout=self.readout[:n],
            y2_layer_ns=self.y2_layer_ns,
            cz_layer_ns=self.cz_layer_ns,
            cz_phase_mean_rad=self.cz_phase_mean_rad,
            cz_phase_std_rad=self.cz_phase_std_rad,
            zz_rate_mhz=self.zz_rate_mhz[: max(n - 1, 0)],
            tphi_ceiling_us=self.tphi_ceiling_us,
        )


# ---------------------------------------------------------------------------
# operation list shared by the trajectory and density-matrix executors
#
#   ("u1", q, m)          deterministic single-qubit matrix
#   ("u2", q0, q1, m)     deterministic two-qubit matrix
#   ("pf", q, p)          Z on q with probability p
#   ("czf", q0, q1, p)    diag(1, 1, 1, -1) on (q0, q1) with probability p
#   ("ad", q, gamma)      amplitude-damping Kraus pair


def _zz_matrix(phase):
    return np.diag([1, 1, 1, np.exp(-1j * phase)]).astype(complex)


def build_program(n, model, gate_set="CZ"):
    """Noisy gate sequence preparing LC_n on the first ``n`` model qubits.

    The conditional-phase error model applies to CZ gates only.
    """
    if n > model.n_qubits:
        raise ValidityError(f"model covers {model.n_qubits} qubits, asked for {n}")
    circ = cluster.lc_circuit(n, gate_set)
    mu, sd = model.cz_phase_mean_rad, model.cz_phase_std_rad
    cz_mat = None
    if mu != 0.0:
        cz_mat = np.diag([1, 1, 1, -np.exp(1j * mu)]).astype(complex)
    # Gaussian phase jitter only shrinks the |11> coherences by exp(-sd^2/2);
    # a random extra CZ with this probability is the same channel
    p_czf = -0.5 * math.expm1(-0.5 * sd * sd)
    ops = []
    for layer in circ.layers:
        two = [g for g in layer if isinstance(g, sv.Gate2)]
        dur = model.cz_layer_ns if two else model.y2_layer_ns
        for g in layer:
            if isinstance(g, sv.Gate1):
                ops.append(("u1", g.target, g.matrix))
            elif g.name == "CZ":
                ops.append(("u2", *g.targets, g.matrix if cz_mat is None else cz_mat))
                if p_czf > 0:
                    ops.append(("czf", *g.targets, p_czf))
            else:
                ops.append(("u2", *g.targets, g.matrix))
        busy = {frozenset(g.targets) for g in two}
        for q in range(n - 1):
            rate = model.zz_rate_mhz[q]
            if rate != 0.0 and frozenset((q, q + 1)) not in busy:
                ops.append(("u2", q + 1, q, _zz_matrix(2 * math.pi * rate * dur * 1e-3)))
        for q in range(n):
            if math.isfinite(model.t1_us[q]):
                ops.append(("ad", q, channel_amplitude_damping(dur, model.t1_us[q])))
            if math.isfinite(model.tphi_us[q]):
                ops.append(("pf", q, channel_phase_flip(dur, model.tphi_us[q])))
    return ops


def _apply_det(amps, n, op):
    if op[0] == "u1":
        sv.apply_matrix1(amps, n, op[2], op[1])
    else:
        sv.apply_matrix2(amps, n, op[3], op[1], op[2])


def _bit_view(amps, n, q):
    return amps.reshape(1 << (n - q - 1), 2, 1 << q)


def walk_trajectories(n, ops, counts, rng, leaf):
    """Run the shot tree; ``leaf(amps, counts)`` is called once per history.

    ``counts`` is an integer array of shot counts, one entry per group of
    shots (e.g. per measurement basis); groups share the state evolution but
    draw their error histories independently.  Branch states are carried
    unnormalised together with their squared norm and normalised only at the
    leaves.
    """
    root = sv.zero_state(n).amps
    stack = [(root, 1.0, 0, np.asarray(counts, dtype=np.int64))]
    while stack:
        amps, nrm, i, c = stack.pop()
        while i < len(ops):
            op = ops[i]
            i += 1
            kind = op[0]
            if kind == "u1" or kind == "u2":
                _apply_det(amps, n, op)
                continue
            if kind == "ad":
                q, gamma = op[1], op[2]
                v = _bit_view(amps, n, q)
                w1 = float(np.vdot(v[:, 1, :], v[:, 1, :]).real)
                pj = gamma * w1 / nrm
                if pj <= 0.0:
                    continue
                k = rng.binomial(c, min(pj, 1.0))
                if k.any():
                    # jump branch: |1> -> |0> on qubit q, squared norm w1
                    branch = amps if (k == c).all() else amps.copy()
                    bv = _bit_view(branch, n, q)
                    bv[:, 0, :] = bv[:, 1, :]
                    bv[:, 1, :] = 0.0
                    if branch is amps:
                        nrm = w1
                        continue
                    stack.append((branch, w1, i, k))
                    c = c - k
                v[:, 1, :] *= math.sqrt(1.0 - gamma)
                nrm -= gamma * w1
                continue
            # Pauli-type flips: pf / czf
            k = rng.binomial(c, op[-1])
            if not k.any():
                continue
            if (k == c).all():
                target = amps
            else:
                target = amps.copy()
                stack.append((target, nrm, i, k))
                c = c - k
            if kind == "pf":
                _bit_view(target, n, op[1])[:, 1, :] *= -1.0
            else:
                sv.apply_matrix2(target, n, _CZ_FLIP, op[1], op[2])
        if nrm != 1.0:
            amps /= math.sqrt(nrm)
        leaf(amps, c)


# ---------------------------------------------------------------------------
# experiments


@dataclass
class TrajectoryRun:
    """Raw counts per basis plus the per-shot outcome records behind them."""

    n_qubits: int
    shots: int
    counts: dict
    records: dict = field(default_factory=dict, repr=False)
    true_counts: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for basis, rec in self.records.items():
            if len(rec) != self.shots:
                raise ValidityError(f"{len(rec)} records for {self.shots} shots in {basis}")


def _block_sizes(shots):
    sizes = [BLOCK_SHOTS] * (shots // BLOCK_SHOTS)
    if shots % BLOCK_SHOTS:
        sizes.append(shots % BLOCK_SHOTS)
    return sizes


def _child(seed, k):
    """``k``-th spawned child of ``seed`` without mutating a passed SeedSequence."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return np.random.SeedSequence(ss.entropy, spawn_key=ss.spawn_key + (k,),
                                  pool_size=ss.pool_size)


def block_seeds(seed, shots):
    """Per-block seed sequences; block ``b`` always gets child ``b``."""
    return [(size, _child(seed, b)) for b, size in enumerate(_block_sizes(shots))]


def _leaf_probs(amps, n, basis):
    st = sv.basis_rotate(sv.StateVector(n, amps.copy()), basis)
    p = sv.probabilities(st).p
    return p / p.sum()


def _run_block(n, ops, bases, t, size, child):
    rng = np.random.default_rng(child)
    true = [np.zeros(1 << n, dtype=np.int64) for _ in bases]

    def leaf(amps, c):
        for g, basis in enumerate(bases):
            if c[g]:
                true[g] += rng.multinomial(c[g], _leaf_probs(amps, n, basis))

    walk_trajectories(n, ops, np.full(len(bases), size), rng, leaf)
    raw = [readout.sample_readout(Counts(n, tc), t, rng).counts for tc in true]
    return true, raw


def run_trajectories(n, model, shots, seed=0, bases=None, workers=1, records=True,
                     gate_set="CZ"):
    """Noisy LC_n preparation and measurement in each basis of ``bases``.

    Default bases are the two witness settings.  ``shots`` is per basis.
    """
    if not (2 <= n <= sv.MAX_QUBITS):
        raise SizeError(f"chain length must be in [2, {sv.MAX_QUBITS}], got {n}")
    if shots < 1:
        raise DomainError(f"shots must be >= 1, got {shots}")
    model = model.restrict(n)
    bases = tuple(cluster.witness_bases(n) if bases is None else bases)
    for b in bases:
        sv.check_basis(b, n)
    ops = build_program(n, model, gate_set)
    jobs = block_seeds(seed, shots)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda j: _run_block(n, ops, bases, model.readout, *j), jobs))
    else:
        parts = [_run_block(n, ops, bases, model.readout, *j) for j in jobs]
    counts, true_counts, recs = {}, {}, {}
    # records are shuffled from a stream no block uses
    rec_rng = np.random.default_rng(_child(seed, 1 << 30))
    for g, basis in enumerate(bases):
        true_counts[basis] = Counts(n, sum(p[0][g] for p in parts))
        counts[basis] = Counts(n, sum(p[1][g] for p in parts))
        if records:
            rec = np.repeat(np.arange(1 << n), counts[basis].counts)
            recs[basis] = rec[rec_rng.permutation(rec.size)]
    return TrajectoryRun(n, shots, counts, recs, true_counts)


def noisy_lc_experiment(n, model, shots, seed=0, workers=1, gate_set="CZ"):
    """Raw (unmitigated) ``(counts_xz, counts_zx)`` from a noisy run."""
    run = run_trajectories(n, model, shots, seed, workers=workers, records=False,
                           gate_set=gate_set)
    xz, zx = cluster.witness_bases(n)
    return run.counts[xz], run.counts[zx]


def trajectory_states(n, model, shots, seed=0):
    """Leaves of the shot tree before measurement: ``[(count, amps), ...]``."""
    model = model.restrict(n)
    ops = build_program(n, model)
    rng = np.random.default_rng(seed)
    out = []
    walk_trajectories(n, ops, [shots], rng, lambda a, c: out.append((int(c[0]), a.copy())))
    return out


# ---------------------------------------------------------------------------
# exact density-matrix evolution (oracle, n <= 8)


def _sandwich1(rho, n, m, q):
    """``m rho m^dag`` with ``m`` on qubit ``q``."""
    # the kernels act on the last axis: A -> A m^T
    a = np.ascontiguousarray(rho.T)
    sv.apply_matrix1(a, n, m, q)
    a = np.ascontiguousarray(a.T)
    return sv.apply_matrix1(a, n, m.conj(), q)


def _sandwich2(rho, n, m, q0, q1):
    a = np.ascontiguousarray(rho.T)
    sv.apply_matrix2(a, n, m, q0, q1)
    a = np.ascontiguousarray(a.T)
    return sv.apply_matrix2(a, n, m.conj(), q0, q1)


def evolve_density_matrix(n, ops, rho0=None):
    """Apply ``ops`` as exact channels, starting from ``|0...0>`` by default."""
    if n > densmat.MAX_QUBITS:
        raise SizeError(f"exact evolution is limited to {densmat.MAX_QUBITS} qubits")
    d = 1 << n
    if rho0 is None:
        rho = np.zeros((d, d), dtype=complex)
        rho[0, 0] = 1.0
    else:
        rho = np.array(rho0, dtype=complex)
    for op in ops:
        kind = op[0]
        if kind == "u1":
            rho = _sandwich1(rho, n, op[2], op[1])
        elif kind == "u2":
            rho = _sandwich2(rho, n, op[3], op[1], op[2])
        elif kind == "pf":
            p = op[2]
            rho = (1 - p) * rho + p * _sandwich1(rho, n, sv.Z, op[1])
        elif kind == "czf":
            p = op[3]
            rho = (1 - p) * rho + p * _sandwich2(rho, n, _CZ_FLIP, op[1], op[2])
        elif kind == "ad":
            g = op[2]
            k0 = np.array([[1, 0], [0, math.sqrt(1 - g)]], dtype=complex)
            k1 = np.array([[0, math.sqrt(g)], [0, 0]], dtype=complex)
            rho = _sandwich1(rho, n, k0, op[1]) + _sandwich1(rho, n, k1, op[1])
        else:
            raise ValidityError(f"unknown operation {kind!r}")
    return densmat.DensityMatrix(n, rho)


def exact_state(n, model):
    """Density matrix the noisy circuit prepares (before measurement)."""
    return evolve_density_matrix(n, build_program(n, model.restrict(n)))


def exact_raw_distributions(n, model):
    """Exact ``(P0_xz, P0_zx)`` including readout confusion."""
    model = model.restrict(n)
    rho = exact_state(n, model)
    return tuple(
        readout.apply_readout_noise(densmat.probabilities(rho, b), model.readout)
        for b in cluster.witness_bases(n)
    )


def cz_program(model):
    """One CZ layer between the model's two qubits, with its layer noise."""
    if model.n_qubits != 2:
        raise ValidityError(f"a CZ channel needs a two-qubit model, got {model.n_qubits}")
    mu, sd = model.cz_phase_mean_rad, model.cz_phase_std_rad
    cz = sv.CZ if mu == 0.0 else np.diag([1, 1, 1, -np.exp(1j * mu)]).astype(complex)
    ops = [("u2", 1, 0, cz)]
    p_czf = -0.5 * math.expm1(-0.5 * sd * sd)
    if p_czf > 0:
        ops.append(("czf", 1, 0, p_czf))
    dur = model.cz_layer_ns
    for q in range(2):
        if math.isfinite(model.t1_us[q]):
            ops.append(("ad", q, channel_amplitude_damping(dur, model.t1_us[q])))
        if math.isfinite(model.tphi_us[q]):
            ops.append(("pf", q, channel_phase_flip(dur, model.tphi_us[q])))
    return ops


def cz_channel(model):
    """Executor ``rho -> E(rho)`` for a noisy CZ, 4x4 matrices ordered ``|q1 q0>``."""
    ops = cz_program(model)
    return lambda rho: evolve_density_matrix(2, ops, rho).rho
