"""Two coupled three-level transmons driven by a flux waveform.

Levels are ordered ``|a b>`` -> index ``3*a + b`` where ``a`` is the tuned
transmon (the one swept down towards its partner) and ``b`` the partner.
The Hamiltonian conserves the total excitation number, so it is block
diagonal with blocks of size 1, 2, 3, 2, 1; each block is propagated on its
own with exact exponentials of the piecewise-constant Hamiltonian.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import DomainError, IntegrationError, ValidityError

TWO_PI = 2.0 * math.pi
N_BASIS = 8
BAND_GHZ = (3.0, 6.0)
UNITARY_TOL = 1e-8
UNITARY_FAIL = 1e-6
MAX_PHASE_STEP = 1.0

# computational states inside the 9-dim space: |00>, |01>, |10>, |11>
COMP = (0, 1, 3, 4)
CZ4 = np.diag([1, 1, 1, -1]).astype(complex)

# (a, b) level pairs of each excitation-number block
_BLOCKS = tuple(
    tuple((a, n - a) for a in range(2, -1, -1) if 0 <= n - a <= 2) for n in range(5)
)


@dataclass(frozen=True)
class TransmonPair:
    """Anharmonicities and coupling; frequencies come from the waveform."""

    anharm_a_mhz: float = -246.0
    anharm_b_mhz: float = -201.0
    coupling_mhz: float = 12.0
    levels: int = 3

    def __post_init__(self):
        if not (self.anharm_a_mhz < 0 and self.anharm_b_mhz < 0):
            raise ValidityError("anharmonicities must be negative")
        if not self.coupling_mhz > 0:
            raise ValidityError("coupling must be positive")
        if self.levels != 3:
            raise ValidityError("only three-level transmons are modelled")


def ramp_basis(tau, plateau_ns):
    """``(1 - cos(2 pi k tau / T)) / 2`` for ``k = 1..8``; zero at both ends."""
    tau = np.clip(np.asarray(tau, dtype=float), 0.0, plateau_ns)
    k = np.arange(1, N_BASIS + 1)
    return 0.5 * (1.0 - np.cos(TWO_PI * np.outer(tau, k) / plateau_ns))


@dataclass(frozen=True)
class Waveform:
    """Tuned-transmon ramp ``w_idle + (w_op - w_idle) * sum_k c_k b_k(tau)``.

    The ramp runs over ``[edge_ns, edge_ns + plateau_ns]``.  The partner
    follows a sin^2 trapezoid: it rises over ``[0, edge_ns]`` (so it is in
    place just before the tuned transmon moves), holds, and falls over the
    last ``edge_ns``.
    """

    coeffs: tuple
    tuned_idle_ghz: float = 4.996
    tuned_op_ghz: float = 4.599
    partner_idle_ghz: float = 4.258
    partner_op_ghz: float = 4.343
    plateau_ns: float = 40.0
    edge_ns: float = 5.0

    def __post_init__(self):
        c = tuple(float(x) for x in np.ravel(self.coeffs))
        if len(c) != N_BASIS:
            raise ValidityError(f"waveform needs {N_BASIS} coefficients, got {len(c)}")
        object.__setattr__(self, "coeffs", c)
        if not (self.plateau_ns > 0 and self.edge_ns >= 0):
            raise ValidityError("plateau must be positive and edge offset non-negative")

    @property
    def duration_ns(self):
        return self.plateau_ns + 2.0 * self.edge_ns

    def with_coeffs(self, coeffs):
        return replace(self, coeffs=tuple(coeffs))

    def stretched(self, factor):
        """Same shape played ``factor`` times slower."""
        return replace(self, plateau_ns=self.plateau_ns * factor, edge_ns=self.edge_ns * factor)

    def frequencies(self, t_ns):
        """``(w_tuned, w_partner)`` in GHz at times ``t_ns``."""
        t = np.asarray(t_ns, dtype=float)
        tau = t - self.edge_ns
        inside = (tau > 0) & (tau < self.plateau_ns)
        ramp = ramp_basis(tau.ravel(), self.plateau_ns) @ np.array(self.coeffs)
        ramp = np.where(inside.ravel(), ramp, 0.0).reshape(t.shape)
        wa = self.tuned_idle_ghz + (self.tuned_op_ghz - self.tuned_idle_ghz) * ramp
        if self.edge_ns > 0:
            up = np.clip(t / self.edge_ns, 0.0, 1.0)
            down = np.clip((self.duration_ns - t) / self.edge_ns, 0.0, 1.0)
            trap = np.minimum(np.sin(0.5 * np.pi * up) ** 2, np.sin(0.5 * np.pi * down) ** 2)
        else:
            trap = ((t > 0) & (t < self.duration_ns)).astype(float)
        wb = self.partner_idle_ghz + (self.partner_op_ghz - self.partner_idle_ghz) * trap
        return wa, wb


def default_waveform(**overrides):
    """Flat-top start: a Tukey ramp with 8 ns edges projected onto the basis."""
    plateau = overrides.get("plateau_ns", 40.0)
    tau = np.linspace(0.0, plateau, 400)
    edge = np.clip(np.minimum(tau, plateau - tau) / 8.0, 0.0, 1.0)
    target = np.sin(0.5 * np.pi * edge) ** 2
    c, *_ = np.linalg.lstsq(ramp_basis(tau, plateau), target, rcond=None)
    return Waveform(tuple(c), **overrides)


@dataclass
class Propagator:
    """9x9 propagator in the frame rotating at each transmon's idle frequency."""

    u: np.ndarray = field(repr=False)
    duration_ns: float = 0.0
    unitarity_residual: float = 0.0


def _block_hamiltonians(pair, da, db):
    """Stacked block Hamiltonians (rad/ns) for detunings ``da``, ``db`` (rad/ns)."""
    ea, eb = TWO_PI * pair.anharm_a_mhz * 1e-3, TWO_PI * pair.anharm_b_mhz * 1e-3
    g = TWO_PI * pair.coupling_mhz * 1e-3
    out = []
    for states in _BLOCKS:
        m = len(states)
        h = np.zeros((da.size, m, m))
        for i, (a, b) in enumerate(states):
            h[:, i, i] = a * da + b * db + 0.5 * ea * a * (a - 1) + 0.5 * eb * b * (b - 1)
        for i, (a, b) in enumerate(states):
            for j, (c, d) in enumerate(states):
                # a^dag b + a b^dag moves one excitation between the transmons
                if c == a - 1 and d == b + 1:
                    h[:, i, j] = h[:, j, i] = g * math.sqrt(a * (b + 1))
        out.append((states, h))
    return out


def _ordered_product(u):
    """``u[-1] @ ... @ u[0]`` by pairwise reduction."""
    while len(u) > 1:
        if len(u) % 2:
            u = np.concatenate([u, np.eye(u.shape[1], dtype=complex)[None]])
        u = u[1::2] @ u[0::2]
    return u[0]


def evolve_samples(pair, wa_ghz, wb_ghz, dt_ns, idle_ghz):
    """Propagate piecewise-constant frequencies sampled at step midpoints.

    Internally one common frame (rotating at the tuned idle frequency) is
    used; the result is mapped to the per-transmon idle frames at the end.
    """
    wa = np.asarray(wa_ghz, dtype=float)
    wb = np.asarray(wb_ghz, dtype=float)
    if wa.shape != wb.shape or wa.ndim != 1 or wa.size == 0:
        raise DomainError("frequency samples must be equal-length 1-D arrays")
    if not dt_ns > 0:
        raise DomainError(f"dt must be positive, got {dt_ns}")
    lo, hi = BAND_GHZ
    if min(wa.min(), wb.min()) < lo or max(wa.max(), wb.max()) > hi:
        raise ValidityError(f"frequencies leave the {lo}-{hi} GHz band")
    ref = idle_ghz[0]
    da, db = TWO_PI * (wa - ref), TWO_PI * (wb - ref)
    u = np.zeros((9, 9), dtype=complex)
    total = wa.size * dt_ns
    for states, h in _block_hamiltonians(pair, da, db):
        if np.abs(h).sum(axis=(1, 2)).max() * dt_ns > MAX_PHASE_STEP:
            raise IntegrationError(f"dt = {dt_ns} ns is too coarse for this Hamiltonian")
        e, v = np.linalg.eigh(h)
        steps = (v * np.exp(-1j * e * dt_ns)[:, None, :]) @ v.conj().transpose(0, 2, 1)
        blk = _ordered_product(steps)
        idx = [3 * a + b for a, b in states]
        u[np.ix_(idx, idx)] = blk
    # common frame -> idle frames: exp(i sum_j (w_j,idle - ref) n_j T)
    n_a = np.repeat(np.arange(3), 3)
    n_b = np.tile(np.arange(3), 3)
    shift = TWO_PI * ((idle_ghz[0] - ref) * n_a + (idle_ghz[1] - ref) * n_b) * total
    u = np.exp(1j * shift)[:, None] * u
    resid = float(np.linalg.norm(u.conj().T @ u - np.eye(9)))
    if resid > UNITARY_FAIL:
        raise IntegrationError(f"propagator unitarity residual {resid:.2e}")
    return Propagator(u, total, resid)


def evolve(pair, wf, dt_ns=0.01):
    """Propagator of the full waveform."""
    steps = int(round(wf.duration_ns / dt_ns))
    if steps < 1 or abs(steps * dt_ns - wf.duration_ns) > 1e-9 * max(1.0, wf.duration_ns):
        raise DomainError(f"dt = {dt_ns} ns does not divide the {wf.duration_ns} ns waveform")
    t = (np.arange(steps) + 0.5) * dt_ns
    wa, wb = wf.frequencies(t)
    return evolve_samples(pair, wa, wb, dt_ns, (wf.tuned_idle_ghz, wf.partner_idle_ghz))


def evolve_static(pair, wa_ghz, wb_ghz, duration_ns, dt_ns=0.01, idle_ghz=None):
    """Propagator for frequencies held fixed for ``duration_ns``."""
    steps = int(round(duration_ns / dt_ns))
    idle = (wa_ghz, wb_ghz) if idle_ghz is None else idle_ghz
    return evolve_samples(pair, np.full(steps, wa_ghz), np.full(steps, wb_ghz), dt_ns, idle)


# ---------------------------------------------------------------------------
# figures of merit


@dataclass
class GateMetrics:
    conditional_phase: float
    leakage: float
    computational: np.ndarray = field(repr=False)
    deficit: float = 0.0

    def corrected(self):
        """Computational block after the virtual-Z rotations that zero the
        single-qubit phases of ``|01>`` and ``|10>``."""
        m = self.computational
        p01, p10 = np.angle(m[1, 1] / m[0, 0]), np.angle(m[2, 2] / m[0, 0])
        z = np.exp(-1j * np.array([np.angle(m[0, 0]), p01, p10, p01 + p10]))
        return z[:, None] * m

    @property
    def process_fidelity(self):
        """``|Tr(CZ^dag M)|^2 / 16`` for the virtual-Z corrected block."""
        return float(abs(np.trace(CZ4.conj().T @ self.corrected())) ** 2 / 16.0)


def gate_metrics(u):
    """Conditional phase, leakage out of ``|11>`` and the computational block.

    ``deficit`` is the average population the computational block loses,
    ``1 - ||M||_F^2 / 4``.
    """
    u = u.u if isinstance(u, Propagator) else np.asarray(u, dtype=complex)
    if u.shape != (9, 9):
        raise DomainError(f"expected a 9x9 propagator, got {u.shape}")
    m = u[np.ix_(COMP, COMP)]
    phase = np.angle(u[4, 4]) - np.angle(u[1, 1]) - np.angle(u[3, 3]) + np.angle(u[0, 0])
    phase = float(np.mod(phase, TWO_PI))
    leak = float(max(0.0, 1.0 - np.sum(np.abs(m[:, 3]) ** 2)))
    deficit = float(1.0 - np.sum(np.abs(m) ** 2) / 4.0)
    return GateMetrics(phase, leak, m, deficit)


def state_fidelities(metrics):
    """``(F_++, F_11)`` of the corrected gate against CZ."""
    m = metrics.corrected()
    pp = np.full(4, 0.5, dtype=complex)
    f_pp = abs(np.vdot(CZ4 @ pp, m @ pp)) ** 2
    e11 = np.array([0, 0, 0, 1], dtype=complex)
    f_11 = abs(np.vdot(CZ4 @ e11, m @ e11)) ** 2
    return float(f_pp), float(f_11)


def objective_from_metrics(metrics):
    f_pp, f_11 = state_fidelities(metrics)
    return 1.0 - (2.0 * f_pp + f_11) / 3.0


def objective(wf, pair=None, dt_ns=0.01):
    """``1 - (2 F_++ + F_11) / 3``; zero for a perfect CZ."""
    pair = TransmonPair() if pair is None else pair
    return objective_from_metrics(gate_metrics(evolve(pair, wf, dt_ns)))


def embed_cz():
    """Exact CZ on the computational states, identity on the rest."""
    u = np.eye(9, dtype=complex)
    u[4, 4] = -1.0
    return u


def sample_trajectory(wf, dt_ns=0.1):
    """Rows ``(t_ns, w_tuned_ghz, w_partner_ghz)`` for plotting."""
    t = np.arange(int(round(wf.duration_ns / dt_ns)) + 1) * dt_ns
    wa, wb = wf.frequencies(t)
    return np.column_stack([t, wa, wb])
