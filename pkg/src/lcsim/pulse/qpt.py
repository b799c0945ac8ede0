"""Two-qubit quantum process tomography.

Sixteen product inputs from ``{|0>, |1>, |+>, |+i>}`` are sent through the
process, each output is reconstructed from Pauli expectations (exact, or
estimated from nine sampled measurement settings), the superoperator is
obtained by linear inversion and converted to the chi matrix in the
two-qubit Pauli basis.  The physical estimate clips negative eigenvalues of
chi and restores its trace.

Two-qubit matrices are ordered ``|a b>`` with ``a`` the more significant
factor, as for :class:`lcsim.statevec.Gate2`.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import TomographyError
from .. import statevec as sv

PAULI1 = (sv.I2, sv.X, sv.Y, sv.Z)
PAULI_LABELS = tuple(a + b for a in "IXYZ" for b in "IXYZ")
PAULI2 = tuple(np.kron(a, b) for a in PAULI1 for b in PAULI1)

_S = np.sqrt(0.5)
INPUT_KETS = (
    np.array([1, 0], dtype=complex),
    np.array([0, 1], dtype=complex),
    np.array([_S, _S], dtype=complex),
    np.array([_S, 1j * _S], dtype=complex),
)
COND_TOL = 1e8


def _vec(m):
    # column-major: vec(A X B) = (B^T kron A) vec(X)
    return m.reshape(-1, order="F")


def input_states():
    """The 16 product density matrices, first factor varying slowest."""
    out = []
    for a, b in itertools.product(INPUT_KETS, INPUT_KETS):
        k = np.kron(a, b)
        out.append(np.outer(k, k.conj()))
    return out


def _chi_basis():
    # column (m, n) holds vec of the map rho -> P_m rho P_n^dag
    cols = [np.kron(pn.conj(), pm).reshape(-1) for pm in PAULI2 for pn in PAULI2]
    return np.array(cols).T


_CHI_BASIS = None


def chi_basis():
    global _CHI_BASIS
    if _CHI_BASIS is None:
        _CHI_BASIS = _chi_basis()
    return _CHI_BASIS


@dataclass
class ProcessMatrix:
    """chi in the Pauli basis ``II, IX, ..., ZZ``: ``E(rho) = sum chi_mn P_m rho P_n``."""

    chi: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.chi = np.asarray(self.chi, dtype=complex)
        if self.chi.shape != (16, 16):
            raise TomographyError(f"chi must be 16x16, got {self.chi.shape}")

    @property
    def trace(self):
        return float(np.trace(self.chi).real)

    def hermiticity_residual(self):
        return float(np.max(np.abs(self.chi - self.chi.conj().T)))

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(0.5 * (self.chi + self.chi.conj().T)).min())

    def apply(self, rho):
        out = np.zeros((4, 4), dtype=complex)
        for m, pm in enumerate(PAULI2):
            tmp = pm @ rho
            for n, pn in enumerate(PAULI2):
                if self.chi[m, n] != 0:
                    out += self.chi[m, n] * tmp @ pn.conj().T
        return out

    def tp_residual(self):
        """``|| sum chi_mn P_n^dag P_m - I ||``; zero for trace-preserving maps."""
        acc = np.zeros((4, 4), dtype=complex)
        for m, pm in enumerate(PAULI2):
            for n, pn in enumerate(PAULI2):
                acc += self.chi[m, n] * pn.conj().T @ pm
        return float(np.linalg.norm(acc - np.eye(4)))

    def project(self):
        """Nearest PSD matrix with the same trace (Frobenius norm).

        Negative eigenvalues are clipped and the deficit they leave is taken
        evenly from the smallest surviving eigenvalues, zeroing those that
        would go negative in turn (Smolin, Gambetta and Smith).  Returns
        ``(ProcessMatrix, clipped_mass)``; a PSD input is returned unchanged,
        so the projection is idempotent.
        """
        h = 0.5 * (self.chi + self.chi.conj().T)
        e, v = np.linalg.eigh(h)
        clipped = float(-e[e < 0].sum())
        if clipped == 0.0:
            return ProcessMatrix(h), 0.0
        mu = e[::-1].copy()  # descending
        acc = 0.0
        k = mu.size
        while k > 0 and mu[k - 1] + acc / k < 0:
            acc += mu[k - 1]
            mu[k - 1] = 0.0
            k -= 1
        mu[:k] += acc / k if k else 0.0
        ep = mu[::-1]
        return ProcessMatrix((v * ep) @ v.conj().T), clipped


def chi_from_unitary(u):
    """chi of ``rho -> U rho U^dag``."""
    e = np.array([np.trace(p.conj().T @ u) / 4.0 for p in PAULI2])
    return ProcessMatrix(np.outer(e, e.conj()))


CZ_CHI = None


def cz_chi():
    global CZ_CHI
    if CZ_CHI is None:
        CZ_CHI = chi_from_unitary(np.diag([1, 1, 1, -1]).astype(complex))
    return CZ_CHI


def process_fidelity(chi, ideal=None):
    """``Tr(chi_ideal chi)``.

    Not renormalised by ``Tr(chi)``: population a trace-decreasing map loses
    (leakage) counts against the fidelity.
    """
    ideal = cz_chi() if ideal is None else ideal
    return float(np.real(np.trace(ideal.chi @ chi.chi)))


def phase_error_fidelity(eps):
    """Closed form of the process fidelity of ``diag(1, 1, 1, -e^{i eps})`` against CZ."""
    return (10.0 + 6.0 * np.cos(eps)) / 16.0


# ---------------------------------------------------------------------------
# measurement


def pauli_expectations(rho):
    return np.array([np.trace(p @ rho).real for p in PAULI2])


def _setting_unitary(letter):
    if letter == "X":
        return sv.H
    if letter == "Y":
        # H S^dag maps the Y eigenbasis onto Z
        return sv.H @ np.diag([1, -1j])
    return sv.I2


def sampled_expectations(rho, shots, rng):
    """Pauli expectations estimated from the nine settings ``{X,Y,Z}^2``.

    Every Pauli is averaged over all settings that measure it, so e.g.
    ``ZI`` uses the ``ZX``, ``ZY`` and ``ZZ`` data.
    """
    sums = np.zeros(16)
    hits = np.zeros(16)
    signs = {0: np.array([1, 1, 1, 1]), 1: np.array([1, -1, 1, -1]),
             2: np.array([1, 1, -1, -1]), 3: np.array([1, -1, -1, 1])}
    for a, b in itertools.product("XYZ", repeat=2):
        u = np.kron(_setting_unitary(a), _setting_unitary(b))
        p = np.clip(np.real(np.diag(u @ rho @ u.conj().T)), 0.0, None)
        counts = rng.multinomial(shots, p / p.sum())
        freq = counts / shots
        # outcomes ordered |ab>: bit of a is the high bit
        for la, lb, key in ((a, b, 3), (a, "I", 2), ("I", b, 1)):
            idx = PAULI_LABELS.index(la + lb)
            sums[idx] += signs[key] @ freq
            hits[idx] += 1
    out = np.zeros(16)
    out[0] = 1.0
    out[1:] = sums[1:] / hits[1:]
    return out


def state_from_expectations(r):
    return sum(ri * p for ri, p in zip(r, PAULI2)) / 4.0


# ---------------------------------------------------------------------------
# reconstruction


@dataclass
class QPTResult:
    raw: ProcessMatrix = field(repr=False)
    physical: ProcessMatrix = field(repr=False)
    process_fidelity: float = 0.0
    plusplus_fidelity: float = 0.0
    clipped_mass: float = 0.0
    tp_residual: float = 0.0
    outputs: list = field(default_factory=list, repr=False)


def superoperator(inputs, outputs):
    a = np.array([_vec(r) for r in inputs]).T
    b = np.array([_vec(r) for r in outputs]).T
    if np.linalg.cond(a) > COND_TOL:
        raise TomographyError("input states are not informationally complete")
    return b @ np.linalg.inv(a)


def chi_from_superoperator(s):
    basis = chi_basis()
    if np.linalg.cond(basis) > COND_TOL:
        raise TomographyError("chi basis is singular")
    return ProcessMatrix(np.linalg.solve(basis, s.reshape(-1)).reshape(16, 16))


def qpt_two_qubit(executor, shots=None, seed=0, workers=1):
    """Tomograph ``executor`` (a map from 4x4 to 4x4 density matrices).

    ``shots=None`` uses exact expectations; otherwise each of the nine
    settings per input is sampled with ``shots`` repetitions.
    """
    inputs = input_states()
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(len(inputs))]

    def run(k):
        out = executor(inputs[k])
        r = pauli_expectations(out) if shots is None else sampled_expectations(out, shots, rngs[k])
        return state_from_expectations(r)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(run, range(len(inputs))))
    else:
        outputs = [run(k) for k in range(len(inputs))]
    raw = chi_from_superoperator(superoperator(inputs, outputs))
    phys, clipped = raw.project()
    pp = np.full(4, 0.5, dtype=complex)
    target = np.diag([1, 1, 1, -1]) @ pp
    # the |++> input is the product of the third ket with itself
    rho_pp = outputs[2 * 4 + 2]
    f_pp = float(np.real(target.conj() @ rho_pp @ target))
    return QPTResult(
        raw=raw,
        physical=phys,
        process_fidelity=process_fidelity(phys),
        plusplus_fidelity=f_pp,
        clipped_mass=clipped,
        tp_residual=phys.tp_residual(),
        outputs=outputs,
    )


def unitary_executor(u):
    u = np.asarray(u, dtype=complex)
    return lambda rho: u @ rho @ u.conj().T


def propagator_executor(metrics):
    """Channel of a simulated CZ pulse on the computational subspace.

    Uses the virtual-Z corrected block; population that leaks out is lost,
    so the map is trace-non-increasing by the leakage.
    """
    m = metrics.corrected()
    return lambda rho: m @ rho @ m.conj().T
