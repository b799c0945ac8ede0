"""Dense statevector engine.

Qubit ``q`` (0-based, so ``Q1`` is ``q = 0``) is bit ``q`` of the basis
index, i.e. the least-significant bit carries Q1.  Gate kernels reshape the
amplitude array so that the target bit becomes its own axis; this touches
every ``(k, k | 1 << q)`` index pair exactly once without ever forming a
``2**n x 2**n`` matrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ShapeError, SizeError, ValidityError

MAX_QUBITS = 20
UNITARY_TOL = 1e-8

SQRT1_2 = 1.0 / np.sqrt(2.0)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = SQRT1_2 * np.array([[1, 1], [1, -1]], dtype=complex)
# exp(-i pi Y / 4): maps |0> to |+> with no extra phase
Y2 = SQRT1_2 * np.array([[1, -1], [1, 1]], dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
# two-qubit matrices act on |t0 t1> with t0 the more significant factor,
# so CX has its control on targets[0]
CX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)

GATE1_LIBRARY = {"I": I2, "X": X, "Y": Y, "Z": Z, "H": H, "Y/2": Y2}
GATE2_LIBRARY = {"CZ": CZ, "CX": CX}


def _check_unitary(m, dim):
    m = np.asarray(m, dtype=complex)
    if m.shape != (dim, dim):
        raise ShapeError(f"expected a {dim}x{dim} matrix, got shape {m.shape}")
    resid = np.linalg.norm(m.conj().T @ m - np.eye(dim))
    if resid > UNITARY_TOL:
        raise ValidityError(f"matrix is not unitary (|U^dag U - I| = {resid:.3e})")
    return m


@dataclass(frozen=True)
class Gate1:
    matrix: np.ndarray
    target: int
    name: str = "U1"

    def __post_init__(self):
        object.__setattr__(self, "matrix", _check_unitary(self.matrix, 2))
        if self.target < 0:
            raise ValidityError(f"negative target {self.target}")

    @classmethod
    def named(cls, name, target):
        return cls(GATE1_LIBRARY[name], target, name)

    @property
    def qubits(self):
        return (self.target,)


@dataclass(frozen=True)
class Gate2:
    matrix: np.ndarray
    targets: tuple[int, int]
    name: str = "U2"

    def __post_init__(self):
        object.__setattr__(self, "matrix", _check_unitary(self.matrix, 4))
        t0, t1 = self.targets
        if t0 == t1:
            raise ValidityError(f"two-qubit gate needs distinct targets, got {self.targets}")
        if min(t0, t1) < 0:
            raise ValidityError(f"negative target in {self.targets}")
        object.__setattr__(self, "targets", (int(t0), int(t1)))

    @classmethod
    def named(cls, name, t0, t1):
        return cls(GATE2_LIBRARY[name], (t0, t1), name)

    @property
    def qubits(self):
        return self.targets


@dataclass
class StateVector:
    n_qubits: int
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_size(self.n_qubits)
        self.amps = np.ascontiguousarray(self.amps, dtype=complex)
        if self.amps.shape != (1 << self.n_qubits,):
            raise ShapeError(
                f"{self.n_qubits} qubits need {1 << self.n_qubits} amplitudes, "
                f"got shape {self.amps.shape}"
            )

    def copy(self):
        return StateVector(self.n_qubits, self.amps.copy())

    def norm(self):
        return float(np.vdot(self.amps, self.amps).real)


@dataclass
class ProbDist:
    """Outcome probabilities indexed like the amplitudes (Q1 = LSB).

    Entries may be slightly negative after readout mitigation.
    """

    n_qubits: int
    p: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        if self.p.shape != (1 << self.n_qubits,):
            raise ShapeError(
                f"{self.n_qubits} qubits need {1 << self.n_qubits} probabilities, "
                f"got shape {self.p.shape}"
            )

    def total(self):
        return float(np.sum(self.p))

    def negative_mass(self):
        """Total weight sitting on negative entries (a mitigation diagnostic)."""
        return float(-np.sum(self.p[self.p < 0]))


@dataclass
class Counts:
    n_qubits: int
    counts: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (1 << self.n_qubits,):
            raise ShapeError(
                f"{self.n_qubits} qubits need {1 << self.n_qubits} bins, "
                f"got shape {self.counts.shape}"
            )
        if np.any(self.counts < 0):
            raise DomainError("counts must be non-negative")

    @property
    def shots(self):
        return int(self.counts.sum())

    def as_dict(self):
        nz = np.flatnonzero(self.counts)
        return {int(k): int(self.counts[k]) for k in nz}

    @classmethod
    def from_dict(cls, n_qubits, mapping):
        c = np.zeros(1 << n_qubits, dtype=np.int64)
        for k, v in mapping.items():
            c[int(k)] += int(v)
        return cls(n_qubits, c)

    def frequencies(self):
        shots = self.shots
        if shots == 0:
            raise DomainError("empty counts")
        return ProbDist(self.n_qubits, self.counts / shots)


def _check_size(n):
    if not (1 <= n <= MAX_QUBITS):
        raise SizeError(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")


def zero_state(n):
    _check_size(n)
    amps = np.zeros(1 << n, dtype=complex)
    amps[0] = 1.0
    return StateVector(n, amps)


def plus_state(n):
    _check_size(n)
    return StateVector(n, np.full(1 << n, 2.0 ** (-n / 2), dtype=complex))


def _check_target(n, q):
    if not (0 <= q < n):
        raise ValidityError(f"target {q} out of range for {n} qubits")


def _require_contiguous(amps):
    # reshape of a non-contiguous array silently copies and loses the update
    if not amps.flags.c_contiguous:
        raise ValidityError("amplitude array must be C-contiguous")


def apply_matrix1(amps, n, m, q):
    """Apply a 2x2 matrix to qubit ``q`` of a raw amplitude array in place.

    ``amps`` may carry leading batch dimensions; the last axis is the
    ``2**n`` amplitude axis.  ``m`` need not be unitary (Kraus operators use
    this path too).
    """
    _require_contiguous(amps)
    lead = amps.shape[:-1]
    v = amps.reshape(lead + (1 << (n - q - 1), 2, 1 << q))
    a0 = v[..., 0, :].copy()
    a1 = v[..., 1, :]
    v[..., 0, :] = m[0, 0] * a0 + m[0, 1] * a1
    v[..., 1, :] = m[1, 0] * a0 + m[1, 1] * a1
    return amps


def apply_matrix2(amps, n, m, q0, q1):
    """Apply a 4x4 matrix on ``|b(q0) b(q1)>`` (q0 is the high factor) in place."""
    _require_contiguous(amps)
    hi, lo = max(q0, q1), min(q0, q1)
    lead = amps.shape[:-1]
    v = amps.reshape(lead + (1 << (n - hi - 1), 2, 1 << (hi - lo - 1), 2, 1 << lo))
    # slot s = 2*b(q0) + b(q1) -> view into v
    def view(b0, b1):
        bh, bl = (b0, b1) if q0 == hi else (b1, b0)
        return v[..., bh, :, bl, :]

    if np.count_nonzero(m - np.diag(np.diag(m))) == 0:
        d = np.diag(m)
        for s in range(4):
            if d[s] != 1:
                view(s >> 1, s & 1)[...] *= d[s]
        return amps
    old = [view(s >> 1, s & 1).copy() for s in range(4)]
    for r in range(4):
        acc = m[r, 0] * old[0]
        for s in range(1, 4):
            if m[r, s] != 0:
                acc = acc + m[r, s] * old[s]
        view(r >> 1, r & 1)[...] = acc
    return amps


def apply_gate1(state, gate):
    _check_target(state.n_qubits, gate.target)
    apply_matrix1(state.amps, state.n_qubits, gate.matrix, gate.target)
    return state


def apply_gate2(state, gate):
    q0, q1 = gate.targets
    _check_target(state.n_qubits, q0)
    _check_target(state.n_qubits, q1)
    apply_matrix2(state.amps, state.n_qubits, gate.matrix, q0, q1)
    return state


def apply_gate(state, gate):
    if isinstance(gate, Gate1):
        return apply_gate1(state, gate)
    return apply_gate2(state, gate)


def check_basis(basis, n):
    if len(basis) != n:
        raise ShapeError(f"basis word {basis!r} has length {len(basis)}, need {n}")
    bad = set(basis) - {"X", "Z"}
    if bad:
        raise ShapeError(f"basis letters must be X or Z, got {sorted(bad)}")


def basis_rotate(state, basis):
    """Rotate so a computational-basis measurement reads out ``basis``.

    ``basis[j]`` is the letter for qubit ``j`` (Q1 first).  Hadamard is
    applied wherever the letter is X.
    """
    check_basis(basis, state.n_qubits)
    for q, letter in enumerate(basis):
        if letter == "X":
            apply_matrix1(state.amps, state.n_qubits, H, q)
    return state


def probabilities(state):
    p = state.amps.real ** 2 + state.amps.imag ** 2
    return ProbDist(state.n_qubits, p)


def sample(dist, shots, seed=None):
    """Draw ``shots`` multinomial samples from ``dist``; returns :class:`Counts`.

    ``seed`` may be an int, a ``SeedSequence`` or a ``Generator``.
    """
    if shots < 1:
        raise DomainError(f"shots must be >= 1, got {shots}")
    p = np.asarray(dist.p, dtype=float)
    if np.any(p < 0):
        raise DomainError(
            f"cannot sample a distribution with negative entries (min {p.min():.3e})"
        )
    total = p.sum()
    if not np.isfinite(total) or total <= 0:
        raise DomainError("distribution has no positive mass")
    rng = np.random.default_rng(seed)
    return Counts(dist.n_qubits, rng.multinomial(shots, p / total))


def format_outcome(k, n):
    """Bitstring for outcome ``k`` printed Q_n first (so Q1 is the last char)."""
    return format(k, f"0{n}b")


def parse_outcome(s):
    return int(s, 2)
