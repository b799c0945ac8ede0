"""Exact density-matrix oracles for small registers (n <= 8).

Same qubit convention as the statevector engine: qubit ``q`` is bit ``q``
of the row/column index.  Reshaping ``rho`` to ``(2,) * 2n`` puts qubit
``q`` on row axis ``n - 1 - q`` and column axis ``2n - 1 - q``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import cluster
from . import statevec as sv
from .errors import DomainError, NormalizationError, ShapeError, SizeError

MAX_QUBITS = 8
PSD_TOL = 1e-9


@dataclass
class DensityMatrix:
    n_qubits: int
    rho: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not (1 <= self.n_qubits <= MAX_QUBITS):
            raise SizeError(f"density matrices are limited to {MAX_QUBITS} qubits")
        self.rho = np.asarray(self.rho, dtype=complex)
        d = 1 << self.n_qubits
        if self.rho.shape != (d, d):
            raise ShapeError(f"expected a {d}x{d} matrix, got {self.rho.shape}")

    def trace(self):
        return float(np.trace(self.rho).real)

    def purity(self):
        return float(np.einsum("ij,ji->", self.rho, self.rho).real)

    def check(self, tol=1e-10):
        """Raise unless Hermitian, unit trace and PSD up to ``PSD_TOL``."""
        if np.max(np.abs(self.rho - self.rho.conj().T)) > tol:
            raise DomainError("density matrix is not Hermitian")
        if abs(self.trace() - 1.0) > tol:
            raise NormalizationError(f"trace is {self.trace()}")
        if np.linalg.eigvalsh(self.rho).min() < -PSD_TOL:
            raise DomainError("density matrix has negative eigenvalues")
        return self


def from_pure(state):
    if state.n_qubits > MAX_QUBITS:
        raise SizeError(f"density matrices are limited to {MAX_QUBITS} qubits")
    a = state.amps
    return DensityMatrix(state.n_qubits, np.outer(a, a.conj()))


def maximally_mixed(n):
    d = 1 << n
    return DensityMatrix(n, np.eye(d) / d)


def mix(terms):
    terms = list(terms)
    if not terms:
        raise DomainError("mix() needs at least one term")
    weights = np.array([w for w, _ in terms], dtype=float)
    if np.any(weights < 0):
        raise DomainError("mixture weights must be non-negative")
    if abs(weights.sum() - 1.0) > 1e-9:
        raise NormalizationError(f"mixture weights sum to {weights.sum()}")
    n = terms[0][1].n_qubits
    if any(r.n_qubits != n for _, r in terms):
        raise ShapeError("all mixture components need the same qubit count")
    rho = sum(w * r.rho for w, r in terms)
    return DensityMatrix(n, rho)


def _tensor(rho, n):
    return rho.reshape((2,) * (2 * n))


def partial_trace(rho, keep):
    """Reduced state on the qubits in ``keep`` (0-based, any order).

    The result keeps the kept qubits in increasing order, re-indexed from 0.
    """
    n = rho.n_qubits
    keep = sorted(set(int(q) for q in keep))
    if not keep:
        raise DomainError("keep must name at least one qubit")
    if keep[0] < 0 or keep[-1] >= n:
        raise DomainError(f"keep {keep} out of range for {n} qubits")
    t = _tensor(rho.rho, n)
    # einsum labels: row axis of qubit q -> 'a'+q, column -> 'A'+q (or shared if traced)
    row = [None] * n
    col = [None] * n
    letters = iter("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")
    for q in range(n):
        r = next(letters)
        row[n - 1 - q] = r
        col[n - 1 - q] = r if q not in keep else next(letters)
    out_rows = [row[n - 1 - q] for q in reversed(keep)]
    out_cols = [col[n - 1 - q] for q in reversed(keep)]
    spec = "".join(row) + "".join(col) + "->" + "".join(out_rows) + "".join(out_cols)
    red = np.einsum(spec, t)
    d = 1 << len(keep)
    return DensityMatrix(len(keep), red.reshape(d, d))


def partial_transpose(rho, subsystem):
    n = rho.n_qubits
    t = _tensor(rho.rho, n)
    axes = list(range(2 * n))
    for q in subsystem:
        r, c = n - 1 - q, 2 * n - 1 - q
        axes[r], axes[c] = axes[c], axes[r]
    d = 1 << n
    return t.transpose(axes).reshape(d, d)


def negativity(rho, subsystem):
    """``(||rho^{T_A}||_1 - 1) / 2`` with ``A`` the qubits in ``subsystem``.

    The partial transpose stays Hermitian, so a Hermitian eigensolver gives
    the trace norm.
    """
    ev = np.linalg.eigvalsh(partial_transpose(rho, subsystem))
    return float(max(0.0, (np.abs(ev).sum() - rho.trace()) / 2.0))


def true_fidelity(rho, n=None):
    """``<LC_n| rho |LC_n>``."""
    n = rho.n_qubits if n is None else n
    if n != rho.n_qubits:
        raise ShapeError(f"rho has {rho.n_qubits} qubits, asked for LC_{n}")
    lc = cluster.lc_amplitudes(n)
    return float(np.real(lc @ rho.rho @ lc))


def basis_unitary(basis):
    u = np.ones((1, 1), dtype=complex)
    # Q1 is the least-significant factor, i.e. the rightmost kron factor
    for letter in basis:
        u = np.kron(sv.H if letter == "X" else sv.I2, u)
    return u


def probabilities(rho, basis):
    sv.check_basis(basis, rho.n_qubits)
    u = basis_unitary(basis)
    p = np.real(np.einsum("ij,jk,ik->i", u, rho.rho, u.conj()))
    return sv.ProbDist(rho.n_qubits, p)


def random_pure(n, rng):
    """Haar-random pure state: i.i.d. complex Gaussian amplitudes, normalised."""
    a = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return sv.StateVector(n, a / np.linalg.norm(a))


def random_mixed(n, rng, n_terms=4):
    w = rng.dirichlet(np.ones(n_terms))
    return mix([(wi, from_pure(random_pure(n, rng))) for wi in w])


def product_state(low, high):
    """``|high> (x) |low>`` with ``low`` on the least-significant qubits."""
    return sv.StateVector(low.n_qubits + high.n_qubits, np.kron(high.amps, low.amps))


def random_biseparable(n, cut, seed=None, n_terms=4):
    """Mixture of ``n_terms`` random pure states, each a product across ``cut``.

    Qubits ``[0, cut)`` form one side and ``[cut, n)`` the other.
    """
    if not (1 <= cut < n):
        raise DomainError(f"cut must satisfy 1 <= cut < n, got cut={cut}, n={n}")
    rng = np.random.default_rng(seed)
    w = rng.dirichlet(np.ones(n_terms)) if n_terms > 1 else np.ones(1)
    terms = []
    for wi in w:
        psi = product_state(random_pure(cut, rng), random_pure(n - cut, rng))
        terms.append((wi, from_pure(psi)))
    return mix(terms)


def epr_state():
    return sv.StateVector(2, np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2))


def counterexample_components():
    """The two biseparable pieces: ``|EPR_12>|0_3>`` and ``|0_1>|EPR_23>``."""
    zero = sv.zero_state(1)
    epr12_0 = product_state(epr_state(), zero)
    zero_epr23 = product_state(zero, epr_state())
    return from_pure(epr12_0), from_pure(zero_epr23)


def counterexample_rho123():
    """Equal mixture of the two components; pairwise entangled, not GME."""
    a, b = counterexample_components()
    return mix([(0.5, a), (0.5, b)])
