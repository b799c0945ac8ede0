"""Per-qubit readout confusion, its inverse, and device parameter files.

The joint confusion map is the tensor product of one 2x2 column-stochastic
matrix per qubit.  Both directions are applied one qubit at a time in
``O(n 2^n)``; the full ``2^n x 2^n`` matrix is never built.
"""
from __future__ import annotations

import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConditioningError, DomainError, ParseError, ShapeError
from .statevec import Counts, ProbDist

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class TransitionMatrix:
    """``[[f00, 1 - f11], [1 - f00, f11]]``: column = prepared, row = reported."""

    f00: float
    f11: float

    def __post_init__(self):
        for name in ("f00", "f11"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise DomainError(f"{name} must lie in (0, 1], got {v}")

    @property
    def matrix(self):
        return np.array([[self.f00, 1.0 - self.f11], [1.0 - self.f00, self.f11]])

    @property
    def determinant(self):
        return self.f00 + self.f11 - 1.0

    @property
    def inverse(self):
        det = self.determinant
        if det <= SINGULAR_TOL:
            raise ConditioningError(
                f"confusion matrix with f00={self.f00}, f11={self.f11} is not invertible"
            )
        return np.array([[self.f11, self.f11 - 1.0], [self.f00 - 1.0, self.f00]]) / det


def perfect_readout(n):
    return [TransitionMatrix(1.0, 1.0) for _ in range(n)]


def apply_local(p, mats):
    """Apply ``mats[q]`` (2x2) on the bit-``q`` axis of ``p`` for every qubit.

    ``p`` may be a batch of shape ``(batch, 2**n)``; ``mats`` may then be
    ``(batch, n, 2, 2)`` so that every row gets its own matrices.
    """
    mats = np.asarray(mats, dtype=float)
    n = mats.shape[-3]
    p = np.array(p, dtype=float)
    if p.shape[-1] != 1 << n:
        raise ShapeError(f"{n} matrices for a vector of length {p.shape[-1]}")
    batched = mats.ndim == 4
    if batched and (p.ndim != 2 or p.shape[0] != mats.shape[0]):
        raise ShapeError("per-row matrices need p of shape (batch, 2**n)")
    lead = p.shape[:-1]
    for q in range(n):
        v = p.reshape(lead + (1 << (n - q - 1), 2, 1 << q))
        # broadcast each coefficient against the (batch, high, low) slices
        if batched:
            m = mats[:, q, :, :, None, None]
            m00, m01, m10, m11 = m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1]
        else:
            m = mats[q]
            m00, m01, m10, m11 = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
        a0 = v[..., 0, :].copy()
        a1 = v[..., 1, :].copy()
        v[..., 0, :] = m00 * a0 + m01 * a1
        v[..., 1, :] = m10 * a0 + m11 * a1
    return p


def _check_len(dist, t):
    if len(t) != dist.n_qubits:
        raise ShapeError(f"{len(t)} transition matrices for {dist.n_qubits} qubits")


def apply_readout_noise(dist, t):
    _check_len(dist, t)
    return ProbDist(dist.n_qubits, apply_local(dist.p, [ti.matrix for ti in t]))


def mitigate(measured, t):
    """``T^{-1} P_m``; negative entries are kept (clipping would bias the bound)."""
    _check_len(measured, t)
    return ProbDist(measured.n_qubits, apply_local(measured.p, [ti.inverse for ti in t]))


def row_transform(alpha, t):
    """``alpha^T T^{-1}`` as a vector, i.e. ``(T^{-1})^T alpha``."""
    return apply_local(alpha, [ti.inverse.T for ti in t])


def amplification_bound(t):
    """Largest factor by which mitigation can scale a noise mode.

    Each per-qubit inverse has eigenvalues ``1`` and ``1/det``, so the joint
    inverse has spectral radius ``prod 1/det``.  For symmetric confusion
    (``f00 == f11``) the inverse is symmetric and this is also its operator
    norm; for asymmetric confusion individual vectors can grow somewhat more
    in a fixed norm, because the eigenvectors are not orthogonal.
    """
    return float(np.prod([1.0 / ti.determinant for ti in t]))


def sample_readout(counts, t, rng):
    """Push true-outcome counts through independent per-qubit bit flips.

    Each shot's reported bit ``q`` depends only on its true bit ``q``, so
    flipping the histogram one qubit at a time with binomial draws is an
    exact per-shot readout simulation.
    """
    if len(t) != counts.n_qubits:
        raise ShapeError(f"{len(t)} transition matrices for {counts.n_qubits} qubits")
    c = counts.counts.copy()
    n = counts.n_qubits
    for q, ti in enumerate(t):
        v = c.reshape(1 << (n - q - 1), 2, 1 << q)
        c0 = v[:, 0, :].copy()
        c1 = v[:, 1, :].copy()
        flip0 = rng.binomial(c0, 1.0 - ti.f00) if ti.f00 < 1.0 else np.zeros_like(c0)
        flip1 = rng.binomial(c1, 1.0 - ti.f11) if ti.f11 < 1.0 else np.zeros_like(c1)
        v[:, 0, :] = c0 - flip0 + flip1
        v[:, 1, :] = c1 - flip1 + flip0
    return Counts(n, c)


# ---------------------------------------------------------------------------
# device parameters


@dataclass
class QubitParams:
    name: str
    t1_us: float
    t2star_us: float
    f00: float
    f11: float
    freq_ghz: float | None = None
    opt_freq_ghz: float | None = None
    anharm_mhz: float | None = None
    y2_fidelity: float | None = None
    # fidelity of the CZ between this qubit and the next one in the chain
    cz_fidelity: float | None = None

    @property
    def readout(self):
        return TransitionMatrix(self.f00, self.f11)


@dataclass
class DeviceParams:
    qubits: list = field(default_factory=list)
    # raw [noise] / [pulse] / ... sections, handed to the modules that own them
    sections: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.qubits)

    def __getitem__(self, key):
        if isinstance(key, str):
            for q in self.qubits:
                if q.name == key:
                    return q
            raise KeyError(key)
        return self.qubits[key]

    def readout(self, qubits=None):
        sel = self.qubits if qubits is None else [self.qubits[i] for i in qubits]
        return [q.readout for q in sel]


_REQUIRED = ("t1_us", "t2star_us", "f00", "f11")
_OPTIONAL = ("freq_ghz", "opt_freq_ghz", "anharm_mhz", "y2_fidelity", "cz_fidelity")


def _as_float(rec, key, label):
    try:
        return float(rec[key])
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{label}: field {key!r} is not a number ({rec[key]!r})") from exc


def parse_device_params(data):
    """Build :class:`DeviceParams` from an already-decoded mapping."""
    records = data.get("qubit")
    if not isinstance(records, list) or not records:
        raise ParseError("device file needs at least one [[qubit]] record")
    qubits = []
    for i, rec in enumerate(records):
        label = f"qubit record {i + 1} ({rec.get('name', '?')})"
        name = str(rec.get("name", f"Q{i + 1}"))
        for key in _REQUIRED:
            if key not in rec:
                raise ParseError(f"{label}: missing required field {key!r}")
        vals = {key: _as_float(rec, key, label) for key in _REQUIRED}
        opts = {key: _as_float(rec, key, label) for key in _OPTIONAL if key in rec}
        unknown = set(rec) - set(_REQUIRED) - set(_OPTIONAL) - {"name"}
        if unknown:
            raise ParseError(f"{label}: unknown fields {sorted(unknown)}")
        if vals["t1_us"] <= 0 or vals["t2star_us"] <= 0:
            raise ParseError(f"{label}: t1_us and t2star_us must be positive")
        for key in ("f00", "f11", "y2_fidelity", "cz_fidelity"):
            v = vals.get(key, opts.get(key))
            if v is not None and not (0.0 < v <= 1.0):
                raise ParseError(f"{label}: {key} must lie in (0, 1], got {v}")
        if vals["t2star_us"] > 2.0 * vals["t1_us"] * 1.05:
            warnings.warn(f"{label}: T2* = {vals['t2star_us']} us exceeds 2*T1", stacklevel=2)
        qubits.append(QubitParams(name=name, **vals, **opts))
    sections = {k: v for k, v in data.items() if k != "qubit"}
    return DeviceParams(qubits, sections)


def load_device_params(source):
    """Parse a device file.

    ``source`` is a path, or the TOML text itself.  Schema: one
    ``[[qubit]]`` table per qubit with ``t1_us``, ``t2star_us``, ``f00``,
    ``f11`` (probabilities, not percent) required and ``name``,
    ``freq_ghz``, ``opt_freq_ghz``, ``anharm_mhz``, ``y2_fidelity``,
    ``cz_fidelity`` optional.  Any other top-level table is kept verbatim in
    ``DeviceParams.sections``.
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                    and Path(source).exists()):
        text = Path(source).read_text()
    else:
        text = source
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"malformed device file: {exc}") from exc
    return parse_device_params(data)


def device_file():
    return Path(__file__).parent / "data" / "device_12q.toml"


def bundled_device():
    """The 12-qubit reference device shipped with the package."""
    return load_device_params(device_file())
