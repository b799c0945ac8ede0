"""Linear-cluster circuits, stabilizers and the two-setting witness coefficients.

Pauli words and basis words are written Q1 first: ``letters[j]`` acts on
qubit ``j`` (bit ``j`` of the basis index).  Stabilizer indices ``i`` are
1-based chain positions, ``s_i = Z_{i-1} X_i Z_{i+1}`` with missing
neighbours dropped at the ends.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import statevec as sv
from .errors import ParseError, ShapeError, SizeError, ValidityError

_PHASES = (1, 1j, -1, -1j)


@dataclass(frozen=True)
class PauliString:
    n_qubits: int
    letters: str
    sign: int = 1

    def __post_init__(self):
        if len(self.letters) != self.n_qubits:
            raise ShapeError(
                f"Pauli word {self.letters!r} has length {len(self.letters)}, need {self.n_qubits}"
            )
        if set(self.letters) - set("IXYZ"):
            raise ShapeError(f"invalid Pauli letters in {self.letters!r}")
        if self.sign not in (1, -1):
            raise ValidityError(f"sign must be +1 or -1, got {self.sign}")

    def __str__(self):
        return ("+" if self.sign > 0 else "-") + self.letters

    @property
    def x_mask(self):
        return sum(1 << j for j, c in enumerate(self.letters) if c in "XY")

    @property
    def z_mask(self):
        return sum(1 << j for j, c in enumerate(self.letters) if c in "ZY")

    @property
    def n_y(self):
        return self.letters.count("Y")

    def commutes_with(self, other):
        """Symplectic product test."""
        a = bin(self.x_mask & other.z_mask).count("1")
        b = bin(self.z_mask & other.x_mask).count("1")
        return (a + b) % 2 == 0

    def __mul__(self, other):
        if self.n_qubits != other.n_qubits:
            raise ShapeError("Pauli strings act on different qubit counts")
        # work in the X^x Z^z representation: P = i^{n_y} X^x Z^z
        x1, z1, x2, z2 = self.x_mask, self.z_mask, other.x_mask, other.z_mask
        # Z^z1 X^x2 = (-1)^{|z1 & x2|} X^x2 Z^z1
        k = self.n_y + other.n_y + 2 * bin(z1 & x2).count("1")
        x, z = x1 ^ x2, z1 ^ z2
        letters = "".join(
            "IXZY"[((x >> j) & 1) | (((z >> j) & 1) << 1)] for j in range(self.n_qubits)
        )
        k -= letters.count("Y")
        phase = _PHASES[k % 4] * self.sign * other.sign
        if phase not in (1, -1):
            raise ValidityError(f"product {self} * {other} is not Hermitian")
        return PauliString(self.n_qubits, letters, int(phase.real))


def stabilizer(i, n):
    if not (1 <= i <= n):
        raise IndexError(f"stabilizer index {i} out of range 1..{n}")
    letters = ["I"] * n
    letters[i - 1] = "X"
    if i > 1:
        letters[i - 2] = "Z"
    if i < n:
        letters[i] = "Z"
    return PauliString(n, "".join(letters))


def stabilizers(n):
    return [stabilizer(i, n) for i in range(1, n + 1)]


def pauli_expectation(state, pauli):
    """<psi|P|psi> for a :class:`StateVector`, or Tr(rho P) for a density matrix."""
    n = state.n_qubits
    if pauli.n_qubits != n:
        raise ShapeError(f"Pauli on {pauli.n_qubits} qubits vs state on {n}")
    idx = np.arange(1 << n)
    x, z = pauli.x_mask, pauli.z_mask
    parity = _popcount_parity(idx & z)
    coeff = (1j) ** pauli.n_y * pauli.sign * (1.0 - 2.0 * parity)
    if hasattr(state, "amps"):
        a = state.amps
        val = np.sum(np.conj(a[idx ^ x]) * a * coeff)
    else:
        rho = state.rho
        val = np.sum(rho[idx, idx ^ x] * coeff)
    return float(val.real)


def _popcount_parity(v):
    v = np.asarray(v, dtype=np.int64).copy()
    par = np.zeros_like(v)
    while np.any(v):
        par ^= v & 1
        v >>= 1
    return par


# ---------------------------------------------------------------------------
# circuits


@dataclass
class Circuit:
    n_qubits: int
    layers: list = field(default_factory=list)

    def __post_init__(self):
        for li, layer in enumerate(self.layers):
            seen = set()
            for g in layer:
                for q in g.qubits:
                    if not (0 <= q < self.n_qubits):
                        raise ValidityError(f"layer {li}: qubit {q} out of range")
                    if q in seen:
                        raise ValidityError(f"layer {li}: qubit {q} used twice")
                    seen.add(q)

    def gates(self):
        for layer in self.layers:
            yield from layer

    def two_qubit_layers(self):
        return [layer for layer in self.layers if any(isinstance(g, sv.Gate2) for g in layer)]

    def count(self, name):
        return sum(1 for g in self.gates() if g.name == name)

    def run(self, state=None):
        if state is None:
            state = sv.zero_state(self.n_qubits)
        if state.n_qubits != self.n_qubits:
            raise ShapeError("state and circuit sizes differ")
        for g in self.gates():
            sv.apply_gate(state, g)
        return state

    def to_text(self):
        """One gate per line: ``name targets layer`` with 1-based qubit labels."""
        lines = [f"# qubits {self.n_qubits}"]
        for li, layer in enumerate(self.layers):
            for g in layer:
                targets = ",".join(str(q + 1) for q in g.qubits)
                lines.append(f"{g.name} {targets} {li}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        n = None
        layers = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "qubits":
                    n = int(parts[1])
                continue
            try:
                name, targets, layer = line.split()
                qs = [int(t) - 1 for t in targets.split(",")]
                li = int(layer)
            except ValueError as exc:
                raise ParseError(f"line {lineno}: cannot parse {raw!r}") from exc
            if len(qs) == 1 and name in sv.GATE1_LIBRARY:
                g = sv.Gate1.named(name, qs[0])
            elif len(qs) == 2 and name in sv.GATE2_LIBRARY:
                g = sv.Gate2.named(name, *qs)
            else:
                raise ParseError(f"line {lineno}: unknown gate {name!r} on {len(qs)} qubits")
            layers.setdefault(li, []).append(g)
        if n is None:
            raise ParseError("missing '# qubits N' header")
        return cls(n, [tuple(layers[k]) for k in sorted(layers)])


def cz_schedule(n):
    """Chain bonds grouped into (at most) three parallel layers.

    Bonds are 1-based ``(i + 1, i)`` pairs.  The grouping is keyed on
    ``(n - i) % 3`` so that for ``n = 12`` the layers are
    {12-11, 9-8, 6-5, 3-2}, {11-10, 8-7, 5-4, 2-1}, {10-9, 7-6, 4-3}.
    """
    layers = []
    for key in (1, 2, 0):
        bonds = [(i + 1, i) for i in range(n - 1, 0, -1) if (n - i) % 3 == key]
        if bonds:
            layers.append(bonds)
    return layers


def lc_circuit(n, gate_set="CZ", offset=0, n_total=None):
    """Circuit preparing a length-``n`` linear cluster on qubits ``[offset, offset + n)``.

    ``gate_set="CZ"``: a Y/2 layer then the three-layer CZ schedule.
    ``gate_set="CX"``: Y/2 on odd chain sites, CX from each odd site onto its
    even neighbours, then H on the even sites; the trailing Hadamards map the
    CX-built state onto the CZ cluster exactly.
    """
    if not (2 <= n <= sv.MAX_QUBITS):
        raise SizeError(f"chain length must be in [2, {sv.MAX_QUBITS}], got {n}")
    n_total = n + offset if n_total is None else n_total
    if offset < 0 or offset + n > n_total or n_total > sv.MAX_QUBITS:
        raise SizeError(f"chain [{offset}, {offset + n}) does not fit {n_total} qubits")

    def q(site):  # 1-based chain site -> register qubit
        return offset + site - 1

    gate_set = gate_set.upper()
    layers = []
    if gate_set == "CZ":
        layers.append(tuple(sv.Gate1.named("Y/2", q(s)) for s in range(1, n + 1)))
        for bonds in cz_schedule(n):
            layers.append(tuple(sv.Gate2.named("CZ", q(a), q(b)) for a, b in bonds))
    elif gate_set == "CX":
        layers.append(tuple(sv.Gate1.named("Y/2", q(s)) for s in range(1, n + 1, 2)))
        for bonds in cz_schedule(n):
            layer = []
            for a, b in bonds:
                ctrl, tgt = (a, b) if a % 2 == 1 else (b, a)
                layer.append(sv.Gate2.named("CX", q(ctrl), q(tgt)))
            layers.append(tuple(layer))
        layers.append(tuple(sv.Gate1.named("H", q(s)) for s in range(2, n + 1, 2)))
    else:
        raise ValidityError(f"unknown gate set {gate_set!r} (use 'CZ' or 'CX')")
    return Circuit(n_total, layers)


def lc_state(n, offset=0, n_total=None):
    return lc_circuit(n, "CZ", offset, n_total).run()


def lc_amplitudes(n):
    """Closed form of the cluster: ``2^{-n/2} (-1)^{sum_i b_i b_{i+1}}``."""
    idx = np.arange(1 << n)
    bonds = (idx & (idx >> 1)) & ((1 << (n - 1)) - 1)
    return 2.0 ** (-n / 2) * (1.0 - 2.0 * _popcount_parity(bonds))


# ---------------------------------------------------------------------------
# witness coefficients


def witness_bases(n):
    """``(basis_xz, basis_zx)``: X on odd chain sites, and X on even sites."""
    xz = "".join("X" if (j + 1) % 2 == 1 else "Z" for j in range(n))
    zx = "".join("Z" if c == "X" else "X" for c in xz)
    return xz, zx


@dataclass(frozen=True)
class WitnessCoefficients:
    n_qubits: int
    alpha_xz: np.ndarray = field(repr=False)
    alpha_zx: np.ndarray = field(repr=False)
    basis_xz: str = ""
    basis_zx: str = ""

    def for_basis(self, which):
        if which == "xz":
            return self.alpha_xz, self.basis_xz
        if which == "zx":
            return self.alpha_zx, self.basis_zx
        raise KeyError(which)


def parity_indicator(n, sites):
    """1 where every stabilizer in ``sites`` has even outcome parity.

    In a basis with X on site ``i`` and Z on its neighbours, ``s_i`` reads
    out as ``(-1)^{b_{i-1} + b_i + b_{i+1}}``.
    """
    idx = np.arange(1 << n)
    ok = np.ones(1 << n, dtype=bool)
    for i in sites:
        q = i - 1
        mask = 1 << q
        if q > 0:
            mask |= 1 << (q - 1)
        if q < n - 1:
            mask |= 1 << (q + 1)
        ok &= _popcount_parity(idx & mask) == 0
    return ok.astype(float)


def witness_coefficients(n):
    if not (2 <= n <= sv.MAX_QUBITS):
        raise SizeError(f"chain length must be in [2, {sv.MAX_QUBITS}], got {n}")
    odd = range(1, n + 1, 2)
    even = range(2, n + 1, 2)
    xz, zx = witness_bases(n)
    return WitnessCoefficients(
        n_qubits=n,
        alpha_xz=parity_indicator(n, odd),
        alpha_zx=parity_indicator(n, even),
        basis_xz=xz,
        basis_zx=zx,
    )


def ideal_distributions(n):
    """Exact ``(P_xz, P_zx)`` of the ideal cluster."""
    out = []
    for basis in witness_bases(n):
        st = sv.StateVector(n, lc_amplitudes(n).astype(complex))
        out.append(sv.probabilities(sv.basis_rotate(st, basis)))
    return tuple(out)
