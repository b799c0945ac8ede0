import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lcsim import cluster, densmat
from lcsim import statevec as sv
from lcsim.errors import ParseError, ShapeError, SizeError

from helpers import random_amps


def test_stabilizer_words():
    assert cluster.stabilizer(1, 4).letters == "XZII"
    assert cluster.stabilizer(2, 4).letters == "ZXZI"
    assert cluster.stabilizer(4, 4).letters == "IIZX"
    with pytest.raises(IndexError):
        cluster.stabilizer(5, 4)
    with pytest.raises(IndexError):
        cluster.stabilizer(0, 4)


def test_pauli_string_validation():
    with pytest.raises(ShapeError):
        cluster.PauliString(3, "XZ")
    with pytest.raises(ShapeError):
        cluster.PauliString(2, "XA")


def test_pauli_product():
    x = cluster.PauliString(1, "X")
    z = cluster.PauliString(1, "Z")
    zz = cluster.PauliString(2, "ZZ")
    assert (zz * zz).letters == "II"
    # XZ XZ on one qubit each is fine; X*Z alone is anti-Hermitian
    with pytest.raises(Exception):
        x * z
    xz = cluster.PauliString(2, "XZ")
    zx = cluster.PauliString(2, "ZX")
    prod = xz * zx
    assert prod.letters == "YY"
    # (X Z)(Z X) = (XZ) (x) (ZX) = (-iY) (x) (iY) = Y Y
    assert prod.sign == 1


def test_cz_schedule_twelve():
    layers = cluster.cz_schedule(12)
    assert [set(l) for l in layers] == [
        {(12, 11), (9, 8), (6, 5), (3, 2)},
        {(11, 10), (8, 7), (5, 4), (2, 1)},
        {(10, 9), (7, 6), (4, 3)},
    ]


def test_lc_circuit_shapes():
    c = cluster.lc_circuit(12)
    assert c.count("CZ") == 11
    assert len(c.two_qubit_layers()) == 3
    c2 = cluster.lc_circuit(2)
    assert len(c2.layers) == 2 and c2.count("CZ") == 1 and c2.count("Y/2") == 2
    with pytest.raises(SizeError):
        cluster.lc_circuit(1)
    with pytest.raises(SizeError):
        cluster.lc_circuit(21)


@pytest.mark.parametrize("n", range(2, 21))
def test_layer_validity(n):
    c = cluster.lc_circuit(n)
    assert len(c.two_qubit_layers()) <= 3
    assert c.count("CZ") == n - 1
    for layer in c.layers:
        qs = [q for g in layer for q in g.qubits]
        assert len(qs) == len(set(qs))


def test_lc2_state():
    s = cluster.lc_state(2)
    assert np.allclose(s.amps, np.array([1, 1, 1, -1]) / 2, atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 7, 12])
def test_lc_state_stabilized(n):
    s = cluster.lc_state(n)
    for p in cluster.stabilizers(n):
        assert cluster.pauli_expectation(s, p) == pytest.approx(1.0, abs=1e-10)
    assert np.allclose(s.amps, cluster.lc_amplitudes(n), atol=1e-12)


def test_cx_variant_stabilized():
    for n in (2, 5, 6):
        s = cluster.lc_circuit(n, "CX").run()
        for p in cluster.stabilizers(n):
            assert cluster.pauli_expectation(s, p) == pytest.approx(1.0, abs=1e-10)


def test_offset_subchain():
    s = cluster.lc_state(3, offset=2, n_total=6)
    for i in range(1, 4):
        letters = "II" + cluster.stabilizer(i, 3).letters + "I"
        assert cluster.pauli_expectation(s, cluster.PauliString(6, letters)) == pytest.approx(1)
    # qubits outside the chain stay in |0>
    assert cluster.pauli_expectation(s, cluster.PauliString(6, "ZIIIII")) == pytest.approx(1)
    assert cluster.pauli_expectation(s, cluster.PauliString(6, "IIIIIZ")) == pytest.approx(1)


def test_pauli_expectations_simple():
    plus = sv.StateVector(1, np.array([1, 1]) / np.sqrt(2))
    assert cluster.pauli_expectation(plus, cluster.PauliString(1, "X")) == pytest.approx(1)
    assert cluster.pauli_expectation(sv.zero_state(1), cluster.PauliString(1, "X")) == 0
    with pytest.raises(ShapeError):
        cluster.pauli_expectation(sv.zero_state(2), cluster.PauliString(1, "X"))


def test_pauli_expectation_density_matches_state(rng):
    s = sv.StateVector(3, random_amps(3, rng))
    rho = densmat.from_pure(s)
    for letters in ("XYZ", "YYI", "ZIX"):
        p = cluster.PauliString(3, letters, -1)
        assert cluster.pauli_expectation(rho, p) == pytest.approx(
            cluster.pauli_expectation(s, p), abs=1e-12)


def test_circuit_text_roundtrip():
    for gs in ("CZ", "CX"):
        c = cluster.lc_circuit(5, gs)
        back = cluster.Circuit.from_text(c.to_text())
        assert back.to_text() == c.to_text()
        assert np.allclose(back.run().amps, c.run().amps)
    with pytest.raises(ParseError):
        cluster.Circuit.from_text("CZ 1,2 0\n")
    with pytest.raises(ParseError):
        cluster.Circuit.from_text("# qubits 2\nFOO 1 0\n")


def test_schedule_order_invariance():
    c = cluster.lc_circuit(9)
    ref = c.run().amps
    rng = np.random.default_rng(5)
    gates = list(c.layers[1:])
    flat = [g for layer in gates for g in layer]
    for _ in range(5):
        order = rng.permutation(len(flat))
        shuffled = cluster.Circuit(9, [c.layers[0]] + [(flat[k],) for k in order])
        assert np.max(np.abs(shuffled.run().amps - ref)) < 1e-12


def test_witness_coefficients_small():
    wc = cluster.witness_coefficients(2)
    assert wc.basis_xz == "XZ" and wc.basis_zx == "ZX"
    assert wc.alpha_xz.sum() == 2
    # s1 = X1 Z2: even parity of bits 0 and 1 -> outcomes 00 and 11
    assert np.array_equal(np.flatnonzero(wc.alpha_xz), [0, 3])


def test_witness_coefficients_twelve():
    wc = cluster.witness_coefficients(12)
    assert wc.alpha_xz.sum() == 64 and wc.alpha_zx.sum() == 64
    assert set(np.unique(wc.alpha_xz)) <= {0.0, 1.0}
    pxz, _ = cluster.ideal_distributions(12)
    # indicator equals the ideal distribution times 2^6
    assert np.allclose(wc.alpha_xz, pxz.p * 64, atol=1e-9)


@pytest.mark.parametrize("n", range(2, 13))
def test_alpha_support_sizes(n):
    wc = cluster.witness_coefficients(n)
    n_odd, n_even = (n + 1) // 2, n // 2
    # each stabilizer of a setting halves the consistent outcomes
    assert wc.alpha_xz.sum() == 2 ** (n - n_odd)
    assert wc.alpha_zx.sum() == 2 ** (n - n_even)


@pytest.mark.parametrize("n", range(2, 13))
def test_ideal_identity(n):
    wc = cluster.witness_coefficients(n)
    pxz, pzx = cluster.ideal_distributions(n)
    assert wc.alpha_xz @ pxz.p == pytest.approx(1.0, abs=1e-10)
    assert wc.alpha_zx @ pzx.p == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("n", range(2, 9))
def test_stabilizer_group_closure(n):
    s = cluster.lc_state(n)
    gens = cluster.stabilizers(n)
    for mask in range(1, 1 << n):
        p = cluster.PauliString(n, "I" * n)
        for i in range(n):
            if mask >> i & 1:
                p = p * gens[i]
        assert cluster.pauli_expectation(s, p) == pytest.approx(1.0, abs=1e-9)


def test_stabilizers_commute():
    for n in range(2, 21):
        gens = cluster.stabilizers(n)
        for a, b in itertools.combinations(gens, 2):
            assert a.commutes_with(b)


def _projector_expectation(state, sites):
    """<prod_{i in sites} (1 + s_i)/2> expanded over all subset products."""
    n = state.n_qubits
    gens = [cluster.stabilizer(i, n) for i in sites]
    total = 0.0
    for r in range(len(gens) + 1):
        for sub in itertools.combinations(gens, r):
            p = cluster.PauliString(n, "I" * n)
            for g in sub:
                p = p * g
            total += cluster.pauli_expectation(state, p)
    return total / 2 ** len(gens)


@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_odd_even_setting_equivalence(n, seed):
    rng = np.random.default_rng(seed)
    s = sv.StateVector(n, random_amps(n, rng))
    wc = cluster.witness_coefficients(n)
    for alpha, basis, sites in ((wc.alpha_xz, wc.basis_xz, range(1, n + 1, 2)),
                                (wc.alpha_zx, wc.basis_zx, range(2, n + 1, 2))):
        p = sv.probabilities(sv.basis_rotate(s.copy(), basis)).p
        assert alpha @ p == pytest.approx(_projector_expectation(s, sites), abs=1e-9)
