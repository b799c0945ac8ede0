import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lcsim import readout
from lcsim.errors import ConditioningError, DomainError, ParseError, ShapeError
from lcsim.statevec import Counts, ProbDist

T1_US = [40.1, 34.7, 30.8, 43.2, 31.8, 34.3, 46.5, 38.1, 32.2, 54.6, 29.6, 30.3]
T2S_US = [7.9, 1.5, 6.3, 2.4, 4.9, 2.7, 6.8, 2.3, 5.1, 3.5, 5.9, 3.0]
F00 = [82.8, 94.4, 97.9, 95.8, 96.1, 95.8, 97.2, 95.4, 98.5, 97.1, 97.7, 96.5]
F11 = [80.0, 83.8, 86.7, 79.5, 90.9, 89.7, 90.8, 89.6, 90.1, 89.2, 91.1, 81.7]


def kron_matrix(t):
    m = np.eye(1)
    for ti in reversed(t):
        m = np.kron(m, ti.matrix)
    return m


def random_t(n, rng, lo=0.8):
    return [readout.TransitionMatrix(*rng.uniform(lo, 1.0, 2)) for _ in range(n)]


def test_transition_matrix_checks():
    with pytest.raises(DomainError):
        readout.TransitionMatrix(0.0, 0.9)
    with pytest.raises(DomainError):
        readout.TransitionMatrix(0.9, 1.2)
    with pytest.raises(ConditioningError):
        readout.TransitionMatrix(0.5, 0.5).inverse
    with pytest.raises(ConditioningError):
        readout.mitigate(ProbDist(1, [0.5, 0.5]), [readout.TransitionMatrix(0.4, 0.6)])
    t = readout.TransitionMatrix(0.9, 0.8)
    assert np.allclose(t.inverse @ t.matrix, np.eye(2))


def test_identity_confusion():
    d = ProbDist(3, np.random.default_rng(0).dirichlet(np.ones(8)))
    t = readout.perfect_readout(3)
    assert np.allclose(readout.apply_readout_noise(d, t).p, d.p)
    assert np.allclose(readout.mitigate(d, t).p, d.p)


def test_single_qubit_q1():
    t = [readout.bundled_device()[0].readout]
    out = readout.apply_readout_noise(ProbDist(1, [1.0, 0.0]), t)
    assert np.allclose(out.p, [0.828, 0.172])


def test_uniform_stays_uniform_iff_symmetric():
    u = ProbDist(2, np.full(4, 0.25))
    sym = [readout.TransitionMatrix(0.9, 0.9), readout.TransitionMatrix(0.8, 0.8)]
    assert np.allclose(readout.apply_readout_noise(u, sym).p, 0.25)
    asym = [readout.TransitionMatrix(0.9, 0.8), readout.TransitionMatrix(0.8, 0.8)]
    assert not np.allclose(readout.apply_readout_noise(u, asym).p, 0.25)


def test_length_mismatch():
    with pytest.raises(ShapeError):
        readout.apply_readout_noise(ProbDist(2, np.full(4, 0.25)), readout.perfect_readout(3))


def test_table_values():
    dev = readout.bundled_device()
    assert len(dev) == 12
    assert dev["Q10"].t1_us == 54.6 and dev["Q11"].t1_us == 29.6
    assert dev["Q5"].f00 == 0.961 and dev["Q5"].f11 == 0.909
    assert [q.t1_us for q in dev.qubits] == T1_US
    assert [q.t2star_us for q in dev.qubits] == T2S_US
    assert np.allclose([q.f00 for q in dev.qubits], np.array(F00) / 100)
    assert np.allclose([q.f11 for q in dev.qubits], np.array(F11) / 100)
    assert dev[10].anharm_mhz == -246.0
    assert "noise" in dev.sections and "pulse" in dev.sections


def test_missing_field_names_record():
    text = readout.device_file().read_text()
    start = text.index('name = "Q4"')
    cut = text.index("t2star_us", start)
    end = text.index("\n", cut)
    broken = text[:cut] + text[end + 1:]
    with pytest.raises(ParseError, match="Q4.*t2star_us"):
        readout.load_device_params(broken)


def test_bad_device_files():
    with pytest.raises(ParseError):
        readout.load_device_params("[[qubit]\nname=1\n")
    with pytest.raises(ParseError):
        readout.load_device_params("x = 1\n")
    with pytest.raises(ParseError, match="f00"):
        readout.load_device_params("[[qubit]]\nt1_us=1\nt2star_us=1\nf00=97\nf11=0.9\n")
    with pytest.raises(ParseError, match="unknown"):
        readout.load_device_params("[[qubit]]\nt1_us=1\nt2star_us=1\nf00=0.9\nf11=0.9\nfoo=1\n")


def test_t2_above_limit_warns_only():
    with pytest.warns(UserWarning):
        dev = readout.load_device_params("[[qubit]]\nt1_us=10\nt2star_us=30\nf00=0.9\nf11=0.9\n")
    assert dev[0].t2star_us == 30


def test_mitigation_may_go_negative():
    t = [readout.TransitionMatrix(0.9, 0.85)] * 2
    measured = ProbDist(2, [0.97, 0.01, 0.01, 0.01])
    m = readout.mitigate(measured, t)
    assert m.negative_mass() > 0
    assert m.total() == pytest.approx(1.0, abs=1e-12)


def test_sample_readout_statistics():
    rng = np.random.default_rng(2)
    t = [readout.TransitionMatrix(0.9, 0.8), readout.TransitionMatrix(0.95, 0.85)]
    true = Counts(2, [200_000, 0, 0, 200_000])
    out = readout.sample_readout(true, t, rng)
    expected = readout.apply_readout_noise(ProbDist(2, [0.5, 0, 0, 0.5]), t).p * 400_000
    assert out.shots == 400_000
    assert np.all(np.abs(out.counts - expected) < 5 * np.sqrt(expected) + 1)


# ---------------------------------------------------------------------------
# properties


@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_streaming_matches_kron(n, seed):
    rng = np.random.default_rng(seed)
    t = random_t(n, rng)
    d = ProbDist(n, rng.dirichlet(np.ones(1 << n)))
    dense = kron_matrix(t)
    assert np.max(np.abs(readout.apply_readout_noise(d, t).p - dense @ d.p)) < 1e-12
    inv = np.linalg.inv(dense)
    assert np.max(np.abs(readout.mitigate(d, t).p - inv @ d.p)) < 1e-10


@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_noise_output_is_distribution(n, seed):
    rng = np.random.default_rng(seed)
    t = random_t(n, rng, lo=0.05)
    out = readout.apply_readout_noise(ProbDist(n, rng.dirichlet(np.ones(1 << n))), t)
    assert np.all(out.p >= 0)
    assert out.total() == pytest.approx(1.0, abs=1e-12)


@given(st.integers(1, 8), st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_mitigation_linear(n, seed, a, b):
    rng = np.random.default_rng(seed)
    t = random_t(n, rng)
    p, q = rng.dirichlet(np.ones(1 << n)), rng.dirichlet(np.ones(1 << n))
    lhs = readout.mitigate(ProbDist(n, a * p + b * q), t).p
    rhs = a * readout.mitigate(ProbDist(n, p), t).p + b * readout.mitigate(ProbDist(n, q), t).p
    assert np.max(np.abs(lhs - rhs)) < 1e-10


@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_amplification_is_spectral_radius(n, seed):
    rng = np.random.default_rng(seed)
    t = random_t(n, rng, lo=0.7)
    ev = np.abs(np.linalg.eigvals(np.linalg.inv(kron_matrix(t))))
    assert ev.max() == pytest.approx(readout.amplification_bound(t), rel=1e-9)
    assert ev.min() == pytest.approx(1.0, rel=1e-9)


@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_amplification_bounds_symmetric_noise_growth(n, seed):
    rng = np.random.default_rng(seed)
    t = [readout.TransitionMatrix(f, f) for f in rng.uniform(0.7, 1.0, n)]
    bound = readout.amplification_bound(t)
    worst = 0.0
    for _ in range(50):
        # statistical noise is a difference of two distributions
        e = rng.dirichlet(np.ones(1 << n)) - rng.dirichlet(np.ones(1 << n))
        out = readout.mitigate(ProbDist(n, e), t).p
        worst = max(worst, np.linalg.norm(out) / np.linalg.norm(e))
    assert worst <= bound * (1 + 1e-9)


def test_amplification_tight_for_one_qubit():
    t = [readout.TransitionMatrix(0.9, 0.8)]
    e = np.array([0.1, -0.1])
    out = readout.mitigate(ProbDist(1, e), t).p
    assert np.linalg.norm(out) / np.linalg.norm(e) == pytest.approx(
        readout.amplification_bound(t))


def test_row_transform_matches_mitigation(rng):
    n = 4
    t = random_t(n, rng)
    alpha = rng.random(1 << n)
    f = rng.dirichlet(np.ones(1 << n))
    w = readout.row_transform(alpha, t)
    assert w @ f == pytest.approx(alpha @ readout.mitigate(ProbDist(n, f), t).p, abs=1e-12)


def test_batched_apply_local(rng):
    n, b = 3, 4
    p = rng.dirichlet(np.ones(1 << n), size=b)
    mats = np.array([[ti.matrix for ti in random_t(n, rng)] for _ in range(b)])
    out = readout.apply_local(p, mats)
    for k in range(b):
        assert np.allclose(out[k], readout.apply_local(p[k], mats[k]))


def test_no_warnings_on_bundled_table():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        readout.bundled_device()
