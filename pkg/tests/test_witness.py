import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lcsim import cluster, densmat, readout, witness
from lcsim import statevec as sv
from lcsim.errors import DomainError, ShapeError
from lcsim.statevec import Counts, ProbDist


def exact_bound(rho, t=None):
    n = rho.n_qubits
    wc = cluster.witness_coefficients(n)
    pxz = densmat.probabilities(rho, wc.basis_xz)
    pzx = densmat.probabilities(rho, wc.basis_zx)
    if t is not None:
        raw_xz, raw_zx = readout.apply_readout_noise(pxz, t), readout.apply_readout_noise(pzx, t)
        return witness.mitigated_bound(raw_xz, raw_zx, wc, t)
    return witness.fidelity_bound(pxz, pzx, wc)


def test_ideal_bound_is_one():
    for n in (2, 5, 12):
        pxz, pzx = cluster.ideal_distributions(n)
        assert witness.fidelity_bound(pxz, pzx, cluster.witness_coefficients(n)) == \
            pytest.approx(1.0, abs=1e-10)


def test_product_plus_state_bound():
    s = sv.plus_state(4)
    wc = cluster.witness_coefficients(4)
    pxz = sv.probabilities(sv.basis_rotate(s.copy(), wc.basis_xz))
    pzx = sv.probabilities(sv.basis_rotate(s.copy(), wc.basis_zx))
    assert witness.fidelity_bound(pxz, pzx, wc) == pytest.approx(-0.5, abs=1e-12)


def test_shape_mismatch():
    pxz, pzx = cluster.ideal_distributions(3)
    with pytest.raises(ShapeError):
        witness.fidelity_bound(pxz, pzx, cluster.witness_coefficients(4))


def test_certify_examples():
    r = witness.certify_gme(12, 0.5544, 0.0025)
    assert r.n_sigma_above_half == pytest.approx(21.76, abs=0.01)
    assert r.gme_certified
    r = witness.certify_gme(12, 0.7136, 0.0026)
    assert r.n_sigma_above_half == pytest.approx(82.15, abs=0.01)
    assert not witness.certify_gme(4, 0.5, 0.01).gme_certified
    with pytest.raises(DomainError):
        witness.certify_gme(4, 0.7, 0.0, 0.0)


@given(st.floats(-1, 1), st.floats(1e-6, 0.1), st.floats(0, 0.1), st.floats(0, 5))
def test_certify_invariants(bound, s_shot, s_trans, z):
    r = witness.certify_gme(5, bound, s_shot, s_trans, z)
    assert r.sigma_total == s_shot + s_trans
    assert r.gme_certified == (bound - z * r.sigma_total > 0.5)
    assert r.ci95_halfwidth == pytest.approx(1.959963984540054 * r.sigma_total)


def test_result_serialisation_roundtrip():
    r = witness.certify_gme(12, 0.5544, 0.0025, 0.001, 2.0)
    assert witness.WitnessResult.from_json(r.to_json()) == r
    assert "fidelity_bound      0.5544" in r.to_text()


def test_shot_sigma_zero_on_ideal():
    pxz, pzx = cluster.ideal_distributions(6)
    t = readout.perfect_readout(6)
    assert witness.shot_noise_sigma(pxz, pzx, t, cluster.witness_coefficients(6), 1000) < 1e-8


def _lc4_raw():
    dev = readout.bundled_device()
    t = dev.readout(range(4))
    pxz, pzx = cluster.ideal_distributions(4)
    # a little white noise keeps the estimator off the trivial support
    mix = lambda p: ProbDist(4, 0.8 * p.p + 0.2 / 16)
    return readout.apply_readout_noise(mix(pxz), t), readout.apply_readout_noise(mix(pzx), t), t


def test_shot_sigma_scaling():
    raw_xz, raw_zx, t = _lc4_raw()
    wc = cluster.witness_coefficients(4)
    s1 = witness.shot_noise_sigma(raw_xz, raw_zx, t, wc, 10_000)
    s2 = witness.shot_noise_sigma(raw_xz, raw_zx, t, wc, 20_000)
    assert s1 / s2 == pytest.approx(math.sqrt(2), rel=1e-12)


def test_shot_sigma_matches_repetitions():
    raw_xz, raw_zx, t = _lc4_raw()
    wc = cluster.witness_coefficients(4)
    shots = 10_000
    rng = np.random.default_rng(99)
    vals = []
    for _ in range(400):
        cxz = Counts(4, rng.multinomial(shots, raw_xz.p))
        czx = Counts(4, rng.multinomial(shots, raw_zx.p))
        vals.append(witness.mitigated_bound(cxz.frequencies(), czx.frequencies(), wc, t))
    emp = np.std(vals, ddof=1)
    ana = witness.shot_noise_sigma(raw_xz, raw_zx, t, wc, shots)
    assert emp == pytest.approx(ana, rel=0.2)
    # doubling the shots shrinks the empirical spread by about sqrt(2)
    vals2 = []
    for _ in range(400):
        cxz = Counts(4, rng.multinomial(2 * shots, raw_xz.p))
        czx = Counts(4, rng.multinomial(2 * shots, raw_zx.p))
        vals2.append(witness.mitigated_bound(cxz.frequencies(), czx.frequencies(), wc, t))
    assert emp / np.std(vals2, ddof=1) == pytest.approx(math.sqrt(2), rel=0.15)


def test_bootstrap_matches_shot_sigma():
    raw_xz, raw_zx, t = _lc4_raw()
    wc = cluster.witness_coefficients(4)
    shots = 100_000
    cxz = sv.sample(raw_xz, shots, seed=1)
    czx = sv.sample(raw_zx, shots, seed=2)
    boot = witness.bootstrap_sigma(cxz, czx, t, wc, resamples=1000, seed=3)
    ana = witness.shot_noise_sigma(raw_xz, raw_zx, t, wc, shots)
    assert boot == pytest.approx(ana, rel=0.25)


def test_bootstrap_edge_cases():
    wc = cluster.witness_coefficients(2)
    t = readout.perfect_readout(2)
    one = Counts(2, [100, 0, 0, 0])
    assert witness.bootstrap_sigma(one, one, t, wc, resamples=100) == 0.0
    with pytest.raises(DomainError):
        witness.bootstrap_sigma(Counts(2, [0] * 4), one, t, wc, resamples=100)
    with pytest.raises(DomainError):
        witness.bootstrap_sigma(one, one, t, wc, resamples=10)


def test_bootstrap_deterministic_across_workers():
    raw_xz, raw_zx, t = _lc4_raw()
    wc = cluster.witness_coefficients(4)
    cxz, czx = sv.sample(raw_xz, 5000, seed=1), sv.sample(raw_zx, 5000, seed=2)
    a = witness.bootstrap_sigma(cxz, czx, t, wc, resamples=500, seed=8)
    b = witness.bootstrap_sigma(cxz, czx, t, wc, resamples=500, seed=8, workers=3)
    assert a == b
    assert a != witness.bootstrap_sigma(cxz, czx, t, wc, resamples=500, seed=9)


def _drift_inputs(n):
    t = [readout.TransitionMatrix(0.96, 0.87)] * n
    pxz, pzx = cluster.ideal_distributions(n)
    return pxz, pzx, cluster.witness_coefficients(n), t


def test_fluctuation_zero_delta():
    pxz, pzx, wc, t = _drift_inputs(4)
    st_ = witness.transition_fluctuation_sigma(pxz, pzx, wc, t, (0.0, 0.0), trials=200)
    assert st_.std_distortion == 0.0
    assert st_.histogram.sum() == 200


def test_fluctuation_small_n():
    pxz, pzx, wc, t = _drift_inputs(4)
    s = witness.transition_fluctuation_sigma(pxz, pzx, wc, t, (0.01, 0.01), trials=10_000,
                                             seed=4)
    assert abs(s.mean_distortion) < 3 * s.std_distortion / math.sqrt(s.trials)
    assert s.histogram.sum() == s.trials
    lin = witness.transition_sigma_linear(pxz, pzx, wc, t, (0.01, 0.01))
    assert s.std_distortion == pytest.approx(lin, rel=0.05)


def test_fluctuation_grows_with_n():
    stds = []
    for n in (4, 8):
        pxz, pzx, wc, t = _drift_inputs(n)
        stds.append(witness.transition_fluctuation_sigma(
            pxz, pzx, wc, t, (0.01, 0.01), trials=2000, seed=5).std_distortion)
    assert stds[1] > stds[0]


def test_fluctuation_rejections_counted():
    pxz, pzx, wc, t = _drift_inputs(2)
    t = [readout.TransitionMatrix(0.999, 0.999)] * 2
    s = witness.transition_fluctuation_sigma(pxz, pzx, wc, t, (0.01, 0.01), trials=500, seed=1)
    # about half the draws of a parameter pinned at 0.999 overshoot 1
    assert s.rejected > 500
    assert s.histogram.sum() == 500


def test_fluctuation_worker_invariant():
    pxz, pzx, wc, t = _drift_inputs(6)
    a = witness.transition_fluctuation_sigma(pxz, pzx, wc, t, (0.01, 0.01), trials=1000, seed=2)
    b = witness.transition_fluctuation_sigma(pxz, pzx, wc, t, (0.01, 0.01), trials=1000, seed=2,
                                             workers=4)
    assert a.mean_distortion == b.mean_distortion and a.std_distortion == b.std_distortion
    assert np.array_equal(a.histogram, b.histogram)
    with pytest.raises(DomainError):
        witness.transition_fluctuation_sigma(pxz, pzx, wc, t, (0.01, 0.01), trials=50)


def test_analyse_counts_ideal_and_noisy():
    n = 4
    pxz, pzx = cluster.ideal_distributions(n)
    wc = cluster.witness_coefficients(n)
    t = readout.perfect_readout(n)
    res, extras = witness.analyse_counts(sv.sample(pxz, 1000, 0), sv.sample(pzx, 1000, 1), t, wc)
    assert res.fidelity_bound == pytest.approx(1.0)
    assert res.n_sigma_above_half == math.inf and res.gme_certified
    raw_xz, raw_zx, t = _lc4_raw()
    res, extras = witness.analyse_counts(sv.sample(raw_xz, 10_000, 0),
                                         sv.sample(raw_zx, 10_000, 1), t, wc,
                                         delta=(0.01, 0.01), fluct_trials=500, bootstrap=200)
    assert res.sigma_transition > 0 and extras["sigma_bootstrap"] > 0
    assert res.sigma_total == res.sigma_shot + res.sigma_transition


# ---------------------------------------------------------------------------
# properties


@given(st.integers(3, 4), st.integers(0, 2**32 - 1))
def test_bound_never_exceeds_fidelity(n, seed):
    rng = np.random.default_rng(seed)
    rho = densmat.random_mixed(n, rng, n_terms=int(rng.integers(1, 5)))
    assert exact_bound(rho) <= densmat.true_fidelity(rho) + 1e-9


@given(st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_bound_through_readout_pipeline(n, seed):
    rng = np.random.default_rng(seed)
    t = [readout.TransitionMatrix(*rng.uniform(0.8, 1.0, 2)) for _ in range(n)]
    rho = densmat.random_mixed(n, rng)
    assert exact_bound(rho, t) <= densmat.true_fidelity(rho) + 1e-9
    lc = densmat.from_pure(cluster.lc_state(n))
    assert exact_bound(lc, t) == pytest.approx(1.0, abs=1e-9)


@given(st.integers(3, 5), st.integers(0, 2**32 - 1))
def test_biseparable_never_certified(n, seed):
    cut = 1 + seed % (n - 1)
    rho = densmat.random_biseparable(n, cut, seed=seed)
    assert densmat.true_fidelity(rho) <= 0.5 + 1e-9
    assert exact_bound(rho) <= 0.5 + 1e-9


@given(st.integers(2, 6), st.integers(0, 2**32 - 1), st.floats(-2, 2))
def test_bound_affine(n, seed, lam):
    rng = np.random.default_rng(seed)
    wc = cluster.witness_coefficients(n)
    p1, p2, q = (ProbDist(n, rng.dirichlet(np.ones(1 << n))) for _ in range(3))
    combo = ProbDist(n, lam * p1.p + (1 - lam) * p2.p)
    lhs = witness.fidelity_bound(combo, q, wc)
    rhs = lam * witness.fidelity_bound(p1, q, wc) + (1 - lam) * witness.fidelity_bound(p2, q, wc)
    assert lhs == pytest.approx(rhs, abs=1e-12)
