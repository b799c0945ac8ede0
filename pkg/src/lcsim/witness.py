"""Fidelity lower bound from two measurement settings, GME test, error bars.

The bound is ``alpha_xz . P_xz + alpha_zx . P_zx - 1`` with ``P`` the
readout-mitigated distributions.  Everything downstream exploits that it
is linear in the measured distributions: with ``w = (T^{-1})^T alpha`` the
bound on raw frequencies is just ``w . f``.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import readout
from .errors import DomainError, ShapeError
from .statevec import Counts, ProbDist

GME_THRESHOLD = 0.5
Z95 = 1.959963984540054


def _check(p, coeffs, label):
    if p.n_qubits != coeffs.n_qubits:
        raise ShapeError(f"{label} has {p.n_qubits} qubits, coefficients have {coeffs.n_qubits}")


def fidelity_bound(p_xz, p_zx, coeffs):
    _check(p_xz, coeffs, "P_xz")
    _check(p_zx, coeffs, "P_zx")
    return float(coeffs.alpha_xz @ p_xz.p + coeffs.alpha_zx @ p_zx.p - 1.0)


def mitigated_bound(raw_xz, raw_zx, coeffs, t):
    """Bound from raw (unmitigated) distributions."""
    return fidelity_bound(readout.mitigate(raw_xz, t), readout.mitigate(raw_zx, t), coeffs)


@dataclass
class WitnessResult:
    n_qubits: int
    fidelity_bound: float
    sigma_shot: float
    sigma_transition: float
    sigma_total: float
    n_sigma_above_half: float
    gme_certified: bool
    z: float = 0.0

    @property
    def ci95_halfwidth(self):
        """Half-width of a normal 95% interval built from ``sigma_total``."""
        return Z95 * self.sigma_total

    def to_dict(self):
        d = asdict(self)
        d["ci95_halfwidth"] = self.ci95_halfwidth
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d.pop("ci95_halfwidth", None)
        return cls(**d)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_text(self):
        verdict = "yes" if self.gme_certified else "no"
        return (
            f"n_qubits            {self.n_qubits}\n"
            f"fidelity_bound      {self.fidelity_bound:.4f}\n"
            f"sigma_shot          {self.sigma_shot:.4f}\n"
            f"sigma_transition    {self.sigma_transition:.4f}\n"
            f"sigma_total         {self.sigma_total:.4f}\n"
            f"ci95_halfwidth      {self.ci95_halfwidth:.4f}\n"
            f"n_sigma_above_half  {self.n_sigma_above_half:.1f}\n"
            f"gme_certified       {verdict} (z = {self.z:g})\n"
        )


def certify_gme(n_qubits, bound, sigma_shot, sigma_transition=0.0, z=0.0):
    """Package a bound with its error bars; certify when ``bound - z*sigma > 0.5``.

    The two sigma components add linearly, as the two fluctuation sources
    are treated as contributing additively.
    """
    sigma_total = float(sigma_shot) + float(sigma_transition)
    if not sigma_total > 0:
        raise DomainError(f"sigma_total must be positive, got {sigma_total}")
    return WitnessResult(
        n_qubits=n_qubits,
        fidelity_bound=float(bound),
        sigma_shot=float(sigma_shot),
        sigma_transition=float(sigma_transition),
        sigma_total=sigma_total,
        n_sigma_above_half=(bound - GME_THRESHOLD) / sigma_total,
        gme_certified=bool(bound - z * sigma_total > GME_THRESHOLD),
        z=float(z),
    )


# ---------------------------------------------------------------------------
# shot noise


def estimator_weights(coeffs, t):
    """``(w_xz, w_zx)`` such that the bound is ``w_xz.f_xz + w_zx.f_zx - 1``."""
    return readout.row_transform(coeffs.alpha_xz, t), readout.row_transform(coeffs.alpha_zx, t)


def shot_noise_sigma(p0_xz, p0_zx, t, coeffs, shots):
    """Multinomial standard deviation of the bound for ``shots`` per basis.

    ``p0_*`` are the raw (pre-mitigation) distributions the shots are drawn
    from.  ``shots`` may be an int or a pair ``(shots_xz, shots_zx)``.
    """
    _check(p0_xz, coeffs, "P0_xz")
    _check(p0_zx, coeffs, "P0_zx")
    s_xz, s_zx = (shots, shots) if np.isscalar(shots) else shots
    if min(s_xz, s_zx) < 1:
        raise DomainError("shots must be >= 1")
    var = 0.0
    for w, p0, s in zip(estimator_weights(coeffs, t), (p0_xz.p, p0_zx.p), (s_xz, s_zx)):
        mean = w @ p0
        var += max(0.0, (w * w) @ p0 - mean * mean) / s
    return math.sqrt(var)


# ---------------------------------------------------------------------------
# transition-matrix fluctuations


@dataclass
class FluctuationStudy:
    n_qubits: int
    trials: int
    mean_distortion: float
    std_distortion: float
    histogram: np.ndarray = field(repr=False)
    bin_edges: np.ndarray = field(repr=False)
    rejected: int = 0
    samples: np.ndarray | None = field(default=None, repr=False)

    def histogram_rows(self):
        return [
            (float(lo), float(hi), int(c))
            for lo, hi, c in zip(self.bin_edges[:-1], self.bin_edges[1:], self.histogram)
        ]


def seed_sequence(seed):
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _chunk_sizes(total, chunk):
    sizes = [chunk] * (total // chunk)
    if total % chunk:
        sizes.append(total % chunk)
    return sizes


def _run_chunks(fn, sizes, seed, workers):
    """Run ``fn(size, rng)`` per chunk with per-chunk spawned streams.

    Results come back in chunk order whatever the worker count, so the
    merged output is schedule-independent.
    """
    children = seed_sequence(seed).spawn(len(sizes))
    jobs = [(s, np.random.default_rng(c)) for s, c in zip(sizes, children)]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda job: fn(*job), jobs))
    return [fn(*job) for job in jobs]


def _draw_matrices(size, n, base, delta, rng):
    """Gaussian-perturbed confusion matrices; invalid draws are redrawn.

    Returns ``(mats, rejected)`` with ``mats`` of shape ``(size, n, 2, 2)``.
    """
    f00 = np.array([b.f00 for b in base])
    f11 = np.array([b.f11 for b in base])
    d00 = np.array([d[0] for d in delta])
    d11 = np.array([d[1] for d in delta])
    out00 = np.empty((size, n))
    out11 = np.empty((size, n))
    todo = np.arange(size)
    rejected = 0
    while todo.size:
        a = f00 + d00 * rng.standard_normal((todo.size, n))
        b = f11 + d11 * rng.standard_normal((todo.size, n))
        ok = np.all((a > 0) & (a <= 1) & (b > 0) & (b <= 1)
                    & (a + b - 1 > readout.SINGULAR_TOL), axis=1)
        out00[todo[ok]] = a[ok]
        out11[todo[ok]] = b[ok]
        rejected += int((~ok).sum())
        todo = todo[~ok]
    mats = np.empty((size, n, 2, 2))
    mats[..., 0, 0] = out00
    mats[..., 0, 1] = 1 - out11
    mats[..., 1, 0] = 1 - out00
    mats[..., 1, 1] = out11
    return mats, rejected


def transition_fluctuation_sigma(p_xz, p_zx, coeffs, t, delta, trials=10_000, seed=0,
                                 bins=40, chunk=250, workers=1, keep_samples=False):
    """Monte Carlo of the bound distortion when the true confusion matrices drift.

    Each trial draws ``f00' ~ N(f00, d00)``, ``f11' ~ N(f11, d11)`` per qubit,
    measures ``P0 = T' P`` and mitigates with the calibrated ``T``.  The
    distortion is the resulting bound minus the bound on ``P``.  ``delta``
    is a per-qubit list of ``(d00, d11)`` or a single pair for all qubits.
    """
    if trials < 100:
        raise DomainError(f"trials must be >= 100, got {trials}")
    n = coeffs.n_qubits
    _check(p_xz, coeffs, "P_xz")
    _check(p_zx, coeffs, "P_zx")
    if len(t) != n:
        raise ShapeError(f"{len(t)} transition matrices for {n} qubits")
    if np.ndim(delta) == 1:
        delta = [tuple(delta)] * n
    if len(delta) != n:
        raise ShapeError(f"{len(delta)} delta pairs for {n} qubits")
    w_xz, w_zx = estimator_weights(coeffs, t)
    ref = coeffs.alpha_xz @ p_xz.p + coeffs.alpha_zx @ p_zx.p

    def run(size, rng):
        mats, rej = _draw_matrices(size, n, t, delta, rng)
        meas_xz = readout.apply_local(np.broadcast_to(p_xz.p, (size, 1 << n)), mats)
        meas_zx = readout.apply_local(np.broadcast_to(p_zx.p, (size, 1 << n)), mats)
        return meas_xz @ w_xz + meas_zx @ w_zx - ref, rej

    parts = _run_chunks(run, _chunk_sizes(trials, chunk), seed, workers)
    samples = np.concatenate([d for d, _ in parts])
    rejected = sum(r for _, r in parts)
    mean = math.fsum(samples) / trials
    std = math.sqrt(math.fsum((samples - mean) ** 2) / (trials - 1)) if trials > 1 else 0.0
    lo, hi = samples.min(), samples.max()
    if hi <= lo:
        lo, hi = lo - 0.5e-12, hi + 0.5e-12
    hist, edges = np.histogram(samples, bins=bins, range=(lo, hi))
    return FluctuationStudy(
        n_qubits=n,
        trials=trials,
        mean_distortion=mean,
        std_distortion=std,
        histogram=hist,
        bin_edges=edges,
        rejected=rejected,
        samples=samples if keep_samples else None,
    )


def transition_sigma_linear(p_xz, p_zx, coeffs, t, delta):
    """First-order propagation of independent ``f00``/``f11`` jitter.

    Uses ``dBound/df = alpha . (T_q^{-1} dT_q)_q P`` summed over both bases,
    which is the analytic counterpart of the Monte Carlo above.
    """
    n = coeffs.n_qubits
    if np.ndim(delta) == 1:
        delta = [tuple(delta)] * n
    d_f00 = np.array([[1.0, 0.0], [-1.0, 0.0]])
    d_f11 = np.array([[0.0, -1.0], [0.0, 1.0]])
    eye = np.eye(2)
    var = 0.0
    for q in range(n):
        tinv = t[q].inverse
        for dmat, sd in ((d_f00, delta[q][0]), (d_f11, delta[q][1])):
            mats = [eye] * n
            mats[q] = tinv @ dmat
            grad = (coeffs.alpha_xz @ readout.apply_local(p_xz.p, mats)
                    + coeffs.alpha_zx @ readout.apply_local(p_zx.p, mats))
            var += (sd * grad) ** 2
    return math.sqrt(var)


# ---------------------------------------------------------------------------
# bootstrap


def bootstrap_sigma(counts_xz, counts_zx, t, coeffs, resamples=1000, seed=0, chunk=200,
                    workers=1):
    """Standard deviation of the bound over multinomial resamples of the counts."""
    if resamples < 100:
        raise DomainError(f"resamples must be >= 100, got {resamples}")
    if counts_xz.shots == 0 or counts_zx.shots == 0:
        raise DomainError("bootstrap needs non-empty counts")
    w_xz, w_zx = estimator_weights(coeffs, t)
    # only bins that were observed can be resampled
    parts_in = []
    for c, w in ((counts_xz, w_xz), (counts_zx, w_zx)):
        nz = np.flatnonzero(c.counts)
        parts_in.append((c.shots, c.counts[nz] / c.shots, w[nz]))

    def run(size, rng):
        out = np.full(size, -1.0)
        for shots, f, w in parts_in:
            draws = rng.multinomial(shots, f, size=size)
            out += draws @ w / shots
        return out

    samples = np.concatenate(_run_chunks(run, _chunk_sizes(resamples, chunk), seed, workers))
    mean = math.fsum(samples) / resamples
    return math.sqrt(math.fsum((samples - mean) ** 2) / (resamples - 1))


def analyse_counts(counts_xz, counts_zx, t, coeffs, delta=None, fluct_trials=10_000,
                   bootstrap=0, seed=0, z=0.0, workers=1):
    """End-to-end witness analysis of raw counts.

    Returns ``(result, extras)`` where ``extras`` carries the mitigated
    distributions, the bootstrap sigma (if requested) and the fluctuation
    study (if ``delta`` is given).
    """
    raw_xz, raw_zx = counts_xz.frequencies(), counts_zx.frequencies()
    p_xz, p_zx = readout.mitigate(raw_xz, t), readout.mitigate(raw_zx, t)
    bound = fidelity_bound(p_xz, p_zx, coeffs)
    s_shot = shot_noise_sigma(raw_xz, raw_zx, t, coeffs, (counts_xz.shots, counts_zx.shots))
    seeds = seed_sequence(seed).spawn(2)
    study = None
    s_trans = 0.0
    if delta is not None and np.any(np.asarray(delta) > 0):
        study = transition_fluctuation_sigma(p_xz, p_zx, coeffs, t, delta, fluct_trials,
                                             seeds[0], workers=workers)
        s_trans = study.std_distortion
    s_boot = None
    if bootstrap:
        s_boot = bootstrap_sigma(counts_xz, counts_zx, t, coeffs, bootstrap, seeds[1],
                                 workers=workers)
    if s_shot + s_trans > 0:
        result = certify_gme(coeffs.n_qubits, bound, s_shot, s_trans, z)
    else:
        # every shot landed on the witness support: no spread to report
        result = WitnessResult(coeffs.n_qubits, bound, 0.0, 0.0, 0.0,
                               math.copysign(math.inf, bound - GME_THRESHOLD),
                               bound > GME_THRESHOLD, float(z))
    extras = {"p_xz": p_xz, "p_zx": p_zx, "sigma_bootstrap": s_boot, "fluctuation": study,
              "negative_mass": p_xz.negative_mass() + p_zx.negative_mass()}
    return result, extras
