"""Nelder-Mead simplex search and the CZ waveform calibration built on it."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError, OptimizationError
from . import transmon as tm


@dataclass
class NelderMeadResult:
    x: np.ndarray
    fun: float
    nit: int
    nfev: int
    converged: bool
    # one row per iteration: (iteration, best f, best x)
    trace: list = field(default_factory=list, repr=False)

    def trace_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        dim = len(self.x)
        w.writerow(["iteration", *[f"c{k + 1}" for k in range(dim)], "objective"])
        for it, f, x in self.trace:
            w.writerow([it, *[repr(float(v)) for v in x], repr(float(f))])
        return buf.getvalue()


def nelder_mead(fun, x0, max_iters=1000, xatol=1e-8, fatol=1e-10, step=0.05,
                adaptive=True, callback=None):
    """Minimise ``fun`` from ``x0`` with the Nelder-Mead simplex method.

    The initial simplex moves each coordinate by ``step`` relative to its
    value (0.00025 absolute for zero entries).  With ``adaptive`` the
    reflection/expansion/contraction/shrink coefficients scale with the
    dimension (Gao and Han), which helps beyond a handful of parameters.
    Stops when both the simplex spread in ``x`` and in ``f`` fall below the
    tolerances.  Any non-finite objective raises :class:`OptimizationError`.
    """
    x0 = np.asarray(x0, dtype=float).ravel()
    dim = x0.size
    if max_iters < 1:
        raise DomainError(f"max_iters must be >= 1, got {max_iters}")
    if adaptive:
        rho, chi, psi, sigma = 1.0, 1.0 + 2.0 / dim, 0.75 - 1.0 / (2 * dim), 1.0 - 1.0 / dim
    else:
        rho, chi, psi, sigma = 1.0, 2.0, 0.5, 0.5
    nfev = 0

    def f(x):
        nonlocal nfev
        nfev += 1
        v = float(fun(x))
        if not math.isfinite(v):
            raise OptimizationError(f"objective is {v} at x = {list(x)}", params=np.array(x))
        return v

    sim = np.empty((dim + 1, dim))
    sim[0] = x0
    for k in range(dim):
        y = x0.copy()
        y[k] = y[k] * (1.0 + step) if y[k] != 0 else 0.00025
        sim[k + 1] = y
    fs = np.array([f(x) for x in sim])
    order = np.argsort(fs, kind="stable")
    sim, fs = sim[order], fs[order]
    trace = [(0, fs[0], sim[0].copy())]
    it = 0
    converged = False
    while it < max_iters:
        if (np.max(np.abs(sim[1:] - sim[0])) <= xatol
                and np.max(np.abs(fs[1:] - fs[0])) <= fatol):
            converged = True
            break
        it += 1
        centroid = sim[:-1].mean(axis=0)
        xr = centroid + rho * (centroid - sim[-1])
        fr = f(xr)
        shrink = False
        if fr < fs[0]:
            xe = centroid + rho * chi * (centroid - sim[-1])
            fe = f(xe)
            sim[-1], fs[-1] = (xe, fe) if fe < fr else (xr, fr)
        elif fr < fs[-2]:
            sim[-1], fs[-1] = xr, fr
        elif fr < fs[-1]:
            xc = centroid + psi * rho * (centroid - sim[-1])
            fc = f(xc)
            if fc <= fr:
                sim[-1], fs[-1] = xc, fc
            else:
                shrink = True
        else:
            xc = centroid - psi * (centroid - sim[-1])
            fc = f(xc)
            if fc < fs[-1]:
                sim[-1], fs[-1] = xc, fc
            else:
                shrink = True
        if shrink:
            for k in range(1, dim + 1):
                sim[k] = sim[0] + sigma * (sim[k] - sim[0])
                fs[k] = f(sim[k])
        order = np.argsort(fs, kind="stable")
        sim, fs = sim[order], fs[order]
        trace.append((it, fs[0], sim[0].copy()))
        if callback is not None:
            callback(it, fs[0], sim[0])
    return NelderMeadResult(sim[0].copy(), float(fs[0]), it, nfev, converged, trace)


# ---------------------------------------------------------------------------
# CZ waveform


@dataclass
class PulseResult:
    waveform: tm.Waveform
    metrics: tm.GateMetrics
    objective: float
    search: NelderMeadResult | None = field(default=None, repr=False)
    calibration_scale: float = 1.0

    def summary(self):
        m = self.metrics
        return {
            "objective": self.objective,
            "conditional_phase_rad": m.conditional_phase,
            "phase_error_rad": m.conditional_phase - math.pi,
            "leakage": m.leakage,
            "process_fidelity": m.process_fidelity,
            "coeffs": list(self.waveform.coeffs),
            "iterations": self.search.nit if self.search else 0,
            "evaluations": self.search.nfev if self.search else 0,
        }


def calibrate_amplitude(wf, pair, dt_ns=0.01, lo=0.9, hi=1.1, tol=1e-6, max_steps=60):
    """Scale all coefficients so the conditional phase hits pi.

    Brackets ``phase - pi`` on ``[lo, hi]`` (the phase is measured in
    ``[0, 2 pi)`` and grows with the swing depth) and bisects with secant
    steps.  Returns the scale and the rescaled waveform; if no sign change
    is found the better end is returned.
    """
    base = np.array(wf.coeffs)

    def err(s):
        m = tm.gate_metrics(tm.evolve(pair, wf.with_coeffs(base * s), dt_ns))
        return m.conditional_phase - math.pi

    a, b = lo, hi
    fa, fb = err(a), err(b)
    if fa * fb > 0:
        s = a if abs(fa) < abs(fb) else b
        return s, wf.with_coeffs(base * s)
    s = a
    for _ in range(max_steps):
        s = b - fb * (b - a) / (fb - fa)
        if not (min(a, b) < s < max(a, b)):
            s = 0.5 * (a + b)
        fs = err(s)
        if abs(fs) < tol or abs(b - a) < tol:
            break
        if fa * fs < 0:
            b, fb = s, fs
        else:
            a, fa = s, fs
    return s, wf.with_coeffs(base * s)


def optimize(wf=None, pair=None, max_iters=1000, xatol=1e-8, fatol=1e-12, dt_ns=0.01,
             calibrate=True, callback=None):
    """Minimise ``1 - (2 F_++ + F_11)/3`` over the 8 ramp coefficients.

    Optionally calibrates the overall swing depth first so the search starts
    with the right conditional phase.  Returns the best waveform seen.
    """
    pair = tm.TransmonPair() if pair is None else pair
    wf = tm.default_waveform() if wf is None else wf
    scale = 1.0
    if calibrate:
        scale, wf = calibrate_amplitude(wf, pair, dt_ns)

    def fun(c):
        return tm.objective_from_metrics(tm.gate_metrics(tm.evolve(pair, wf.with_coeffs(c), dt_ns)))

    res = nelder_mead(fun, np.array(wf.coeffs), max_iters=max_iters, xatol=xatol, fatol=fatol,
                      callback=callback)
    best = wf.with_coeffs(res.x)
    metrics = tm.gate_metrics(tm.evolve(pair, best, dt_ns))
    return PulseResult(best, metrics, res.fun, res, scale)
