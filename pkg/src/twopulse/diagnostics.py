"""Observables and verification helpers: pulse Areas, Area curves, transfer
length, conservation residuals, sech fits, peak counting and group
velocity."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit
from scipy.signal import find_peaks

from .analytic import (AnalyticSolution, PropagationCoefficients, analytic_density,
                       analytic_fields, averaged_density)
from .bloch import bloch_rhs
from .core import PUMP, STOKES, FieldState, MediumPrep
from .errors import DegenerateInversionError, InvalidParameterError, NotSinglePulseError
from .maxwell import pulse_area

TWO_PI = 2 * math.pi
PEAK_THRESHOLD = 0.1
TAIL_WINDOW = (1e-4, 1e-2)
# the acceptance band for "near 2 pi" output Areas is a local choice
AREA_BAND = 0.10


def abs_area(envelope, t_axis) -> float:
    """Integral of ``|Omega|``; equals :func:`pulse_area` for a globally phased pulse."""
    return float(np.trapezoid(np.abs(envelope), np.asarray(t_axis, dtype=float)))


@dataclass
class AreaReport:
    theta_a: float
    theta_b: float
    z_position: float = 0.0

    @property
    def theta_total(self):
        return np.hypot(self.theta_a, self.theta_b)


def area_report(state: FieldState, t_axis) -> AreaReport:
    return AreaReport(pulse_area(state.omega_a, t_axis), pulse_area(state.omega_b, t_axis),
                      state.z_position)


def _coeffs(coeffs):
    return coeffs.coeffs if isinstance(coeffs, AnalyticSolution) else coeffs


def theoretical_areas(prep: MediumPrep, coeffs: PropagationCoefficients, Z) -> AreaReport:
    """Closed-form Areas ``theta_a = 2 pi / h(Z)``, ``theta_b = 2 pi / h(-Z)``
    with ``h(Z) = sqrt(1 + exp(2 (alpha2 - beta2) kappa Z))``.  ``Z`` may be
    an array."""
    c = _coeffs(coeffs)
    s = 2 * prep.inversion * c.kappa * np.asarray(Z, dtype=float)
    theta_a = TWO_PI * np.exp(-0.5 * np.logaddexp(0.0, s))
    theta_b = TWO_PI * np.exp(-0.5 * np.logaddexp(0.0, -s))
    return AreaReport(theta_a, theta_b, Z)


def transfer_length(prep: MediumPrep, coeffs: PropagationCoefficients, theta_b_in: float) -> float:
    """Distance over which a Stokes pulse of Area ``theta_b_in`` grows to
    match the pump Area on the closed-form Area curves."""
    c = _coeffs(coeffs)
    if prep.inversion == 0:
        raise DegenerateInversionError("alpha2 == beta2: no finite transfer length")
    if not 0 < theta_b_in < TWO_PI:
        raise InvalidParameterError("theta_b_in must lie in (0, 2 pi)")
    if c.kappa <= 0:
        raise InvalidParameterError("kappa must be positive")
    return math.log((TWO_PI / theta_b_in) ** 2 - 1) / (2 * c.kappa * prep.inversion)


def area_parity(z, theta_a, theta_b):
    """Positions where ``theta_a - theta_b`` changes sign, linearly
    interpolated; empty when the Areas never cross."""
    z = np.asarray(z, dtype=float)
    d = np.asarray(theta_a) - np.asarray(theta_b)
    idx = np.flatnonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0)
    return z[idx] - d[idx] * (z[idx + 1] - z[idx]) / (d[idx + 1] - d[idx])


def depletion_fraction(entry, exit_, t_axis) -> float:
    """Fraction of the input energy ``int |Omega|^2 dT`` removed from a channel."""
    e_in = np.trapezoid(np.abs(entry) ** 2, t_axis)
    if e_in <= 0:
        raise InvalidParameterError("input channel carries no energy")
    return float(1 - np.trapezoid(np.abs(exit_) ** 2, t_axis) / e_in)


def _central(f, h, axis, order):
    f = np.moveaxis(np.asarray(f), axis, 0)
    if order == 2:
        d = (f[2:] - f[:-2]) / (2 * h)
    elif order == 4:
        d = (-f[4:] + 8 * f[3:-1] - 8 * f[1:-3] + f[:-4]) / (12 * h)
    else:
        raise InvalidParameterError("stencil order must be 2 or 4")
    return np.moveaxis(d, 0, axis)


def poynting_residual(snapshots, t_axis, mu: float, order: int = 2):
    """Flux-balance residual ``dz(|Oa|^2 + |Ob|^2) + 2 mu dT <rho33>`` at the
    interior stations.

    Both derivatives are centered finite differences (``order`` 2 or 4);
    the z stations must be uniformly spaced.  Returns ``(z, l2, max)`` with
    the norms taken over ``T`` and normalized by the peak flux.
    """
    t = np.asarray(t_axis, dtype=float)
    z = np.array([s.z_position for s in snapshots], dtype=float)
    if z.size < order + 1:
        raise InvalidParameterError(f"need at least {order + 1} stations")
    dz = np.diff(z)
    if np.abs(dz - dz[0]).max() > 1e-9 * abs(dz[0]):
        raise InvalidParameterError("stations must be uniformly spaced")
    flux = np.array([np.abs(s.omega_a) ** 2 + np.abs(s.omega_b) ** 2 for s in snapshots])
    r33 = np.array([s.rho33_avg if s.rho33_avg is not None else np.zeros(t.size)
                    for s in snapshots])
    h = order // 2
    dflux = _central(flux, dz[0], 0, order)[:, h:-h]
    dr33 = _central(r33[h:-h], t[1] - t[0], 1, order)
    resid = dflux + 2 * mu * dr33
    peak = max(flux.max(), np.finfo(float).tiny)
    return (z[h:-h], np.sqrt(np.mean(np.abs(resid) ** 2, axis=1)) / peak,
            np.abs(resid).max(axis=1) / peak)


def mb_residual(sol: AnalyticSolution, Z: float, t_axis, dz: float = 1e-3, order: int = 2):
    """Normalized finite-difference residuals of the Maxwell-Bloch equations
    for the analytic solution around position ``Z``.

    Returns a dict with the Bloch residual (max over classes and ``T``,
    relative to the largest ``|d rho/dT|``) and the pump and Stokes Maxwell
    residuals (relative to the largest ``|dOmega/dz|``, floored at
    ``kappa max|Omega|``).
    """
    q = sol.quadrature
    if q is None:
        raise InvalidParameterError("the solution needs explicit Doppler classes")
    t = np.asarray(t_axis, dtype=float)
    h = order // 2
    dt = t[1] - t[0]
    oa, ob = analytic_fields(sol, Z, t)

    bloch = 0.0
    for d in q.nodes:
        rho = analytic_density(sol, Z, t, d)
        lhs = _central(rho, dt, 0, order)
        rhs = bloch_rhs(rho[h:-h], oa[h:-h], ob[h:-h], d)
        scale = max(np.abs(rhs).max(), np.finfo(float).tiny)
        bloch = max(bloch, float(np.abs(lhs - rhs).max() / scale))

    zs = Z + dz * np.arange(-h, h + 1)
    fa, fb = analytic_fields(sol, zs[:, None], t[None, :])
    dfa = _central(fa, dz, 0, order)[0]
    dfb = _central(fb, dz, 0, order)[0]
    rho = averaged_density(sol, Z, t)
    mu = sol.prep.mu
    floor = sol.coeffs.kappa * max(np.abs(oa).max(), np.abs(ob).max())
    ra = dfa + 1j * mu * rho[:, 0, 2]
    rb = dfb + 1j * mu * rho[:, 1, 2]
    return {
        "bloch": bloch,
        "maxwell_a": float(np.abs(ra).max() / max(np.abs(dfa).max(), floor)),
        "maxwell_b": float(np.abs(rb).max() / max(np.abs(dfb).max(), floor)),
    }


def peak_count(envelope, threshold_fraction: float = PEAK_THRESHOLD) -> int:
    """Number of local maxima of ``|envelope|`` above ``threshold_fraction``
    of the global peak; a flat-topped maximum counts once."""
    m = np.abs(np.asarray(envelope))
    top = m.max() if m.size else 0.0
    if top <= 0:
        return 0
    padded = np.concatenate([[0.0], m, [0.0]])
    peaks, _ = find_peaks(padded, height=threshold_fraction * top)
    return int(peaks.size)


@dataclass
class SechFit:
    amplitude: float
    width: float
    center: float
    tail_slope: float
    rms_misfit: float

    @property
    def relative_misfit(self) -> float:
        return self.rms_misfit / self.amplitude


def _sech_model(t, a, t0, w):
    return a / np.cosh(np.clip((t - t0) / w, -700, 700))


def _gauss_model(t, a, t0, w):
    return a * np.exp(-0.5 * ((t - t0) / w) ** 2)


def _initial_guess(t, m):
    i = int(np.argmax(m))
    half = t[m >= 0.5 * m[i]]
    fwhm = max(half[-1] - half[0], t[1] - t[0])
    return m[i], t[i], fwhm


def tail_slope(envelope, t_axis, window=TAIL_WINDOW) -> float:
    """Mean magnitude of the slope of ``log|envelope|`` over the parts of the
    leading and trailing tails where ``|envelope|/peak`` lies in ``window``."""
    t = np.asarray(t_axis, dtype=float)
    m = np.abs(np.asarray(envelope))
    i = int(np.argmax(m))
    lo, hi = window[0] * m[i], window[1] * m[i]
    slopes = []
    for sl in (slice(0, i), slice(i, None)):
        tt, mm = t[sl], m[sl]
        sel = (mm >= lo) & (mm <= hi)
        if sel.sum() >= 3:
            slopes.append(abs(np.polyfit(tt[sel], np.log(mm[sel]), 1)[0]))
    return float(np.mean(slopes)) if slopes else float("nan")


def _fit(model, envelope, t_axis):
    t = np.asarray(t_axis, dtype=float)
    m = np.abs(np.asarray(envelope))
    if peak_count(m) != 1:
        raise NotSinglePulseError(
            f"envelope has {peak_count(m)} peaks; use peak_count to inspect it")
    a0, t0, fwhm = _initial_guess(t, m)
    guess = (a0, t0, fwhm / (2.634 if model is _sech_model else 2.355))
    with warnings.catch_warnings():
        # exact model envelopes leave the covariance undefined
        warnings.simplefilter("ignore", OptimizeWarning)
        popt, _ = curve_fit(model, t, m, p0=guess, maxfev=20000)
    rms = float(np.sqrt(np.mean((model(t, *popt) - m) ** 2)))
    return popt, rms


def fit_sech(envelope, t_axis) -> SechFit:
    """Least-squares fit of ``A sech((T - T0)/w)`` to ``|envelope|``."""
    (a, t0, w), rms = _fit(_sech_model, envelope, t_axis)
    return SechFit(float(a), float(abs(w)), float(t0), tail_slope(envelope, t_axis), rms)


def fit_gaussian(envelope, t_axis) -> SechFit:
    """Gaussian counterpart of :func:`fit_sech` (same result fields)."""
    (a, t0, w), rms = _fit(_gauss_model, envelope, t_axis)
    return SechFit(float(a), float(abs(w)), float(t0), tail_slope(envelope, t_axis), rms)


def peak_time(envelope, t_axis) -> float:
    """Peak position of ``|envelope|`` refined by a parabola through the
    three samples around the maximum."""
    t = np.asarray(t_axis, dtype=float)
    m = np.abs(np.asarray(envelope))
    i = int(np.argmax(m))
    if i == 0 or i == m.size - 1:
        return float(t[i])
    y0, y1, y2 = m[i - 1], m[i], m[i + 1]
    den = y0 - 2 * y1 + y2
    shift = 0.0 if den == 0 else 0.5 * (y0 - y2) / den
    return float(t[i] + shift * (t[1] - t[0]))


def group_velocity(snapshots, channel: str, t_axis) -> float:
    """Slope ``dT_peak/dz`` of the envelope peak position against z,
    from a linear regression over the given stations."""
    if channel not in (PUMP, STOKES):
        raise InvalidParameterError(f"channel must be {PUMP!r} or {STOKES!r}")
    if len(snapshots) < 2:
        raise InvalidParameterError("need at least two stations")
    z = np.array([s.z_position for s in snapshots], dtype=float)
    tp = np.array([peak_time(s.omega_a if channel == PUMP else s.omega_b, t_axis)
                   for s in snapshots])
    return float(np.polyfit(z, tp, 1)[0])


def dominant_channel(state: FieldState) -> str:
    """Channel with the larger peak envelope."""
    return PUMP if np.abs(state.omega_a).max() >= np.abs(state.omega_b).max() else STOKES
