"""Reduced two-level Raman model obtained by adiabatic elimination of the
excited state.

The ground-state density matrix is driven by the two-photon Rabi frequency
``Omega2 = Omega_a conj(Omega_b) / (2 Delta)`` and the two-photon Stark
shift ``Delta2 = (|Omega_a|^2 - |Omega_b|^2) / (4 Delta)``.  The fields obey

    dOmega/dz = -i (mu / 2 Delta) R Omega,    R = [[rho11, rho12], [rho21, rho22]],

whose generator is Hermitian, so ``|Omega_a|^2 + |Omega_b|^2`` is conserved
along z (Manley-Rowe).  Only a sharp line is supported.

The march mirrors :mod:`twopulse.maxwell`: slab by slab in z, RK4 in
retarded time within a slab.  Between slabs the field takes two Cayley
half steps, one with the upstream slab's ``R`` and one with the slab's own
``R`` (folded into its atomic equations).  Both use ``R - G`` with
``G = diag(alpha2, beta2)`` the prepared populations; the background phase
``exp(-i (mu/2 Delta) G dz)`` is applied exactly between them, which keeps
the large linear phase free of Cayley error.  Every factor is unitary, so
Manley-Rowe holds to rounding error, and the symmetric composition is
second order in ``dz``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import FieldState, MediumPrep, SimulationGrid
from .errors import IntegrationError, InvalidParameterError, ResolutionError
from .maxwell import (PropagationResult, _refine, check_leading_edge, check_time_step,
                      slab_weights, station_indices)

_TRACE_TOL = 1e-12


@dataclass
class GroundDensityMatrix2:
    """Ground-state density matrix; ``rho21`` is ``conj(rho12)``."""

    rho11: float
    rho22: float
    rho12: complex = 0j

    def __post_init__(self):
        self.rho11 = float(self.rho11)
        self.rho22 = float(self.rho22)
        self.rho12 = complex(self.rho12)
        if abs(self.rho11 + self.rho22 - 1.0) > _TRACE_TOL:
            raise InvalidParameterError("rho11 + rho22 must equal 1")
        if self.rho11 < 0 or self.rho22 < 0 or abs(self.rho12) ** 2 > self.rho11 * self.rho22 + 1e-12:
            raise InvalidParameterError("ground density matrix is not positive semidefinite")

    @classmethod
    def from_prep(cls, prep: MediumPrep) -> "GroundDensityMatrix2":
        return cls(prep.alpha2, prep.beta2, 0j)

    def matrix(self) -> np.ndarray:
        return np.array([[self.rho11, self.rho12], [np.conj(self.rho12), self.rho22]])


def two_photon_drive(omega_a, omega_b, delta_bar):
    """``(Omega2, Delta2)`` for the instantaneous fields."""
    if delta_bar == 0:
        raise InvalidParameterError("the adiabatic model is undefined on one-photon resonance")
    oa = np.asarray(omega_a, dtype=complex)
    ob = np.asarray(omega_b, dtype=complex)
    return oa * np.conj(ob) / (2 * delta_bar), (np.abs(oa) ** 2 - np.abs(ob) ** 2) / (4 * delta_bar)


def reduced_bloch_rhs(rho2, omega_a, omega_b, delta_bar):
    """Derivatives ``(d rho11, d rho22, d rho12)`` of the reduced equations.

    ``rho2`` is a :class:`GroundDensityMatrix2` or a tuple
    ``(rho11, rho22, rho12)`` of scalars or arrays.
    """
    if isinstance(rho2, GroundDensityMatrix2):
        r11, r22, r12 = rho2.rho11, rho2.rho22, rho2.rho12
    else:
        r11, r22, r12 = rho2
    om2, d2 = two_photon_drive(omega_a, omega_b, delta_bar)
    r21 = np.conj(r12)
    d11 = 0.5j * om2 * r21 - 0.5j * np.conj(om2) * r12
    d22 = 0.5j * np.conj(om2) * r12 - 0.5j * om2 * r21
    d12 = 0.5j * om2 * (r22 - r11) + 1j * d2 * r12
    return d11, d22, d12


def adiabatic_error_estimate(theta_a, theta_b, tau, delta_bar, prep: MediumPrep | None = None):
    """Order-of-magnitude size ``|M| / (tau Delta)^2`` of the first neglected
    term of the adiabatic series, with ``M`` evaluated on the initial
    ground state (``rho33 = 0``, ``rho12 = 0``)."""
    if delta_bar == 0:
        raise InvalidParameterError("the adiabatic model is undefined on one-photon resonance")
    rho11 = 1.0 if prep is None else prep.alpha2
    m = 0.5 * (theta_a * (0.0 - rho11) - theta_b * 0.0)
    return abs(m) / (tau * delta_bar) ** 2


# --- compiled march ------------------------------------------------------------

@njit(cache=True, inline="always")
def _cayley(x, r11, r22, r12, da, db):
    """``(I + i x R)^-1 (I - i x R) d`` for the Hermitian 2x2 ``R``."""
    r21 = r12.conjugate()
    ua = da - 1j * x * (r11 * da + r12 * db)
    ub = db - 1j * x * (r21 * da + r22 * db)
    m11 = 1.0 + 1j * x * r11
    m22 = 1.0 + 1j * x * r22
    m12 = 1j * x * r12
    m21 = 1j * x * r21
    det = m11 * m22 - m12 * m21
    return (m22 * ua - m12 * ub) / det, (m11 * ub - m21 * ua) / det


@njit(cache=True, inline="always")
def _reduced_rhs(r11, r22, r12, oa, ob, inv_d):
    om2 = 0.5 * inv_d * oa * ob.conjugate()
    d2 = 0.25 * inv_d * (abs(oa) ** 2 - abs(ob) ** 2)
    r21 = r12.conjugate()
    d11 = 0.5j * om2 * r21 - 0.5j * om2.conjugate() * r12
    d12 = 0.5j * om2 * (r22 - r11) + 1j * d2 * r12
    return d11, -d11, d12


@njit(cache=True)
def _reduced_slab(da, db, dam, dbm, x, inv_d, rho0, h, fa, fb, fam, fbm, rho):
    n_f = da.shape[0]
    g1, g2 = rho0[0].real, rho0[1].real
    r11, r22, r12 = rho0[0], rho0[1], rho0[2]
    rho[0, 0] = r11
    rho[0, 1] = r22
    rho[0, 2] = r12
    oa, ob = _cayley(x, r11.real - g1, r22.real - g2, r12, da[0], db[0])
    fa[0] = oa
    fb[0] = ob
    k1 = _reduced_rhs(r11, r22, r12, oa, ob, inv_d)
    for n in range(n_f - 1):
        s11 = r11 + 0.5 * h * k1[0]
        s22 = r22 + 0.5 * h * k1[1]
        s12 = r12 + 0.5 * h * k1[2]
        oa, ob = _cayley(x, s11.real - g1, s22.real - g2, s12, dam[n], dbm[n])
        k2 = _reduced_rhs(s11, s22, s12, oa, ob, inv_d)
        s11 = r11 + 0.5 * h * k2[0]
        s22 = r22 + 0.5 * h * k2[1]
        s12 = r12 + 0.5 * h * k2[2]
        oa, ob = _cayley(x, s11.real - g1, s22.real - g2, s12, dam[n], dbm[n])
        k3 = _reduced_rhs(s11, s22, s12, oa, ob, inv_d)
        s11 = r11 + h * k3[0]
        s22 = r22 + h * k3[1]
        s12 = r12 + h * k3[2]
        oa, ob = _cayley(x, s11.real - g1, s22.real - g2, s12, da[n + 1], db[n + 1])
        k4 = _reduced_rhs(s11, s22, s12, oa, ob, inv_d)
        c = h / 6.0
        n11 = r11 + c * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0])
        n22 = r22 + c * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1])
        n12 = r12 + c * (k1[2] + 2.0 * (k2[2] + k3[2]) + k4[2])
        oa, ob = _cayley(x, n11.real - g1, n22.real - g2, n12, da[n + 1], db[n + 1])
        fa[n + 1] = oa
        fb[n + 1] = ob
        q1 = _reduced_rhs(n11, n22, n12, oa, ob, inv_d)
        # Hermite midpoint of the slab state for the downstream drive
        m11 = 0.5 * (r11 + n11) + h / 8.0 * (k1[0] - q1[0])
        m22 = 0.5 * (r22 + n22) + h / 8.0 * (k1[1] - q1[1])
        m12 = 0.5 * (r12 + n12) + h / 8.0 * (k1[2] - q1[2])
        fam[n], fbm[n] = _cayley(x, m11.real - g1, m22.real - g2, m12, dam[n], dbm[n])
        rho[n + 1, 0] = n11
        rho[n + 1, 1] = n22
        rho[n + 1, 2] = n12
        rho[n, 3] = m11
        rho[n, 4] = m22
        rho[n, 5] = m12
        r11, r22, r12 = n11, n22, n12
        k1 = q1
    return abs(r11 + r22 - 1.0)


@njit(cache=True)
def _reduced_march(ea, eb, eam, ebm, h, stride, half_x, inv_d, rho0, out_a, out_b, out_r):
    n_f = ea.shape[0]
    nz1 = half_x.shape[0] + 1
    da = ea.copy()
    db = eb.copy()
    dam = eam.copy()
    dbm = ebm.copy()
    fa = np.empty(n_f, dtype=np.complex128)
    fb = np.empty_like(fa)
    fam = np.empty(n_f - 1, dtype=np.complex128)
    fbm = np.empty_like(fam)
    rho = np.zeros((n_f, 6), dtype=np.complex128)
    g1, g2 = rho0[0].real, rho0[1].real
    drift = 0.0
    for j in range(nz1):
        x = 0.0 if j == 0 else half_x[j - 1]
        drift = max(drift, _reduced_slab(da, db, dam, dbm, x, inv_d, rho0, h,
                                         fa, fb, fam, fbm, rho))
        for n in range(out_a.shape[1]):
            out_a[j, n] = fa[n * stride]
            out_b[j, n] = fb[n * stride]
            for m in range(3):
                out_r[j, n, m] = rho[n * stride, m]
        if not (np.isfinite(fa[n_f - 1]) and np.isfinite(fb[n_f - 1])):
            return j, drift
        if j + 1 < nz1:
            xn = half_x[j]
            # exact background phase between the two Cayley half steps
            pa = np.exp(-4j * xn * g1)
            pb = np.exp(-4j * xn * g2)
            for n in range(n_f):
                ua, ub = _cayley(xn, rho[n, 0].real - g1, rho[n, 1].real - g2, rho[n, 2],
                                 fa[n], fb[n])
                da[n] = pa * ua
                db[n] = pb * ub
            for n in range(n_f - 1):
                ua, ub = _cayley(xn, rho[n, 3].real - g1, rho[n, 4].real - g2, rho[n, 5],
                                 fam[n], fbm[n])
                dam[n] = pa * ua
                dbm[n] = pb * ub
    return -1, drift


def manley_rowe_steps(omega_a, omega_b):
    """Per-step max over ``T`` of the change in ``|Omega_a|^2 + |Omega_b|^2``,
    normalized by the peak flux."""
    flux = np.abs(omega_a) ** 2 + np.abs(omega_b) ** 2
    peak = np.maximum(flux.max(axis=1), np.finfo(float).tiny)
    return np.abs(np.diff(flux, axis=0)).max(axis=1) / peak[:-1]


def reduced_propagate(input_fields: FieldState, prep: MediumPrep, grid: SimulationGrid,
                      stations=None, substeps: int = 1,
                      check_resolution: bool = True) -> PropagationResult:
    """Propagate the entry envelopes through the reduced two-level medium.

    Returns a :class:`~twopulse.maxwell.PropagationResult` whose ``rho33``
    is identically zero and whose ``poynting_max`` holds the per-step
    Manley-Rowe residual.  ``extra["ground"]`` holds ``(rho11, rho22,
    rho12)`` on the full ``(z, T)`` grid.
    """
    if prep.delta_bar == 0:
        raise InvalidParameterError("the adiabatic model is undefined on one-photon resonance")
    if not prep.sharp_line:
        raise InvalidParameterError("the adiabatic solver supports a sharp line only")
    if substeps < 1:
        raise InvalidParameterError("substeps must be >= 1")
    t = grid.t_axis
    in_a = np.ascontiguousarray(input_fields.omega_a, dtype=np.complex128)
    in_b = np.ascontiguousarray(input_fields.omega_b, dtype=np.complex128)
    if in_a.shape != t.shape:
        raise InvalidParameterError("entry fields must be sampled on the grid time axis")
    for name, arr in (("pump", in_a), ("Stokes", in_b)):
        bad = np.flatnonzero(~np.isfinite(arr))
        if bad.size:
            raise IntegrationError(f"non-finite {name} entry sample at time index {bad[0]}",
                                   index=int(bad[0]))
    check_leading_edge(in_a, in_b)
    if check_resolution:
        peak = np.abs(in_a).max() ** 2 + np.abs(in_b).max() ** 2
        check_time_step(peak / (2 * abs(prep.delta_bar)), grid.dt, substeps)

    inv_d = 1.0 / prep.delta_bar
    # Cayley half step: x = (mu / 2 Delta) * dz / 4
    half_x = prep.mu * inv_d * slab_weights(prep, grid) / 8.0
    nz1 = grid.n_z + 1
    out_a = np.empty((nz1, t.size), dtype=np.complex128)
    out_b = np.empty_like(out_a)
    ground = np.empty((nz1, t.size, 3), dtype=np.complex128)
    ea, eam = _refine(in_a, substeps)
    eb, ebm = _refine(in_b, substeps)
    rho0 = np.array([prep.alpha2, prep.beta2, 0.0], dtype=np.complex128)
    bad, drift = _reduced_march(ea, eb, eam, ebm, grid.dt / substeps, int(substeps),
                                np.ascontiguousarray(half_x), inv_d, rho0, out_a, out_b, ground)
    if bad >= 0:
        raise ResolutionError(f"fields diverged at z={grid.z_axis[bad]:.4g}; refine dt",
                              z=float(grid.z_axis[bad]))

    z = grid.z_axis
    mr = manley_rowe_steps(out_a, out_b)
    snaps = [FieldState(out_a[i].copy(), out_b[i].copy(), float(z[i]), np.zeros(t.size))
             for i in station_indices(grid.n_z, stations)]
    return PropagationResult(
        snaps, t, z, np.abs(np.trapezoid(out_a, t, axis=1)), np.abs(np.trapezoid(out_b, t, axis=1)),
        mr, mr.copy(), out_a, out_b, np.zeros((nz1, t.size)), float(drift),
        extra={"ground": ground, "manley_rowe": mr})
