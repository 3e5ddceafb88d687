"""Maxwell-Bloch propagation through the lambda medium.

The solver marches slab by slab in ``z``.  Between slabs the field equation
``dOmega/dz = -i mu <rho13>`` (and its Stokes analog) is integrated with the
trapezoid rule, whose implicit self term is folded into the atomic equations
of the new slab; those atoms are then integrated through the whole
retarded-time window with RK4.  The scheme is second order in ``dz`` and
fourth order in ``dT``.

An explicit z step (midpoint or RK4 in ``z``) is not usable: the linear
response of an unbroadened atom class is lossless off resonance, so the z
generator has purely imaginary eigenvalues of size ``mu / |omega - Delta|``,
and explicit Runge-Kutta methods amplify every such mode.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .bloch import _rhs, interp_at, pack, sweep_classes
from .core import FieldState, MediumPrep, SimulationGrid, initial_density
from .errors import IntegrationError, InvalidParameterError, ResolutionError

log = logging.getLogger(__name__)

EDGE_FRACTION = 1e-2
# RK4 is stable on the imaginary axis up to |h*lambda| = 2.83
MAX_RATE_STEP = 2.0


@dataclass
class Sweep:
    """Doppler-averaged atomic response to one pair of envelopes."""

    p_a: np.ndarray
    p_b: np.ndarray
    rho33: np.ndarray
    trace_drift: float = 0.0


def atomic_response(omega_a, omega_b, prep: MediumPrep, grid: SimulationGrid,
                    substeps: int = 1) -> Sweep:
    q = grid.quadrature
    traj = sweep_classes(omega_a, omega_b, grid.t_axis, q.nodes, initial_density(prep), substeps)
    avg = np.tensordot(q.weights, traj, axes=(0, 0))
    trace = traj[:, :, 0] + traj[:, :, 1] + traj[:, :, 2]
    return Sweep(avg[:, 4], avg[:, 5], avg[:, 2].real, float(np.abs(trace - 1).max()))


def polarization(field_state: FieldState, prep: MediumPrep, grid: SimulationGrid,
                 substeps: int = 1):
    """Doppler-averaged coherences ``(<rho13>(T), <rho23>(T))`` driven by
    the envelopes of ``field_state``."""
    s = atomic_response(field_state.omega_a, field_state.omega_b, prep, grid, substeps)
    return s.p_a, s.p_b


def pulse_area(envelope, t_axis) -> float:
    """Magnitude of the trapezoid integral of a complex envelope."""
    return float(abs(np.trapezoid(np.asarray(envelope), np.asarray(t_axis, dtype=float))))


@dataclass
class PropagationResult:
    """Output of a propagation run.

    ``z`` holds every slab position with the pulse areas measured there;
    ``poynting_max``/``poynting_l2`` hold one normalized flux-balance residual
    per z step.  ``omega_a``, ``omega_b`` and ``rho33`` are the full
    ``(n_z + 1, n_t)`` arrays.
    """

    snapshots: list
    t: np.ndarray
    z: np.ndarray
    theta_a: np.ndarray
    theta_b: np.ndarray
    poynting_max: np.ndarray
    poynting_l2: np.ndarray
    omega_a: np.ndarray
    omega_b: np.ndarray
    rho33: np.ndarray
    trace_drift: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def output(self) -> FieldState:
        return FieldState(self.omega_a[-1], self.omega_b[-1], float(self.z[-1]), self.rho33[-1])

    @property
    def entry(self) -> FieldState:
        return FieldState(self.omega_a[0], self.omega_b[0], float(self.z[0]), self.rho33[0])

    def state_at(self, index: int) -> FieldState:
        return FieldState(self.omega_a[index], self.omega_b[index], float(self.z[index]),
                          self.rho33[index])


def station_indices(n_z: int, stations) -> list[int]:
    """z-axis indices for snapshots; ``stations`` is a count or a list of indices."""
    if stations is None:
        stations = 6
    if isinstance(stations, (int, np.integer)):
        if stations < 1:
            raise InvalidParameterError("need at least one snapshot station")
        if stations == 1:
            return [n_z]
        return sorted(set(int(round(x)) for x in np.linspace(0, n_z, stations)))
    idx = sorted(set(int(i) for i in stations))
    if idx and (idx[0] < 0 or idx[-1] > n_z):
        raise InvalidParameterError("snapshot station outside the z axis")
    return idx


def stations_at(grid: SimulationGrid, z_values) -> list[int]:
    """Nearest z-axis indices for a list of z positions."""
    z_axis = grid.z_axis
    return [int(np.argmin(np.abs(z_axis - z))) for z in z_values]


def check_leading_edge(omega_a, omega_b):
    peak = max(np.abs(omega_a).max(), np.abs(omega_b).max())
    edge = max(abs(omega_a[0]), abs(omega_b[0]))
    if peak > 0 and edge > EDGE_FRACTION * peak:
        raise InvalidParameterError(
            "time axis must start at least 6 pulse widths before the earliest pulse "
            f"(field at t_min is {edge / peak:.2g} of the peak)")


def slab_weights(prep: MediumPrep, grid: SimulationGrid) -> np.ndarray:
    """``occupancy * dz`` for each z step, occupancy taken at the step midpoint."""
    z = grid.z_axis
    return np.asarray(prep.occupancy(0.5 * (z[1:] + z[:-1])), dtype=float) * grid.dz


def check_time_step(rate: float, dt: float, substeps: int):
    h = dt / substeps
    if h * rate > MAX_RATE_STEP:
        need = int(np.ceil(dt * rate / MAX_RATE_STEP))
        raise ResolutionError(
            f"time step {h:.3g} is too coarse for the fastest atomic rate {rate:.3g} "
            f"(h*rate = {h * rate:.2f} > {MAX_RATE_STEP}); reduce dt or use substeps >= {need}")


# --- compiled march ------------------------------------------------------------
#
# Trapezoid rule between slabs j-1 and j, applied in a frame rotating at the
# linear dispersive rate g of each channel (Omega = exp(-i g z) Omega'):
#     Omega_j = r Omega_{j-1} - c (e P_{j-1} + P_j),
#     c = (i mu dz / 2) / (1 - i g dz / 2),  e = exp(-i g dz),
#     r = e (1 + i g dz / 2) / (1 - i g dz / 2).
# With g = 0 this is the plain trapezoid rule.  The frame removes the bulk
# phase accumulation, whose trapezoid error would otherwise dominate.
# Everything except the self term -c P_j is known once slab j-1 is done, so
# the atoms of slab j obey a closed ODE driven by the upstream field
# ``drive = r Omega_{j-1} - c e P_{j-1}`` and are integrated through the
# whole time window with RK4.  Midpoint values handed downstream come from cubic
# Hermite interpolation, which keeps the march fourth order in dT.

@njit(cache=True, inline="always")
def _avg(state, weights, m):
    acc = 0j
    for k in range(state.shape[0]):
        acc += weights[k] * state[k, m]
    return acc


@njit(cache=True)
def _eval(state, da, db, ca, cb, deltas, weights, out):
    oa = da - ca * _avg(state, weights, 4)
    ob = db - cb * _avg(state, weights, 5)
    for k in range(state.shape[0]):
        d = _rhs(state[k, 0], state[k, 1], state[k, 2], state[k, 3], state[k, 4], state[k, 5],
                 oa, ob, deltas[k])
        for m in range(6):
            out[k, m] = d[m]
    return oa, ob


@njit(cache=True)
def _slab(da, db, dam, dbm, ca, cb, deltas, weights, rho0, h,
          fa, fb, fam, fbm, pa, pb, pam, pbm, r33):
    """March one slab through time.  ``da``/``db`` are the drives at the
    grid points and ``dam``/``dbm`` at the step midpoints; the slab's own
    fields and polarizations are written to the remaining arrays."""
    n_f = da.shape[0]
    nk = deltas.shape[0]
    cur = np.empty((nk, 6), dtype=np.complex128)
    for k in range(nk):
        for m in range(6):
            cur[k, m] = rho0[m]
    k1 = np.empty_like(cur)
    k2 = np.empty_like(cur)
    k3 = np.empty_like(cur)
    k4 = np.empty_like(cur)
    tmp = np.empty_like(cur)

    fa[0], fb[0] = _eval(cur, da[0], db[0], ca, cb, deltas, weights, k1)
    pa[0] = _avg(cur, weights, 4)
    pb[0] = _avg(cur, weights, 5)
    r33[0] = _avg(cur, weights, 2).real
    for n in range(n_f - 1):
        dpa0 = _avg(k1, weights, 4)
        dpb0 = _avg(k1, weights, 5)
        for k in range(nk):
            for m in range(6):
                tmp[k, m] = cur[k, m] + 0.5 * h * k1[k, m]
        _eval(tmp, dam[n], dbm[n], ca, cb, deltas, weights, k2)
        for k in range(nk):
            for m in range(6):
                tmp[k, m] = cur[k, m] + 0.5 * h * k2[k, m]
        _eval(tmp, dam[n], dbm[n], ca, cb, deltas, weights, k3)
        for k in range(nk):
            for m in range(6):
                tmp[k, m] = cur[k, m] + h * k3[k, m]
        _eval(tmp, da[n + 1], db[n + 1], ca, cb, deltas, weights, k4)
        for k in range(nk):
            for m in range(6):
                cur[k, m] += h / 6.0 * (k1[k, m] + 2.0 * (k2[k, m] + k3[k, m]) + k4[k, m])
        # derivative at the new point doubles as the next step's first stage
        fa[n + 1], fb[n + 1] = _eval(cur, da[n + 1], db[n + 1], ca, cb, deltas, weights, k1)
        pa[n + 1] = _avg(cur, weights, 4)
        pb[n + 1] = _avg(cur, weights, 5)
        r33[n + 1] = _avg(cur, weights, 2).real
        pam[n] = 0.5 * (pa[n] + pa[n + 1]) + h / 8.0 * (dpa0 - _avg(k1, weights, 4))
        pbm[n] = 0.5 * (pb[n] + pb[n + 1]) + h / 8.0 * (dpb0 - _avg(k1, weights, 5))
        fam[n] = dam[n] - ca * pam[n]
        fbm[n] = dbm[n] - cb * pbm[n]
    drift = 0.0
    for k in range(nk):
        drift = max(drift, abs(cur[k, 0] + cur[k, 1] + cur[k, 2] - 1.0))
    return drift


@njit(cache=True)
def _march(ea, eb, eam, ebm, h, stride, coef, deltas, weights, rho0,
           out_a, out_b, out_r33):
    n_f = ea.shape[0]
    nz1 = coef.shape[0] + 1
    da = ea.copy()
    db = eb.copy()
    dam = eam.copy()
    dbm = ebm.copy()
    fa = np.empty(n_f, dtype=np.complex128)
    fb = np.empty_like(fa)
    pa = np.empty_like(fa)
    pb = np.empty_like(fa)
    fam = np.empty(n_f - 1, dtype=np.complex128)
    fbm = np.empty_like(fam)
    pam = np.empty_like(fam)
    pbm = np.empty_like(fam)
    r33 = np.empty(n_f)
    drift = 0.0
    for j in range(nz1):
        ca = 0j if j == 0 else coef[j - 1, 0]
        cb = 0j if j == 0 else coef[j - 1, 1]
        drift = max(drift, _slab(da, db, dam, dbm, ca, cb, deltas, weights, rho0, h,
                                 fa, fb, fam, fbm, pa, pb, pam, pbm, r33))
        for n in range(out_a.shape[1]):
            out_a[j, n] = fa[n * stride]
            out_b[j, n] = fb[n * stride]
            out_r33[j, n] = r33[n * stride]
        if not (np.isfinite(fa[n_f - 1]) and np.isfinite(fb[n_f - 1])):
            return j, drift
        if j + 1 < nz1:
            ra, rb = coef[j, 2], coef[j, 3]
            qa, qb = coef[j, 4], coef[j, 5]
            for n in range(n_f):
                da[n] = ra * fa[n] - qa * pa[n]
                db[n] = rb * fb[n] - qb * pb[n]
            for n in range(n_f - 1):
                dam[n] = ra * fam[n] - qa * pam[n]
                dbm[n] = rb * fbm[n] - qb * pbm[n]
    return -1, drift


def dispersive_frame_rates(prep: MediumPrep, tau: float = 1.0, quadrature=None):
    """Linear dispersive phase rates ``(alpha2*delta, beta2*delta)`` of the
    prepared medium for a pulse of width ``tau``."""
    from .analytic import compute_kappa_delta
    d = compute_kappa_delta(prep, tau, quadrature).delta_disp
    return prep.alpha2 * d, prep.beta2 * d


def step_coefficients(prep: MediumPrep, mu_dz, frame) -> np.ndarray:
    """Per-step coefficients ``(c_a, c_b, r_a, r_b, c_a e_a, c_b e_b)``."""
    g = np.asarray(frame, dtype=float)
    gdz = np.outer(np.asarray(mu_dz) / prep.mu, g)
    c = 0.5j * np.asarray(mu_dz)[:, None] / (1 - 0.5j * gdz)
    e = np.exp(-1j * gdz)
    r = e * (1 + 0.5j * gdz) / (1 - 0.5j * gdz)
    return np.ascontiguousarray(np.hstack([c, r, c * e]))


def _refine(values, substeps):
    """Entry samples on the fine grid and at the fine-step midpoints."""
    n = values.size
    fine = np.empty((n - 1) * substeps + 1, dtype=np.complex128)
    mids = np.empty((n - 1) * substeps, dtype=np.complex128)
    for i in range(n - 1):
        for s in range(substeps):
            fine[i * substeps + s] = interp_at(values, i, s / substeps)
            mids[i * substeps + s] = interp_at(values, i, (s + 0.5) / substeps)
    fine[-1] = values[-1]
    return fine, mids


def poynting_steps(omega_a, omega_b, rho33, t, mu_dz):
    """Per-step residual of the flux balance
    ``d/dz(|Omega_a|^2 + |Omega_b|^2) + 2 mu d<rho33>/dT = 0``.

    Each step's residual is the flux change across the step plus
    ``2 mu dz`` times the time derivative of the step-averaged excited
    population, normalized by the peak flux (max norm) or the flux norm (L2).
    """
    flux = np.abs(omega_a) ** 2 + np.abs(omega_b) ** 2
    r33_mid = 0.5 * (rho33[1:] + rho33[:-1])
    resid = np.diff(flux, axis=0) + 2 * mu_dz[:, None] * np.gradient(r33_mid, t, axis=1)
    peak = np.maximum(flux[1:].max(axis=1), flux[:-1].max(axis=1))
    norm = np.maximum(np.linalg.norm(flux[:-1], axis=1), np.finfo(float).tiny)
    with np.errstate(invalid="ignore", divide="ignore"):
        p_max = np.where(peak > 0, np.abs(resid).max(axis=1) / peak, 0.0)
        p_l2 = np.where(peak > 0, np.linalg.norm(resid, axis=1) / norm, 0.0)
    return p_max, p_l2


def propagate(input_fields: FieldState, prep: MediumPrep, grid: SimulationGrid,
              stations=None, substeps: int = 1, frame=None,
              check_resolution: bool = True) -> PropagationResult:
    """Propagate the entry envelopes from ``grid.z_min`` to ``grid.z_max``.

    Outside the medium (occupancy 0) the envelopes pass unchanged.  Atoms in
    every slab start in the prepared ground state at ``grid.t_min``.

    Parameters
    ----------
    substeps : int
        RK4 steps per sample interval of the time axis.
    frame : (float, float), optional
        Phase rates of the rotating frame used by the z quadrature.  The
        default removes the linear dispersion of the prepared medium.
    check_resolution : bool
        Reject time steps too coarse for the fastest atomic rate.
    """
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
    if substeps < 1:
        raise InvalidParameterError("substeps must be >= 1")

    q = grid.quadrature
    mu_dz = prep.mu * slab_weights(prep, grid)
    if frame is None:
        frame = dispersive_frame_rates(prep, 1.0, q)
    if check_resolution:
        rate = (np.abs(q.nodes).max() + np.abs(in_a).max() + np.abs(in_b).max()
                + 0.25 * mu_dz.max())
        check_time_step(rate, grid.dt, substeps)

    nz1 = grid.n_z + 1
    out_a = np.empty((nz1, t.size), dtype=np.complex128)
    out_b = np.empty_like(out_a)
    r33 = np.empty((nz1, t.size))
    ea, eam = _refine(in_a, substeps)
    eb, ebm = _refine(in_b, substeps)
    bad, drift = _march(ea, eb, eam, ebm, grid.dt / substeps, int(substeps),
                        step_coefficients(prep, mu_dz, frame),
                        np.ascontiguousarray(q.nodes, dtype=np.float64),
                        np.ascontiguousarray(q.weights, dtype=np.float64),
                        pack(initial_density(prep)), out_a, out_b, r33)
    if bad >= 0:
        raise ResolutionError(f"fields diverged at z={grid.z_axis[bad]:.4g}; refine dt",
                              z=float(grid.z_axis[bad]))

    return _collect(grid, stations, out_a, out_b, r33, mu_dz, drift)


def _collect(grid, stations, out_a, out_b, r33, mu_dz, drift) -> PropagationResult:
    t = grid.t_axis
    z = grid.z_axis
    theta_a = np.abs(np.trapezoid(out_a, t, axis=1))
    theta_b = np.abs(np.trapezoid(out_b, t, axis=1))
    p_max, p_l2 = poynting_steps(out_a, out_b, r33, t, mu_dz)
    snaps = [FieldState(out_a[i].copy(), out_b[i].copy(), float(z[i]), r33[i].copy())
             for i in station_indices(grid.n_z, stations)]
    return PropagationResult(snaps, t, z, theta_a, theta_b, p_max, p_l2,
                             out_a, out_b, r33, float(drift))
