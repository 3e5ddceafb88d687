"""Three-level Bloch equations and their fixed-step RK4 integration in
retarded time.

The state of one atom class is packed as the six independent elements
``(rho11, rho22, rho33, rho12, rho13, rho23)``.  Field values between grid
samples come from four-point cubic Lagrange interpolation, which keeps the
scheme fourth order in the time step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .core import check_density
from .errors import IntegrationError, InvalidParameterError


@dataclass
class AtomClassState:
    rho: np.ndarray
    detuning: float
    weight: float = 1.0

    def __post_init__(self):
        self.rho = check_density(np.asarray(self.rho, dtype=complex))
        if not 0 < self.weight <= 1:
            raise InvalidParameterError("class weight must lie in (0, 1]")


def bloch_rhs(rho, omega_a, omega_b, detuning):
    """Time derivative of ``rho`` (shape ``(..., 3, 3)``) under the lambda
    Hamiltonian with one-photon detuning ``detuning``."""
    rho = np.asarray(rho, dtype=complex)
    oa = np.asarray(omega_a, dtype=complex)
    ob = np.asarray(omega_b, dtype=complex)
    d = np.asarray(detuning, dtype=float)
    r11, r22, r33 = rho[..., 0, 0], rho[..., 1, 1], rho[..., 2, 2]
    r12, r13, r23 = rho[..., 0, 1], rho[..., 0, 2], rho[..., 1, 2]
    r21, r31, r32 = rho[..., 1, 0], rho[..., 2, 0], rho[..., 2, 1]

    d11 = 0.5j * oa * r31 - 0.5j * np.conj(oa) * r13
    d22 = 0.5j * ob * r32 - 0.5j * np.conj(ob) * r23
    d33 = (-0.5j * oa * r31 + 0.5j * np.conj(oa) * r13
           - 0.5j * ob * r32 + 0.5j * np.conj(ob) * r23)
    d12 = 0.5j * oa * r32 - 0.5j * np.conj(ob) * r13
    d13 = 1j * d * r13 - 0.5j * ob * r12 + 0.5j * oa * (r33 - r11)
    d23 = 1j * d * r23 - 0.5j * oa * r21 + 0.5j * ob * (r33 - r22)

    shape = np.broadcast(d11, d13, d23).shape
    out = np.empty(shape + (3, 3), dtype=complex)
    out[..., 0, 0] = d11
    out[..., 1, 1] = d22
    out[..., 2, 2] = d33
    out[..., 0, 1] = d12
    out[..., 1, 0] = np.conj(d12)
    out[..., 0, 2] = d13
    out[..., 2, 0] = np.conj(d13)
    out[..., 1, 2] = d23
    out[..., 2, 1] = np.conj(d23)
    return out


def pack(rho):
    rho = np.asarray(rho, dtype=complex)
    return np.stack([rho[..., 0, 0], rho[..., 1, 1], rho[..., 2, 2],
                     rho[..., 0, 1], rho[..., 0, 2], rho[..., 1, 2]], axis=-1)


def unpack(v):
    v = np.asarray(v)
    rho = np.empty(v.shape[:-1] + (3, 3), dtype=complex)
    rho[..., 0, 0] = v[..., 0].real
    rho[..., 1, 1] = v[..., 1].real
    rho[..., 2, 2] = v[..., 2].real
    rho[..., 0, 1] = v[..., 3]
    rho[..., 1, 0] = np.conj(v[..., 3])
    rho[..., 0, 2] = v[..., 4]
    rho[..., 2, 0] = np.conj(v[..., 4])
    rho[..., 1, 2] = v[..., 5]
    rho[..., 2, 1] = np.conj(v[..., 5])
    return rho


# --- compiled kernels ----------------------------------------------------------

@njit(cache=True, inline="always")
def interp_at(f, j, u):
    """Value of samples ``f`` at fractional position ``j + u`` (0 <= u <= 1).

    Cubic Lagrange through four neighbouring samples, shifted inward at the
    ends of the axis; linear when fewer than four samples exist.
    """
    n = f.shape[0]
    if n < 4:
        return f[j] + u * (f[j + 1] - f[j])
    k = j - 1
    if k < 0:
        k = 0
    elif k > n - 4:
        k = n - 4
    s = j + u - k
    w0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0
    w1 = s * (s - 2.0) * (s - 3.0) / 2.0
    w2 = -s * (s - 1.0) * (s - 3.0) / 2.0
    w3 = s * (s - 1.0) * (s - 2.0) / 6.0
    return w0 * f[k] + w1 * f[k + 1] + w2 * f[k + 2] + w3 * f[k + 3]


@njit(cache=True, inline="always")
def _rhs(r11, r22, r33, r12, r13, r23, oa, ob, d):
    r31 = r13.conjugate()
    r32 = r23.conjugate()
    r21 = r12.conjugate()
    oac = oa.conjugate()
    obc = ob.conjugate()
    d11 = 0.5j * oa * r31 - 0.5j * oac * r13
    d22 = 0.5j * ob * r32 - 0.5j * obc * r23
    d33 = -0.5j * oa * r31 + 0.5j * oac * r13 - 0.5j * ob * r32 + 0.5j * obc * r23
    d12 = 0.5j * oa * r32 - 0.5j * obc * r13
    d13 = 1j * d * r13 - 0.5j * ob * r12 + 0.5j * oa * (r33 - r11)
    d23 = 1j * d * r23 - 0.5j * oa * r21 + 0.5j * ob * (r33 - r22)
    return d11, d22, d33, d12, d13, d23


@njit(cache=True, parallel=True)
def _sweep(oa, ob, dt, deltas, rho0, substeps, traj):
    n_t = oa.shape[0]
    h = dt / substeps
    for k in prange(deltas.shape[0]):
        d = deltas[k]
        r11, r22, r33, r12, r13, r23 = rho0[0], rho0[1], rho0[2], rho0[3], rho0[4], rho0[5]
        traj[k, 0, 0] = r11
        traj[k, 0, 1] = r22
        traj[k, 0, 2] = r33
        traj[k, 0, 3] = r12
        traj[k, 0, 4] = r13
        traj[k, 0, 5] = r23
        for j in range(n_t - 1):
            for m in range(substeps):
                u0 = m / substeps
                um = (m + 0.5) / substeps
                u1 = (m + 1.0) / substeps
                a0 = interp_at(oa, j, u0)
                b0 = interp_at(ob, j, u0)
                am = interp_at(oa, j, um)
                bm = interp_at(ob, j, um)
                a1 = interp_at(oa, j, u1)
                b1 = interp_at(ob, j, u1)

                k1 = _rhs(r11, r22, r33, r12, r13, r23, a0, b0, d)
                k2 = _rhs(r11 + 0.5 * h * k1[0], r22 + 0.5 * h * k1[1], r33 + 0.5 * h * k1[2],
                          r12 + 0.5 * h * k1[3], r13 + 0.5 * h * k1[4], r23 + 0.5 * h * k1[5],
                          am, bm, d)
                k3 = _rhs(r11 + 0.5 * h * k2[0], r22 + 0.5 * h * k2[1], r33 + 0.5 * h * k2[2],
                          r12 + 0.5 * h * k2[3], r13 + 0.5 * h * k2[4], r23 + 0.5 * h * k2[5],
                          am, bm, d)
                k4 = _rhs(r11 + h * k3[0], r22 + h * k3[1], r33 + h * k3[2],
                          r12 + h * k3[3], r13 + h * k3[4], r23 + h * k3[5],
                          a1, b1, d)
                c = h / 6.0
                r11 = r11 + c * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
                r22 = r22 + c * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
                r33 = r33 + c * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
                r12 = r12 + c * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
                r13 = r13 + c * (k1[4] + 2 * k2[4] + 2 * k3[4] + k4[4])
                r23 = r23 + c * (k1[5] + 2 * k2[5] + 2 * k3[5] + k4[5])
            traj[k, j + 1, 0] = r11
            traj[k, j + 1, 1] = r22
            traj[k, j + 1, 2] = r33
            traj[k, j + 1, 3] = r12
            traj[k, j + 1, 4] = r13
            traj[k, j + 1, 5] = r23


def _check_finite(name, values):
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise IntegrationError(f"non-finite {name} sample at time index {bad[0]}", index=int(bad[0]))


def _uniform_step(t_axis):
    t_axis = np.asarray(t_axis, dtype=float)
    if t_axis.ndim != 1 or t_axis.size < 2:
        raise InvalidParameterError("time axis needs at least two samples")
    dt = (t_axis[-1] - t_axis[0]) / (t_axis.size - 1)
    if not dt > 0 or np.abs(np.diff(t_axis) - dt).max() > 1e-9 * max(1.0, abs(dt)):
        raise InvalidParameterError("time axis must be uniform and increasing")
    return dt


def sweep_classes(omega_a, omega_b, t_axis, detunings, rho0, substeps: int = 1):
    """Integrate every Doppler class through the pulses.

    Returns packed trajectories of shape ``(n_classes, n_t, 6)``.
    """
    dt = _uniform_step(t_axis)
    oa = np.ascontiguousarray(omega_a, dtype=np.complex128)
    ob = np.ascontiguousarray(omega_b, dtype=np.complex128)
    if oa.shape != (len(t_axis),) or ob.shape != oa.shape:
        raise InvalidParameterError("envelopes must be sampled on the time axis")
    _check_finite("pump field", oa)
    _check_finite("Stokes field", ob)
    if substeps < 1:
        raise InvalidParameterError("substeps must be >= 1")
    deltas = np.ascontiguousarray(np.atleast_1d(detunings), dtype=np.float64)
    r0 = np.ascontiguousarray(pack(rho0), dtype=np.complex128)
    traj = np.empty((deltas.size, oa.size, 6), dtype=np.complex128)
    _sweep(oa, ob, dt, deltas, r0, int(substeps), traj)
    return traj


def integrate_atom(initial: AtomClassState, omega_a, omega_b, t_axis, substeps: int = 1):
    """Density matrix of one atom class at every point of ``t_axis``.

    The atom is in ``initial.rho`` at the first sample; returns an array of
    shape ``(n_t, 3, 3)``.
    """
    traj = sweep_classes(omega_a, omega_b, t_axis, [initial.detuning], initial.rho, substeps)
    return unpack(traj[0])
