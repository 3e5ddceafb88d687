"""Exact single-soliton two-pulse solutions obtained by dressing the trivial
solution (zero fields, dephased diagonal ground-state populations).

All exponentials are handled through log-sum-exp so the formulas stay finite
for ``|T/tau|`` and ``|kappa*Z|`` far beyond the range where ``cosh``
overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import wofz

from .core import MediumPrep, Quadrature, initial_density
from .errors import InvalidParameterError, UnsupportedProtoError

DEFAULT_U = (1.0 + 0j, 1.0 + 0j, -1j)

# W = -(i/2) diag(1, 1, -1)
_W = -0.5j * np.diag([1.0, 1.0, -1.0])


@dataclass(frozen=True)
class PropagationCoefficients:
    kappa: float
    delta_disp: float
    tau: float

    def __post_init__(self):
        if not (self.kappa >= 0 and math.isfinite(self.kappa) and math.isfinite(self.delta_disp)):
            raise InvalidParameterError("kappa must be finite and non-negative, delta finite")
        if not self.tau > 0:
            raise InvalidParameterError("tau must be positive")

    @property
    def rate(self) -> complex:
        """``kappa + i*delta``: the complex spatial rate of the soliton."""
        return complex(self.kappa, self.delta_disp)


def _gaussian_resolvent(center, sigma, z):
    """Mean of ``1/(x - z)`` for ``x ~ N(center, sigma**2)`` and ``Im z > 0``."""
    return 1j * math.sqrt(math.pi / 2) / sigma * wofz((z - center) / (math.sqrt(2) * sigma))


def line_bracket(prep: MediumPrep, tau: float, quadrature: Quadrature | None = None) -> complex:
    """Line average of ``1/(1 - i*Delta*tau)``.

    Uses the discrete classes of ``quadrature`` when given, otherwise the
    exact continuous Gaussian line (or the single line centre for a sharp
    line).
    """
    if quadrature is not None:
        d = np.asarray(quadrature.nodes, dtype=float)
        return complex(np.dot(quadrature.weights, 1.0 / (1.0 - 1j * d * tau)))
    if prep.sharp_line:
        return 1.0 / (1.0 - 1j * prep.delta_bar * tau)
    # 1/(1 - i D tau) = (i/tau) / (D + i/tau) = (i/tau) * conj(1/(D - i/tau))
    g = _gaussian_resolvent(prep.delta_bar, 1.0 / prep.t2_star, 1j / tau)
    return complex(1j / tau * np.conj(g))


def compute_kappa_delta(prep: MediumPrep, tau: float,
                        quadrature: Quadrature | None = None) -> PropagationCoefficients:
    """Absorption coefficient kappa and dispersive shift delta for width ``tau``.

    ``kappa = (mu/2tau) <1/(D^2 + 1/tau^2)>`` and
    ``delta = (mu/2) <D/(D^2 + 1/tau^2)>``; equivalently
    ``kappa + i delta = (mu tau/2) <1/(1 - i D tau)>``.
    """
    if not tau > 0:
        raise InvalidParameterError("tau must be positive")
    c = 0.5 * prep.mu * tau * line_bracket(prep, tau, quadrature)
    return PropagationCoefficients(c.real, c.imag, tau)


def mu_for_kappa(prep: MediumPrep, kappa: float, tau: float = 1.0,
                 quadrature: Quadrature | None = None) -> float:
    """Coupling ``mu`` that gives absorption coefficient ``kappa`` at width ``tau``."""
    return 2.0 * kappa / (tau * line_bracket(prep, tau, quadrature).real)


@dataclass(frozen=True)
class AnalyticSolution:
    """A dressed single-soliton solution.

    ``quadrature`` records the Doppler classes the coefficients were computed
    with (``None`` for the exact continuous line); averages of the density
    matrix must use the same classes for the solution to be exact.
    """

    prep: MediumPrep
    coeffs: PropagationCoefficients
    u_vector: tuple = DEFAULT_U
    quadrature: Quadrature | None = None

    def __post_init__(self):
        if not np.any(np.abs(np.asarray(self.u_vector, dtype=complex)) > 0):
            raise InvalidParameterError("u_vector must be nonzero")

    @property
    def tau(self) -> float:
        return self.coeffs.tau

    @property
    def default_u(self) -> bool:
        return np.allclose(np.asarray(self.u_vector, dtype=complex), DEFAULT_U, rtol=0, atol=0)


def make_solution(prep: MediumPrep, tau: float = 1.0, quadrature: Quadrature | None = None,
                  u_vector=DEFAULT_U) -> AnalyticSolution:
    return AnalyticSolution(prep, compute_kappa_delta(prep, tau, quadrature),
                            tuple(complex(u) for u in u_vector), quadrature)


def sech(x):
    """Overflow-free hyperbolic secant."""
    e = np.exp(-np.abs(np.asarray(x, dtype=float)))
    return 2 * e / (1 + e * e)


# --- |s> and the dressing operator -------------------------------------------

def log_s_vector(sol: AnalyticSolution, Z, T):
    """Complex logarithms of the three components of ``|s>``.

    Sign convention: the spatial exponent is ``-alpha2*(kappa + i delta)*Z``,
    which makes the field phase advance as ``exp(-i alpha2 delta Z)`` and
    agrees with the Bloch equations used by the numerical solver.
    """
    Z = np.asarray(Z, dtype=float)
    T = np.asarray(T, dtype=float)
    c = sol.coeffs.rate
    half = T / (2 * sol.tau)
    u = np.asarray(sol.u_vector, dtype=complex)
    with np.errstate(divide="ignore"):
        logu = np.log(u)
    a1 = half - sol.prep.alpha2 * c * Z + logu[0]
    a2 = half - sol.prep.beta2 * c * Z + logu[1]
    a3 = -half + 0j * Z + logu[2]
    return np.stack(np.broadcast_arrays(a1, a2, a3), axis=-1)


def s_vector(sol: AnalyticSolution, Z, T, normalize: bool = False):
    """Components ``<i|s>``; with ``normalize`` they are rescaled by the
    largest modulus so extreme arguments stay finite (the projector is
    unchanged by the scaling)."""
    logs = log_s_vector(sol, Z, T)
    if normalize:
        m = np.max(np.where(np.isfinite(logs.real), logs.real, -np.inf), axis=-1, keepdims=True)
        logs = logs - m
    return np.exp(logs)


def projector(sol: AnalyticSolution, Z, T):
    s = s_vector(sol, Z, T, normalize=True)
    norm = np.sum(np.abs(s) ** 2, axis=-1)[..., None, None]
    return s[..., :, None] * np.conj(s[..., None, :]) / norm


def dressed_fields(sol: AnalyticSolution, Z, T):
    """Fields from ``U = U0 - 2i eta [W, P]`` with ``U0 = 0``."""
    P = projector(sol, Z, T)
    eta = 1.0 / sol.tau
    U = -2j * eta * (_W @ P - P @ _W)
    return 2j * U[..., 0, 2], 2j * U[..., 1, 2]


def dressed_density(sol: AnalyticSolution, Z, T, detuning):
    """Density matrix of the atom class ``detuning`` from the dressing formula

    ``rho = (2P - 1 - i D tau) rho0 (2P - 1 + i D tau) / (1 + (D tau)^2)``.
    """
    P = projector(sol, Z, T)
    b = np.asarray(detuning, dtype=float) * sol.tau
    b = b[..., None, None]
    A = 2 * P - np.eye(3)
    rho0 = initial_density(sol.prep)
    return (A - 1j * b * np.eye(3)) @ rho0 @ (A + 1j * b * np.eye(3)) / (1 + b ** 2)


def backlund_dress(proto_rho, proto_fields, prep: MediumPrep, tau: float,
                   quadrature: Quadrature | None = None, u_vector=DEFAULT_U) -> AnalyticSolution:
    """Dress the trivial proto-solution (zero fields, diagonal ``proto_rho``).

    Only the dephased diagonal proto-solution with an empty upper level is
    supported; anything else raises :class:`UnsupportedProtoError`.
    """
    proto_rho = np.asarray(proto_rho, dtype=complex)
    if proto_rho.shape != (3, 3):
        raise UnsupportedProtoError("proto density must be 3x3")
    if np.abs(proto_rho - np.diag(np.diag(proto_rho))).max() > 1e-12:
        raise UnsupportedProtoError("only diagonal (dephased) proto densities are supported")
    if abs(proto_rho[2, 2]) > 1e-12:
        raise UnsupportedProtoError("proto density must have an empty upper level")
    if proto_fields is not None and np.any(np.abs(np.asarray(proto_fields)) > 0):
        raise UnsupportedProtoError("only zero proto fields are supported")
    pops = np.real(np.diag(proto_rho))[:2]
    if abs(pops[0] - prep.alpha2) > 1e-12 or abs(pops[1] - prep.beta2) > 1e-12:
        raise InvalidParameterError("proto populations disagree with the medium preparation")
    return make_solution(prep, tau, quadrature, u_vector)


# --- closed forms -------------------------------------------------------------

def _log_denominator(sol: AnalyticSolution, Z, T):
    """Arguments of ``D = e^l1 + e^l2 + e^l3`` and ``log D``."""
    a2, b2 = sol.prep.alpha2, sol.prep.beta2
    kz = sol.coeffs.kappa * np.asarray(Z, dtype=float)
    x = np.asarray(T, dtype=float) / sol.tau - a2 * kz
    l1, l2, l3 = x, -x, x + 2 * (a2 - b2) * kz
    return l1, l2, l3, np.logaddexp(np.logaddexp(l1, l2), l3)


def analytic_fields(sol: AnalyticSolution, Z, T):
    """Pump and Stokes Rabi frequencies ``(omega_a, omega_b)`` at ``(Z, T)``."""
    if not sol.default_u:
        return dressed_fields(sol, Z, T)
    a2, b2 = sol.prep.alpha2, sol.prep.beta2
    Z = np.asarray(Z, dtype=float)
    kz = sol.coeffs.kappa * Z
    _, _, _, L = _log_denominator(sol, Z, T)
    amp = 4.0 / sol.tau
    om_a = amp * np.exp(-L - 1j * a2 * sol.coeffs.delta_disp * Z)
    om_b = amp * np.exp(-(L + (b2 - a2) * kz) - 1j * b2 * sol.coeffs.delta_disp * Z)
    return om_a, om_b


def analytic_density(sol: AnalyticSolution, Z, T, detuning):
    """Density matrix of the atom class ``detuning`` at ``(Z, T)``.

    Returns an array of shape ``broadcast(Z, T, detuning).shape + (3, 3)``.
    """
    if not sol.default_u:
        return dressed_density(sol, Z, T, detuning)
    a2, b2 = sol.prep.alpha2, sol.prep.beta2
    dz = sol.coeffs.delta_disp * np.asarray(Z, dtype=float)
    l1, l2, l3, L = _log_denominator(sol, Z, T)
    e1, e2, e3 = np.exp(l1 - L), np.exp(l2 - L), np.exp(l3 - L)
    f11 = e1 - e2 - e3
    f22 = e3 - e1 - e2
    f12 = 2 * np.exp(0.5 * (l1 + l3) - L - 1j * (a2 - b2) * dz)
    f13 = 2j * np.exp(-L - 1j * a2 * dz)
    f23 = 2j * np.exp(0.5 * (l2 + l3) - L - 1j * b2 * dz)

    b = np.asarray(detuning, dtype=float) * sol.tau
    f11, f22, f12, f13, f23, b = np.broadcast_arrays(f11, f22, f12, f13, f23, b)
    n = 1.0 / (1 + b ** 2)
    r11 = n * (a2 * (f11 ** 2 + b ** 2) + b2 * np.abs(f12) ** 2)
    r22 = n * (a2 * np.abs(f12) ** 2 + b2 * (f22 ** 2 + b ** 2))
    r33 = n * (a2 * np.abs(f13) ** 2 + b2 * np.abs(f23) ** 2)
    r12 = n * (a2 * (f11 - 1j * b) * f12 + b2 * (f22 + 1j * b) * f12)
    r13 = n * (a2 * (f11 - 1j * b) * f13 + b2 * f12 * f23)
    r23 = n * (a2 * np.conj(f12) * f13 + b2 * (f22 - 1j * b) * f23)

    rho = np.empty(f11.shape + (3, 3), dtype=complex)
    rho[..., 0, 0] = r11
    rho[..., 1, 1] = r22
    rho[..., 2, 2] = r33
    rho[..., 0, 1] = r12
    rho[..., 1, 0] = np.conj(r12)
    rho[..., 0, 2] = r13
    rho[..., 2, 0] = np.conj(r13)
    rho[..., 1, 2] = r23
    rho[..., 2, 1] = np.conj(r23)
    return rho


def averaged_density(sol: AnalyticSolution, Z, T, quadrature: Quadrature | None = None):
    """Doppler average of :func:`analytic_density` over the solution's classes."""
    q = quadrature if quadrature is not None else sol.quadrature
    if q is None:
        raise InvalidParameterError("an explicit quadrature is needed to average over the line")
    Z, T = np.broadcast_arrays(np.asarray(Z, float), np.asarray(T, float))
    out = np.zeros(Z.shape + (3, 3), dtype=complex)
    for d, w in zip(q.nodes, q.weights):
        out += w * analytic_density(sol, Z, T, d)
    return out


def asymptotic_fields(sol: AnalyticSolution, regime: str, Z, T):
    """Limiting sech pulses far before (``input``) or after (``output``) transfer."""
    a2, b2 = sol.prep.alpha2, sol.prep.beta2
    Z = np.asarray(Z, dtype=float)
    T = np.asarray(T, dtype=float)
    kz, dz = sol.coeffs.kappa * Z, sol.coeffs.delta_disp * Z
    amp = 2.0 / sol.tau
    if regime == "input":
        om_a = amp * np.exp(-1j * a2 * dz) * sech(T / sol.tau - a2 * kz)
        return om_a, np.zeros_like(om_a)
    if regime == "output":
        om_b = amp * np.exp(-1j * b2 * dz) * sech(T / sol.tau - b2 * kz)
        return np.zeros_like(om_b), om_b
    raise InvalidParameterError("regime must be 'input' or 'output'")
