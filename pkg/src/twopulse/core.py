"""Dimensionless domain types shared by the solvers.

Times are in units of a reference pulse width, Rabi frequencies and
detunings in inverse reference widths.  Propagation distance ``z`` is kept
in solver units; divide by the absorption length ``1/kappa`` to get the
``kappa*z`` positions used in reports.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numpy.polynomial.hermite import hermgauss

from .errors import InvalidParameterError, PulseTruncationWarning

PUMP = "pump_a"
STOKES = "stokes_b"
CHANNELS = (PUMP, STOKES)
SHAPES = ("sech", "gaussian")

DEFAULT_NODES = 32
_POP_TOL = 1e-12


@dataclass(frozen=True)
class Occupancy:
    """Piecewise-constant medium mask: 1 on ``[entry, exit)``, 0 elsewhere."""

    entry: float = -math.inf
    exit: float = math.inf

    def __post_init__(self):
        if not self.entry < self.exit:
            raise InvalidParameterError("occupancy entry face must lie before exit face")

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        inside = (z >= self.entry) & (z < self.exit)
        return inside.astype(float) if inside.ndim else float(inside)


@dataclass(frozen=True)
class MediumPrep:
    """Ground-state preparation and line parameters of the lambda medium.

    A sharp (unbroadened) line is requested with ``t2_star=math.inf``.
    """

    alpha2: float
    beta2: float
    delta_bar: float = 0.0
    t2_star: float = math.inf
    mu: float = 1.0
    occupancy: Occupancy = field(default_factory=Occupancy)

    def __post_init__(self):
        bad = prep_violations(self.alpha2, self.beta2, self.t2_star, self.mu)
        if bad:
            raise InvalidParameterError("; ".join(bad))

    @property
    def sharp_line(self) -> bool:
        return math.isinf(self.t2_star)

    @property
    def inversion(self) -> float:
        return self.alpha2 - self.beta2


def prep_violations(alpha2, beta2, t2_star, mu) -> list[str]:
    out = []
    if alpha2 < 0 or beta2 < 0:
        out.append("alpha2 and beta2 must be non-negative")
    if abs(alpha2 + beta2 - 1.0) > _POP_TOL:
        out.append("alpha2+beta2 must equal 1")
    if not t2_star > 0:
        out.append("t2_star must be positive (use inf for a sharp line)")
    if not (mu > 0 and math.isfinite(mu)):
        out.append("mu must be positive and finite")
    return out


@dataclass(frozen=True)
class PulseSpec:
    channel: str = PUMP
    shape: str = "gaussian"
    area: float = 2 * math.pi
    width: float = 1.0
    delay: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise InvalidParameterError(f"channel must be one of {CHANNELS}")
        if self.shape not in SHAPES:
            raise InvalidParameterError(f"shape must be one of {SHAPES}")
        if not self.width > 0:
            raise InvalidParameterError("pulse width must be positive")
        if self.area < 0:
            raise InvalidParameterError("pulse area must be non-negative")


class Quadrature(NamedTuple):
    """Doppler classes: detunings and normalized weights."""

    nodes: np.ndarray
    weights: np.ndarray

    def average(self, values):
        """Weighted average over the leading (class) axis of ``values``."""
        return np.tensordot(self.weights, np.asarray(values), axes=(0, 0))

    def pairs(self):
        return list(zip(self.nodes.tolist(), self.weights.tolist()))


def make_doppler_quadrature(delta_bar: float, t2_star: float = math.inf,
                            n_nodes: int | None = None) -> Quadrature:
    """Gauss-Hermite nodes for the Gaussian detuning distribution.

    The line is centred at ``delta_bar`` with standard deviation
    ``1/t2_star``.  A sharp line (``t2_star=inf``) has one node at the
    line centre.  ``n_nodes`` defaults to 1 for a sharp line and
    :data:`DEFAULT_NODES` otherwise.
    """
    if n_nodes is None:
        n_nodes = 1 if math.isinf(t2_star) else DEFAULT_NODES
    if math.isinf(t2_star) and t2_star > 0:
        if n_nodes != 1:
            raise InvalidParameterError("a sharp line takes exactly one node")
        return Quadrature(np.array([float(delta_bar)]), np.array([1.0]))
    if not t2_star > 0:
        raise InvalidParameterError("t2_star must be positive")
    if n_nodes < 1:
        raise InvalidParameterError("n_nodes must be at least 1")
    x, w = hermgauss(n_nodes)
    nodes = delta_bar + math.sqrt(2.0) * x / t2_star
    weights = w / w.sum()
    return Quadrature(nodes, weights)


def initial_density(prep: MediumPrep) -> np.ndarray:
    """Dephased ground-state preparation diag(alpha2, beta2, 0)."""
    return np.diag([prep.alpha2, prep.beta2, 0.0]).astype(complex)


def density_violations(rho, atol: float = 1e-12, eig_tol: float = 1e-10) -> list[str]:
    rho = np.asarray(rho)
    out = []
    if rho.shape[-2:] != (3, 3):
        return ["density matrix must be 3x3"]
    herm = np.abs(rho - np.conj(np.swapaxes(rho, -1, -2))).max()
    if herm > atol:
        out.append(f"not Hermitian (max deviation {herm:.3g})")
    tr = np.trace(rho, axis1=-2, axis2=-1)
    if np.abs(tr - 1).max() > atol:
        out.append(f"trace deviates from 1 by {np.abs(tr - 1).max():.3g}")
    diag = np.real(np.diagonal(rho, axis1=-2, axis2=-1))
    if diag.min() < -atol or diag.max() > 1 + atol:
        out.append("populations outside [0, 1]")
    herm_part = 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))
    if np.linalg.eigvalsh(herm_part).min() < -eig_tol:
        out.append("not positive semidefinite")
    return out


def check_density(rho, atol: float = 1e-12, eig_tol: float = 1e-10) -> np.ndarray:
    """Raise if ``rho`` (or a stack of them) is not a valid density matrix."""
    bad = density_violations(rho, atol, eig_tol)
    if bad:
        raise InvalidParameterError("; ".join(bad))
    return rho


@dataclass(frozen=True)
class SimulationGrid:
    """Uniform retarded-time axis, propagation axis and Doppler classes.

    ``n_z`` counts propagation steps, so the z axis has ``n_z + 1`` points.
    """

    t_min: float
    t_max: float
    n_t: int
    z_min: float = 0.0
    z_max: float = 1.0
    n_z: int = 1
    quadrature: Quadrature = field(
        default_factory=lambda: Quadrature(np.array([0.0]), np.array([1.0])))

    def __post_init__(self):
        if self.n_t < 2 or not self.t_max > self.t_min:
            raise InvalidParameterError("time axis needs n_t >= 2 and t_max > t_min")
        if self.n_z < 1 or not self.z_max > self.z_min:
            raise InvalidParameterError("z axis needs n_z >= 1 and z_max > z_min")
        w = np.asarray(self.quadrature.weights)
        if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
            raise InvalidParameterError("Doppler weights must be positive and sum to 1")

    @property
    def t_axis(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.n_t)

    @property
    def dt(self) -> float:
        return (self.t_max - self.t_min) / (self.n_t - 1)

    @property
    def z_axis(self) -> np.ndarray:
        return np.linspace(self.z_min, self.z_max, self.n_z + 1)

    @property
    def dz(self) -> float:
        return (self.z_max - self.z_min) / self.n_z


@dataclass
class FieldState:
    """Pump and Stokes envelopes on the time axis at one z position.

    ``rho33_avg`` holds the Doppler-averaged excited-state population when
    the state was produced by a solver that tracks the atoms.
    """

    omega_a: np.ndarray
    omega_b: np.ndarray
    z_position: float
    rho33_avg: np.ndarray | None = None

    def __post_init__(self):
        self.omega_a = np.asarray(self.omega_a, dtype=complex)
        self.omega_b = np.asarray(self.omega_b, dtype=complex)
        if self.omega_a.shape != self.omega_b.shape or self.omega_a.ndim != 1:
            raise InvalidParameterError("pump and Stokes envelopes must be 1-D arrays of equal length")


def pulse_envelope(shape, area, width, t):
    """Real envelope of a pulse of the given shape and area centred at ``t=0``."""
    t = np.asarray(t, dtype=float)
    if shape == "gaussian":
        return area / (width * math.sqrt(2 * math.pi)) * np.exp(-0.5 * (t / width) ** 2)
    if shape == "sech":
        return area / (math.pi * width) / np.cosh(t / width)
    raise InvalidParameterError(f"unknown pulse shape {shape!r}")


def sample_input_pulse(spec: PulseSpec, t_axis) -> np.ndarray:
    """Sample the complex input envelope of ``spec`` on ``t_axis``.

    Emits :class:`PulseTruncationWarning` when the axis does not reach
    three widths on both sides of the pulse centre.
    """
    t_axis = np.asarray(t_axis, dtype=float)
    if min(spec.delay - t_axis[0], t_axis[-1] - spec.delay) < 3 * spec.width:
        warnings.warn(
            f"{spec.channel} pulse is truncated by the time axis "
            f"[{t_axis[0]:g}, {t_axis[-1]:g}]", PulseTruncationWarning, stacklevel=2)
    env = pulse_envelope(spec.shape, spec.area, spec.width, t_axis - spec.delay)
    return env * np.exp(1j * spec.phase)
