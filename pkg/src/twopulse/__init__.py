"""Coherent two-pulse propagation in a three-level lambda medium.

Closed-form soliton solutions, a full Maxwell-Bloch solver, an adiabatically
reduced solver, and diagnostics for pulse Areas, flux balance and shape.
"""

import warnings

warnings.filterwarnings("ignore", message=".*TBB.*")

from .adiabatic import GroundDensityMatrix2, adiabatic_error_estimate, reduced_propagate  # noqa: E402
from .analytic import (AnalyticSolution, PropagationCoefficients, analytic_density,  # noqa: E402
                       analytic_fields, asymptotic_fields, averaged_density, backlund_dress,
                       compute_kappa_delta, make_solution, mu_for_kappa)
from .bloch import AtomClassState, bloch_rhs, integrate_atom, sweep_classes  # noqa: E402
from .config import ExperimentConfig, load_config, parse_config, shipped_configs  # noqa: E402
from .core import (PUMP, STOKES, FieldState, MediumPrep, Occupancy, PulseSpec,  # noqa: E402
                   Quadrature, SimulationGrid, initial_density, make_doppler_quadrature,
                   sample_input_pulse)
from .diagnostics import (area_parity, area_report, depletion_fraction, fit_sech,  # noqa: E402
                          group_velocity, mb_residual, peak_count, poynting_residual,
                          theoretical_areas, transfer_length)
from .errors import (ConfigError, DegenerateInversionError, IntegrationError,  # noqa: E402
                     InvalidParameterError, NotSinglePulseError, PulseTruncationWarning,
                     ResolutionError, TwoPulseError, UnsupportedProtoError)
from .experiment import run_experiment  # noqa: E402
from .maxwell import PropagationResult, polarization, propagate, pulse_area  # noqa: E402
from .verify import verify  # noqa: E402

__version__ = "0.1.0"
