"""Experiment orchestration and artifact output (CSV, report, SVG)."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .adiabatic import adiabatic_error_estimate, reduced_propagate
from .analytic import PropagationCoefficients, analytic_fields, averaged_density, make_solution
from .config import ExperimentConfig
from .core import PUMP, FieldState, sample_input_pulse
from .diagnostics import (AREA_BAND, TWO_PI, abs_area, area_parity, depletion_fraction,
                          dominant_channel, fit_sech, peak_count, theoretical_areas,
                          transfer_length)
from .errors import DegenerateInversionError, InvalidParameterError, ResolutionError
from .maxwell import PropagationResult, propagate, pulse_area, station_indices

log = logging.getLogger(__name__)

SNAPSHOT_COLUMNS = ("z_kappa", "t_over_tau", "re_omega_a", "im_omega_a",
                    "re_omega_b", "im_omega_b", "rho33_avg")
AREA_COLUMNS = ("z_kappa", "theta_a", "theta_b", "theta_total", "theory_theta_a", "theory_theta_b")


def fmt(x) -> str:
    """17 significant digits: enough to round-trip a double."""
    return format(float(x), ".17g")


@dataclass
class ExperimentOutput:
    directory: Path
    result: PropagationResult
    kappa: float
    report: dict = field(default_factory=dict)


def _run_analytic(cfg: ExperimentConfig, prep, grid, stations):
    """Evaluate the closed-form solution with width ``pulse_a.width``."""
    q = grid.quadrature
    sol = make_solution(prep, cfg.pulse_a.width, q)
    t, z = grid.t_axis, grid.z_axis
    oa, ob = analytic_fields(sol, z[:, None], t[None, :])
    idx = station_indices(grid.n_z, stations)
    r33 = np.zeros((z.size, t.size))
    for i in idx:
        r33[i] = averaged_density(sol, z[i], t)[:, 2, 2].real
    snaps = [FieldState(oa[i], ob[i], float(z[i]), r33[i]) for i in idx]
    theta_a = np.abs(np.trapezoid(oa, t, axis=1))
    theta_b = np.abs(np.trapezoid(ob, t, axis=1))
    zeros = np.zeros(z.size - 1)
    return PropagationResult(snaps, t, z, theta_a, theta_b, zeros, zeros, oa, ob, r33,
                             extra={"solution": sol})


def run_solver(cfg: ExperimentConfig, stations=None, solver=None):
    """Run the configured solver; returns ``(result, prep, kappa)``."""
    prep, kappa = cfg.medium()
    grid = cfg.simulation_grid(kappa)
    stations = cfg.stations if stations is None else stations
    solver = solver or cfg.solver
    if solver == "analytic":
        return _run_analytic(cfg, prep, grid, stations), prep, kappa
    t = grid.t_axis
    entry = FieldState(sample_input_pulse(cfg.pulse_a, t), sample_input_pulse(cfg.pulse_b, t),
                       grid.z_min)
    try:
        if solver == "adiabatic":
            res = reduced_propagate(entry, prep, grid, stations, cfg.grid.substeps)
        else:
            res = propagate(entry, prep, grid, stations, cfg.grid.substeps)
    except ResolutionError as exc:
        if exc.z is not None:
            raise ResolutionError(f"{exc} (station kappa*z = {exc.z * kappa:.4g})",
                                  z=exc.z) from None
        raise
    return res, prep, kappa


def theory_curves(cfg: ExperimentConfig, prep, kappa, result: PropagationResult, solver: str):
    """Closed-form Area curves aligned with the run.

    For the analytic solver these are the curves of the solution itself.
    Otherwise the curves are shifted so that the Stokes Area at the entry
    face equals the input Stokes Area; NaN when that is not defined.
    """
    z = result.z
    if solver == "analytic":
        rep = theoretical_areas(prep, result.extra["solution"].coeffs, z)
        return rep.theta_a, rep.theta_b, None
    coeffs = PropagationCoefficients(kappa, 0.0, 1.0)
    try:
        z_t = transfer_length(prep, coeffs, cfg.pulse_b.area)
    except (DegenerateInversionError, InvalidParameterError):
        nan = np.full(z.size, np.nan)
        return nan, nan, None
    face = z[0] if math.isinf(prep.occupancy.entry) else max(z[0], prep.occupancy.entry)
    rep = theoretical_areas(prep, coeffs, z - face - z_t)
    return rep.theta_a, rep.theta_b, face + z_t


def build_report(cfg: ExperimentConfig, result: PropagationResult, prep, kappa, solver: str):
    t = result.t
    out = result.output
    rep: dict = {"name": cfg.name, "solver": solver, "kappa": kappa, "mu": prep.mu,
                 "alpha2": prep.alpha2, "beta2": prep.beta2, "delta_bar": prep.delta_bar,
                 "t2_star": prep.t2_star, "doppler_nodes": len(cfg.quadrature().nodes),
                 "dt": t[1] - t[0], "dz_kappa": (result.z[1] - result.z[0]) * kappa,
                 "substeps": cfg.grid.substeps}
    if solver == "full":
        rep["poynting_residual_max"] = float(result.poynting_max.max())
        rep["poynting_residual_l2"] = float(result.poynting_l2.max())
        rep["trace_drift"] = result.trace_drift
    elif solver == "adiabatic":
        rep["manley_rowe_residual_max"] = float(result.poynting_max.max())
        rep["ground_trace_drift"] = result.trace_drift
        rep["adiabatic_error_estimate"] = adiabatic_error_estimate(
            cfg.pulse_a.area, cfg.pulse_b.area, cfg.pulse_a.width, prep.delta_bar, prep)

    rep["theta_a_out"] = pulse_area(out.omega_a, t)
    rep["theta_b_out"] = pulse_area(out.omega_b, t)
    rep["theta_total_out"] = math.hypot(rep["theta_a_out"], rep["theta_b_out"])
    rep["abs_area_a_out"] = abs_area(out.omega_a, t)
    rep["abs_area_b_out"] = abs_area(out.omega_b, t)
    ch = dominant_channel(out)
    env = out.omega_a if ch == PUMP else out.omega_b
    theta = rep["theta_a_out"] if ch == PUMP else rep["theta_b_out"]
    rep["dominant_output_channel"] = ch
    rep["dominant_area_over_2pi"] = theta / TWO_PI
    rep["dominant_area_within_band"] = abs(theta / TWO_PI - 1) <= AREA_BAND
    rep["area_band_note"] = f"{AREA_BAND:.0%} band around 2pi is a local choice, not a published value"
    rep["dominant_peak_count"] = peak_count(env)
    if rep["dominant_peak_count"] == 1:
        fit = fit_sech(env, t)
        rep.update({"sech_amplitude": fit.amplitude, "sech_width": fit.width,
                    "sech_center": fit.center, "sech_tail_slope": fit.tail_slope,
                    "sech_rms_over_peak": fit.relative_misfit})
    ent = result.entry
    if np.abs(ent.omega_a).max() > 0:
        rep["pump_depletion"] = depletion_fraction(ent.omega_a, out.omega_a, t)

    _, _, z_pred = theory_curves(cfg, prep, kappa, result, solver)
    if z_pred is not None:
        rep["transfer_length_predicted_kappa"] = z_pred * kappa
        cross = area_parity(result.z, result.theta_a, result.theta_b)
        if cross.size:
            rep["area_parity_measured_kappa"] = float(cross[0]) * kappa
            rep["area_parity_relative_offset"] = float(cross[0] / z_pred - 1)
        else:
            rep["area_parity_measured_kappa"] = float("nan")
    return rep


def write_snapshots(path: Path, result: PropagationResult, kappa: float):
    lines = [",".join(SNAPSHOT_COLUMNS)]
    for s in result.snapshots:
        r33 = s.rho33_avg if s.rho33_avg is not None else np.zeros(result.t.size)
        zk = fmt(s.z_position * kappa)
        for i, t in enumerate(result.t):
            lines.append(",".join((zk, fmt(t), fmt(s.omega_a[i].real), fmt(s.omega_a[i].imag),
                                   fmt(s.omega_b[i].real), fmt(s.omega_b[i].imag), fmt(r33[i]))))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_areas(path: Path, result: PropagationResult, kappa: float, theory_a, theory_b):
    lines = [",".join(AREA_COLUMNS)]
    for i, z in enumerate(result.z):
        ta, tb = result.theta_a[i], result.theta_b[i]
        lines.append(",".join(fmt(v) for v in (z * kappa, ta, tb, math.hypot(ta, tb),
                                               theory_a[i], theory_b[i])))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_snapshots(path) -> dict[float, dict[str, np.ndarray]]:
    """Parse a snapshots.csv back into per-station arrays keyed by ``kappa z``."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    out = {}
    for zk in dict.fromkeys(data[:, 0]):
        rows = data[data[:, 0] == zk]
        out[float(zk)] = {"t": rows[:, 1], "omega_a": rows[:, 2] + 1j * rows[:, 3],
                          "omega_b": rows[:, 4] + 1j * rows[:, 5], "rho33": rows[:, 6]}
    return out


def write_report(path: Path, rep: dict):
    lines = []
    for k, v in rep.items():
        if isinstance(v, float):
            v = format(v, ".6g")
        lines.append(f"{k}: {v}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def svg_plot(t, omega_a, omega_b, label: str, width=640, height=360) -> str:
    """Minimal line plot of ``|Omega_a|`` (solid) and ``|Omega_b|`` (dashed)."""
    ml, mr, mt, mb = 60, 20, 30, 40
    pw, ph = width - ml - mr, height - mt - mb
    t = np.asarray(t, dtype=float)
    ya, yb = np.abs(omega_a), np.abs(omega_b)
    top = max(ya.max(), yb.max(), 1e-300) * 1.05
    step = max(1, t.size // 1500)

    def pts(y):
        xs = ml + (t[::step] - t[0]) / (t[-1] - t[0]) * pw
        ys = mt + ph * (1 - y[::step] / top)
        return " ".join(f"{x:.2f},{v:.2f}" for x, v in zip(xs, ys))

    return "\n".join([
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>',
        f'<text x="{ml}" y="{height - 10}" font-size="12">{t[0]:g}</text>',
        f'<text x="{ml + pw - 30}" y="{height - 10}" font-size="12">{t[-1]:g}</text>',
        f'<text x="{ml + pw / 2 - 20}" y="{height - 10}" font-size="12">T / tau</text>',
        f'<text x="5" y="{mt + 10}" font-size="12">{top:.3g}</text>',
        f'<text x="5" y="{mt + ph}" font-size="12">0</text>',
        f'<text x="{ml + 10}" y="20" font-size="14">{label}</text>',
        f'<polyline fill="none" stroke="black" stroke-width="1.5" points="{pts(ya)}"/>',
        f'<polyline fill="none" stroke="black" stroke-width="1.5" stroke-dasharray="6,4" '
        f'points="{pts(yb)}"/>',
        "</svg>", ""])


def run_experiment(cfg: ExperimentConfig, out_dir=None, stations=None,
                   solver=None) -> ExperimentOutput:
    """Run ``cfg`` and write snapshots.csv, areas.csv, report.txt and one
    SVG per station into ``out_dir`` (default ``cfg.output``)."""
    solver = solver or cfg.solver
    out = Path(out_dir if out_dir is not None else cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    log.info("running %s solver for %s", solver, cfg.name or "experiment")
    result, prep, kappa = run_solver(cfg, stations, solver)
    theory_a, theory_b, _ = theory_curves(cfg, prep, kappa, result, solver)
    rep = build_report(cfg, result, prep, kappa, solver)
    write_snapshots(out / "snapshots.csv", result, kappa)
    write_areas(out / "areas.csv", result, kappa, theory_a, theory_b)
    write_report(out / "report.txt", rep)
    for i, s in enumerate(result.snapshots):
        label = f"kappa z = {s.z_position * kappa:.3g}"
        (out / f"plot_{i:02d}.svg").write_text(
            svg_plot(result.t, s.omega_a, s.omega_b, label), encoding="utf-8", newline="\n")
    log.info("wrote %s", out)
    return ExperimentOutput(out, result, kappa, rep)
