"""Desk-scale self-check suite.

Each check yields one row of a CSV table ``check,status,value,threshold,detail``.
Solver checks use the time step, slab length and substeps of the supplied
config, so a deliberately coarse grid fails them with a resolution hint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .adiabatic import reduced_propagate
from .analytic import analytic_fields, compute_kappa_delta, make_solution
from .bloch import AtomClassState, integrate_atom
from .config import ExperimentConfig, load_config, shipped_configs
from .core import (FieldState, MediumPrep, PulseSpec, SimulationGrid, density_violations,
                   initial_density, make_doppler_quadrature, sample_input_pulse)
from .diagnostics import TWO_PI, mb_residual, theoretical_areas, transfer_length
from .errors import ConfigError, TwoPulseError
from .maxwell import propagate

ORACLE_SPAN = (-5.0, 5.0)
ORACLE_WINDOW = (-30.0, 20.0)


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def row(self) -> str:
        status = "pass" if self.passed else "fail"
        detail = self.detail.replace(",", ";").replace("\n", " ")
        return f"{self.name},{status},{self.value:.6g},{self.threshold:.6g},{detail}"


def _below(name, value, threshold, detail=""):
    return Check(name, bool(value < threshold), float(value), threshold, detail)


def check_density_invariants():
    worst = 0
    for a2 in np.linspace(0, 1, 11):
        rho = initial_density(MediumPrep(a2, 1 - a2, 10.0))
        worst += len(density_violations(rho))
    return _below("density_invariants", worst, 0.5, "trace/Hermiticity/PSD of prepared states")


def check_rabi():
    t = np.linspace(0, 4 * math.pi, 2001)
    oa = np.ones_like(t, dtype=complex)
    rho = integrate_atom(AtomClassState(initial_density(MediumPrep(1, 0, 0)), 0.0),
                         oa, np.zeros_like(oa), t, substeps=4)
    err = np.abs(rho[:, 2, 2].real - np.sin(t / 2) ** 2).max()
    return _below("rabi_oscillation", err, 1e-8, "resonant constant pump")


def check_sech_return():
    t = np.linspace(-20, 20, 8001)
    oa = sample_input_pulse(PulseSpec("pump_a", "sech", TWO_PI), t)
    rho = integrate_atom(AtomClassState(initial_density(MediumPrep(1, 0, 0)), 0.0),
                         oa, np.zeros_like(oa), t)
    return _below("sech_2pi_return", abs(1 - rho[-1, 0, 0].real), 1e-6, "ground state after 2pi")


def check_area_law():
    z = np.linspace(-20, 20, 101)
    worst = 0.0
    for a2 in np.linspace(0.05, 1, 20):
        prep = MediumPrep(a2, 1 - a2, 10.0)
        rep = theoretical_areas(prep, compute_kappa_delta(prep, 1.0), z)
        worst = max(worst, np.abs(np.hypot(rep.theta_a, rep.theta_b) - TWO_PI).max())
    return _below("total_area_law", worst, 1e-8, "closed-form Area curves")


def check_transfer_lengths():
    want = {1.0: 5.99, 0.6: 9.99, 0.2: 29.96}
    worst = 0.0
    for inv, zt in want.items():
        prep = MediumPrep((1 + inv) / 2, (1 - inv) / 2, 10.0)
        coeffs = compute_kappa_delta(prep, 1.0)
        got = transfer_length(prep, coeffs, 0.005 * math.pi) * coeffs.kappa
        worst = max(worst, abs(got / zt - 1))
    return _below("transfer_lengths", worst, 5e-3, "kappa Z_T vs 5.99/9.99/29.96")


def check_oracle_residual():
    q = make_doppler_quadrature(10.0)
    sol = make_solution(MediumPrep(1, 0, 10.0, mu=202.0), 1.0, q)
    t = np.linspace(-15, 15, 3001)
    res = mb_residual(sol, 0.0, t)
    worst = max(res.values())
    return _below("analytic_oracle_residual", worst, 1e-4, "sharp line at kappa Z = 0")


def _oracle_run(dt, dz_kappa, substeps):
    q = make_doppler_quadrature(10.0)
    prep = MediumPrep(1, 0, 10.0, mu=202.0)
    sol = make_solution(prep, 1.0, q)
    k = sol.coeffs.kappa
    t0, t1 = ORACLE_WINDOW
    z0, z1 = ORACLE_SPAN
    grid = SimulationGrid(t0, t1, int(round((t1 - t0) / dt)) + 1, z0 / k, z1 / k,
                          max(1, int(round((z1 - z0) / dz_kappa))), q)
    t = grid.t_axis
    a, b = analytic_fields(sol, grid.z_min, t)
    res = propagate(FieldState(a, b, grid.z_min), prep, grid, stations=2, substeps=substeps)
    ea, eb = analytic_fields(sol, grid.z_max, t)
    out = res.output
    err = math.sqrt((np.abs(out.omega_a - ea) ** 2 + np.abs(out.omega_b - eb) ** 2).sum()
                    / (np.abs(ea) ** 2 + np.abs(eb) ** 2).sum())
    return err, res


def check_solver(cfg: ExperimentConfig):
    g = cfg.grid
    names = ("solver_vs_oracle", "convergence_dz", "poynting_flux")
    try:
        err, res = _oracle_run(g.dt, g.dz, g.substeps)
        err2, _ = _oracle_run(g.dt, 2 * g.dz, g.substeps)
    except TwoPulseError as exc:
        return [Check(n, False, float("nan"), t, str(exc)) for n, t in zip(names, (0.02, 0.3, 1e-3))]
    order = math.log2(err2 / err) if err > 0 else float("inf")
    return [
        _below(names[0], err, 0.02, f"L2 relative error at kappa Z = {ORACLE_SPAN[1]:g}"),
        Check(names[1], abs(order - 2) <= 0.3, order, 0.3, "measured order in dz (want 2 +- 0.3)"),
        _below(names[2], res.poynting_max.max(), 1e-3, "normalized Poynting residual per step"),
    ]


def check_manley_rowe(cfg: ExperimentConfig):
    g = cfg.grid
    q = make_doppler_quadrature(10.0)
    prep = MediumPrep(1, 0, 10.0, mu=202.0)
    k = compute_kappa_delta(prep, 1.0, q).kappa
    t0, t1 = -12.0, 28.0
    grid = SimulationGrid(t0, t1, int(round((t1 - t0) / g.dt)) + 1, 0.0, 10.0 / k,
                          max(1, int(round(10.0 / g.dz))), q)
    t = grid.t_axis
    entry = FieldState(sample_input_pulse(PulseSpec("pump_a", "sech", TWO_PI), t),
                       sample_input_pulse(PulseSpec("stokes_b", "sech", 0.005 * math.pi), t), 0.0)
    try:
        res = reduced_propagate(entry, prep, grid, stations=2, substeps=g.substeps)
    except TwoPulseError as exc:
        return Check("manley_rowe", False, float("nan"), 1e-6, str(exc))
    return _below("manley_rowe", res.poynting_max.max(), 1e-6, "adiabatic flux invariant")


def check_shipped_configs():
    bad = []
    for name, path in shipped_configs().items():
        try:
            load_config(path)
        except ConfigError as exc:
            bad.append(f"{name}: {exc}")
    return _below("shipped_configs", len(bad), 0.5, "; ".join(bad) or "all parse")


def verify(cfg: ExperimentConfig | None = None) -> list[Check]:
    """Run every check; solver checks take their grid steps from ``cfg``."""
    cfg = cfg or ExperimentConfig()
    checks = [check_density_invariants(), check_rabi(), check_sech_return(), check_area_law(),
              check_transfer_lengths(), check_oracle_residual()]
    checks.extend(check_solver(cfg))
    checks.append(check_manley_rowe(cfg))
    checks.append(check_shipped_configs())
    return checks


def format_table(checks) -> str:
    return "\n".join(["check,status,value,threshold,detail"] + [c.row() for c in checks])
