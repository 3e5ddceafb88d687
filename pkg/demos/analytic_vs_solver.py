"""
Full solver against the exact two-pulse solution
================================================

The analytic solution sampled at kappa Z = -10 seeds the solver; the
output at kappa Z = +10 is compared with the closed form.
"""

import math

import numpy as np

from twopulse import (FieldState, MediumPrep, SimulationGrid, analytic_fields,
                      make_doppler_quadrature, make_solution, propagate)

# sharp line at delta_bar tau = 10; mu = 202 gives kappa = 1
q = make_doppler_quadrature(10.0)
prep = MediumPrep(1.0, 0.0, 10.0, mu=202.0)
sol = make_solution(prep, 1.0, q)

for dz in (0.2, 0.1, 0.05):
    grid = SimulationGrid(-30.0, 20.0, 2501, -10.0, 10.0, int(round(20 / dz)), q)
    a, b = analytic_fields(sol, grid.z_min, grid.t_axis)
    res = propagate(FieldState(a, b, grid.z_min), prep, grid)
    ea, eb = analytic_fields(sol, grid.z_max, grid.t_axis)
    err = math.sqrt((np.abs(res.output.omega_a - ea) ** 2
                     + np.abs(res.output.omega_b - eb) ** 2).sum()
                    / (np.abs(ea) ** 2 + np.abs(eb) ** 2).sum())
    print(f"dz = {dz:5.2f}   L2 error {err:.3e}   max Poynting residual "
          f"{res.poynting_max.max():.1e}")
