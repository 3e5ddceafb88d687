"""
Pulse breakup and the limits of adiabatic elimination
=====================================================

A 4 pi gaussian pump breaks into two Stokes pulses.  A 2 pi sech pump is
fully depleted by the three-level medium but not by the reduced model.
"""

from twopulse.config import resolve_config
from twopulse.diagnostics import depletion_fraction, peak_count
from twopulse.experiment import run_solver

for name in ("fig5_2pi", "fig5_4pi"):
    out = run_solver(resolve_config(name))[0].output
    print(f"{name}: output Stokes peaks = {peak_count(out.omega_b)}")

for name in ("fig7_full", "fig7_adiabatic"):
    res = run_solver(resolve_config(name))[0]
    dep = depletion_fraction(res.entry.omega_a, res.output.omega_a, res.t)
    print(f"{name}: pump depletion at kappa Z = 40 is {dep:.3f}")
