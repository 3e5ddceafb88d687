"""
Pump-to-Stokes transfer in a Raman-inverted medium
==================================================

A gaussian pump of Area 1.3 pi and a weak Stokes seed enter a pure-state
medium.  The Areas cross near the closed-form transfer length.
"""

import math

import numpy as np

from twopulse.config import resolve_config
from twopulse.diagnostics import area_parity
from twopulse.experiment import run_solver

# shipped experiment: alpha2 = 1, Doppler line tau = 3 T2*, kappa Z up to 40
cfg = resolve_config("fig4_top")
res, prep, kappa = run_solver(cfg, stations=6)

# closed-form prediction from the input Stokes Area
theta_b = cfg.pulse_b.area
z_t = math.log((2 * math.pi / theta_b) ** 2 - 1) / (2 * (prep.alpha2 - prep.beta2))
crossing = area_parity(res.z * kappa, res.theta_a, res.theta_b)[0]
print(f"predicted kappa Z_T = {z_t:.2f}, measured Area crossing = {crossing:.2f}")

# Area along the medium every 5 absorption lengths
for zk in np.arange(0, 41, 5):
    i = int(np.argmin(np.abs(res.z * kappa - zk)))
    print(f"kappa z = {zk:4.0f}   theta_a/pi = {res.theta_a[i] / math.pi:6.3f}"
          f"   theta_b/pi = {res.theta_b[i] / math.pi:6.3f}")
