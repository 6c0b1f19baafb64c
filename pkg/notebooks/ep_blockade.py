"""Blockade at exceptional points.

Walk through the EP story numerically: locate the angles where one
backscattering rate vanishes, show that the single-excitation splitting and
the eigenvector overlap coalesce there, and compare g2(0) from the master
equation with the weak-drive formula along the angle.

Run: python notebooks/ep_blockade.py
"""

import math

import numpy as np

from nhblockade import FockLayout, ModelParams, find_eps, g2_analytic, g2_zero, steady_by_eigen
from nhblockade.observables import splitting_scan

L1, L2 = 1.5 - 0.355j, 1.4 - 0.645j
base = ModelParams(L1, L2, 4, 0.0, 2.0, 2.0, F=0.1)

eps = find_eps(L1, L2, 4, n_range=(1, 3, 5))
print("EP angles / pi:", np.round(np.array(eps.mu_values) / math.pi, 4).tolist())
print("labels:        ", eps.labels)

# splitting and overlap along mu: both signal coalescence at the same angles
grid = np.linspace(0.10, 0.15, 11) * math.pi
scan = splitting_scan(base, grid)
print("\n mu/pi   Re split  Im split  overlap")
for mu, re, im, ov in zip(grid, scan["splitting_re"], scan["splitting_im"], scan["overlap"]):
    print(f"{mu / math.pi:6.4f}  {re:8.4f}  {im:8.4f}  {ov:7.4f}")

# g2 along mu at Delta = U: master equation against the weak-drive closed form.
# The closed form has no linewidth, so it diverges wherever e1 e2 != 0 and
# Delta = U; shifting the detunings by -i*gamma restores a finite value.
layout = FockLayout([4, 4])
print("\n mu/pi   g2 master  g2 closed  g2 closed (damped)")
for mu in (0.0, 0.05, 0.1, eps.mu_values[0] / math.pi, 0.125, eps.mu_values[1] / math.pi, 0.2):
    p = base.replace(mu=mu * math.pi)
    num = g2_zero(steady_by_eigen(p, layout).rho)
    print(f"{mu:6.4f}  {num:9.4g}  {g2_analytic(p):9.4g}  {g2_analytic(p, damping=1.0):9.4g}")
