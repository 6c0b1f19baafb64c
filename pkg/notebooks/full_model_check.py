"""Kerr model against the optomechanical model it was derived from.

With omega_m = 30 gamma and g = 7.746 gamma the polaron transform predicts a
Kerr strength U = g^2/omega_m = 2 gamma. The optomechanical master equation
has no mechanical damping, so its state is averaged over mechanical periods
(see evolve_period_averaged). This takes roughly ten seconds per angle.

Run: python notebooks/full_model_check.py
"""

import math

from nhblockade import FockLayout, ModelParams
from nhblockade.exceptions import ConvergenceError
from nhblockade.liouville import validate_full_vs_effective

base = ModelParams(1.5 - 0.355j, 1.4 - 0.645j, 4, 0.0, 2.0, 2.0, F=0.1, omega_m=30.0, g=7.746)
print(" mu/pi   g2 Kerr   g2 optomech  rel dev  t_settle")
for mu in (0.05, 0.1, 0.1171, 0.15, 0.2):
    try:
        cmp = validate_full_vs_effective(base.replace(mu=mu * math.pi), FockLayout([3, 3]), 8,
                                         check_truncation=False, t_max=100)
    except ConvergenceError as exc:
        print(f"{mu:6.4f}  no quasi-steady state: {exc}")
        continue
    print(f"{mu:6.4f}  {cmp.g2_effective:8.4g}  {cmp.g2_full:10.4g}  {cmp.relative_deviation:7.2%}"
          f"  {cmp.full.t:8.1f}")
