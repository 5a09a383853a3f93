"""Throw random step functions at every bound and report the tightest margin.

Then scale the bounds up by one percent to show the checker really notices
when a bound is too strong.
"""
import numpy as np

from dyadic_bellman.extremizers import verify_bounds
from dyadic_bellman.tree_lab import integral, random_step_function

rng = np.random.default_rng(2024)
kappas = np.linspace(0.1, 1.0, 10)

for scale in (1.0, 1.01):
    worst, bad = np.inf, 0
    for _ in range(300):
        phi = random_step_function(rng, int(rng.choice([2, 3])), int(rng.integers(1, 5)))
        f = integral(phi)
        rep = verify_bounds(phi, 2.0, 3.0, kappas, [f, 1.5 * f, 3 * f], bound_scale=scale)
        worst = min(worst, rep.min_slack)
        bad += bool(rep.violations())
    print(f"bound scale {scale}: smallest relative slack {worst:.3e}, functions with violations {bad}/300")
