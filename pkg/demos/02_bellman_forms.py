"""Evaluate the closed-form lower bounds and watch the top-kappa bound change
branch as kappa shrinks.
"""
from fractions import Fraction

import numpy as np

from dyadic_bellman import bellman_forms as bf

F, f, N, p = Fraction(2), Fraction(1), 2, 2
print("L^p bound:", bf.lp_lower(F, f, N, p))
print("top branch point kappa = c(N, p) =", bf.c_np(N, p))

for kappa in (Fraction(1), Fraction(3, 4), Fraction(1, 2), Fraction(3, 8), Fraction(1, 4)):
    pw = bf.dp_piecewise(F, f, kappa, N, p)
    mf = bf.dp_min_form(F, f, kappa, N, p)
    print(f"kappa={kappa!s:>4}  piecewise={pw!s:>6}  min form={mf!s:>6}  u*={bf.u_star(F, f, kappa, N, p)}")

# The same bound in floating point across a fine grid is continuous.
ks = np.linspace(0.01, 1, 200)
vals = np.array([bf.dp_piecewise(2.0, 1.0, k, N, p) for k in ks])
print("largest jump between neighbours on a 200-point grid: %.3g" % np.max(np.abs(np.diff(vals))))

# Strong and weak type bounds for q > p.
for q in (3, 4):
    print(f"q={q}: strong {float(bf.bpq_lower(4.0, 1.0, N, p, q)):.6f}"
          f"  weak {float(bf.weak_lower(4.0, 1.0, N, p, q)):.6f}"
          f"  chain value at m=2 {bf.bpq_chain_value(1, N, 2, p, q)}")
