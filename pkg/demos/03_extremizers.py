"""Three families of functions that push the lower bounds to their limits."""
from fractions import Fraction

from dyadic_bellman import bellman_forms as bf
from dyadic_bellman.extremizers import chain_function, concentrated_function, dp_near_extremizer
from dyadic_bellman.tree_lab import integral_power, maximal

# Chains: the strong bound is attained exactly when F/f^p is a power of N.
for m in range(4):
    phi = chain_function(2, m, Fraction(1))
    got = integral_power(maximal(phi), 3)
    print(f"chain m={m}: int (M phi)^3 = {got}, bound = {bf.bpq_chain_value(1, 2, m, 2, 3)}")

# For q < p the value f^q is approached by spreading the mass ever thinner.
print()
for m in (1, 2, 4, 8):
    _, rep = concentrated_function(2, m, 1.0, 2.0, 2, q=1.5)
    print(f"concentrated m={m}: excess over f^q = {rep.achieved_value - 1:.4f}")

# The top-kappa bound is approached from above as the tree gets deeper.
print()
for depth in (2, 4, 6, 8):
    _, rep = dp_near_extremizer(2.0, 1.0, 0.5, 2, 2, depth)
    print(f"top-half construction at depth {depth}: {rep.achieved_value:.5f}"
          f" (bound {rep.target_value}, gap {rep.relative_gap:.3%})")
