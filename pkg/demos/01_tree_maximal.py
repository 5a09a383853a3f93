"""Build a step function on a binary tree and look at its maximal function.

The maximal function at a leaf is the largest average over the cells on the
path from the root down to that leaf. For a function that piles all its mass
into one corner, the maximal function decays like a geometric staircase.
"""
from fractions import Fraction

from dyadic_bellman.tree_lab import (
    StepFunction,
    distribution,
    integral,
    integral_power,
    maximal,
    stopping_decomposition,
    weak_norm,
)

phi = StepFunction.from_values(2, 3, [Fraction(v) for v in (6, 2, 0, 0, 0, 0, 0, 0)])
print("leaves        ", [str(v) for v in phi.leaf_values])
print("mean, 2-moment", integral(phi), integral_power(phi, 2))

Mphi = maximal(phi)
print("maximal       ", [str(v) for v in Mphi.leaf_values])

# The layer cake lists each value of M(phi) with the measure it occupies.
cake = distribution(Mphi)
for value, measure in cake:
    print(f"  value {value!s:>4} on measure {measure}")
print("best half, squared:", cake.top_integral(Fraction(1, 2), 2))
print("weak norm (p=2, q=3): %.6f" % weak_norm(cake, 2, 3))

# Cells where the average first climbs above u.
dec = stopping_decomposition(phi, Fraction(3, 2))
for c in dec.cells:
    print(f"  stopping cell {c.index} with average {c.beta}")
print("covered measure", dec.kappa1)
