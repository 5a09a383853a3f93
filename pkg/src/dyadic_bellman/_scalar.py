"""Dual-mode scalar helpers.

Exact mode uses :class:`fractions.Fraction`; it is selected when every input
is an ``int`` or ``Fraction``.  Anything else falls back to ``float``.
Powers with non-integral exponents stay exact only when the base is a perfect
power; otherwise they are evaluated in floating point.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, np.integer)) and not isinstance(x, bool)


def _iroot(n: int, k: int) -> int | None:
    """Exact integer k-th root of n >= 0, or None."""
    if n < 2:
        return n
    r = int(round(n ** (1.0 / k))) if n.bit_length() < 1000 else 1 << (n.bit_length() // k)
    # Newton refinement guards against float error for large n
    while True:
        nr = ((k - 1) * r + n // r ** (k - 1)) // k
        if nr >= r:
            break
        r = nr
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand ** k == n:
            return cand
    return None


def rpow(x, e):
    """``x ** e`` exactly when possible, else in floating point.

    ``e`` may be an int, a Fraction or a float.  Exact evaluation happens for
    rational ``x >= 0`` and rational ``e`` whenever the result is rational.
    """
    if is_exact(x) and is_exact(e):
        x, e = Fraction(x), Fraction(e)
        if e.denominator == 1:
            if x == 0 and e < 0:
                raise ZeroDivisionError("0 to a negative power")
            return x ** int(e)
        if x < 0:
            raise ValueError("fractional power of a negative number")
        y = x ** e.numerator if e.numerator >= 0 else 1 / x ** (-e.numerator)
        num = _iroot(y.numerator, e.denominator)
        den = _iroot(y.denominator, e.denominator)
        if num is not None and den is not None:
            return Fraction(num, den)
        return float(y) ** (1.0 / e.denominator)
    return float(x) ** float(e)


def exponent(num, den):
    """The exponent ``num / den``, kept rational when both parts are exact."""
    if is_exact(num) and is_exact(den):
        return Fraction(num) / Fraction(den)
    return float(num) / float(den)
