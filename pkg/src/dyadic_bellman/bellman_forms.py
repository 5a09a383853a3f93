"""Closed-form Bellman functions for the localized maximal operator.

All evaluators accept either exact (``int``/``Fraction``) or float arguments.
With exact inputs and integer exponents the result is an exact ``Fraction``;
fractional powers stay exact only when the base is a perfect power.

Notation: ``f = int phi``, ``F = int phi**p``, ``kappa`` the measure of the
competing sets, ``L`` the clamping level, ``N`` the branching factor.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ._scalar import exponent, is_exact, rpow
from .errors import DomainError


@dataclass(frozen=True)
class BellmanQuery:
    N: int
    p: object
    F: object
    f: object
    q: object = None
    kappa: object = None
    L: object = None

    def __post_init__(self):
        _check_N(self.N)
        if not self.p > 1:
            raise DomainError(f"p must exceed 1, got {self.p}")
        _check_moments(self.F, self.f, self.p)
        if self.kappa is not None:
            _check_kappa(self.kappa)
        if self.L is not None and self.L < self.f:
            raise DomainError(f"L={self.L} must be at least f={self.f}")


def _check_N(N) -> None:
    if isinstance(N, bool) or int(N) != N or N < 2:
        raise DomainError(f"N must be an integer >= 2, got {N}")


def _check_moments(F, f, p) -> None:
    if not f > 0 or not F > 0:
        raise DomainError(f"F and f must be positive, got F={F}, f={f}")
    fp = rpow(f, p)
    if is_exact(fp) and is_exact(F):
        bad = fp > F
    else:
        # float powers: tolerate round-off on the boundary F == f**p
        bad = float(fp) > float(F) * (1 + 1e-12)
    if bad:
        raise DomainError(f"need f**p <= F, got f**p={fp}, F={F}")


def _check_kappa(kappa) -> None:
    if not 0 < kappa <= 1:
        raise DomainError(f"kappa must lie in (0, 1], got {kappa}")


def _excess(F, fp):
    """``F - f**p`` clipped at zero against float round-off."""
    d = F - fp
    return d if d > 0 else d * 0


def ratio_const(N, s):
    """``(N**s - 1) / (N**s - N)``, always > 1 for s > 1."""
    _check_N(N)
    if not s > 1:
        raise DomainError(f"exponent must exceed 1, got {s}")
    Ns = rpow(N, s)
    return (Ns - 1) / (Ns - N)


def c_np(N, p):
    """``(p - 1) / p * ratio_const(N, p)``, which lies in (0, 1)."""
    return exponent(p - 1, p) * ratio_const(N, p)


def lp_lower(F, f, N, p):
    """Infimum of ``int (M phi)**p`` given ``int phi = f``, ``int phi**p = F``."""
    _check_moments(F, f, p)
    fp = rpow(f, p)
    return fp + ratio_const(N, p) * _excess(F, fp)


def g_of_u(u, F, f, kappa, N, p):
    if not u > 0:
        raise DomainError(f"u must be positive, got {u}")
    return kappa * rpow(u, p) + ratio_const(N, p) * (F - rpow(u, p - 1) * f)


def _u_max(F, f, p):
    return rpow(F / f if is_exact(F) and is_exact(f) else float(F) / float(f), exponent(1, p - 1))


def _lower_branch_point(F, f, N, p):
    """``c(N,p) * (f**p / F)**(1/(p-1))``."""
    fp = rpow(f, p)
    ratio = fp / F if is_exact(fp) and is_exact(F) else float(fp) / float(F)
    return c_np(N, p) * rpow(ratio, exponent(1, p - 1))


def _validate_dp(F, f, kappa, N, p):
    _check_N(N)
    if not p > 1:
        raise DomainError(f"p must exceed 1, got {p}")
    _check_moments(F, f, p)
    _check_kappa(kappa)


def u_star(F, f, kappa, N, p):
    """Minimizer of :func:`g_of_u` over ``[f, min((F/f)**(1/(p-1)), f/kappa)]``."""
    _validate_dp(F, f, kappa, N, p)
    c = c_np(N, p)
    if kappa > c:
        return f
    if kappa >= _lower_branch_point(F, f, N, p):
        return c * f / kappa
    return _u_max(F, f, p)


def dp_min_form(F, f, kappa, N, p):
    """Minimum of ``g`` over the admissible thresholds."""
    return g_of_u(u_star(F, f, kappa, N, p), F, f, kappa, N, p)


def dp_branch_values(F, f, kappa, N, p):
    """The three branch expressions of the piecewise formula, each evaluated at
    ``kappa`` regardless of which range ``kappa`` falls in."""
    R = ratio_const(N, p)
    c = c_np(N, p)
    fp = rpow(f, p)
    upper = kappa * fp + R * (F - fp)
    middle = R * (F - rpow(c, p - 1) * fp / (p * rpow(kappa, p - 1)))
    lower = kappa * rpow(F / f if is_exact(F) and is_exact(f) else float(F) / float(f),
                         exponent(p, p - 1))
    return upper, middle, lower


def dp_piecewise(F, f, kappa, N, p):
    """Three-branch closed form of the top-``kappa`` Bellman function.

    On a branch point the middle expression is used; the neighbours agree there.
    """
    _validate_dp(F, f, kappa, N, p)
    c = c_np(N, p)
    upper, middle, lower = dp_branch_values(F, f, kappa, N, p)
    if kappa > c:
        return upper
    if kappa >= _lower_branch_point(F, f, N, p):
        return middle
    return lower


def _validate_pq(F, f, N, p, q):
    _check_N(N)
    if not q > p > 1:
        raise DomainError(f"need q > p > 1, got p={p}, q={q}")
    _check_moments(F, f, p)


def kappa0(F, f, N, p, q) -> Optional[object]:
    """Interior maximizer in ``kappa`` of ``kappa**(p/q - 1) * D_p``, if any."""
    _validate_pq(F, f, N, p, q)
    t = exponent(q - 1, q - p) * _ratio(rpow(f, p), F)
    if t >= 1:
        return None
    return rpow(t, exponent(1, p - 1)) * c_np(N, p)


def _ratio(a, b):
    return a / b if is_exact(a) and is_exact(b) else float(a) / float(b)


def _moment_ratio_power(F, f, p, q):
    """``F**((q-1)/(p-1)) / f**((q-p)/(p-1))``, written as ``f**q * (F/f**p)**r``
    so that exact inputs at N-power ratios stay exact."""
    r = exponent(q - 1, p - 1)
    return rpow(f, q) * rpow(_ratio(F, rpow(f, p)), r)


def weak_lower(F, f, N, p, q):
    """Lower bound for the weak-L^q norm of the maximal function.

    Equals ``sup_kappa (kappa**(p/q - 1) * dp_piecewise(F, f, kappa))**(1/p)``.
    When an interior maximizer ``kappa0`` exists the middle branch at ``kappa0``
    evaluates to ``c**(1/q) * (q/(q-1))**(1/p) * ((q-p)/(q-1))**((q-p)/(pq(p-1)))
    * (F**((q-1)/(p-1)) / f**((q-p)/(p-1)))**(1/q)``.
    """
    _validate_pq(F, f, N, p, q)
    p_, q_, F_, f_ = (float(x) for x in (p, q, F, f))
    c = float(c_np(N, p))
    at_one = float(lp_lower(F, f, N, p)) ** (1 / p_)
    if (q_ - 1) / (q_ - p_) * f_ ** p_ / F_ < 1:
        inner = (
            c ** (1 / q_)
            * (q_ / (q_ - 1)) ** (1 / p_)
            * ((q_ - p_) / (q_ - 1)) ** ((q_ - p_) / (p_ * q_ * (p_ - 1)))
            * float(_moment_ratio_power(F_, f_, p_, q_)) ** (1 / q_)
        )
    else:
        inner = c ** (1 / q_) * (p_ / (p_ - 1)) ** (1 / p_) * (F_ - f_ ** p_ / p_) ** (1 / p_)
    return max(inner, at_one)


def weak_lower_printed(F, f, N, p, q):
    """Case (i) constant exactly as printed in the source statement, kept for
    comparison with :func:`weak_lower`.  It is smaller than the supremum over
    ``kappa``, so it remains a valid (non-sharp) lower bound."""
    _validate_pq(F, f, N, p, q)
    p_, q_, F_, f_ = (float(x) for x in (p, q, F, f))
    c = float(c_np(N, p))
    at_one = float(lp_lower(F, f, N, p)) ** (1 / p_)
    if (q_ - 1) / (q_ - p_) * f_ ** p_ / F_ < 1:
        inner = (
            c ** (1 / q_)
            * (q_ - p_) ** ((q_ - p_) / (q_ * (p_ - 1)))
            / (q_ - 1) ** ((q_ - 1) / (q_ * (p_ - 1)))
            * float(_moment_ratio_power(F_, f_, p_, q_)) ** (1 / q_)
        )
    else:
        inner = c ** (1 / q_) * (p_ / (p_ - 1)) ** (1 / p_) * (F_ - f_ ** p_ / p_) ** (1 / p_)
    return max(inner, at_one)


def bpq_lower(F, f, N, p, q):
    """Lower bound for ``int (M phi)**q`` with ``q >= p``.

    ``q == p`` is accepted and reproduces :func:`lp_lower`.
    """
    _check_N(N)
    if not (p > 1 and q >= p):
        raise DomainError(f"need q >= p > 1, got p={p}, q={q}")
    _check_moments(F, f, p)
    fq = rpow(f, q)
    return fq + ratio_const(N, q) * _excess(_moment_ratio_power(F, f, p, q), fq)


def bpq_chain_value(f, N, m, p, q):
    """``int (M chain)**q`` for the depth-``m`` chain with mean ``f``."""
    _check_N(N)
    if int(m) != m or m < 0:
        raise DomainError(f"m must be a nonnegative integer, got {m}")
    if not q > 1:
        raise DomainError(f"q must exceed 1, got {q}")
    return rpow(f, q) * (1 + ratio_const(N, q) * (rpow(N, m * (q - 1)) - 1))


def blq_lower(F, f, L, N, p, q):
    """Lower bound for ``int max(M phi, L)**q`` when ``L >= f``."""
    _validate_pq(F, f, N, p, q)
    if L < f:
        raise DomainError(f"L={L} must be at least f={f}")
    plus = _moment_ratio_power(F, f, p, q) - rpow(L, q - 1) * f
    if plus < 0:
        plus = plus * 0
    return rpow(L, q) + ratio_const(N, q) * plus


def bq_less_p(f, q):
    """Infimum of ``int (M phi)**q`` for ``q < p``: the constant-function value."""
    if not f > 0:
        raise DomainError(f"f must be positive, got {f}")
    if not q >= 1:
        raise DomainError(f"q must be at least 1, got {q}")
    return rpow(f, q)


def h_convex_test(t, N, s):
    """``1 - ratio_const(N,s) * t + (N-1)/(N**s - N) * t**s``; vanishes at 1 and N."""
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    Ns = rpow(N, s)
    return 1 - ratio_const(N, s) * t + (N - 1) / (Ns - N) * rpow(t, s)


def closed_form_lower(query: BellmanQuery, kind: str):
    """Closed-form lower bound matching an oracle objective kind."""
    F, f, N, p, q = query.F, query.f, query.N, query.p, query.q
    if kind == "strong_q":
        if q < p:
            return bq_less_p(f, q)
        return bpq_lower(F, f, N, p, q)
    if kind == "top_kappa_p":
        return dp_piecewise(F, f, query.kappa, N, p)
    if kind == "max_with_L":
        return blq_lower(F, f, query.L, N, p, q)
    raise DomainError(f"unknown objective kind {kind!r}")


__all__ = [
    "BellmanQuery",
    "ratio_const",
    "c_np",
    "lp_lower",
    "g_of_u",
    "u_star",
    "dp_min_form",
    "dp_branch_values",
    "dp_piecewise",
    "kappa0",
    "weak_lower",
    "weak_lower_printed",
    "bpq_lower",
    "bpq_chain_value",
    "blq_lower",
    "bq_less_p",
    "h_convex_test",
    "closed_form_lower",
]
