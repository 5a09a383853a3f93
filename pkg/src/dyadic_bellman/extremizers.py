"""Explicit extremal and near-extremal step functions.

* :func:`chain_function` attains the strong-L^q bound whenever the moment
  ratio ``(F/f**p)**(1/(p-1))`` is a power of ``N``.
* :func:`concentrated_function` shows that for ``q < p`` the infimum collapses
  to ``f**q``.
* :func:`dp_near_extremizer` approaches the top-``kappa`` Bellman function at
  finite depth.

Each construction returns the function together with an
:class:`ExtremizerReport` measuring it against the closed form.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from . import bellman_forms as bf
from ._scalar import is_exact, rpow
from .errors import DomainError, InfeasibleError
from .tree_lab import (
    LayerCake,
    StepFunction,
    TreeParams,
    distribution,
    integral,
    integral_power,
    maximal,
    top_measure_integral,
    weak_norm,
)


@dataclass(frozen=True)
class ExtremizerReport:
    target_value: float
    achieved_value: float
    achieved_f: float
    achieved_F: float
    depth: int
    relative_gap: float

    def to_dict(self) -> dict:
        return {k: (v if isinstance(v, int) else float(v)) for k, v in asdict(self).items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _report(target, achieved, f_ach, F_ach, depth) -> ExtremizerReport:
    t, a = float(target), float(achieved)
    return ExtremizerReport(
        target_value=t,
        achieved_value=a,
        achieved_f=float(f_ach),
        achieved_F=float(F_ach),
        depth=int(depth),
        relative_gap=(a - t) / max(abs(t), 1e-300),
    )


def chain_function(N: int, m: int, f) -> StepFunction:
    """``f * N**m`` on the leftmost depth-``m`` cell, zero elsewhere."""
    if int(m) != m or m < 0:
        raise DomainError(f"m must be a nonnegative integer, got {m}")
    if not f > 0:
        raise DomainError(f"f must be positive, got {f}")
    zero = 0 if is_exact(f) else 0.0
    leaves = [zero] * N ** m
    leaves[0] = f * N ** m
    return StepFunction.from_values(N, m, leaves)


def chain_profile(N: int, m: int, f) -> LayerCake:
    """Distribution of the maximal function of :func:`chain_function`."""
    chain_function(N, m, f)  # validates
    exact = is_exact(f)
    one = Fraction(1) if exact else 1.0
    atoms = [(f * N ** m, one / N ** m)]
    for s in range(m - 1, -1, -1):
        atoms.append((f * N ** s, (one - one / N) / N ** s))
    return LayerCake(tuple(atoms))


def _n_adic(x, N: int, max_level: int):
    """Return ``(k, d)`` with ``x == k / N**d`` and ``d <= max_level`` minimal."""
    for d in range(max_level + 1):
        k = x * N ** d
        if is_exact(k):
            if Fraction(k).denominator == 1:
                return int(k), d
        elif abs(k - round(k)) <= 1e-9 * max(1.0, abs(k)):
            return int(round(k)), d
    return None


def concentrated_function(
    N: int,
    m: int,
    f,
    F,
    p,
    depth_extension: Optional[int] = None,
    q=None,
) -> tuple[StepFunction, ExtremizerReport]:
    """``f`` off the leftmost level-``m`` cell ``I``, a tall spike ``a`` on part of ``I``.

    The spike height solves both moment equations exactly; its support is
    rounded to a whole number of depth-``m + depth_extension`` leaves and the
    height re-solved so that ``int phi = f`` stays exact, so only ``F`` drifts.
    By default ``depth_extension`` leaves at least ``N**3`` leaves under the
    spike.  The report measures ``int (M phi)**q`` against ``f**q`` when ``q``
    is given, and ``int (M phi)**p`` against :func:`lp_lower` otherwise.
    """
    if int(m) != m or m < 1:
        raise DomainError(f"m must be an integer >= 1, got {m}")
    bf._check_moments(F, f, p)
    mu_I = 1.0 / N ** m
    fp = float(f) ** float(p)
    a = ((float(F) - fp * (1 - mu_I)) / (float(f) * mu_I)) ** (1.0 / (float(p) - 1))
    a = max(a, float(f))
    if depth_extension is None:
        depth_extension = max(0, math.ceil(math.log(a / float(f), N) - 1e-12)) + 3
    ext = int(depth_extension)
    n_sub = N ** ext
    target_mu_C = float(f) * mu_I / a
    if target_mu_C > mu_I * (1 + 1e-12):
        raise InfeasibleError("spike support would exceed the cell it lives in")
    k = int(round(target_mu_C / mu_I * n_sub))
    k = min(max(k, 1), n_sub)
    depth = m + ext
    leaves = np.full(N ** depth, float(f))
    leaves[:n_sub] = 0.0
    leaves[:k] = float(f) * n_sub / k
    phi = StepFunction(TreeParams(N, depth), leaves)
    Mphi = maximal(phi)
    f_ach = integral(phi)
    F_ach = integral_power(phi, p)
    if q is None:
        target = bf.lp_lower(F, f, N, p)
        achieved = integral_power(Mphi, p)
    else:
        target = bf.bq_less_p(f, q)
        achieved = integral_power(Mphi, q)
    return phi, _report(target, achieved, f_ach, F_ach, depth)


def _chain_depth_mix(rho: float, N: int, p: float):
    """Split a normalized p-moment ``rho >= 1`` between chains of depth ``s``
    and ``s + 1``: returns ``(s, w)`` with the deeper share ``w`` in [0, 1]."""
    step = N ** (p - 1)
    s = int(math.floor(math.log(rho, step) + 1e-12)) if rho > 1 else 0
    lo, hi = step ** s, step ** (s + 1)
    if rho < lo:  # log round-off
        s -= 1
        lo, hi = step ** s, step ** (s + 1)
    w = (rho - lo) / (hi - lo)
    return s, min(max(w, 0.0), 1.0)


def dp_near_extremizer(F, f, kappa, N, p, depth: int) -> tuple[StepFunction, ExtremizerReport]:
    """Near-extremizer for the top-``kappa`` functional at a given tree depth.

    The threshold ``u0`` minimizes ``g``.  The leftmost cells of total measure
    ``kappa`` carry blocks of mean ``u0``; each block is a mixture, at a fine
    level, of rescaled chains of depths ``s`` and ``s + 1`` whose combined
    p-moment matches the share ``F - u0**(p-1) f + kappa u0**p``.  Chains are
    exact extremizers of the L^p bound, so the block functional is affine in
    its p-moment and the mixture is exact up to rounding of the mixing weight,
    which is rounded up so the target is approached from above.  The rest of
    the space holds ``u0`` on a set of measure ``(f - kappa u0)/u0`` (rounded
    down to whole leaves) and the residual mass spread evenly, keeping
    ``M phi <= u0`` there.
    """
    bf._validate_dp(F, f, kappa, N, p)
    depth = int(depth)
    nd = _n_adic(kappa, N, depth)
    if nd is None:
        raise DomainError(f"kappa={kappa} is not of the form k/{N}**d with d <= {depth}")
    k_cells, d_kappa = nd
    target = bf.dp_piecewise(F, f, kappa, N, p)
    u0 = float(bf.u_star(F, f, kappa, N, p))
    F_, f_, k_, p_ = float(F), float(f), float(kappa), float(p)

    mu_P = (f_ - k_ * u0) / u0
    if mu_P < -1e-12 or mu_P > 1 - k_ + 1e-12:
        raise InfeasibleError(f"measure of the level set {mu_P} outside [0, 1 - kappa]")
    mu_P = min(max(mu_P, 0.0), 1 - k_)

    alpha_total = F_ - u0 ** (p_ - 1) * f_ + k_ * u0 ** p_
    rho = max(alpha_total / (k_ * u0 ** p_), 1.0)
    s, w = _chain_depth_mix(rho, N, p_)
    if w == 0.0:
        chain_len = s
    else:
        chain_len = s + 1
    d_mix = depth - d_kappa - chain_len
    if d_mix < 0:
        raise InfeasibleError(
            f"depth {depth} too shallow: kappa needs level {d_kappa} and chains need {chain_len}"
        )

    n = N ** depth
    leaves = np.zeros(n)
    n_blocks = k_cells * N ** d_mix
    block_width = N ** (depth - d_kappa - d_mix)
    n_deep = min(n_blocks, math.ceil(w * n_blocks - 1e-9)) if w > 0 else 0
    for b in range(n_blocks):
        depth_b = s + 1 if b < n_deep else s
        spike_width = block_width // N ** depth_b
        start = b * block_width
        leaves[start:start + spike_width] = u0 * N ** depth_b

    y_start = k_cells * N ** (depth - d_kappa)
    n_y = n - y_start
    n_P = min(int(math.floor(mu_P * n + 1e-9)), n_y)
    leaves[y_start:y_start + n_P] = u0
    rest = n_y - n_P
    if rest > 0:
        residual = f_ - (leaves.sum() / n)
        level = max(residual, 0.0) * n / rest
        leaves[y_start + n_P:] = min(level, u0)

    phi = StepFunction(TreeParams(N, depth), leaves)
    achieved = top_measure_integral(maximal(phi), kappa, p)
    return phi, _report(target, achieved, integral(phi), integral_power(phi, p), depth)


@dataclass(frozen=True)
class BoundCheck:
    name: str
    parameter: object
    achieved: float
    bound: float
    slack: float


@dataclass(frozen=True)
class VerificationReport:
    f: float
    F: float
    checks: tuple[BoundCheck, ...]

    @property
    def min_slack(self) -> float:
        return min(c.slack for c in self.checks)

    def violations(self, tol: float = 1e-9) -> list[BoundCheck]:
        return [c for c in self.checks if c.slack < -tol]


def _slack(achieved, bound) -> float:
    """Relative slack ``(achieved - bound) / max(1, |bound|)``."""
    if is_exact(achieved) and is_exact(bound):
        return float(Fraction(achieved - bound) / max(1, abs(bound)))
    a, b = float(achieved), float(bound)
    return (a - b) / max(1.0, abs(b))


def verify_bounds(
    phi: StepFunction,
    p,
    q,
    kappa_grid: Iterable = (),
    L_grid: Iterable = (),
    bound_scale=1,
) -> VerificationReport:
    """Check every closed-form lower bound on ``phi``.

    ``L_grid`` entries are levels ``L >= f``; smaller entries are skipped.
    ``bound_scale`` multiplies every bound and exists to exercise failure paths.
    """
    f = integral(phi)
    F = integral_power(phi, p)
    if not f > 0:
        raise DomainError("verify_bounds needs a function with positive mean")
    if F < rpow(f, p):  # float round-off for near-constant functions
        F = rpow(f, p)
    N = phi.N
    Mphi = maximal(phi)
    cake = distribution(Mphi)
    checks = []
    for kappa in kappa_grid:
        bound = bf.dp_piecewise(F, f, kappa, N, p) * bound_scale
        got = cake.top_integral(kappa, p)
        checks.append(BoundCheck("top_kappa_p", kappa, float(got), float(bound), _slack(got, bound)))
    if q is not None and q >= p:
        bound = bf.bpq_lower(F, f, N, p, q) * bound_scale
        got = cake.integral(q)
        checks.append(BoundCheck("strong_q", q, float(got), float(bound), _slack(got, bound)))
    if q is not None and q > p:
        for L in L_grid:
            if L < f:
                continue
            bound = bf.blq_lower(F, f, L, N, p, q) * bound_scale
            got = cake.clamped_integral(L, q)
            checks.append(BoundCheck("max_with_L", L, float(got), float(bound), _slack(got, bound)))
        bound = bf.weak_lower(F, f, N, p, q) * bound_scale
        got = weak_norm(cake, p, q)
        checks.append(BoundCheck("weak_q", q, float(got), float(bound), _slack(got, bound)))
    return VerificationReport(float(f), float(F), tuple(checks))


__all__ = [
    "ExtremizerReport",
    "chain_function",
    "chain_profile",
    "concentrated_function",
    "dp_near_extremizer",
    "BoundCheck",
    "VerificationReport",
    "verify_bounds",
]
