"""Feasible-point upper bounds for the Bellman infima.

Every function returned here satisfies both moment constraints, so its
objective value is an upper bound for the corresponding infimum.  Pairing it
with the closed-form lower bound brackets the true value.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from . import bellman_forms as bf
from .errors import DomainError, InfeasibleError, ProjectionError
from .extremizers import chain_function, concentrated_function, dp_near_extremizer
from .tree_lab import StepFunction, TreeParams, distribution, maximal

KINDS = ("strong_q", "top_kappa_p", "max_with_L")
FEAS_TOL = 1e-10

CSV_COLUMNS = (
    "kind", "N", "m", "p", "q", "kappa", "L", "F", "f",
    "lower", "upper", "gap", "evaluations", "seed",
)


@dataclass(frozen=True)
class ObjectiveSpec:
    kind: str
    p: float
    q: Optional[float] = None
    kappa: Optional[float] = None
    L: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown objective kind {self.kind!r}; expected one of {KINDS}")
        if not self.p > 1:
            raise DomainError(f"p must exceed 1, got {self.p}")
        if self.kind in ("strong_q", "max_with_L") and self.q is None:
            raise DomainError(f"{self.kind} needs q")
        if self.kind == "top_kappa_p" and (self.kappa is None or not 0 < self.kappa <= 1):
            raise DomainError("top_kappa_p needs kappa in (0, 1]")
        if self.kind == "max_with_L" and self.L is None:
            raise DomainError("max_with_L needs L")


@dataclass(frozen=True)
class SandwichResult:
    lower: float
    upper: float
    argmin: Optional[StepFunction] = field(repr=False)
    gap: float
    evaluations: int
    seed: int
    kind: str = ""
    N: int = 0
    m: int = 0
    p: float = float("nan")
    q: Optional[float] = None
    kappa: Optional[float] = None
    L: Optional[float] = None
    F: float = float("nan")
    f: float = float("nan")

    def row(self) -> dict:
        return {
            "kind": self.kind, "N": self.N, "m": self.m, "p": self.p, "q": self.q,
            "kappa": self.kappa, "L": self.L, "F": self.F, "f": self.f,
            "lower": self.lower, "upper": self.upper, "gap": self.gap,
            "evaluations": self.evaluations, "seed": self.seed,
        }

    def to_dict(self) -> dict:
        d = self.row()
        d["argmin"] = None if self.argmin is None else self.argmin.to_dict()
        return d


def results_to_json(results: Sequence[SandwichResult]) -> str:
    return json.dumps([r.to_dict() for r in results], indent=2)


def results_to_csv(results: Sequence[SandwichResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in results:
        row = r.row()
        w.writerow(["" if row[c] is None else (repr(row[c]) if isinstance(row[c], float) else row[c])
                    for c in CSV_COLUMNS])
    return buf.getvalue()


# -- feasibility ----------------------------------------------------------


def _moments(v: np.ndarray, p: float) -> tuple[float, float]:
    return float(v.mean()), float(np.mean(v ** p))


def _is_feasible(v: np.ndarray, f: float, F: float, p: float, tol: float = FEAS_TOL) -> bool:
    a, b = _moments(v, p)
    return abs(a - f) <= tol * max(1.0, f) and abs(b - F) <= tol * max(1.0, F)


def feasible_project(values, f, F, p, N: Optional[int] = None, depth: Optional[int] = None):
    """Map a nonnegative leaf vector onto ``{int phi = f, int phi**p = F}``.

    After rescaling to mean ``f`` the p-moment is moved along a monotone
    one-parameter family: towards the constant ``f`` by ``(1-t) f + t v`` when
    it is too large, and towards concentration by ``v**g`` (renormalized,
    ``g > 1``) when too small.  Both preserve the leaf ordering.  The root is
    found with Brent's method.  Returns a :class:`StepFunction` when ``N`` and
    ``depth`` are given (or inferable from a StepFunction input), else an array.
    """
    if isinstance(values, StepFunction):
        N, depth = values.N, values.depth
        values = values.leaf_values
    v = np.asarray(values, dtype=float)
    f, F, p = float(f), float(F), float(p)
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise ProjectionError("input must be finite and nonnegative")
    if F < f ** p * (1 - 1e-12):
        raise ProjectionError(f"infeasible moments: F={F} < f**p={f ** p}")
    n = len(v)
    if F > f ** p * n ** (p - 1) * (1 + 1e-12):
        raise ProjectionError(f"F={F} exceeds the largest p-moment {f ** p * n ** (p - 1)} at this depth")

    out = _project(v, f, F, p)
    a, b = _moments(out, p)
    if not (abs(a - f) <= FEAS_TOL * max(1.0, f) and abs(b - F) <= FEAS_TOL * max(1.0, F)):
        raise ProjectionError(f"projection did not converge: moments ({a}, {b}) vs ({f}, {F})")
    if N is not None and depth is not None:
        return StepFunction(TreeParams(N, depth), out)
    return out


def _project(v: np.ndarray, f: float, F: float, p: float) -> np.ndarray:
    if _is_feasible(v, f, F, p):
        return v.copy()
    n = len(v)
    if abs(F - f ** p) <= FEAS_TOL * max(1.0, F) * 0.5:
        return np.full(n, f)
    mean = v.mean()
    if mean <= 0:
        raise ProjectionError("cannot project the zero vector")
    w = v * (f / mean)
    G = float(np.mean(w ** p))
    if abs(G - F) <= FEAS_TOL * max(1.0, F) * 0.5:
        return w
    if G > F:
        def gap_t(t):
            return float(np.mean(((1 - t) * f + t * w) ** p)) - F
        t = brentq(gap_t, 0.0, 1.0, xtol=1e-16, rtol=1e-15, maxiter=400)
        out = (1 - t) * f + t * w
    else:
        positive = w > 0
        logw = np.where(positive, np.log(np.where(positive, w, 1.0)), -np.inf)
        top = logw.max()

        def family(g):
            e = np.exp(g * (logw - top))
            return e * (f / e.mean())

        def gap_g(g):
            return float(np.mean(family(g) ** p)) - F

        hi = 2.0
        while gap_g(hi) < 0:
            hi *= 2
            if hi > 1e6:
                raise ProjectionError("cannot concentrate the input enough to reach F")
        g = brentq(gap_g, 1.0, hi, xtol=1e-14, rtol=1e-15, maxiter=400)
        out = family(g)
    # final exact mean correction; moves F by a relative O(1e-16)
    return out * (f / out.mean())


# -- objective ------------------------------------------------------------


def evaluate_objective(phi: StepFunction, spec: ObjectiveSpec) -> float:
    cake = distribution(maximal(phi))
    if spec.kind == "strong_q":
        return float(cake.integral(spec.q))
    if spec.kind == "top_kappa_p":
        return float(cake.top_integral(spec.kappa, spec.p))
    return float(cake.clamped_integral(spec.L, spec.q))


def _objective_array(v: np.ndarray, N: int, depth: int, spec: ObjectiveSpec) -> float:
    """Float fast path of :func:`evaluate_objective` on a raw leaf array."""
    running = np.array([v.mean()])
    for k in range(1, depth + 1):
        avgs = v.reshape(N ** k, -1).mean(axis=1)
        running = np.maximum(np.repeat(running, N), avgs)
    M = running
    if spec.kind == "strong_q":
        return float(np.mean(M ** spec.q))
    if spec.kind == "max_with_L":
        return float(np.mean(np.maximum(M, spec.L) ** spec.q))
    n = len(M)
    Ms = np.sort(M)[::-1]
    take = spec.kappa * n
    full = int(math.floor(take + 1e-12))
    full = min(full, n)
    total = float(np.sum(Ms[:full] ** spec.p))
    frac = take - full
    if full < n and frac > 1e-12:
        total += frac * Ms[full] ** spec.p
    return total / n


def _lower(N, f, F, spec: ObjectiveSpec) -> float:
    query = bf.BellmanQuery(N=N, p=spec.p, F=F, f=f, q=spec.q, kappa=spec.kappa, L=spec.L)
    return float(bf.closed_form_lower(query, spec.kind))


def _gap(lower: float, upper: float) -> float:
    return (upper - lower) / max(lower, 1e-300)


# -- exhaustive search ----------------------------------------------------


@lru_cache(maxsize=None)
def _canonical_vectors(N: int, depth: int, total: int) -> tuple[tuple[int, ...], ...]:
    """Integer leaf vectors summing to ``total`` that are canonical under
    sibling permutations: child blocks appear in lexicographically
    nonincreasing order at every node.  One representative per orbit."""
    if depth == 0:
        return ((total,),)
    children = []
    for t in range(total, -1, -1):
        children.extend(_canonical_vectors(N, depth - 1, t))
    children.sort(reverse=True)
    sums = [sum(c) for c in children]
    out = []

    def rec(start, remaining, slots, acc):
        if slots == 0:
            if remaining == 0:
                out.append(tuple(x for c in acc for x in c))
            return
        for i in range(start, len(children)):
            if sums[i] <= remaining:
                acc.append(children[i])
                rec(i, remaining - sums[i], slots - 1, acc)
                acc.pop()

    rec(0, total, N, [])
    return tuple(out)


def exhaustive_search(
    N: int, m: int, f, F, p, spec: ObjectiveSpec, grid_resolution: int = 16
) -> SandwichResult:
    """Scan a simplex grid of sibling-canonical leaf vectors, project each to
    feasibility, and keep the best objective value."""
    if N ** m > N ** 2:
        raise DomainError(f"exhaustive search limited to N**2 leaves, got {N ** m}")
    if grid_resolution < 16:
        raise DomainError("grid_resolution must be at least 16")
    f, F, p = float(f), float(F), float(p)
    best, best_v, evals = math.inf, None, 0
    for vec in _canonical_vectors(N, m, int(grid_resolution)):
        try:
            v = _project(np.asarray(vec, dtype=float), f, F, p)
        except (ProjectionError, ValueError):
            continue
        if not _is_feasible(v, f, F, p):
            continue
        val = _objective_array(v, N, m, spec)
        evals += 1
        if val < best - 1e-15:
            best, best_v = val, v
    if best_v is None:
        raise InfeasibleError(f"no feasible point at depth {m} for F={F}, f={f}")
    lower = _lower(N, f, F, spec)
    return SandwichResult(
        lower, best, StepFunction(TreeParams(N, m), best_v), _gap(lower, best), evals, 0,
        **_meta(spec, N, m, F, f),
    )


def _meta(spec: ObjectiveSpec, N, m, F, f) -> dict:
    return dict(kind=spec.kind, N=N, m=m, p=float(spec.p),
                q=None if spec.q is None else float(spec.q),
                kappa=None if spec.kappa is None else float(spec.kappa),
                L=None if spec.L is None else float(spec.L), F=float(F), f=float(f))


# -- local search ---------------------------------------------------------


def _starts(N, m, f, F, p, spec, rng, extra=()):
    starts = [np.asarray(e, dtype=float) for e in extra]
    starts.append(chain_function(N, m, 1.0).leaf_values.astype(float))
    if m >= 1:
        try:
            phi, _ = concentrated_function(N, 1, f, F, p, depth_extension=m - 1)
            starts.append(phi.leaf_values.astype(float))
        except (DomainError, InfeasibleError):
            pass
    if spec.kind == "top_kappa_p":
        try:
            phi, _ = dp_near_extremizer(F, f, spec.kappa, N, p, m)
            starts.append(phi.leaf_values.astype(float))
        except (DomainError, InfeasibleError):
            pass
    starts.append(np.exp(rng.uniform(-3.0, 3.0, N ** m)))
    return starts


def _descend(v, N, m, f, F, p, spec, rng, budget):
    """Randomized pairwise mass-transfer descent with re-projection."""
    cur = _objective_array(v, N, m, spec)
    evals = 1
    n = len(v)
    if n == 1:
        return v, cur, evals
    step = 0.5
    fails = 0
    while evals < budget and step > 1e-9:
        i, j = rng.choice(n, size=2, replace=False)
        cand = v.copy()
        delta = step * max(cand[i], f)
        delta = min(delta, cand[i])
        if delta <= 0:
            fails += 1
        else:
            cand[i] -= delta
            cand[j] += delta
            try:
                cand = _project(cand, f, F, p)
            except (ProjectionError, ValueError):
                cand = None
            if cand is not None and _is_feasible(cand, f, F, p):
                val = _objective_array(cand, N, m, spec)
                evals += 1
                if val < cur - 1e-15:
                    v, cur, fails = cand, val, 0
                    continue
            fails += 1
        if fails >= 4 * n:
            step *= 0.5
            fails = 0
    return v, cur, evals


def local_search(
    N: int,
    m: int,
    f,
    F,
    p,
    spec: ObjectiveSpec,
    seeds: Sequence[int] = (0,),
    iteration_budget: int = 2000,
    extra_starts: Iterable = (),
    max_depth: Optional[int] = None,
) -> SandwichResult:
    """Multi-start descent from structured and random starting points.

    For each seed every start is projected and descended; the best value
    overall wins, ties going to the earliest seed.
    """
    cap = max_depth if max_depth is not None else (6 if N == 2 else 4)
    if m > cap:
        raise DomainError(f"depth {m} above the configured cap {cap} for N={N}")
    f, F, p = float(f), float(F), float(p)
    if F > f ** p * N ** (m * (p - 1)) * (1 + 1e-12):
        raise InfeasibleError(f"F={F} is not attainable at depth {m}")
    extra = list(extra_starts)
    best, best_v, best_seed, evals = math.inf, None, seeds[0] if seeds else 0, 0
    for seed in seeds:
        rng = np.random.default_rng(seed)
        for start in _starts(N, m, f, F, p, spec, rng, extra):
            try:
                v0 = _project(start, f, F, p)
            except (ProjectionError, ValueError):
                continue
            if not _is_feasible(v0, f, F, p):
                continue
            v, val, used = _descend(v0, N, m, f, F, p, spec, rng, iteration_budget)
            evals += used
            if val < best - 1e-15:
                best, best_v, best_seed = val, v, seed
    if best_v is None:
        raise InfeasibleError(f"no feasible start at depth {m}")
    lower = _lower(N, f, F, spec)
    return SandwichResult(
        lower, best, StepFunction(TreeParams(N, m), best_v), _gap(lower, best), evals, best_seed,
        **_meta(spec, N, m, F, f),
    )


def sandwich(
    query: bf.BellmanQuery,
    spec: ObjectiveSpec,
    depth_list: Sequence[int],
    seeds: Sequence[int] = (0,),
    iteration_budget: int = 2000,
    grid_resolution: int = 16,
) -> list[SandwichResult]:
    """Bracket the Bellman value at every depth in ``depth_list``.

    Each depth also starts from the previous depth's argmin refined to the new
    depth, so the gap sequence is nonincreasing along increasing depths.
    """
    N, f, F, p = query.N, query.f, query.F, spec.p
    results = []
    prev: Optional[StepFunction] = None
    for m in depth_list:
        extra = []
        if prev is not None and m >= prev.depth:
            extra.append(prev.refine(m - prev.depth).leaf_values)
        cands = [local_search(N, m, f, F, p, spec, seeds, iteration_budget, extra)]
        if N ** m <= N ** 2:
            try:
                cands.append(exhaustive_search(N, m, f, F, p, spec, grid_resolution))
            except InfeasibleError:
                pass
        best = min(cands, key=lambda r: r.upper)
        total = sum(c.evaluations for c in cands)
        best = SandwichResult(**{**best.__dict__, "evaluations": total})
        results.append(best)
        prev = best.argmin
    return results


__all__ = [
    "ObjectiveSpec",
    "SandwichResult",
    "feasible_project",
    "evaluate_objective",
    "exhaustive_search",
    "local_search",
    "sandwich",
    "results_to_csv",
    "results_to_json",
]
