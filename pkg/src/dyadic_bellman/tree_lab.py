"""Finite-depth N-homogeneous trees and the maximal operator on step functions.

The space ``X`` is split into ``N`` cells of measure ``1/N``, each of those
into ``N`` more, and so on down to ``depth`` levels.  A cell is addressed by
its digit path from the root; leaves are stored in lexicographic path order,
so the cell with path ``(d_1, ..., d_s)`` covers a contiguous block of
``N**(depth - s)`` leaves.

Leaf vectors are numpy arrays.  Float mode uses ``float64``; exact mode uses an
``object`` array of :class:`fractions.Fraction`, which every operation here
handles without losing exactness (as long as exponents are integers).
"""
from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._scalar import is_exact, rpow
from .errors import DomainError


@dataclass(frozen=True)
class TreeParams:
    branching: int
    depth: int

    def __post_init__(self):
        if int(self.branching) != self.branching or self.branching < 2:
            raise DomainError(f"branching must be an integer >= 2, got {self.branching}")
        if int(self.depth) != self.depth or self.depth < 0:
            raise DomainError(f"depth must be an integer >= 0, got {self.depth}")

    @property
    def N(self) -> int:
        return self.branching

    @property
    def n_leaves(self) -> int:
        return self.branching ** self.depth

    def cell_measure(self, level: int) -> Fraction:
        return Fraction(1, self.branching ** level)


@dataclass(frozen=True)
class CellIndex:
    path: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(int(d) for d in self.path))

    @property
    def level(self) -> int:
        return len(self.path)

    def children(self, N: int) -> list["CellIndex"]:
        return [CellIndex(self.path + (d,)) for d in range(N)]

    def measure(self, N: int) -> Fraction:
        return Fraction(1, N ** self.level)

    def position(self, N: int) -> int:
        """Index of this cell among the cells of its level."""
        k = 0
        for d in self.path:
            k = k * N + d
        return k

    def leaf_range(self, params: TreeParams) -> range:
        self.validate(params)
        width = params.N ** (params.depth - self.level)
        start = self.position(params.N) * width
        return range(start, start + width)

    def validate(self, params: TreeParams) -> None:
        if self.level > params.depth:
            raise DomainError(f"cell path {self.path} deeper than tree depth {params.depth}")
        if any(d < 0 or d >= params.N for d in self.path):
            raise DomainError(f"cell path {self.path} has digits outside 0..{params.N - 1}")

    @classmethod
    def from_position(cls, N: int, level: int, k: int) -> "CellIndex":
        digits = []
        for _ in range(level):
            k, d = divmod(k, N)
            digits.append(d)
        return cls(tuple(reversed(digits)))

    def __str__(self) -> str:
        return "".join(str(d) for d in self.path) or "root"


def _as_leaf_array(values) -> np.ndarray:
    vals = list(values)
    if vals and all(is_exact(v) for v in vals):
        arr = np.empty(len(vals), dtype=object)
        arr[:] = [Fraction(v) for v in vals]
        return arr
    return np.asarray(vals, dtype=float)


@dataclass(frozen=True, eq=False)
class StepFunction:
    """A nonnegative function constant on each leaf cell."""

    params: TreeParams
    leaf_values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = self.leaf_values
        if not isinstance(arr, np.ndarray) or (arr.dtype != object and arr.dtype != float):
            arr = _as_leaf_array(arr)
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "leaf_values", arr)
        if arr.shape != (self.params.n_leaves,):
            raise DomainError(
                f"expected {self.params.n_leaves} leaf values, got shape {arr.shape}"
            )
        if arr.dtype == float and not np.all(np.isfinite(arr)):
            raise DomainError("leaf values must be finite")
        if np.any(arr < 0):
            raise DomainError("leaf values must be nonnegative")

    @classmethod
    def from_values(cls, N: int, depth: int, values: Sequence) -> "StepFunction":
        return cls(TreeParams(N, depth), _as_leaf_array(values))

    @classmethod
    def constant(cls, N: int, depth: int, c) -> "StepFunction":
        return cls.from_values(N, depth, [c] * N ** depth)

    @property
    def exact(self) -> bool:
        return self.leaf_values.dtype == object

    @property
    def N(self) -> int:
        return self.params.N

    @property
    def depth(self) -> int:
        return self.params.depth

    def __len__(self) -> int:
        return self.params.n_leaves

    def __eq__(self, other) -> bool:
        if not isinstance(other, StepFunction):
            return NotImplemented
        return self.params == other.params and bool(
            np.all(self.leaf_values == other.leaf_values)
        )

    def __repr__(self) -> str:
        return f"StepFunction(N={self.N}, depth={self.depth}, leaves={list(self.leaf_values)})"

    def scaled(self, t) -> "StepFunction":
        return StepFunction(self.params, self.leaf_values * t)

    def as_float(self) -> "StepFunction":
        return StepFunction(self.params, self.leaf_values.astype(float))

    def as_exact(self) -> "StepFunction":
        """Exact copy; float leaves are converted to their binary rational values."""
        return StepFunction.from_values(self.N, self.depth, [Fraction(v) for v in self.leaf_values])

    def refine(self, extra: int) -> "StepFunction":
        """The same function expressed ``extra`` levels deeper."""
        return StepFunction(
            TreeParams(self.N, self.depth + extra), np.repeat(self.leaf_values, self.N ** extra)
        )

    def level_averages(self, level: int) -> np.ndarray:
        """Averages over every cell of ``level``, in position order."""
        if not 0 <= level <= self.depth:
            raise DomainError(f"level {level} outside 0..{self.depth}")
        width = self.N ** (self.depth - level)
        blocks = self.leaf_values.reshape(self.N ** level, width)
        if self.exact:
            return blocks.sum(axis=1) / width
        return blocks.mean(axis=1)

    # -- serialization -------------------------------------------------

    def to_dict(self) -> dict:
        return {"N": self.N, "depth": self.depth, "leaves": [_num(v) for v in self.leaf_values]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "StepFunction":
        return cls.from_values(int(d["N"]), int(d["depth"]), d["leaves"])

    @classmethod
    def from_json(cls, s: str) -> "StepFunction":
        return cls.from_dict(json.loads(s))

    def to_csv_row(self) -> str:
        """Flat fixture row ``N,depth,v_0,...,v_{n-1}``."""
        buf = io.StringIO()
        csv.writer(buf, lineterminator="").writerow(
            [self.N, self.depth] + [repr(_num(v)) for v in self.leaf_values]
        )
        return buf.getvalue()

    @classmethod
    def from_csv_row(cls, row: str) -> "StepFunction":
        fields = next(csv.reader([row]))
        N, depth = int(fields[0]), int(fields[1])
        return cls.from_values(N, depth, [_parse_num(x) for x in fields[2:]])


def _num(v):
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else float(v)
    return float(v)


def _parse_num(s: str):
    s = s.strip()
    try:
        return int(s)
    except ValueError:
        pass
    if "/" in s:
        return Fraction(s)
    return float(s)


@dataclass(frozen=True)
class LayerCake:
    """Distribution of a step function: ``(value, measure)`` atoms, descending."""

    atoms: tuple[tuple[object, object], ...]

    def __post_init__(self):
        atoms = tuple((v, m) for v, m in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        for (v0, _), (v1, _) in zip(atoms, atoms[1:]):
            if not v0 > v1:
                raise DomainError("atoms must be strictly descending by value")

    def __iter__(self):
        return iter(self.atoms)

    def __len__(self) -> int:
        return len(self.atoms)

    @property
    def values(self) -> list:
        return [v for v, _ in self.atoms]

    @property
    def measures(self) -> list:
        return [m for _, m in self.atoms]

    def total_measure(self):
        return sum(self.measures)

    def integral(self, s) -> object:
        return sum(m * rpow(v, s) for v, m in self.atoms)

    def clamped_integral(self, L, s) -> object:
        """``sum(measure * max(value, L)**s)``."""
        return sum(m * rpow(max(v, L), s) for v, m in self.atoms)

    def top_integral(self, kappa, s) -> object:
        if not 0 < kappa <= 1:
            raise DomainError(f"kappa must lie in (0, 1], got {kappa}")
        acc = 0
        rem = kappa
        for v, m in self.atoms:
            take = m if m < rem else rem
            acc += take * rpow(v, s)
            rem -= take
            if rem <= 0:
                break
        return acc

    def to_json(self) -> str:
        return json.dumps([[_num(v), _num(m)] for v, m in self.atoms])

    @classmethod
    def from_json(cls, s: str) -> "LayerCake":
        return cls(tuple((_parse_json_num(v), _parse_json_num(m)) for v, m in json.loads(s)))


def _parse_json_num(x):
    return x if isinstance(x, int) else float(x)


@dataclass(frozen=True)
class StoppingCell:
    index: CellIndex
    lam: object
    beta: object
    alpha: object


@dataclass(frozen=True)
class MaximalDecomposition:
    threshold: object
    cells: tuple[StoppingCell, ...]
    kappa1: object
    A: object
    B: object
    p: object

    def __len__(self) -> int:
        return len(self.cells)


# -- operations -----------------------------------------------------------


def cell_average(phi: StepFunction, cell: CellIndex):
    r = cell.leaf_range(phi.params)
    block = phi.leaf_values[r.start:r.stop]
    return block.sum() / len(block) if phi.exact else float(block.mean())


def condexp(phi: StepFunction, level: int) -> StepFunction:
    """Level-``level`` conditional expectation, re-expressed at full depth."""
    if not 0 <= level <= phi.depth:
        raise DomainError(f"level {level} outside 0..{phi.depth}")
    avgs = phi.level_averages(level)
    return StepFunction(phi.params, np.repeat(avgs, phi.N ** (phi.depth - level)))


def ancestor_averages(phi: StepFunction) -> list[np.ndarray]:
    """Cell averages for every level 0..depth."""
    return [phi.level_averages(k) for k in range(phi.depth + 1)]


def maximal(phi: StepFunction) -> StepFunction:
    """Leafwise maximum of the averages over all ancestor cells."""
    N, m = phi.N, phi.depth
    running = phi.level_averages(0)
    for k in range(1, m + 1):
        running = np.maximum(np.repeat(running, N), phi.level_averages(k))
    return StepFunction(phi.params, running)


def integral_power(phi: StepFunction, s):
    if not s > 0:
        raise DomainError(f"exponent must be positive, got {s}")
    vals = phi.leaf_values
    if phi.exact:
        return sum(rpow(v, s) for v in vals) / len(vals)
    return float(np.mean(vals ** float(s)))


def integral(phi: StepFunction):
    vals = phi.leaf_values
    return vals.sum() / len(vals) if phi.exact else float(vals.mean())


def distribution(psi: StepFunction) -> LayerCake:
    n = len(psi)
    counts = Counter(psi.leaf_values.tolist())
    if psi.exact:
        atoms = [(Fraction(v), Fraction(c, n)) for v, c in counts.items()]
    else:
        atoms = [(float(v), c / n) for v, c in counts.items()]
    atoms.sort(key=lambda a: a[0], reverse=True)
    return LayerCake(tuple(atoms))


def top_measure_integral(psi: StepFunction | LayerCake, kappa, s):
    """Supremum of the integral of ``psi**s`` over sets of measure ``kappa``."""
    cake = psi if isinstance(psi, LayerCake) else distribution(psi)
    return cake.top_integral(kappa, s)


def select_threshold(phi: StepFunction, kappa):
    """Attained value ``u`` of the maximal function with
    ``mu(M > u) <= kappa <= mu(M >= u)``; the larger candidate wins ties."""
    if not 0 < kappa <= 1:
        raise DomainError(f"kappa must lie in (0, 1], got {kappa}")
    cake = distribution(maximal(phi))
    cum = 0
    for v, m in cake:
        cum += m
        if cum >= kappa:
            return v
    # float round-off on the last cumulative sum
    return cake.atoms[-1][0]


def stopping_decomposition(phi: StepFunction, u, p=2) -> MaximalDecomposition:
    """Maximal cells whose average exceeds ``u``, searched shallowest first."""
    f = integral(phi)
    if u < f:
        raise DomainError(f"threshold {u} is below the mean {f}")
    N, m = phi.N, phi.depth
    covered = np.zeros(1, dtype=bool)
    cells: list[StoppingCell] = []
    for k in range(m + 1):
        if k > 0:
            covered = np.repeat(covered, N)
        avgs = phi.level_averages(k)
        hits = np.flatnonzero(~covered & (avgs > u))
        if len(hits) == 0:
            continue
        lam = Fraction(1, N ** k) if phi.exact else 1.0 / N ** k
        width = N ** (m - k)
        for pos in hits:
            block = phi.leaf_values[pos * width:(pos + 1) * width]
            if phi.exact:
                alpha = sum(rpow(v, p) for v in block) * lam / width
            else:
                alpha = float(np.mean(block ** float(p))) * lam
            cells.append(StoppingCell(CellIndex.from_position(N, k, int(pos)), lam, avgs[pos], alpha))
        covered = covered.copy()
        covered[hits] = True
    zero = Fraction(0) if phi.exact else 0.0
    kappa1 = sum((c.lam for c in cells), zero)
    A = sum((c.alpha for c in cells), zero)
    B = sum((c.lam * c.beta for c in cells), zero)
    return MaximalDecomposition(u, tuple(cells), kappa1, A, B, p)


def weak_norm(psi: StepFunction | LayerCake, p, q) -> float:
    """``sup_E mu(E)**(1/q - 1/p) * (int_E psi**p)**(1/p)`` over sets of positive measure.

    The top-``kappa`` integral is piecewise linear in ``kappa``; on each piece
    the objective has at most one interior critical point, found in closed form.
    """
    p, q = float(p), float(q)
    if not q > p > 1:
        raise DomainError(f"need q > p > 1, got p={p}, q={q}")
    cake = psi if isinstance(psi, LayerCake) else distribution(psi)
    beta = 1.0 / p - 1.0 / q

    def obj(k, a, b):
        return k ** (-beta) * (a + b * k) ** (1.0 / p)

    best = 0.0
    cum_k, cum_t = 0.0, 0.0
    for v, m in cake:
        v, m = float(v), float(m)
        b = v ** p
        a = cum_t - b * cum_k
        lo, hi = cum_k, min(cum_k + m, 1.0)
        if hi > 0:
            best = max(best, obj(hi, a, b))
            if b > 0 and a > 0:
                k_star = q * beta * a / b
                if lo < k_star < hi:
                    best = max(best, obj(k_star, a, b))
        cum_k, cum_t = hi, cum_t + b * (hi - lo)
    return best


def random_step_function(
    rng: np.random.Generator, N: int, depth: int, low: float = -3.0, high: float = 3.0
) -> StepFunction:
    """Leaf values ``exp(U)`` with ``U`` uniform on ``[low, high]``."""
    return StepFunction(TreeParams(N, depth), np.exp(rng.uniform(low, high, N ** depth)))


def permute_children(phi: StepFunction, cell: CellIndex, perm: Sequence[int]) -> StepFunction:
    """Reorder the child subtrees of ``cell`` by ``perm``."""
    N, m = phi.N, phi.depth
    if cell.level >= m:
        raise DomainError("a leaf has no children")
    r = cell.leaf_range(phi.params)
    sub = phi.leaf_values[r.start:r.stop].reshape(N, -1)
    out = phi.leaf_values.copy()
    out[r.start:r.stop] = sub[list(perm)].reshape(-1)
    return StepFunction(phi.params, out)


__all__ = [
    "TreeParams",
    "CellIndex",
    "StepFunction",
    "LayerCake",
    "StoppingCell",
    "MaximalDecomposition",
    "cell_average",
    "condexp",
    "ancestor_averages",
    "maximal",
    "integral",
    "integral_power",
    "distribution",
    "top_measure_integral",
    "select_threshold",
    "stopping_decomposition",
    "weak_norm",
    "random_step_function",
    "permute_children",
]
