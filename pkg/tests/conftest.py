import sys
import numpy as np
import pytest
from hypothesis import strategies as st

from dyadic_bellman.tree_lab import CellIndex, StepFunction


@st.composite
def step_functions(draw, max_depth=3, exact=False, allow_zero=True):
    N = draw(st.sampled_from([2, 3]))
    depth = draw(st.integers(0, max_depth if N == 2 else min(max_depth, 2)))
    n = N ** depth
    if exact:
        vals = draw(st.lists(st.fractions(min_value=0, max_value=20, max_denominator=12),
                             min_size=n, max_size=n))
    else:
        lo = 0.0 if allow_zero else 1e-3
        vals = draw(st.lists(st.floats(lo, 50.0, allow_nan=False), min_size=n, max_size=n))
    return StepFunction.from_values(N, depth, vals)


def brute_maximal(phi: StepFunction) -> list:
    """Leafwise maximum of ancestor averages, computed cell by cell."""
    N, m = phi.N, phi.depth
    out = []
    for leaf in range(N ** m):
        path = CellIndex.from_position(N, m, leaf).path
        best = None
        for s in range(m + 1):
            block = CellIndex(path[:s]).leaf_range(phi.params)
            vals = [phi.leaf_values[i] for i in block]
            avg = sum(vals) / len(vals)
            best = avg if best is None or avg > best else best
        out.append(best)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LEDGER", None)
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
