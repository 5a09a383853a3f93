from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dyadic_bellman import bellman_forms as bf
from dyadic_bellman._scalar import rpow
from dyadic_bellman.errors import DomainError

F_ = Fraction


@st.composite
def dp_queries(draw):
    N = draw(st.sampled_from([2, 3, 4]))
    p = draw(st.floats(1.05, 4.0))
    f = draw(st.floats(0.2, 3.0))
    ratio = draw(st.floats(1.0, 20.0))
    kappa = draw(st.floats(1e-3, 1.0))
    return dict(F=f ** p * ratio, f=f, kappa=kappa, N=N, p=p)


class TestScalars:
    def test_rpow_exact_roots(self):
        assert rpow(F_(9, 4), F_(1, 2)) == F_(3, 2)
        assert rpow(8, F_(2, 3)) == 4
        assert isinstance(rpow(2, F_(1, 2)), float)
        assert rpow(F_(3, 2), 3) == F_(27, 8)


class TestConstants:
    def test_ratio_const(self):
        assert bf.ratio_const(2, 2) == F_(3, 2)
        assert bf.ratio_const(2, 3) == F_(7, 6)
        with pytest.raises(DomainError):
            bf.ratio_const(2, 1)

    @given(st.integers(2, 9), st.floats(1.001, 10))
    def test_ratio_const_exceeds_one(self, N, s):
        assert bf.ratio_const(N, s) > 1

    def test_c_np(self):
        assert bf.c_np(2, 2) == F_(3, 4)
        assert bf.c_np(3, 2) == F_(2, 3)

    @given(st.integers(2, 9), st.floats(1.001, 10))
    def test_c_np_in_unit_interval(self, N, p):
        assert 0 < bf.c_np(N, p) < 1

    def test_real_N_rejected(self):
        with pytest.raises(DomainError):
            bf.ratio_const(2.5, 2)


class TestLpLower:
    def test_values(self):
        assert bf.lp_lower(F_(9, 4), F_(3, 2), 2, 2) == F_(9, 4)
        assert bf.lp_lower(2, 1, 2, 2) == F_(5, 2)
        assert bf.lp_lower(4, 1, 2, 2) == F_(11, 2)
        # F = 4 = 2**(2(p-1)): depth-2 chain
        assert bf.lp_lower(4, 1, 2, 2) == bf.bpq_chain_value(1, 2, 2, 2, 2)

    def test_infeasible(self):
        with pytest.raises(DomainError):
            bf.lp_lower(F_(1, 2), 1, 2, 2)


class TestGAndUStar:
    def test_g_values(self):
        assert bf.g_of_u(1, 2, 1, 1, 2, 2) == bf.lp_lower(2, 1, 2, 2)
        assert bf.g_of_u(F_(3, 2), 2, 1, F_(1, 2), 2, 2) == F_(15, 8)
        assert bf.g_of_u(2, 2, 1, F_(1, 3), 2, 2) == F_(1, 3) * 4

    def test_u_star(self):
        assert bf.u_star(2, 1, 1, 2, 2) == 1
        assert bf.u_star(2, 1, F_(1, 2), 2, 2) == F_(3, 2)
        assert bf.u_star(2, 1, F_(1, 4), 2, 2) == 2

    def test_u_star_domain(self):
        with pytest.raises(DomainError):
            bf.u_star(2, 1, 0, 2, 2)
        with pytest.raises(DomainError):
            bf.u_star(F_(1, 2), 1, F_(1, 2), 2, 2)

    @given(dp_queries())
    def test_u_star_in_admissible_interval(self, q):
        u = bf.u_star(**q)
        hi = min((q["F"] / q["f"]) ** (1 / (q["p"] - 1)), q["f"] / q["kappa"])
        assert q["f"] * (1 - 1e-12) <= u <= hi * (1 + 1e-12)


class TestDp:
    def test_values(self):
        assert bf.dp_min_form(2, 1, 1, 2, 2) == bf.lp_lower(2, 1, 2, 2)
        assert bf.dp_min_form(2, 1, F_(1, 2), 2, 2) == F_(15, 8)
        assert bf.dp_min_form(F_(9, 4), F_(3, 2), F_(1, 3), 2, 2) == F_(1, 3) * F_(9, 4)
        assert bf.dp_piecewise(2, 1, F_(1, 2), 2, 2) == F_(15, 8)
        assert bf.dp_piecewise(2, 1, 1, 2, 2) == bf.lp_lower(2, 1, 2, 2)
        assert bf.dp_piecewise(2, 1, F_(1, 4), 2, 2) == 1

    @given(dp_queries())
    def test_forms_agree(self, q):
        a, b = bf.dp_piecewise(**q), bf.dp_min_form(**q)
        assert abs(a - b) <= 1e-9 * max(1, a)

    @given(dp_queries())
    @settings(max_examples=50)
    def test_numeric_minimum(self, q):
        F, f, kappa, N, p = q["F"], q["f"], q["kappa"], q["N"], q["p"]
        hi = min((F / f) ** (1 / (p - 1)), f / kappa)
        us = np.linspace(f, hi, 20001)
        R = float(bf.ratio_const(N, p))
        grid = np.min(kappa * us ** p + R * (F - us ** (p - 1) * f))
        val = bf.dp_min_form(**q)
        assert val <= grid + 1e-9 * max(1, grid)
        assert grid - val <= 1e-6 * max(1, val)

    def test_branch_continuity_exact(self):
        F, f, N, p = 2, 1, 2, 2
        c = bf.c_np(N, p)
        up, mid, _ = bf.dp_branch_values(F, f, c, N, p)
        assert up == mid
        lo_pt = c * F_(1, 2)
        _, mid, low = bf.dp_branch_values(F, f, lo_pt, N, p)
        assert mid == low
        assert (c, lo_pt) == (F_(3, 4), F_(3, 8))

    @given(dp_queries())
    def test_floor(self, q):
        fp = q["f"] ** q["p"]
        assert bf.dp_piecewise(**q) >= q["kappa"] * fp * (1 - 1e-12)

    def test_floor_equality_at_constant(self):
        assert bf.dp_piecewise(F_(9, 4), F_(3, 2), F_(1, 5), 3, 2) == F_(1, 5) * F_(9, 4)

    @given(dp_queries(), st.floats(0.0, 1.0), st.floats(1.0, 2.0))
    def test_monotone(self, q, dk, dF):
        k2 = q["kappa"] + dk * (1 - q["kappa"])
        base = bf.dp_piecewise(**q)
        assert bf.dp_piecewise(**{**q, "kappa": k2}) >= base * (1 - 1e-12)
        assert bf.dp_piecewise(**{**q, "F": q["F"] * dF}) >= base * (1 - 1e-12)

    @given(dp_queries(), st.floats(0.1, 10))
    def test_homogeneity(self, q, t):
        p = q["p"]
        scaled = bf.dp_piecewise(**{**q, "F": t ** p * q["F"], "f": t * q["f"]})
        assert scaled == pytest.approx(t ** p * bf.dp_piecewise(**q), rel=1e-9)


class TestWeak:
    def test_kappa0(self):
        assert bf.kappa0(1, 1, 2, 2, 4) is None
        assert bf.kappa0(4, 1, 2, 2, 4) == F_(9, 32)
        # boundary F = (q-1)/(q-p) f**p
        assert bf.kappa0(F_(3, 2), 1, 2, 2, 4) is None

    def test_constant_function(self):
        assert bf.weak_lower(1.0, 1.0, 2, 2, 4) == pytest.approx(1.0)

    def test_case_ii_as_printed(self):
        # F = f**p places the query in case (ii); the printed and derived forms coincide
        assert bf.weak_lower(2.0, 1.0, 2, 2, 3) == bf.weak_lower_printed(2.0, 1.0, 2, 2, 3)

    def test_printed_case_i_is_weaker(self):
        derived = bf.weak_lower(4.0, 1.0, 2, 2, 4)
        printed = bf.weak_lower_printed(4.0, 1.0, 2, 2, 4)
        assert derived == pytest.approx(2.7463561918761568, rel=1e-12)
        assert printed < derived

    @given(st.sampled_from([2, 3]), st.floats(1.2, 3.0), st.floats(0.2, 3.0),
           st.floats(0.2, 2.0), st.floats(1.0, 30.0), st.floats(0.1, 10))
    def test_homogeneity(self, N, p, dq, f, ratio, t):
        q = p + dq
        F = f ** p * ratio
        assert bf.weak_lower(t ** p * F, t * f, N, p, q) == pytest.approx(
            t * bf.weak_lower(F, f, N, p, q), rel=1e-9)

    def test_domain(self):
        with pytest.raises(DomainError):
            bf.weak_lower(2, 1, 2, 2, 2)


class TestStrong:
    def test_bpq(self):
        assert bf.bpq_lower(1, 1, 2, 2, 3) == 1
        assert bf.bpq_lower(2, 1, 2, 2, 2) == F_(5, 2)
        assert bf.bpq_lower(2, 1, 2, 2, 3) == F_(9, 2)

    def test_chain_value(self):
        assert bf.bpq_chain_value(F_(3, 2), 3, 0, 2, 3) == F_(27, 8)
        assert bf.bpq_chain_value(1, 2, 1, 2, 2) == F_(5, 2)
        assert bf.bpq_chain_value(1, 2, 1, 2, 3) == F_(9, 2)

    @pytest.mark.parametrize("N", [2, 3])
    @pytest.mark.parametrize("m", range(5))
    @pytest.mark.parametrize("p,q", [(2, 3), (2, 4), (3, 4), (3, 5)])
    @pytest.mark.parametrize("f", [F_(1), F_(3, 2), F_(4)])
    def test_equality_identity_exact(self, N, m, p, q, f):
        F = N ** (m * (p - 1)) * f ** p
        assert bf.bpq_lower(F, f, N, p, q) == bf.bpq_chain_value(f, N, m, p, q)

    @given(st.sampled_from([2, 3]), st.floats(1.2, 3.0), st.floats(0.1, 3.0),
           st.floats(0.2, 2.0), st.floats(1.0, 30.0), st.floats(1.0, 2.0), st.floats(0.1, 10))
    def test_monotone_and_homogeneous(self, N, p, dq, f, ratio, dF, t):
        q = p + dq
        F = f ** p * ratio
        base = bf.bpq_lower(F, f, N, p, q)
        assert bf.bpq_lower(F * dF, f, N, p, q) >= base * (1 - 1e-12)
        assert bf.bpq_lower(t ** p * F, t * f, N, p, q) == pytest.approx(t ** q * base, rel=1e-9)

    def test_blq(self):
        assert bf.blq_lower(2, 1, 1, 2, 2, 3) == bf.bpq_lower(2, 1, 2, 2, 3)
        assert bf.blq_lower(2, 1, 10, 2, 2, 3) == 1000
        assert bf.blq_lower(2, 1, F_(3, 2), 2, 2, 3) == F_(65, 12)
        with pytest.raises(DomainError):
            bf.blq_lower(2, 1, F_(1, 2), 2, 2, 3)

    def test_bq_less_p(self):
        assert bf.bq_less_p(1, 1.5) == 1
        assert bf.bq_less_p(2, 1.5) == pytest.approx(2 ** 1.5)


class TestHConvex:
    @pytest.mark.parametrize("N,s", [(2, 2), (3, 2), (2, 3), (4, 3)])
    def test_roots_exact(self, N, s):
        assert bf.h_convex_test(1, N, s) == 0
        assert bf.h_convex_test(N, N, s) == 0
        assert bf.h_convex_test(F_(1 + N, 2), N, s) < 0

    @given(st.integers(2, 6), st.floats(1.05, 5), st.floats(0, 1))
    def test_nonpositive_between_roots(self, N, s, w):
        t = 1 + w * (N - 1)
        assert bf.h_convex_test(t, N, s) <= 1e-12


class TestQuery:
    def test_validation(self):
        bf.BellmanQuery(N=2, p=2, F=2, f=1, kappa=F_(1, 2), L=1)
        with pytest.raises(DomainError):
            bf.BellmanQuery(N=2, p=2, F=F_(1, 2), f=1)
        with pytest.raises(DomainError):
            bf.BellmanQuery(N=2, p=2, F=2, f=1, kappa=0)
        with pytest.raises(DomainError):
            bf.BellmanQuery(N=2, p=2, F=2, f=1, L=F_(1, 2))
