from fractions import Fraction
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bbm_wavekit.spectral_core import TorusSpec, omega
from bbm_wavekit.dyson_normal_form import catalan
from bbm_wavekit.tree_calculus import trees as T
from bbm_wavekit.tree_calculus.expoly import ExpPoly
from bbm_wavekit.tree_calculus.diagrams import decompose
from oracles import simplex_integral

SPEC = TorusSpec(Fraction(2), 8)
kstrat = st.integers(-8, 8).filter(lambda k: k != 0)


def test_catalan_counts():
    for n in range(9):
        assert len(T.enumerate_trees(n)) == catalan(n)
    with pytest.raises(ValueError):
        T.enumerate_trees(9)


def test_orders_total_factorial():
    for n in range(1, 7):
        assert T.count_orders(n) == math.factorial(n)
        assert T.multinomial_check(n)


def test_paired_counts():
    assert len(T.paired_trees(1)) == 2
    assert len(T.paired_trees(2)) == 12
    assert len(T.paired_trees(3)) == 120


def test_remark_tree_has_three_orders():
    A = ((None, None), (None, None))
    orders = T.admissible_orders(A)
    assert len(orders) == 2
    B = ((None, None), (None, (None, None)))
    assert len(T.admissible_orders(B)) == 3


def test_orders_are_linear_extensions():
    for A in T.enumerate_trees(5):
        for s in T.admissible_orders(A):
            assert T.is_admissible(A, s)
            assert s[-1] == ()
            pos = {m: i for i, m in enumerate(s)}
            for m in s:
                if m:
                    assert pos[m] < pos[m[:-1]]


def test_labels_and_leq():
    A = (None, (None, None))
    assert sorted(T.labels(A)) == [(), (2,)]
    assert T.leq((2,), ())
    assert not T.leq((), (2,))
    assert T.fmt_label(()) == "0"
    assert T.fmt_label((1, 2)) == "(1,2,0)"


def test_decomposition_parity_all_paired():
    for n in (1, 2, 3):
        for ot in T.paired_trees(n):
            side, *parts = decompose(ot.tree, ot.sigma)
            total = 2 + sum(T.n_nodes(t) for t, _, _ in parts)
            assert total == 2 * n
            for t, s, pos in parts:
                assert T.pairing_ok(s) and T.is_admissible(t, s) if t is not None else s == ()
                assert all((p - j) % 2 == 0 for j, p in enumerate(pos, start=1))


def test_expoly_integrate_matches_quadrature():
    L = SPEC.L
    e = ExpPoly(L, {(2, Fraction(1, 3)): 1.5 - 0.5j, (0, Fraction(0)): 2.0, (1, Fraction(-2, 5)): 1j})
    F = e.integrate()
    from oracles import cquad
    for t in (0.3, 1.7, 4.0):
        ref = cquad(lambda s: complex(e(s)), 0.0, t, 1e-12)
        assert abs(F(t) - ref) < 1e-10
    assert F.secular_coefficient(1) == 2.0
    assert F(0.0) == pytest.approx(0.0, abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.lists(kstrat, min_size=4, max_size=4), st.floats(0.1, 3.0))
def test_recursion_equals_order_sum(kvec, t):
    for A in T.enumerate_trees(3):
        a = T.f_tree_total(A, kvec, SPEC)(t)
        b = T.f_tree_by_orders(A, kvec, SPEC)(t)
        assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


@pytest.mark.parametrize("seed", range(3))
def test_f_sigma_against_simplex_quadrature(seed):
    rng = np.random.default_rng(seed)
    for n in (1, 2):
        for A in T.enumerate_trees(n):
            kvec = [int(k) for k in rng.choice([k for k in range(-6, 7) if k], size=n + 1)]
            if any(k == 0 for k, _, _ in T.node_modes(A, kvec).values()):
                continue
            nodes = T.node_data(A, kvec, SPEC.L_squared)
            for s in T.admissible_orders(A):
                t = float(rng.uniform(0.2, 2.0))
                ws = [SPEC.L * float(nodes[m].w) for m in s]
                ds = [SPEC.L * float(nodes[m].d) for m in s]
                assert abs(T.f_sigma_exact(A, s, kvec, SPEC)(t) - simplex_integral(ws, ds, t)) < 1e-9


def test_leading_term_is_secular_coefficient():
    kvec = (1, 3, -3)
    for A in T.enumerate_trees(2):
        for s in T.admissible_orders(A):
            F = T.f_sigma_exact(A, s, kvec, SPEC)
            assert F.max_power() <= 1
            lead = T.leading_coefficient(A, s, kvec, SPEC)
            assert abs(F.secular_coefficient(1) - lead) < 1e-12


def test_leading_term_dominates():
    kvec = (3, -3, 1)
    A = (None, (None, None))
    s = ((2,), ())
    F = T.f_sigma_exact(A, s, kvec, SPEC)
    lead = T.leading_coefficient(A, s, kvec, SPEC)
    assert lead != 0
    ts = np.array([100.0, 200.0, 400.0, 800.0])
    err = np.abs(np.array([F(t) for t in ts]) - lead * ts)
    assert np.all(err < 5 * abs(lead) * 10)   # O(1) remainder, bounded


@settings(max_examples=20, deadline=None)
@given(st.lists(kstrat, min_size=5, max_size=5), st.floats(0.1, 5.0))
def test_first_cancellation(kvec, t):
    assert abs(T.first_cancellation_check(2, kvec, SPEC, t)) <= 1e-12
    assert T.first_cancellation_check(1, kvec[:3], SPEC, t) == 0


def test_cancellation_partner_involution():
    for A in T.enumerate_trees(4):
        for s in T.admissible_orders(A):
            p = T.cancellation_partner(s)
            if p is None:
                assert T.pairing_ok(s)
            else:
                assert T.cancellation_partner(p) == s


def test_zero_frequency_gives_zero():
    A = (None, (None, None))
    F = T.f_sigma_exact(A, ((2,), ()), (1, 0, 2), SPEC)
    assert F(1.0) == 0
