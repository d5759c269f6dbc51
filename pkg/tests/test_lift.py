from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from fglab.gf import FieldSpec
from fglab.lift import (
    IntegralityError,
    group_law_char0,
    honda_law,
    honda_logarithm,
    honda_multiplication,
    integrality_check,
    log_inverse,
    multiplication_char0,
    reduce_mod_p,
)
from fglab.pseries import identity_series, s_compose


def q_mul(a, b, N):
    out = {}
    for (i, j), x in a.items():
        for (k, l), y in b.items():
            if i + j + k + l <= N:
                out[(i + k, j + l)] = out.get((i + k, j + l), 0) + x * y
    return out


def q_log_of(B, p, h, N):
    """l(B) for a bivariate dict B, computed by plain powering."""
    out = dict(B)
    m, q = 1, p**h
    while q <= N:
        pw = {(0, 0): Fraction(1)}
        for _ in range(q):
            pw = q_mul(pw, B, N)
        for k, v in pw.items():
            out[k] = out.get(k, 0) + v / p**m
        m, q = m + 1, q * p**h
    return {k: v for k, v in out.items() if v}


@pytest.mark.parametrize("p,h,N", [(2, 2, 10), (3, 1, 10), (2, 1, 9), (2, 3, 9)])
def test_log_of_law_is_additive(p, h, N):
    G = group_law_char0(honda_logarithm(p, h, N))
    lhs = q_log_of(dict(G.data), p, h, N)
    rhs = q_log_of({(1, 0): Fraction(1)}, p, h, N)
    for k, v in q_log_of({(0, 1): Fraction(1)}, p, h, N).items():
        rhs[k] = rhs.get(k, 0) + v
    assert lhs == rhs


def test_degree_four_terms():
    # l = x + x^4/2 forces G_4 = -((x+y)^4 - x^4 - y^4)/2
    G = group_law_char0(honda_logarithm(2, 2, 6))
    assert {k: v for k, v in G.data.items() if sum(k) == 4} == {(3, 1): -2, (2, 2): -3, (1, 3): -2}
    assert G.data[(1, 0)] == G.data[(0, 1)] == 1
    # [2] = l^{-1}(2 l): the x^4 coefficient is 2/2 - 2^4/2 = -7
    assert multiplication_char0(honda_logarithm(2, 2, 6), 2).data[4] == -7


def test_log_inverse_composes_to_identity():
    L = honda_logarithm(3, 1, 20)
    e = log_inverse(L)
    assert s_compose(L.series, e) == identity_series(L.series.domain, 20)


def test_log_is_not_integral():
    ok, witness = integrality_check(honda_logarithm(2, 2, 20), 2)
    assert not ok and witness == (4, Fraction(1, 2))
    with pytest.raises(IntegralityError) as exc:
        reduce_mod_p(honda_logarithm(2, 2, 20), FieldSpec(2, 1))
    assert exc.value.witness[0] == 4


@pytest.mark.parametrize("p,h,N", [(2, 2, 20), (2, 3, 20), (3, 2, 20), (3, 1, 20), (5, 1, 26), (2, 1, 20)])
def test_residue_route_matches_rationals(p, h, N):
    L = honda_logarithm(p, h, N)
    G = group_law_char0(L)
    assert integrality_check(G, p) == (True, None)
    red = reduce_mod_p(G, FieldSpec(p, 1))
    fast = honda_law(p, h, N)
    assert (red.data == fast.data).all()


@pytest.mark.parametrize("a", [-1, 2, 3, 5, 7])
@pytest.mark.parametrize("p,h", [(2, 2), (3, 1), (3, 2)])
def test_multiplication_routes_agree(p, h, a):
    N = 24
    red = reduce_mod_p(multiplication_char0(honda_logarithm(p, h, N), a), FieldSpec(p, 1))
    assert (red.data == honda_multiplication(p, h, N, a).data).all()


@pytest.mark.parametrize("p,h,N", [(2, 2, 300), (2, 3, 600), (3, 2, 300), (5, 1, 400)])
def test_p_series_is_a_monomial(p, h, N):
    ps = honda_multiplication(p, h, N, p)
    assert ps.nonzero_degrees() == [p**h]
    assert int(ps.data[0, p**h]) == 1


def test_law_degrees_are_one_mod_q_minus_one():
    p, h, N = 2, 2, 64
    G = honda_law(p, h, N)
    for i, j in G.monomials():
        assert (i + j - 1) % (p**h - 1) == 0


@given(st.integers(-30, 30), st.integers(-30, 30), st.sampled_from([(2, 2), (3, 1), (2, 3)]))
def test_multiplication_is_a_ring_map(a, b, ph):
    p, h = ph
    N = 40
    fa, fb = honda_multiplication(p, h, N, a), honda_multiplication(p, h, N, b)
    assert s_compose(fa, fb) == honda_multiplication(p, h, N, a * b)


def test_bad_inputs():
    with pytest.raises(ValueError):
        honda_logarithm(4, 1, 10)
    with pytest.raises(ValueError):
        honda_logarithm(2, 0, 10)
