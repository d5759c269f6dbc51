import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fglab.fgl import (
    GOLDEN,
    INFINITE,
    LawError,
    bracket_int,
    bracket_zp,
    check_axioms,
    conjugate_law,
    g_add,
    g_commutator,
    g_neg,
    g_sub,
    golden_path,
    golden_precision,
    height,
    is_endomorphism,
    law_from_json,
    law_to_json,
    load_golden,
    load_law,
    multiplication,
    save_law,
    standard_law,
    validate,
    w_proximity,
)
from fglab.gf import FieldSpec
from fglab.lift import honda_law
from fglab.pseries import (
    b_substitute,
    biv_from_dict,
    biv_partial_x,
    from_coeffs,
    identity_series,
    monomial,
    zero_series,
)


@pytest.fixture(scope="module")
def law22():
    return standard_law(2, 2, 64)


@pytest.mark.parametrize("p,h", GOLDEN)
def test_standard_law_axioms_and_p_series(p, h):
    N = golden_precision(p, h)
    law = standard_law(p, h, N)
    assert check_axioms(law.G) == []
    ps = bracket_int(law, p)
    assert ps.nonzero_degrees() == [p**h] and ps.coeff(p**h) == law.spec.one()
    assert height(law) == h
    if h >= 2:
        D = biv_partial_x(law.G)
        assert D.monomials() == [(0, 0)]


def test_additive_law_has_infinite_height():
    spec = FieldSpec(2, 1)
    law = validate(biv_from_dict(spec, 20, {(1, 0): 1, (0, 1): 1}))
    assert height(law) == INFINITE
    assert not bracket_int(law, 2).nonzero_degrees()


def test_multiplicative_law_height_one():
    # x + y + xy over F_3: [3](x) = (1+x)^3 - 1 = x^3
    spec = FieldSpec(3, 1)
    law = validate(biv_from_dict(spec, 20, {(1, 0): 1, (0, 1): 1, (1, 1): 1}))
    assert height(law) == 1
    assert bracket_int(law, 3).nonzero_degrees() == [3]


def test_non_law_witnesses():
    spec = FieldSpec(2, 1)
    B = biv_from_dict(spec, 6, {(1, 0): 1, (0, 1): 1, (2, 1): 1})
    fails = {f.axiom: f.witness for f in check_axioms(B)}
    assert fails["commutativity"] == (1, 2)
    assert fails["associativity"] == (2, 2, 1)
    with pytest.raises(LawError) as exc:
        validate(B)
    assert exc.value.axiom == "commutativity"


def test_identity_axiom_witness():
    spec = FieldSpec(3, 1)
    B = biv_from_dict(spec, 5, {(1, 0): 1, (0, 1): 1, (3, 0): 1})
    assert check_axioms(B)[0].axiom == "identity"
    assert check_axioms(B)[0].witness == (3, 0)


def test_corrupted_law_found_by_associativity(law22):
    data = law22.G.data.copy()
    data[0, 2, 5] ^= 1
    data[0, 5, 2] ^= 1  # keep it symmetric
    B = type(law22.G)(law22.spec, law22.N, data)
    fails = check_axioms(B)
    assert [f.axiom for f in fails] == ["associativity"]


def test_double_is_diagonal(law22):
    x = law22.x()
    assert bracket_int(law22, 2) == b_substitute(law22.G, x, x)


def test_inverse(law22):
    inv = g_neg(law22)
    assert not g_add(law22, law22.x(), inv).nonzero_degrees()
    assert inv == bracket_int(law22, -1)
    assert inv.nonzero_degrees()[:3] == [1, 4, 10]


@given(st.integers(-20, 20), st.integers(-20, 20))
def test_bracket_is_additive(a, b):
    law = standard_law(3, 1, 30)
    lhs = bracket_int(law, a + b)
    assert lhs == g_add(law, bracket_int(law, a), bracket_int(law, b))
    assert multiplication(law, a + b) == lhs


@st.composite
def small_series(draw, spec, N):
    codes = draw(st.lists(st.integers(0, spec.q - 1), min_size=N, max_size=N))
    return from_coeffs(spec, N, {d: spec.from_code(c) for d, c in enumerate(codes, 1)})


@given(st.data())
def test_g_add_is_a_group_operation(data):
    law = standard_law(2, 2, 24)
    f, g, h = (data.draw(small_series(law.spec, 24)) for _ in range(3))
    assert g_add(law, f, g) == g_add(law, g, f)
    assert g_add(law, g_add(law, f, g), h) == g_add(law, f, g_add(law, g, h))
    assert g_sub(law, g_add(law, f, g), g) == f
    assert g_add(law, f, zero_series(law.spec, 24)) == f


def brute_endo_witness(G, e, N):
    """Lowest monomial of e(G) - G(e(x), e(y)) over F_2, by plain dictionaries."""

    def mul(a, b):
        out = {}
        for (i, j), x in a.items():
            for (k, l), y in b.items():
                if i + j + k + l <= N:
                    out[(i + k, j + l)] = (out.get((i + k, j + l), 0) + x * y) % 2
        return {k: v for k, v in out.items() if v}

    def subst(outer, inner_x, inner_y):
        acc = {}
        for (i, j), c in outer.items():
            t = {(0, 0): c}
            for _ in range(i):
                t = mul(t, inner_x)
            for _ in range(j):
                t = mul(t, inner_y)
            for k, v in t.items():
                acc[k] = (acc.get(k, 0) + v) % 2
        return {k: v for k, v in acc.items() if v}

    ex = {(d, 0): 1 for d in e}
    ey = {(0, d): 1 for d in e}
    lhs = subst({(d, 0): 1 for d in e}, G, {})  # e(G)
    rhs = subst(G, ex, ey)
    diff = {k for k in set(lhs) | set(rhs) if lhs.get(k, 0) != rhs.get(k, 0)}
    return min(diff, key=lambda t: (sum(t), t[0])) if diff else None


def test_x_plus_x_squared_is_not_an_endomorphism():
    law = standard_law(2, 2, 32)
    e = from_coeffs(law.spec, 32, {1: 1, 2: 1})
    res = is_endomorphism(law, e)
    N = 8
    Gd = {(i, j): 1 for (i, j) in honda_law(2, 2, N).monomials()}
    assert not res.ok
    assert res.witness == brute_endo_witness(Gd, [1, 2], N) == (2, 4)


@pytest.mark.parametrize("p,h", [(2, 2), (3, 2), (5, 1)])
def test_standard_endomorphisms(p, h):
    law = standard_law(p, h, 60)
    for e in (multiplication(law, 1 + p), monomial(law.spec, 60, p), monomial(law.spec, 60, 1, law.spec.gen())):
        assert is_endomorphism(law, e).ok


def test_conjugation(law22):
    u = multiplication(law22, 3)
    same = conjugate_law(law22, u)
    assert np.array_equal(same.G.data, law22.G.data)
    psi = from_coeffs(law22.spec, law22.N, {1: 1, 2: 1})
    other = conjugate_law(law22, psi)  # still a law, a different one
    assert not np.array_equal(other.G.data, law22.G.data)
    assert other.meta["conjugated"]


def test_commutator_of_commuting_pair(law22):
    u = multiplication(law22, 5)
    assert not g_commutator(law22, u, monomial(law22.spec, law22.N, 2)).nonzero_degrees()


def test_bracket_zp_window():
    law = standard_law(2, 2, 40)
    z = bracket_zp(law, [1, 1, 0])  # 3 mod 8, agrees with [3] below x^64
    assert z.window == 64 and z.complete
    assert z.series == multiplication(law, 3)
    with pytest.raises(ValueError):
        bracket_zp(law, [2])


def test_w_proximity(law22):
    assert w_proximity(multiplication(law22, 5)) == 16
    assert w_proximity(multiplication(law22, 3)) == 4
    assert not w_proximity(identity_series(law22.spec, 64)) < 65


def test_law_file_roundtrip(tmp_path, law22):
    path = tmp_path / "law.json"
    save_law(law22, path)
    first = path.read_bytes()
    back = load_law(path)
    assert np.array_equal(back.G.data, law22.G.data) and back.spec == law22.spec
    save_law(back, path)
    assert path.read_bytes() == first
    obj = json.loads(first)
    assert obj["meta"]["h"] == 2 and len(obj["meta"]["source_hash"]) == 64


def test_law_file_rejects_broken_law(law22):
    obj = law_to_json(law22)
    obj["G"] = obj["G"] + [[2, 1, [1, 0]]]  # breaks commutativity
    with pytest.raises(LawError):
        law_from_json(obj)


@pytest.mark.parametrize("p,h", GOLDEN)
def test_golden_files(p, h):
    law = load_golden(p, h)
    assert law.N == golden_precision(p, h) and law.spec.n == h
    fresh = standard_law(p, h, law.N)
    assert np.array_equal(law.G.data, fresh.G.data)
    assert json.loads(golden_path(p, h).read_text())["meta"]["construction"] == "honda"
