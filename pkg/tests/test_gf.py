import pytest
from hypothesis import given, strategies as st

from fglab.gf import (
    CONWAY,
    FieldError,
    FieldSpec,
    first_irreducible,
    fq_frobenius,
    fq_in_subfield,
    fq_inv,
    fq_pow,
    is_irreducible,
    is_prime,
)

FIELDS = [FieldSpec(2, 1), FieldSpec(2, 2), FieldSpec(2, 4), FieldSpec(3, 2), FieldSpec(5, 3), FieldSpec(2, 6)]


def brute_mul(spec, a, b):
    """Schoolbook product of coordinate lists, reduced by long division."""
    p, m = spec.p, list(spec.modulus)
    prod = [0] * (2 * spec.n - 1)
    for i, x in enumerate(a.coords):
        for j, y in enumerate(b.coords):
            prod[i + j] += x * y
    for k in range(len(prod) - 1, spec.n - 1, -1):
        c = prod[k] % p
        if c:
            for i, mi in enumerate(m):
                prod[k - spec.n + i] -= c * mi
    return tuple(v % p for v in prod[: spec.n])


def elements(spec):
    return st.integers(0, spec.q - 1).map(spec.from_code)


@st.composite
def field_and_elements(draw, k=3):
    spec = draw(st.sampled_from(FIELDS))
    return (spec, *[draw(elements(spec)) for _ in range(k)])


def test_small_primes():
    assert [n for n in range(30) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


@pytest.mark.parametrize("key", sorted(CONWAY))
def test_builtin_moduli_irreducible(key):
    p, n = key
    assert is_irreducible(CONWAY[key], p)


@pytest.mark.parametrize("key", [k for k in sorted(CONWAY) if k[1] > 1])
def test_builtin_moduli_primitive(key):
    # t generates the multiplicative group
    spec = FieldSpec(*key)
    t = spec.gen()
    order = spec.q - 1
    for r in {q for q in range(2, order + 1) if order % q == 0 and is_prime(q)}:
        assert fq_pow(t, order // r) != spec.one()


def test_reducible_modulus_rejected():
    with pytest.raises(FieldError):
        FieldSpec(2, 2, (1, 0, 1))  # (t+1)^2


def test_fallback_modulus():
    assert first_irreducible(2, 2) == (1, 1, 1)
    spec = FieldSpec(2, 9)
    assert is_irreducible(spec.modulus, 2)
    assert fq_pow(spec.gen(), spec.q) == spec.gen()


def test_f4_table():
    spec = FieldSpec(2, 2)
    t = spec.gen()
    assert t * t == t + spec.one()
    assert fq_pow(t, 3) == spec.one()


@given(field_and_elements())
def test_mul_matches_schoolbook(args):
    spec, a, b, _ = args
    assert (a * b).coords == brute_mul(spec, a, b)


@given(field_and_elements())
def test_ring_axioms(args):
    spec, a, b, c = args
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a + (-a) == spec.zero()
    assert a * spec.one() == a


@given(field_and_elements(1))
def test_inverse(args):
    spec, a = args
    if a.is_zero():
        with pytest.raises(ZeroDivisionError):
            fq_inv(a)
    else:
        assert a * fq_inv(a) == spec.one()


@given(field_and_elements(2))
def test_frobenius_is_additive_and_pth_power(args):
    spec, a, b = args
    assert fq_frobenius(a, 1) == fq_pow(a, spec.p)
    assert fq_frobenius(a + b, 1) == fq_frobenius(a, 1) + fq_frobenius(b, 1)
    assert fq_frobenius(a, spec.n) == a


@pytest.mark.parametrize("spec", FIELDS, ids=repr)
def test_subfield_sizes(spec):
    for m in range(1, spec.n + 1):
        if spec.n % m:
            with pytest.raises(FieldError):
                fq_in_subfield(spec.one(), m)
            continue
        assert sum(fq_in_subfield(a, m) for a in spec.elements()) == spec.p**m


@given(field_and_elements(1))
def test_json_roundtrip(args):
    spec, _ = args
    assert FieldSpec.from_json(spec.to_json()) == spec
