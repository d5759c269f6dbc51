"""Small finite fields F_{p^n} in a fixed polynomial basis over F_p.

Elements are coordinate vectors ``(a_0, ..., a_{n-1})`` meaning
``a_0 + a_1 t + ... + a_{n-1} t^{n-1}`` modulo a monic irreducible ``m(t)``.
The same data drives the array kernels in :mod:`fglab._kernels`: a
reduction matrix for ``t^k`` (``k < 2n-1``) and the matrix of Frobenius.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

# Conway polynomials, coefficients low degree first, monic leading 1 included.
CONWAY: dict[tuple[int, int], tuple[int, ...]] = {
    (2, 1): (1, 1),
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (2, 5): (1, 0, 1, 0, 0, 1),
    (2, 6): (1, 1, 0, 1, 1, 0, 1),
    (2, 7): (1, 1, 0, 0, 0, 0, 0, 1),
    (2, 8): (1, 0, 1, 1, 1, 0, 0, 0, 1),
    (3, 1): (1, 1),
    (3, 2): (2, 2, 1),
    (3, 3): (1, 2, 0, 1),
    (3, 4): (2, 0, 0, 2, 1),
    (3, 5): (1, 2, 0, 0, 0, 1),
    (3, 6): (2, 2, 1, 0, 2, 0, 1),
    (3, 7): (1, 0, 2, 0, 0, 0, 0, 1),
    (3, 8): (2, 2, 2, 0, 1, 2, 0, 0, 1),
    (5, 1): (3, 1),
    (5, 2): (2, 4, 1),
    (5, 3): (3, 3, 0, 1),
    (5, 4): (2, 4, 4, 0, 1),
    (5, 5): (3, 4, 0, 0, 0, 1),
    (5, 6): (2, 0, 1, 4, 1, 0, 1),
    (5, 7): (3, 3, 0, 0, 0, 0, 0, 1),
    (5, 8): (2, 4, 3, 0, 1, 0, 0, 0, 1),
    (7, 1): (4, 1),
    (7, 2): (3, 6, 1),
    (7, 3): (4, 0, 6, 1),
    (7, 4): (3, 4, 5, 0, 1),
    (7, 5): (4, 1, 0, 0, 0, 1),
    (7, 6): (3, 6, 4, 5, 1, 0, 1),
    (7, 7): (4, 6, 0, 0, 0, 0, 0, 1),
    (7, 8): (3, 2, 6, 4, 0, 1, 0, 0, 1),
}


class FieldError(ValueError):
    pass


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


def _poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mulmod(a: Sequence[int], b: Sequence[int], m: Sequence[int], p: int) -> list[int]:
    """Product of ``a`` and ``b`` modulo the monic polynomial ``m``."""
    n = len(m) - 1
    prod = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    for k in range(len(prod) - 1, n - 1, -1):
        c = prod[k]
        if c:
            for j in range(n + 1):
                prod[k - n + j] = (prod[k - n + j] - c * m[j]) % p
    return _poly_trim(prod[:n])


def _poly_powmod(a: Sequence[int], e: int, m: Sequence[int], p: int) -> list[int]:
    result = [1]
    base = list(a)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, m, p)
        base = _poly_mulmod(base, base, m, p)
        e >>= 1
    return result


def _poly_gcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _poly_trim(list(a)), _poly_trim(list(b))
    while b:
        inv = pow(b[-1], -1, p)
        while len(a) >= len(b):
            c = a[-1] * inv % p
            shift = len(a) - len(b)
            for j, bj in enumerate(b):
                a[shift + j] = (a[shift + j] - c * bj) % p
            _poly_trim(a)
            if not a:
                break
        a, b = b, a
    return a


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def is_irreducible(modulus: Sequence[int], p: int) -> bool:
    """Rabin's test: t^{p^n} = t mod m and gcd(t^{p^{n/q}} - t, m) = 1."""
    m = [c % p for c in modulus]
    n = len(m) - 1
    if n < 1 or m[-1] != 1:
        return False
    if n == 1:
        return True

    def frob_power(k: int) -> list[int]:
        return _poly_powmod([0, 1], p**k, m, p)

    top = frob_power(n)
    if _poly_trim(list(top)) != [0, 1]:
        return False
    for q in _prime_factors(n):
        x_pow = frob_power(n // q)
        diff = list(x_pow) + [0] * max(0, 2 - len(x_pow))
        diff[1] = (diff[1] - 1) % p
        if len(_poly_gcd(m, _poly_trim(diff), p)) > 1:
            return False
    return True


def first_irreducible(p: int, n: int) -> tuple[int, ...]:
    """The monic irreducible of degree n whose lower coefficients, read as a
    base-p number with a_0 least significant, are smallest."""
    for k in range(p**n):
        tail = [(k // p**i) % p for i in range(n)]
        mod = tuple(tail) + (1,)
        if mod[0] and is_irreducible(mod, p):
            return mod
    raise FieldError(f"no irreducible of degree {n} over F_{p}")  # unreachable


@dataclass(frozen=True)
class FieldSpec:
    """The field F_p[t]/(modulus); ``modulus`` is monic, low degree first."""

    p: int
    n: int
    modulus: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not is_prime(self.p):
            raise FieldError(f"p={self.p} is not prime")
        if self.n < 1:
            raise FieldError("extension degree must be >= 1")
        mod = self.modulus
        if not mod:
            mod = CONWAY.get((self.p, self.n)) or first_irreducible(self.p, self.n)
        mod = tuple(int(c) % self.p for c in mod)
        if len(mod) != self.n + 1 or mod[-1] != 1:
            raise FieldError("modulus must be monic of degree n")
        if not is_irreducible(mod, self.p):
            raise FieldError(f"modulus {mod} is reducible over F_{self.p}")
        object.__setattr__(self, "modulus", mod)

    @property
    def q(self) -> int:
        return self.p**self.n

    # kernel data ---------------------------------------------------------

    @cached_property
    def reduction(self) -> np.ndarray:
        """Row k holds the coordinates of t^k, for k < 2n - 1."""
        n, p = self.n, self.p
        rows = np.zeros((2 * n - 1, n), dtype=np.int64)
        for k in range(2 * n - 1):
            mono = [0] * k + [1]
            red = _poly_mulmod(mono, [1], self.modulus, p) if k >= n else mono
            rows[k, : len(red)] = red
        return rows

    @cached_property
    def frobenius_matrix(self) -> np.ndarray:
        """F with coords(a^p) = coords(a) @ F mod p."""
        n, p = self.n, self.p
        mat = np.zeros((n, n), dtype=np.int64)
        for i in range(n):
            img = _poly_powmod([0] * i + [1], p, self.modulus, p)
            mat[i, : len(img)] = img
        return mat

    def frobenius_power_matrix(self, r: int) -> np.ndarray:
        r %= self.n
        mat = np.eye(self.n, dtype=np.int64)
        for _ in range(r):
            mat = mat @ self.frobenius_matrix % self.p
        return mat

    # construction helpers --------------------------------------------------

    def __call__(self, coords: Iterable[int] | int) -> "FieldElement":
        if isinstance(coords, (int, np.integer)):
            return self.from_int(int(coords))
        return fq_make(self, coords)

    def from_int(self, value: int) -> "FieldElement":
        """Element of the prime subfield."""
        return FieldElement(self, (value % self.p,) + (0,) * (self.n - 1))

    def from_code(self, code: int) -> "FieldElement":
        """Inverse of :attr:`FieldElement.code` (base-p digits, low first)."""
        coords = []
        for _ in range(self.n):
            code, r = divmod(code, self.p)
            coords.append(r)
        return FieldElement(self, tuple(coords))

    def zero(self) -> "FieldElement":
        return FieldElement(self, (0,) * self.n)

    def one(self) -> "FieldElement":
        return self.from_int(1)

    def gen(self) -> "FieldElement":
        """The class of t; for n == 1 the root of the linear modulus."""
        if self.n == 1:
            return self.from_int(-self.modulus[0])
        return FieldElement(self, (0, 1) + (0,) * (self.n - 2))

    def elements(self):
        for code in range(self.q):
            yield self.from_code(code)

    def to_json(self) -> dict:
        return {"p": self.p, "n": self.n, "modulus": list(self.modulus)}

    @classmethod
    def from_json(cls, data: dict) -> "FieldSpec":
        return cls(int(data["p"]), int(data["n"]), tuple(data["modulus"]))

    def __repr__(self):
        return f"FieldSpec(p={self.p}, n={self.n})"


@dataclass(frozen=True)
class FieldElement:
    spec: FieldSpec
    coords: tuple[int, ...]

    @property
    def code(self) -> int:
        return sum(c * self.spec.p**i for i, c in enumerate(self.coords))

    def is_zero(self) -> bool:
        return not any(self.coords)

    def __bool__(self):
        return not self.is_zero()

    def __add__(self, other):
        return fq_add(self, _coerce(self.spec, other))

    __radd__ = __add__

    def __sub__(self, other):
        return fq_add(self, fq_neg(_coerce(self.spec, other)))

    def __rsub__(self, other):
        return fq_add(_coerce(self.spec, other), fq_neg(self))

    def __neg__(self):
        return fq_neg(self)

    def __mul__(self, other):
        return fq_mul(self, _coerce(self.spec, other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return fq_mul(self, fq_inv(_coerce(self.spec, other)))

    def __pow__(self, e: int):
        if e < 0:
            return fq_pow(fq_inv(self), -e)
        return fq_pow(self, e)

    def __repr__(self):
        terms = []
        for i, c in enumerate(self.coords):
            if c:
                mono = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
                terms.append(f"{c}{mono}" if c != 1 or i == 0 else mono)
        return " + ".join(terms) if terms else "0"


def _coerce(spec: FieldSpec, value) -> FieldElement:
    if isinstance(value, FieldElement):
        return value
    if isinstance(value, (int, np.integer)):
        return spec.from_int(int(value))
    raise TypeError(f"cannot use {value!r} as an element of {spec}")


def _check_same(a: FieldElement, b: FieldElement):
    if a.spec != b.spec:
        raise FieldError(f"field mismatch: {a.spec} vs {b.spec}")


def fq_make(spec: FieldSpec, coords: Iterable[int]) -> FieldElement:
    coords = tuple(int(c) % spec.p for c in coords)
    if len(coords) != spec.n:
        raise FieldError(f"expected {spec.n} coordinates, got {len(coords)}")
    return FieldElement(spec, coords)


def fq_add(a: FieldElement, b: FieldElement) -> FieldElement:
    _check_same(a, b)
    p = a.spec.p
    return FieldElement(a.spec, tuple((x + y) % p for x, y in zip(a.coords, b.coords)))


def fq_neg(a: FieldElement) -> FieldElement:
    p = a.spec.p
    return FieldElement(a.spec, tuple(-x % p for x in a.coords))


def fq_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    _check_same(a, b)
    spec = a.spec
    prod = _poly_mulmod(a.coords, b.coords, spec.modulus, spec.p)
    return FieldElement(spec, tuple(prod) + (0,) * (spec.n - len(prod)))


def fq_pow(a: FieldElement, e: int) -> FieldElement:
    if e < 0:
        raise FieldError("negative exponent; use fq_inv")
    result = a.spec.one()
    base = a
    while e:
        if e & 1:
            result = fq_mul(result, base)
        base = fq_mul(base, base)
        e >>= 1
    return result


def fq_inv(a: FieldElement) -> FieldElement:
    if a.is_zero():
        raise ZeroDivisionError("inverse of zero in a finite field")
    return fq_pow(a, a.spec.q - 2)


def fq_frobenius(a: FieldElement, r: int) -> FieldElement:
    """a^{p^r}."""
    spec = a.spec
    mat = spec.frobenius_power_matrix(r)
    img = np.asarray(a.coords, dtype=np.int64) @ mat % spec.p
    return FieldElement(spec, tuple(int(c) for c in img))


def fq_in_subfield(a: FieldElement, m: int) -> bool:
    """Membership in F_{p^m}, realised as the fixed field of Frobenius^m."""
    if m < 1 or a.spec.n % m:
        raise FieldError(f"{m} does not divide n={a.spec.n}")
    return fq_frobenius(a, m) == a
