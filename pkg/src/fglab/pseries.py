"""Truncated power series in one and two variables.

A series of precision N knows the coefficients of x^1 .. x^N.  Two
coefficient domains are supported: a finite field (:class:`FieldSpec`,
array planes, fast kernels) and exact rationals (``QQ``, lists of
:class:`fractions.Fraction`, used by :mod:`fglab.lift`).

Index 0 of every coefficient array is the constant term.  Public
operations keep it zero; a few internal helpers (Horner accumulators,
reciprocals) use it.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

from . import _kernels as K
from .gf import FieldElement, FieldSpec, fq_make

QQ = "QQ"
Domain = Union[FieldSpec, str]

# composition strategy: auto | horner | blocked | frobenius
COMPOSE_STRATEGY = os.environ.get("FGLAB_COMPOSE", "auto")
FROBENIUS_BASE = 24


class SeriesError(ValueError):
    pass


class AtLeast(int):
    """Valuation sentinel: the true value is only known to be >= this bound."""

    def __repr__(self):
        return f">={int(self)}"

    __str__ = __repr__


def is_exact(v) -> bool:
    return not isinstance(v, AtLeast)


# --------------------------------------------------------------------- types


@dataclass(frozen=True, eq=False)
class TruncSeries:
    domain: Domain
    N: int
    data: object  # int64 (n, N+1) planes, or list of N+1 Fractions

    @property
    def is_rational(self) -> bool:
        return self.domain == QQ

    def coeff(self, d: int):
        if d > self.N:
            raise SeriesError(f"coefficient {d} beyond precision {self.N}")
        if self.is_rational:
            return self.data[d]
        return FieldElement(self.domain, tuple(int(c) for c in self.data[:, d]))

    def coeffs(self) -> list:
        return [self.coeff(d) for d in range(1, self.N + 1)]

    def nonzero_degrees(self) -> list[int]:
        if self.is_rational:
            return [d for d in range(1, self.N + 1) if self.data[d] != 0]
        return [int(d) for d in np.nonzero(self.data[:, 1:].any(axis=0))[0] + 1]

    def truncate(self, N: int) -> "TruncSeries":
        N = min(N, self.N)
        if self.is_rational:
            return TruncSeries(QQ, N, list(self.data[: N + 1]))
        return TruncSeries(self.domain, N, self.data[:, : N + 1].copy())

    def __eq__(self, other):
        if not isinstance(other, TruncSeries) or self.domain != other.domain:
            return NotImplemented
        N = min(self.N, other.N)
        if self.is_rational:
            return list(self.data[: N + 1]) == list(other.data[: N + 1])
        return bool(np.array_equal(self.data[:, : N + 1], other.data[:, : N + 1]))

    def __hash__(self):
        return id(self)

    def __add__(self, other):
        return s_add(self, other)

    def __sub__(self, other):
        return s_sub(self, other)

    def __mul__(self, other):
        if isinstance(other, TruncSeries):
            return s_mul(self, other)
        return s_scale(other, self)

    __rmul__ = __mul__

    def __call__(self, g: "TruncSeries") -> "TruncSeries":
        return s_compose(self, g)

    def __repr__(self):
        terms = []
        for d in self.nonzero_degrees()[:8]:
            terms.append(f"({self.coeff(d)})x^{d}")
        more = " + ..." if len(self.nonzero_degrees()) > 8 else ""
        return f"<{' + '.join(terms) or '0'}{more} + O(x^{self.N + 1})>"

    def to_json(self) -> dict:
        if self.is_rational:
            coeffs = [_frac_str(c) for c in self.data[1:]]
            return {"domain": QQ, "N": self.N, "coeffs": coeffs}
        coeffs = [[int(c) for c in self.data[:, d]] for d in range(1, self.N + 1)]
        return {"domain": self.domain.to_json(), "N": self.N, "coeffs": coeffs}

    @classmethod
    def from_json(cls, obj: dict) -> "TruncSeries":
        N = int(obj["N"])
        if obj["domain"] == QQ:
            return from_rationals([Fraction(c) for c in obj["coeffs"]], N)
        spec = FieldSpec.from_json(obj["domain"])
        data = np.zeros((spec.n, N + 1), dtype=np.int64)
        for d, coords in enumerate(obj["coeffs"], start=1):
            data[:, d] = coords
        return TruncSeries(spec, N, data % spec.p)


@dataclass(frozen=True, eq=False)
class BivSeries:
    """Series in x, y with coefficients for 1 <= i + j <= N."""

    domain: Domain
    N: int
    data: object  # int64 (n, N+1, N+1) planes, or dict {(i, j): Fraction}

    @property
    def is_rational(self) -> bool:
        return self.domain == QQ

    def coeff(self, i: int, j: int):
        if i + j > self.N:
            raise SeriesError(f"monomial x^{i}y^{j} beyond precision {self.N}")
        if self.is_rational:
            return self.data.get((i, j), Fraction(0))
        return FieldElement(self.domain, tuple(int(c) for c in self.data[:, i, j]))

    def monomials(self) -> list[tuple[int, int]]:
        """Nonzero monomials sorted by (total degree, i)."""
        if self.is_rational:
            keys = [k for k, v in self.data.items() if v != 0 and sum(k) <= self.N]
        else:
            ii, jj = np.nonzero(self.data.any(axis=0))
            keys = [(int(i), int(j)) for i, j in zip(ii, jj) if i + j <= self.N]
        return sorted(keys, key=lambda ij: (ij[0] + ij[1], ij[0]))

    def truncate(self, N: int) -> "BivSeries":
        N = min(N, self.N)
        if self.is_rational:
            return BivSeries(QQ, N, {k: v for k, v in self.data.items() if sum(k) <= N})
        return BivSeries(self.domain, N, _tri_mask(self.data[:, : N + 1, : N + 1], N))

    def swap(self) -> "BivSeries":
        if self.is_rational:
            return BivSeries(QQ, self.N, {(j, i): v for (i, j), v in self.data.items()})
        return BivSeries(self.domain, self.N, np.ascontiguousarray(self.data.transpose(0, 2, 1)))

    def __eq__(self, other):
        if not isinstance(other, BivSeries) or self.domain != other.domain:
            return NotImplemented
        return first_difference(self, other) is None

    def __hash__(self):
        return id(self)

    def __repr__(self):
        mons = self.monomials()
        shown = " + ".join(f"({self.coeff(i, j)})x^{i}y^{j}" for i, j in mons[:8])
        return f"<{shown or '0'}{' + ...' if len(mons) > 8 else ''} + O(deg {self.N + 1})>"

    def to_json(self) -> dict:
        entries = []
        for i, j in self.monomials():
            c = self.coeff(i, j)
            entries.append([i, j, _frac_str(c) if self.is_rational else list(c.coords)])
        dom = QQ if self.is_rational else self.domain.to_json()
        return {"domain": dom, "N": self.N, "coeffs": entries}

    @classmethod
    def from_json(cls, obj: dict) -> "BivSeries":
        N = int(obj["N"])
        if obj["domain"] == QQ:
            return BivSeries(QQ, N, {(int(i), int(j)): Fraction(c) for i, j, c in obj["coeffs"]})
        spec = FieldSpec.from_json(obj["domain"])
        data = np.zeros((spec.n, N + 1, N + 1), dtype=np.int64)
        for i, j, coords in obj["coeffs"]:
            data[:, int(i), int(j)] = coords
        return BivSeries(spec, N, data % spec.p)


def _frac_str(c: Fraction) -> str:
    c = Fraction(c)
    return f"{c.numerator}/{c.denominator}"


def _tri_mask(arr: np.ndarray, N: int) -> np.ndarray:
    out = arr.copy()
    i = np.arange(out.shape[-2])[:, None]
    j = np.arange(out.shape[-1])[None, :]
    out[..., (i + j) > N] = 0
    return out


# ------------------------------------------------------------- constructors


def _fdata(spec: FieldSpec, N: int) -> np.ndarray:
    return np.zeros((spec.n, N + 1), dtype=np.int64)


def zero_series(domain: Domain, N: int) -> TruncSeries:
    if domain == QQ:
        return TruncSeries(QQ, N, [Fraction(0)] * (N + 1))
    return TruncSeries(domain, N, _fdata(domain, N))


def monomial(domain: Domain, N: int, d: int, c=1) -> TruncSeries:
    s = zero_series(domain, N)
    if d <= N:
        if domain == QQ:
            s.data[d] = Fraction(c)
        else:
            s.data[:, d] = _elem_coords(domain, c)
    return s


def identity_series(domain: Domain, N: int) -> TruncSeries:
    return monomial(domain, N, 1)


def frobenius_series(spec: FieldSpec, N: int) -> TruncSeries:
    """fr(x) = x^p."""
    return monomial(spec, N, spec.p)


def from_coeffs(spec: FieldSpec, N: int, coeffs: dict | Sequence) -> TruncSeries:
    """Build from {degree: element-or-int} or a list for degrees 1..len."""
    s = zero_series(spec, N)
    items = coeffs.items() if isinstance(coeffs, dict) else enumerate(coeffs, start=1)
    for d, c in items:
        if 1 <= d <= N:
            s.data[:, d] = _elem_coords(spec, c)
    return s


def from_rationals(coeffs: Sequence, N: int | None = None) -> TruncSeries:
    N = len(coeffs) if N is None else N
    data = [Fraction(0)] + [Fraction(c) for c in coeffs[:N]]
    data += [Fraction(0)] * (N + 1 - len(data))
    return TruncSeries(QQ, N, data)


def biv_from_dict(domain: Domain, N: int, coeffs: dict) -> BivSeries:
    if domain == QQ:
        return BivSeries(QQ, N, {k: Fraction(v) for k, v in coeffs.items() if sum(k) <= N and v})
    data = np.zeros((domain.n, N + 1, N + 1), dtype=np.int64)
    for (i, j), c in coeffs.items():
        if i + j <= N:
            data[:, i, j] = _elem_coords(domain, c)
    return BivSeries(domain, N, data)


def _elem_coords(spec: FieldSpec, c) -> np.ndarray:
    if isinstance(c, FieldElement):
        if c.spec != spec:
            raise SeriesError("coefficient from a different field")
        return np.asarray(c.coords, dtype=np.int64)
    if isinstance(c, Fraction):
        if c.denominator % spec.p == 0:
            raise SeriesError(f"{c} is not p-integral")
        c = c.numerator * pow(c.denominator, -1, spec.p)
    out = np.zeros(spec.n, dtype=np.int64)
    out[0] = int(c) % spec.p
    return out


def _same(f, g):
    if f.domain != g.domain:
        raise SeriesError(f"domain mismatch: {f.domain} vs {g.domain}")


# ------------------------------------------------------- ring operations


def s_add(f: TruncSeries, g: TruncSeries) -> TruncSeries:
    _same(f, g)
    N = min(f.N, g.N)
    if f.is_rational:
        return TruncSeries(QQ, N, [a + b for a, b in zip(f.data[: N + 1], g.data[: N + 1])])
    return TruncSeries(f.domain, N, (f.data[:, : N + 1] + g.data[:, : N + 1]) % f.domain.p)


def s_neg(f: TruncSeries) -> TruncSeries:
    if f.is_rational:
        return TruncSeries(QQ, f.N, [-a for a in f.data])
    return TruncSeries(f.domain, f.N, -f.data % f.domain.p)


def s_sub(f: TruncSeries, g: TruncSeries) -> TruncSeries:
    return s_add(f, s_neg(g))


def s_scale(c, f: TruncSeries) -> TruncSeries:
    """Scalar multiple c*f."""
    if f.is_rational:
        c = Fraction(c)
        return TruncSeries(QQ, f.N, [c * a for a in f.data])
    spec = f.domain
    return TruncSeries(spec, f.N, K.scale(_elem_coords(spec, c), f.data, spec.p, spec.reduction))


def s_mul(f: TruncSeries, g: TruncSeries) -> TruncSeries:
    _same(f, g)
    N = min(f.N, g.N)
    if f.is_rational:
        return TruncSeries(QQ, N, _qmul(f.data, g.data, N))
    return TruncSeries(f.domain, N, _fmul(f.domain, f.data, g.data, N))


def _fmul(spec: FieldSpec, a: np.ndarray, b: np.ndarray, N: int) -> np.ndarray:
    return K.mul1(a, b, N, spec.p, spec.reduction)


def _qmul(a: Sequence[Fraction], b: Sequence[Fraction], N: int) -> list[Fraction]:
    out = [Fraction(0)] * (N + 1)
    nzb = [(j, bj) for j, bj in enumerate(b[: N + 1]) if bj]
    for i, ai in enumerate(a[: N + 1]):
        if ai:
            for j, bj in nzb:
                if i + j > N:
                    break
                out[i + j] += ai * bj
    return out


# ------------------------------------------------------------ valuations


def v_x(f: TruncSeries) -> int:
    """x-adic valuation; ``AtLeast(N+1)`` when every known coefficient is 0."""
    degs = f.nonzero_degrees()
    if f.is_rational:
        if f.data[0]:
            return 0
    elif f.data[:, 0].any():
        return 0
    return degs[0] if degs else AtLeast(f.N + 1)


def leading_term(f: TruncSeries):
    """(degree, coefficient) of the lowest nonzero monomial, or None."""
    v = v_x(f)
    if not is_exact(v):
        return None
    return v, f.coeff(v)


# ------------------------------------------------------------ composition


def _require_no_constant(g: TruncSeries):
    if g.is_rational:
        if g.data[0]:
            raise SeriesError("inner series has a nonzero constant term")
    elif g.data[:, 0].any():
        raise SeriesError("inner series has a nonzero constant term")


def s_compose(f: TruncSeries, g: TruncSeries, strategy: str | None = None) -> TruncSeries:
    """f(g(x)) to precision min(N_f, N_g)."""
    _same(f, g)
    _require_no_constant(g)
    N = min(f.N, g.N)
    if f.is_rational:
        return TruncSeries(QQ, N, _qcompose(f.data, g.data, N))
    data = compose_arrays(f.domain, f.data, g.data, N, strategy)
    return TruncSeries(f.domain, N, data)


def _qcompose(fa, ga, N):
    acc = [Fraction(0)] * (N + 1)
    top = min(len(fa) - 1, N)
    acc[0] = fa[top]
    for k in range(top - 1, -1, -1):
        acc = _qmul(acc, ga, N)
        acc[0] += fa[k]
    return acc


def compose_arrays(spec: FieldSpec, fa: np.ndarray, ga: np.ndarray, N: int,
                   strategy: str | None = None) -> np.ndarray:
    """Composition on raw planes; ``fa`` may carry a constant term."""
    strategy = strategy or COMPOSE_STRATEGY
    if strategy == "auto":
        strategy = "frobenius" if N > FROBENIUS_BASE else "horner"
    fa = fa[:, : N + 1]
    ga = ga[:, : N + 1]
    if strategy == "horner":
        return _compose_horner(spec, fa, ga, N)
    if strategy == "blocked":
        return _compose_blocked(spec, fa, ga, N)
    if strategy == "frobenius":
        return _compose_frobenius(spec, fa, ga, N)
    raise SeriesError(f"unknown composition strategy {strategy!r}")


def _pad(spec, a, N):
    out = _fdata(spec, N)
    m = min(a.shape[1], N + 1)
    out[:, :m] = a[:, :m]
    return out


def _compose_horner(spec, fa, ga, N):
    nz = np.nonzero(fa.any(axis=0))[0]
    acc = _fdata(spec, N)
    if nz.size == 0:
        return acc
    top = int(nz[-1])
    acc[:, 0] = fa[:, top]
    for k in range(top - 1, -1, -1):
        acc = _fmul(spec, acc, ga, N)
        acc[:, 0] = (acc[:, 0] + fa[:, k]) % spec.p
    return acc


def _compose_blocked(spec, fa, ga, N):
    """Baby-step/giant-step: f = sum_j B_j(g) (g^k)^j with deg B_j < k."""
    k = max(1, math.isqrt(N + 1))
    p, red = spec.p, spec.reduction
    powers = np.zeros((spec.n, k + 1, N + 1), dtype=np.int64)
    powers[0, 0, 0] = 1
    for i in range(1, k + 1):
        powers[:, i] = _fmul(spec, powers[:, i - 1], ga, N)
    nblocks = -(-(N + 1) // k)
    fpad = _pad(spec, fa, nblocks * k - 1)
    blocks = fpad.reshape(spec.n, nblocks, k)
    combos = K.fmatmul(blocks, powers[:, :k], p, red)  # (n, nblocks, N+1)
    giant = powers[:, k]
    acc = combos[:, nblocks - 1].copy()
    for j in range(nblocks - 2, -1, -1):
        acc = _fmul(spec, acc, giant, N)
        acc = (acc + combos[:, j]) % p
    return acc


def _compose_frobenius(spec, fa, ga, N):
    """Char-p split f = sum_r x^r F_r(x^p), using g^p = g^{(p)}(x^p)."""
    if N <= FROBENIUS_BASE:
        return _compose_horner(spec, fa, ga, N)
    p = spec.p
    M = N // p
    gtw = K.twist(ga[:, : M + 1], spec.frobenius_matrix, p)
    fpad = _pad(spec, fa, N)
    acc = None
    for r in range(p - 1, -1, -1):
        sub = fpad[:, r::p][:, : M + 1]
        inner = _compose_frobenius(spec, sub, gtw, M) if sub.any() else _fdata(spec, M)
        spread = _fdata(spec, N)
        spread[:, 0 : p * M + 1 : p] = inner
        if acc is None:
            acc = spread
        else:
            acc = (_fmul(spec, acc, ga, N) + spread) % p
    return acc


def _recip_arrays(spec, ha, N):
    """1/h for h with invertible constant term (Newton iteration)."""
    from .gf import fq_inv

    c0 = fq_inv(FieldElement(spec, tuple(int(c) for c in ha[:, 0])))
    r = _fdata(spec, 0)
    r[:, 0] = c0.coords
    prec = 0
    while prec < N:
        prec = min(N, 2 * prec + 1)
        r = _pad(spec, r, prec)
        hr = _fmul(spec, _pad(spec, ha, prec), r, prec)
        two_minus = -hr % spec.p
        two_minus[0, 0] = (two_minus[0, 0] + 2) % spec.p
        r = _fmul(spec, r, two_minus, prec)
    return r


def _derivative_arrays(spec, fa, N):
    out = _fdata(spec, N)
    k = np.arange(1, N + 2)
    m = min(fa.shape[1] - 1, N + 1)
    out[:, :m] = fa[:, 1 : m + 1] * (k[:m] % spec.p) % spec.p
    return out


def s_reverse(f: TruncSeries) -> TruncSeries:
    """Compositional inverse; requires an invertible linear coefficient."""
    _require_no_constant(f)
    N = f.N
    if f.is_rational:
        c1 = f.data[1] if N >= 1 else 0
        if not c1:
            raise SeriesError("linear coefficient is zero; series is not invertible")
        return TruncSeries(QQ, N, _qreverse(f.data, N))
    spec = f.domain
    if not f.data[:, 1].any():
        raise SeriesError("linear coefficient is zero; series is not invertible")
    from .gf import fq_inv

    inv1 = fq_inv(f.coeff(1))
    g = _fdata(spec, 1)
    g[:, 1] = inv1.coords
    prec = 1
    fder = _derivative_arrays(spec, f.data, N)
    while prec < N:
        prec = min(N, 2 * prec)
        g = _pad(spec, g, prec)
        fg = compose_arrays(spec, f.data[:, : prec + 1], g, prec)
        fg[:, 1] = (fg[:, 1] - np.eye(spec.n, dtype=np.int64)[0]) % spec.p
        dfg = compose_arrays(spec, fder[:, : prec + 1], g, prec)
        corr = _fmul(spec, fg, _recip_arrays(spec, dfg, prec), prec)
        g = (g - corr) % spec.p
    return TruncSeries(spec, N, _pad(spec, g, N))


def _qreverse(fa, N):
    # Lagrange-free: solve f(g) = x degree by degree
    g = [Fraction(0)] * (N + 1)
    c1 = fa[1]
    g[1] = 1 / c1
    for d in range(2, N + 1):
        fg = _qcompose(fa, g, d)
        g[d] = -fg[d] / c1
    return g


def s_iterate(f: TruncSeries, n: int) -> TruncSeries:
    """n-fold compositional iterate; negative n uses the reverse."""
    if n < 0:
        return s_iterate(s_reverse(f), -n)
    result = identity_series(f.domain, f.N)
    base = f
    while n:
        if n & 1:
            result = s_compose(result, base)
        n >>= 1
        if n:
            base = s_compose(base, base)
    return result


# ------------------------------------------------------- char-p specifics


def s_coeff_twist(f: TruncSeries, r: int) -> TruncSeries:
    """Raise every coefficient to the p^r-th power."""
    if f.is_rational:
        raise SeriesError("coefficient twist needs a finite field")
    spec = f.domain
    return TruncSeries(spec, f.N, K.twist(f.data, spec.frobenius_power_matrix(r), spec.p))


def s_subst_ppower(f: TruncSeries, r: int) -> TruncSeries:
    """f(x^{p^r}), same precision."""
    if f.is_rational:
        raise SeriesError("x -> x^{p^r} substitution is defined here for finite fields")
    spec, N = f.domain, f.N
    step = spec.p**r
    out = _fdata(spec, N)
    top = N // step
    out[:, 0 : top * step + 1 : step] = f.data[:, : top + 1]
    return TruncSeries(spec, N, out)


def s_derivative(f: TruncSeries) -> TruncSeries:
    """Formal derivative, precision N - 1 (constant term allowed in the result)."""
    N = f.N - 1
    if f.is_rational:
        return TruncSeries(QQ, N, [k * f.data[k] for k in range(1, f.N + 1)])
    return TruncSeries(f.domain, N, _derivative_arrays(f.domain, f.data, N))


# ---------------------------------------------------------- bivariate


def _bzero(spec, N):
    return np.zeros((spec.n, N + 1, N + 1), dtype=np.int64)


def biv_mul(A: BivSeries, B: BivSeries) -> BivSeries:
    _same(A, B)
    N = min(A.N, B.N)
    if A.is_rational:
        return BivSeries(QQ, N, _qbmul(A.data, B.data, N))
    spec = A.domain
    return BivSeries(spec, N, _bmul(spec, A.data, B.data, N))


def _bmul(spec, a, b, N):
    return K.mul2(_bpad(spec, a, N), _bpad(spec, b, N), N, spec.p, spec.reduction)


def _bpad(spec, a, N):
    if a.shape[1] == N + 1:
        return a
    out = _bzero(spec, N)
    m = min(a.shape[1], N + 1)
    out[:, :m, :m] = a[:, :m, :m]
    return _tri_mask(out, N)


def _qbmul(a: dict, b: dict, N: int) -> dict:
    out: dict = {}
    for (i1, j1), v1 in a.items():
        for (i2, j2), v2 in b.items():
            if i1 + j1 + i2 + j2 <= N:
                key = (i1 + i2, j1 + j2)
                out[key] = out.get(key, 0) + v1 * v2
    return {k: v for k, v in out.items() if v}


def biv_add(A: BivSeries, B: BivSeries) -> BivSeries:
    _same(A, B)
    N = min(A.N, B.N)
    if A.is_rational:
        out = dict(A.truncate(N).data)
        for k, v in B.truncate(N).data.items():
            out[k] = out.get(k, 0) + v
        return BivSeries(QQ, N, {k: v for k, v in out.items() if v})
    spec = A.domain
    return BivSeries(spec, N, (_bpad(spec, A.data, N) + _bpad(spec, B.data, N)) % spec.p)


def biv_sub(A: BivSeries, B: BivSeries) -> BivSeries:
    if B.is_rational:
        return biv_add(A, BivSeries(QQ, B.N, {k: -v for k, v in B.data.items()}))
    return biv_add(A, BivSeries(B.domain, B.N, -B.data % B.domain.p))


def first_difference(A: BivSeries, B: BivSeries):
    """Lowest (total degree, i) monomial where A and B differ, or None."""
    N = min(A.N, B.N)
    diff = biv_sub(A.truncate(N), B.truncate(N))
    mons = diff.monomials()
    return mons[0] if mons else None


def biv_x(domain: Domain, N: int) -> BivSeries:
    return biv_from_dict(domain, N, {(1, 0): 1})


def biv_y(domain: Domain, N: int) -> BivSeries:
    return biv_from_dict(domain, N, {(0, 1): 1})


def biv_from_univariate(f: TruncSeries, var: str = "x") -> BivSeries:
    """Embed f(x) (or f(y)) as a bivariate series."""
    N = f.N
    if f.is_rational:
        key = (lambda d: (d, 0)) if var == "x" else (lambda d: (0, d))
        return BivSeries(QQ, N, {key(d): f.data[d] for d in range(1, N + 1) if f.data[d]})
    out = _bzero(f.domain, N)
    if var == "x":
        out[:, :, 0] = f.data
    else:
        out[:, 0, :] = f.data
    out[:, 0, 0] = 0
    return BivSeries(f.domain, N, out)


def biv_diagonal(B: BivSeries) -> TruncSeries:
    """B(x, x)."""
    N = B.N
    if B.is_rational:
        out = [Fraction(0)] * (N + 1)
        for (i, j), v in B.data.items():
            if i + j <= N:
                out[i + j] += v
        return TruncSeries(QQ, N, out)
    spec = B.domain
    out = _fdata(spec, N)
    for d in range(N + 1):
        i = np.arange(d + 1)
        out[:, d] = B.data[:, i, d - i].sum(axis=1)
    return TruncSeries(spec, N, out % spec.p)


def biv_partial_x(B: BivSeries) -> BivSeries:
    """dB/dx at precision N - 1."""
    N = B.N - 1
    if B.is_rational:
        return BivSeries(QQ, N, {(i - 1, j): i * v for (i, j), v in B.data.items()
                                 if i > 0 and i + j - 1 <= N})
    spec = B.domain
    out = _bzero(spec, N)
    i = np.arange(1, N + 2)[:, None]
    out[:, :, :] = B.data[:, 1 : N + 2, : N + 1] * (i % spec.p) % spec.p
    return BivSeries(spec, N, _tri_mask(out, N))


def _powers(spec, ga, N, count):
    """Planes (n, count+1, N+1) holding g^0..g^count."""
    pw = np.zeros((spec.n, count + 1, N + 1), dtype=np.int64)
    pw[0, 0, 0] = 1
    for k in range(1, count + 1):
        pw[:, k] = _fmul(spec, pw[:, k - 1], ga, N)
    return pw


def b_substitute(B: BivSeries, f: TruncSeries, g: TruncSeries) -> TruncSeries:
    """B(f(x), g(x))."""
    _same(B, f)
    _same(f, g)
    _require_no_constant(f)
    _require_no_constant(g)
    N = min(B.N, f.N, g.N)
    if B.is_rational:
        fp = [[Fraction(1)] + [Fraction(0)] * N]
        gp = [[Fraction(1)] + [Fraction(0)] * N]
        for _ in range(N):
            fp.append(_qmul(fp[-1], f.data, N))
            gp.append(_qmul(gp[-1], g.data, N))
        out = [Fraction(0)] * (N + 1)
        for (i, j), c in B.data.items():
            if i + j <= N:
                prod = _qmul(fp[i], gp[j], N)
                out = [a + c * b for a, b in zip(out, prod)]
        return TruncSeries(QQ, N, out)
    spec = B.domain
    C = _tri_mask(_bpad(spec, B.data, N), N)
    acc = _bsub(spec, C, _pad(spec, f.data, N), _pad(spec, g.data, N), N)
    return TruncSeries(spec, N, acc)


def _bsub_direct(spec, C, fa, ga, N):
    gp = _powers(spec, ga, N, N)
    H = K.fmatmul(C, gp, spec.p, spec.reduction)  # H[i] = sum_j c_ij g^j
    acc = H[:, N].copy()
    for i in range(N - 1, -1, -1):
        acc = (_fmul(spec, acc, fa, N) + H[:, i]) % spec.p
    return acc


def _bsub(spec, C, fa, ga, N):
    # B(f, g) = sum_{r,s<p} f^r g^s B_rs(f^p, g^p) and f(x)^p = f^(p)(x^p),
    # so each B_rs is substituted at precision N // p.  C may carry a
    # constant term.
    p = spec.p
    if N <= FROBENIUS_BASE:
        return _bsub_direct(spec, C, fa, ga, N)
    M = N // p
    ftw = K.twist(fa[:, : M + 1], spec.frobenius_matrix, p)
    gtw = K.twist(ga[:, : M + 1], spec.frobenius_matrix, p)
    fp = _powers(spec, fa, N, p - 1)
    gp = _powers(spec, ga, N, p - 1)
    acc = _fdata(spec, N)
    for r in range(p):
        for s in range(p):
            sub = C[:, r::p, s::p][:, : M + 1, : M + 1]
            if not sub.any():
                continue
            full = _bzero(spec, M)
            full[:, : sub.shape[1], : sub.shape[2]] = sub
            sub = _tri_mask(full, M)
            inner = _bsub(spec, sub, ftw, gtw, M)
            term = _fdata(spec, N)
            term[:, 0 : p * M + 1 : p] = inner
            if r:
                term = _fmul(spec, term, fp[:, r], N)
            if s:
                term = _fmul(spec, term, gp[:, s], N)
            acc = (acc + term) % p
    return acc


def b_compose_separate(B: BivSeries, f: TruncSeries, g: TruncSeries, N: int | None = None) -> BivSeries:
    """B(f(x), g(y)) as a bivariate series."""
    _same(B, f)
    _same(f, g)
    N = min(B.N, f.N, g.N) if N is None else min(N, B.N, f.N, g.N)
    if B.is_rational:
        raise SeriesError("separate-variable substitution is implemented over finite fields")
    spec = B.domain
    fp = _powers(spec, f.data, N, N)  # fp[:, i, a]: coeff of x^a in f^i
    gp = _powers(spec, g.data, N, N)
    C = _bpad(spec, B.data, N)
    left = K.fmatmul(np.ascontiguousarray(fp.transpose(0, 2, 1)), C, spec.p, spec.reduction)
    out = K.fmatmul(left, gp, spec.p, spec.reduction)
    return BivSeries(spec, N, _tri_mask(out, N))


def u_compose_biv(f: TruncSeries, B: BivSeries, N: int | None = None) -> BivSeries:
    """f(B(x, y)) for univariate f and bivariate B without constant term."""
    _same(f, B)
    N = min(f.N, B.N) if N is None else min(N, f.N, B.N)
    if B.is_rational:
        acc: dict = {}
        nz = [d for d in range(1, f.N + 1) if f.data[d]]
        for d in reversed(range(1, (nz[-1] if nz else 0) + 1)):
            acc = _qbmul(acc, B.data, N) if acc else {}
            if f.data[d]:
                acc[(0, 0)] = acc.get((0, 0), 0) + f.data[d]
        acc = _qbmul(acc, B.data, N) if acc else {}
        return BivSeries(QQ, N, acc)
    spec = B.domain
    data = _ucb_frobenius(spec, _pad(spec, f.data, N), _bpad(spec, B.data.copy(), N), N)
    return BivSeries(spec, N, _tri_mask(data, N))


def _ucb_horner(spec, fa, ba, N):
    nz = np.nonzero(fa.any(axis=0))[0]
    acc = _bzero(spec, N)
    if nz.size == 0:
        return acc
    top = int(nz[-1])
    acc[:, 0, 0] = fa[:, top]
    for k in range(top - 1, -1, -1):
        acc = _bmul(spec, acc, ba, N)
        acc[:, 0, 0] = (acc[:, 0, 0] + fa[:, k]) % spec.p
    return acc


def _ucb_frobenius(spec, fa, ba, N):
    if N <= 8:
        return _ucb_horner(spec, fa, ba, N)
    p = spec.p
    M = N // p
    btw = _tri_mask(K.twist(ba[:, : M + 1, : M + 1], spec.frobenius_matrix, p), M)
    acc = None
    for r in range(p - 1, -1, -1):
        sub = _pad(spec, fa[:, r::p], M)
        inner = _ucb_frobenius(spec, sub, btw, M) if sub.any() else _bzero(spec, M)
        spread = _bzero(spec, N)
        spread[:, 0 : p * M + 1 : p, 0 : p * M + 1 : p] = inner
        spread = _tri_mask(spread, N)
        acc = spread if acc is None else (_bmul(spec, acc, ba, N) + spread) % p
    return acc


def b_substitute2(B: BivSeries, U: BivSeries, V: BivSeries) -> BivSeries:
    """B(U(x, y), V(x, y))."""
    _same(B, U)
    _same(U, V)
    N = min(B.N, U.N, V.N)
    if B.is_rational:
        vp = [{(0, 0): Fraction(1)}]
        for _ in range(N):
            vp.append(_qbmul(vp[-1], V.data, N))
        rows: dict = {}
        for (i, j), c in B.data.items():
            if i + j <= N:
                row = rows.setdefault(i, {})
                for k, v in vp[j].items():
                    row[k] = row.get(k, 0) + c * v
        acc: dict = {}
        for i in range(N, -1, -1):
            acc = _qbmul(acc, U.data, N) if acc else {}
            for k, v in rows.get(i, {}).items():
                acc[k] = acc.get(k, 0) + v
        return BivSeries(QQ, N, {k: v for k, v in acc.items() if v})
    spec = B.domain
    p = spec.p
    Vd = _bpad(spec, V.data, N)
    Ud = _bpad(spec, U.data, N)
    vp = np.zeros((spec.n, N + 1, N + 1, N + 1), dtype=np.int64)
    vp[0, 0, 0, 0] = 1
    for j in range(1, N + 1):
        vp[:, j] = _bmul(spec, vp[:, j - 1], Vd, N)
    C = _bpad(spec, B.data, N)
    flat = vp.reshape(spec.n, N + 1, -1)
    rows = K.fmatmul(C, flat, p, spec.reduction).reshape(spec.n, N + 1, N + 1, N + 1)
    acc = rows[:, N].copy()
    for i in range(N - 1, -1, -1):
        acc = (_bmul(spec, acc, Ud, N) + rows[:, i]) % p
    return BivSeries(spec, N, _tri_mask(acc, N))


def biv_twist(B: BivSeries, r: int) -> BivSeries:
    spec = B.domain
    return BivSeries(spec, B.N, K.twist(B.data, spec.frobenius_power_matrix(r), spec.p))


def to_field(f: TruncSeries, spec: FieldSpec) -> TruncSeries:
    """Re-home a series with prime-field coefficients into a larger field."""
    if f.domain == spec:
        return f
    src = f.domain
    if src.p != spec.p or src.n != 1:
        raise SeriesError("only prime-field series can be moved between fields")
    data = _fdata(spec, f.N)
    data[0] = f.data[0]
    return TruncSeries(spec, f.N, data)


def biv_to_field(B: BivSeries, spec: FieldSpec) -> BivSeries:
    if B.domain == spec:
        return B
    if B.domain.p != spec.p or B.domain.n != 1:
        raise SeriesError("only prime-field series can be moved between fields")
    data = _bzero(spec, B.N)
    data[0] = B.data[0]
    return BivSeries(spec, B.N, data)


def elements_in(spec: FieldSpec, values: Iterable) -> list[FieldElement]:
    return [v if isinstance(v, FieldElement) else fq_make(spec, [v] + [0] * (spec.n - 1))
            for v in values]
