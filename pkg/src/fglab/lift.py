"""The standardized height-h law from the p-typical logarithm.

``l(x) = x + sum_{m>0} p^{-m} x^{p^{mh}}`` gives ``G = l^{-1}(l(x) + l(y))``
over Q.  Its reduction mod p has ``[p](x) = x^{p^h}``.

Two routes:

* exact rationals (``group_law_char0`` / ``multiplication_char0``), the
  reference, practical for N up to a few dozen;
* a residue route modulo p^{M+1} (``honda_law`` / ``honda_multiplication``)
  for large N.  It rewrites ``l(G) = l(x) + l(y)`` as the fixed point

      p^M G = p^M (x + y) + sum_m p^{M-m} (x^{q_m} + y^{q_m} - G^{q_m}),

  with q_m = p^{mh}, and only needs ``G^{q_m}`` mod p^{m+1}.  That residue
  depends on G mod p alone: ``G^{q_m} = (G^{p^{m(h-1)}})^{p^m}`` and
  ``G^{p^k} = Gbar(x^{p^k}, y^{p^k})`` mod p.  The right-hand side must be
  divisible by p^M; that is checked on every pass.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels as K
from .gf import FieldSpec, is_prime
from .pseries import (
    QQ,
    BivSeries,
    TruncSeries,
    _qmul,
    _tri_mask,
    from_rationals,
)

_RED1 = np.ones((1, 1), dtype=np.int64)


class IntegralityError(ValueError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class HondaLog:
    p: int
    h: int
    N: int
    series: TruncSeries

    @property
    def exponents(self) -> list[int]:
        return _log_exponents(self.p, self.h, self.N)


def _log_exponents(p: int, h: int, N: int) -> list[int]:
    out, m = [], 1
    while p ** (m * h) <= N:
        out.append(p ** (m * h))
        m += 1
    return out


def honda_logarithm(p: int, h: int, N: int) -> HondaLog:
    if not is_prime(p):
        raise ValueError(f"p={p} is not prime")
    if h < 1 or N < 1:
        raise ValueError("need h >= 1 and N >= 1")
    coeffs = [Fraction(0)] * N
    coeffs[0] = Fraction(1)
    for m, q in enumerate(_log_exponents(p, h, N), start=1):
        coeffs[q - 1] = Fraction(1, p**m)
    return HondaLog(p, h, N, from_rationals(coeffs, N))


# ------------------------------------------------------------- rational route


def log_inverse(log: HondaLog) -> TruncSeries:
    """l^{-1}, from e = x - sum_m p^{-m} e^{q_m}, degree by degree."""
    N, p = log.N, log.p
    qs = log.exponents
    e = [Fraction(0)] * (N + 1)
    if N >= 1:
        e[1] = Fraction(1)
    if not qs:
        return TruncSeries(QQ, N, e)
    # coefficient d of e^q only involves e_1..e_{d-q+1}; a full recompute
    # per block of (q_min - 1) new degrees is cheap at these sizes
    step = qs[0] - 1
    known = 1
    while known < N:
        target = min(N, known + step)
        new = [Fraction(0)] * (N + 1)
        new[1] = Fraction(1)
        for m, q in enumerate(qs, start=1):
            if q > target:
                break
            pw = _qpow(e, q, target)
            for d in range(q, target + 1):
                new[d] -= pw[d] / p**m
        e = new[: target + 1] + [Fraction(0)] * (N - target)
        known = target
    return TruncSeries(QQ, N, e)


def _qpow(a, k, N):
    result = [Fraction(1)] + [Fraction(0)] * N
    base = list(a[: N + 1]) + [Fraction(0)] * (N + 1 - len(a[: N + 1]))
    while k:
        if k & 1:
            result = _qmul(result, base, N)
        k >>= 1
        if k:
            base = _qmul(base, base, N)
    return result


def group_law_char0(log: HondaLog) -> BivSeries:
    """G = l^{-1}(l(x) + l(y)) over Q, by Horner in the sparse inner sum."""
    N = log.N
    e = log_inverse(log).data
    S = {(1, 0): Fraction(1), (0, 1): Fraction(1)}
    for m, q in enumerate(log.exponents, start=1):
        S[(q, 0)] = Fraction(1, log.p**m)
        S[(0, q)] = Fraction(1, log.p**m)
    acc: dict = {}
    for k in range(N, 0, -1):
        nxt: dict = {}
        for (i1, j1), v1 in acc.items():
            for (i2, j2), v2 in S.items():
                if i1 + j1 + i2 + j2 <= N:
                    key = (i1 + i2, j1 + j2)
                    nxt[key] = nxt.get(key, 0) + v1 * v2
        acc = nxt
        if e[k]:
            acc[(0, 0)] = acc.get((0, 0), 0) + e[k]
    out: dict = {}
    for (i1, j1), v1 in acc.items():
        for (i2, j2), v2 in S.items():
            if i1 + j1 + i2 + j2 <= N:
                key = (i1 + i2, j1 + j2)
                out[key] = out.get(key, 0) + v1 * v2
    return BivSeries(QQ, N, {k: v for k, v in out.items() if v})


def multiplication_char0(log: HondaLog, a: int) -> TruncSeries:
    """[a](x) = l^{-1}(a l(x)) over Q."""
    N = log.N
    e = log_inverse(log).data
    inner = [a * c for c in log.series.data]
    acc = [Fraction(0)] * (N + 1)
    for k in range(N, 0, -1):
        acc = _qmul(acc, inner, N)
        acc[0] += e[k]
    acc = _qmul(acc, inner, N)
    return TruncSeries(QQ, N, acc)


def integrality_check(series, p: int):
    """(True, None) if every coefficient is p-integral, else (False, witness).

    The witness is (degree, coefficient) for univariate input and
    ((i, j), coefficient) for bivariate input, lowest degree first.
    """
    if isinstance(series, HondaLog):
        series = series.series
    if isinstance(series, BivSeries):
        if not series.is_rational:
            return True, None
        for key in series.monomials():
            c = Fraction(series.data[key])
            if c.denominator % p == 0:
                return False, (key, c)
        return True, None
    if not series.is_rational:
        return True, None
    for d in range(1, series.N + 1):
        c = Fraction(series.data[d])
        if c.denominator % p == 0:
            return False, (d, c)
    return True, None


def reduce_mod_p(series, target: FieldSpec):
    """Coefficientwise reduction into the prime subfield of ``target``."""
    if isinstance(series, HondaLog):
        series = series.series
    p = target.p
    ok, witness = integrality_check(series, p)
    if not ok:
        raise IntegralityError(f"coefficient {witness[1]} at {witness[0]} is not {p}-integral", witness)

    def red(c):
        c = Fraction(c)
        return c.numerator * pow(c.denominator, -1, p) % p

    if isinstance(series, BivSeries):
        N = series.N
        data = np.zeros((target.n, N + 1, N + 1), dtype=np.int64)
        for (i, j), c in series.data.items():
            if i + j <= N:
                data[0, i, j] = red(c)
        return BivSeries(target, N, data)
    N = series.N
    data = np.zeros((target.n, N + 1), dtype=np.int64)
    for d in range(1, N + 1):
        data[0, d] = red(series.data[d])
    return TruncSeries(target, N, data)


# -------------------------------------------------------------- residue route


def _next_known(D: int, p: int, h: int) -> int:
    return p ** (h - 1) * (D + p - 1)


def _bpow_mod(a: np.ndarray, k: int, N: int, mod: int) -> np.ndarray:
    result = np.zeros_like(a)
    result[0, 0, 0] = 1
    base = a
    while k:
        if k & 1:
            result = K.mul2(result, base, N, mod, _RED1)
        k >>= 1
        if k:
            base = K.mul2(base, base, N, mod, _RED1)
    return result


def _upow_mod(a: np.ndarray, k: int, N: int, mod: int) -> np.ndarray:
    result = np.zeros_like(a)
    result[0, 0] = 1
    base = a
    while k:
        if k & 1:
            result = K.mul1(result, base, N, mod, _RED1)
        k >>= 1
        if k:
            base = K.mul1(base, base, N, mod, _RED1)
    return result


def _check_divisible(arr: np.ndarray, pM: int, what: str):
    if np.any(arr % pM):
        idx = tuple(int(i) for i in np.argwhere(arr % pM)[0][1:])
        raise IntegralityError(f"{what}: residue not divisible by p^M at {idx}", idx)


def honda_law(p: int, h: int, N: int) -> BivSeries:
    """Reduction mod p of the Honda law, as a series over F_p."""
    spec = FieldSpec(p, 1)
    qs = _log_exponents(p, h, N)
    M = len(qs)
    G = np.zeros((1, N + 1, N + 1), dtype=np.int64)
    G[0, 1, 0] = G[0, 0, 1] = 1
    if M == 0:
        return BivSeries(spec, N, G)
    mod = p ** (M + 1)
    pM = p**M
    known = 1
    while known < N:
        P = min(N, _next_known(known, p, h))
        rhs = np.zeros((1, P + 1, P + 1), dtype=np.int64)
        rhs[0, 1, 0] = rhs[0, 0, 1] = pM
        for m, q in enumerate(qs, start=1):
            if q > P:
                break
            s = p ** (m * (h - 1))
            Ps = P // s
            small = _tri_mask(G[:, : Ps + 1, : Ps + 1], Ps)
            pw = _bpow_mod(small, p**m, Ps, mod)
            term = np.zeros_like(rhs)
            term[:, : s * Ps + 1 : s, : s * Ps + 1 : s] = pw
            term = -_tri_mask(term, P)
            term[0, q, 0] += 1
            term[0, 0, q] += 1
            rhs += p ** (M - m) * term
        rhs %= mod
        _check_divisible(rhs, pM, "group law")
        G = np.zeros((1, N + 1, N + 1), dtype=np.int64)
        G[:, : P + 1, : P + 1] = rhs // pM % p
        known = P
    return BivSeries(spec, N, _tri_mask(G, N))


def honda_multiplication(p: int, h: int, N: int, a: int) -> TruncSeries:
    """Reduction mod p of [a](x) = l^{-1}(a l(x)) over F_p."""
    spec = FieldSpec(p, 1)
    qs = _log_exponents(p, h, N)
    M = len(qs)
    f = np.zeros((1, N + 1), dtype=np.int64)
    if N >= 1:
        f[0, 1] = a % p
    if M == 0:
        return TruncSeries(spec, N, f)
    mod = p ** (M + 1)
    pM = p**M
    known = 1
    while known < N:
        P = min(N, _next_known(known, p, h))
        rhs = np.zeros((1, P + 1), dtype=np.int64)
        rhs[0, 1] = a * pM % mod
        for m, q in enumerate(qs, start=1):
            if q > P:
                break
            s = p ** (m * (h - 1))
            Ps = P // s
            pw = _upow_mod(f[:, : Ps + 1], p**m, Ps, mod)
            term = np.zeros_like(rhs)
            term[:, : s * Ps + 1 : s] = pw
            term = -term
            term[0, q] += a
            rhs += p ** (M - m) * term
        rhs %= mod
        _check_divisible(rhs, pM, "multiplication series")
        f = np.zeros((1, N + 1), dtype=np.int64)
        f[:, : P + 1] = rhs // pM % p
        known = P
    return TruncSeries(spec, N, f)
