"""Formal group laws over F_{p^n}: validation, G-arithmetic on series,
endomorphism tests, conjugation and height."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels as K
from .gf import FieldElement, FieldSpec
from .pseries import (
    BivSeries,
    SeriesError,
    TruncSeries,
    _bpad,
    _fdata,
    _fmul,
    _recip_arrays,
    _tri_mask,
    b_compose_separate,
    b_substitute,
    biv_to_field,
    identity_series,
    is_exact,
    s_compose,
    s_reverse,
    s_sub,
    u_compose_biv,
    v_x,
    zero_series,
)

ASSOC_WINDOW = 64
ENDO_WINDOW = 128
INFINITE = "infinite to precision"


class LawError(ValueError):
    """A group-law axiom failed; ``witness`` is the lowest bad monomial."""

    def __init__(self, axiom: str, witness, message: str | None = None):
        super().__init__(message or f"{axiom} fails at monomial {witness}")
        self.axiom = axiom
        self.witness = witness


@dataclass(frozen=True)
class AxiomFailure:
    axiom: str
    witness: tuple
    window: int


@dataclass(frozen=True)
class EndoCheck:
    """Outcome of an endomorphism test on total degrees <= window."""

    ok: bool
    window: int
    witness: tuple[int, int] | None = None

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class ZpSeries:
    """[a]_G for a truncated p-adic a; agrees with the limit below x^window."""

    series: TruncSeries
    window: int
    K: int
    complete: bool


@dataclass(frozen=True, eq=False)
class FormalGroupLaw:
    G: BivSeries
    height_hint: int | None = None
    meta: dict = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def spec(self) -> FieldSpec:
        return self.G.domain

    @property
    def p(self) -> int:
        return self.spec.p

    @property
    def N(self) -> int:
        return self.G.N

    @property
    def h(self):
        if self.height_hint is not None:
            return self.height_hint
        if "height" not in self._cache:
            self._cache["height"] = height(self)
        return self._cache["height"]

    @property
    def p_series(self) -> TruncSeries:
        if "p" not in self._cache:
            self._cache["p"] = bracket_int(self, self.p)
        return self._cache["p"]

    @property
    def inverse(self) -> TruncSeries:
        if "inv" not in self._cache:
            self._cache["inv"] = g_neg(self)
        return self._cache["inv"]

    def x(self) -> TruncSeries:
        return identity_series(self.spec, self.N)

    def over(self, spec: FieldSpec) -> "FormalGroupLaw":
        """The same law with coefficients viewed in a larger field."""
        return FormalGroupLaw(biv_to_field(self.G, spec), self.height_hint, dict(self.meta))

    def truncate(self, N: int) -> "FormalGroupLaw":
        return FormalGroupLaw(self.G.truncate(N), self.height_hint, dict(self.meta))


# ------------------------------------------------------------------ axioms


def _identity_failure(B: BivSeries):
    data, N = B.data, B.N
    for i in range(1, N + 1):
        want = 1 if i == 1 else 0
        for c in range(B.domain.n):
            expect = want if c == 0 else 0
            if data[c, i, 0] != expect:
                return (i, 0)
            if data[c, 0, i] != expect:
                return (0, i)
    return None


def _biv_powers(spec, Gd, W, count):
    pw = np.zeros((spec.n, count + 1, W + 1, W + 1), dtype=np.int64)
    pw[0, 0, 0, 0] = 1
    for a in range(1, count + 1):
        pw[:, a] = K.mul2(pw[:, a - 1], Gd, W, spec.p, spec.reduction)
    return pw


def _contract(spec, C, P, W):
    """sum_a C[a, k] P[a, i, j] -> T[i, j, k] over the field."""
    n, p = spec.n, spec.p
    raw = np.zeros((2 * n - 1, W + 1, W + 1, W + 1), dtype=np.int64)
    flatP = P.reshape(n, W + 1, -1)
    for c in range(n):
        if not C[c].any():
            continue
        for d in range(n):
            if flatP[d].any():
                raw[c + d] += (C[c].T @ flatP[d] % p).reshape(W + 1, W + 1, W + 1).transpose(1, 2, 0)
    return K._fold(raw, p, spec.reduction)


def associativity_witness(B: BivSeries, window: int | None = None):
    """Lowest monomial x^i y^j z^k where G(G(x,y),z) and G(x,G(y,z)) differ."""
    W = min(B.N, window or ASSOC_WINDOW)
    spec = B.domain
    Gd = _tri_mask(B.data[:, : W + 1, : W + 1].copy(), W)
    P = _biv_powers(spec, Gd, W, W)
    left = _contract(spec, Gd, P, W)  # G(G(x,y), z)
    right = _contract(spec, np.ascontiguousarray(Gd.transpose(0, 2, 1)), P, W)  # G(x, G(y,z)) as (y,z,x)
    right = right.transpose(0, 3, 1, 2)
    diff = (left - right) % spec.p
    i, j, k = np.indices((W + 1,) * 3)
    diff[:, (i + j + k) > W] = 0
    bad = np.argwhere(diff.any(axis=0))
    if bad.size == 0:
        return None
    best = min(bad.tolist(), key=lambda t: (sum(t), t[0], t[1]))
    return tuple(best)


def check_axioms(B: BivSeries, assoc_window: int | None = None) -> list[AxiomFailure]:
    if B.is_rational:
        raise SeriesError("group-law validation runs over a finite field")
    out = []
    w = _identity_failure(B)
    if w is not None:
        out.append(AxiomFailure("identity", w, B.N))
    d = np.any((B.data - B.data.transpose(0, 2, 1)) % B.domain.p, axis=0)
    if d.any():
        bad = min((tuple(t) for t in np.argwhere(d).tolist()), key=lambda t: (sum(t), t[0]))
        out.append(AxiomFailure("commutativity", bad, B.N))
    W = min(B.N, assoc_window or ASSOC_WINDOW)
    a = associativity_witness(B, W)
    if a is not None:
        out.append(AxiomFailure("associativity", a, W))
    return out


def validate(B: BivSeries, assoc_window: int | None = None, height_hint: int | None = None,
             meta: dict | None = None) -> FormalGroupLaw:
    fails = check_axioms(B, assoc_window)
    if fails:
        f = fails[0]
        raise LawError(f.axiom, f.witness)
    return FormalGroupLaw(B, height_hint, dict(meta or {}))


def standard_law(p: int, h: int, N: int, field_deg: int | None = None,
                 assoc_window: int | None = None, check: bool = True) -> FormalGroupLaw:
    """The reduced Honda law of height h over F_{p^max(h, field_deg)}."""
    from .lift import honda_law

    n = max(h, field_deg or 1)
    spec = FieldSpec(p, n)
    B = biv_to_field(honda_law(p, h, N), spec)
    meta = {"p": p, "h": h, "construction": "honda"}
    if check:
        return validate(B, assoc_window, height_hint=h, meta=meta)
    return FormalGroupLaw(B, h, meta)


# --------------------------------------------------------- G-arithmetic


def _law_for(law: FormalGroupLaw, N: int) -> BivSeries:
    return law.G if law.N == N else law.G.truncate(N)


def g_add(law: FormalGroupLaw, phi: TruncSeries, psi: TruncSeries) -> TruncSeries:
    """G(phi(x), psi(x))."""
    N = min(law.N, phi.N, psi.N)
    return b_substitute(_law_for(law, N), phi.truncate(N), psi.truncate(N))


def g_neg(law: FormalGroupLaw) -> TruncSeries:
    """[-1]_G: solves G(x, i(x)) = 0 by Newton steps on the precision."""
    spec, N = law.spec, law.N
    p = spec.p
    C = _bpad(spec, law.G.data, N)
    Gy = np.zeros_like(C)
    j = np.arange(1, N + 1)
    Gy[:, :, : N] = C[:, :, 1:] * (j % p) % p  # dG/dy, constant term at (0, 0)
    from .pseries import _bsub

    x = identity_series(spec, N).data
    inv = _fdata(spec, 1)
    inv[0, 1] = (-1) % p
    prec = 1
    while prec < N:
        prec = min(N, 2 * prec)
        cur = _fdata(spec, prec)
        cur[:, : inv.shape[1]] = inv[:, : prec + 1]
        Cp = _tri_mask(C[:, : prec + 1, : prec + 1].copy(), prec)
        Gyp = _tri_mask(Gy[:, : prec + 1, : prec + 1].copy(), prec)
        val = _bsub(spec, Cp, x[:, : prec + 1], cur, prec)
        der = _bsub(spec, Gyp, x[:, : prec + 1], cur, prec)
        corr = _fmul(spec, val, _recip_arrays(spec, der, prec), prec)
        inv = (cur - corr) % p
    out = _fdata(spec, N)
    out[:, : inv.shape[1]] = inv[:, : N + 1]
    return TruncSeries(spec, N, out)


def g_sub(law: FormalGroupLaw, phi: TruncSeries, psi: TruncSeries) -> TruncSeries:
    N = min(law.N, phi.N, psi.N)
    inv = law.inverse.truncate(N)
    return g_add(law, phi, s_compose(inv, psi.truncate(N)))


def bracket_int(law: FormalGroupLaw, n: int) -> TruncSeries:
    """[n]_G by double-and-add."""
    if n < 0:
        return s_compose(law.inverse, bracket_int(law, -n))
    result = zero_series(law.spec, law.N)
    base = law.x()
    while n:
        if n & 1:
            result = g_add(law, result, base)
        n >>= 1
        if n:
            base = g_add(law, base, base)
    return result


def bracket_zp(law: FormalGroupLaw, digits, h: int | None = None) -> ZpSeries:
    """[a_K]_G for a_K = sum digits[i] p^i.

    [a]_G and [a_K]_G differ by a G-multiple of [p^K]_G, so they agree below
    x^{p^{Kh}}; ``complete`` says whether that window covers the precision.
    """
    p = law.p
    h = h if h is not None else law.h
    if not isinstance(h, int):
        raise ValueError("bracket_zp needs a finite height")
    digits = [int(d) for d in digits]
    if any(d < 0 or d >= p for d in digits):
        raise ValueError(f"digits must lie in [0, {p})")
    K_ = len(digits)
    a = sum(d * p**i for i, d in enumerate(digits))
    window = p ** (K_ * h)
    return ZpSeries(bracket_int(law, a), window, K_, window > law.N)


def is_endomorphism(law: FormalGroupLaw, e: TruncSeries, window: int | None = None) -> EndoCheck:
    """Test e(G(x, y)) = G(e(x), e(y)) on total degrees <= window.

    Windows are checked in doubling steps so failures show up cheaply.
    """
    W = min(law.N, e.N, window or ENDO_WINDOW)
    if e.data[:, 0].any():
        raise SeriesError("endomorphisms have no constant term")
    w = min(W, 16)
    while True:
        G = law.G.truncate(w)
        ew = e.truncate(w)
        lhs = u_compose_biv(ew, G, w)
        rhs = b_compose_separate(G, ew, ew, w)
        diff = (lhs.data - rhs.data) % law.p
        if diff.any():
            bad = np.argwhere(diff.any(axis=0)).tolist()
            i, j = min(bad, key=lambda t: (t[0] + t[1], t[0]))
            return EndoCheck(False, w, (int(i), int(j)))
        if w >= W:
            return EndoCheck(True, W, None)
        w = min(W, 2 * w)


def g_commutator(law: FormalGroupLaw, phi: TruncSeries, psi: TruncSeries) -> TruncSeries:
    """phi o psi -_G psi o phi."""
    return g_sub(law, s_compose(phi, psi), s_compose(psi, phi))


def conjugate_law(law: FormalGroupLaw, psi: TruncSeries, assoc_window: int | None = None,
                  check: bool = True) -> FormalGroupLaw:
    """psi(G(psi^{-1}(x), psi^{-1}(y)))."""
    N = min(law.N, psi.N)
    psi = psi.truncate(N)
    inv = s_reverse(psi)
    inner = b_compose_separate(law.G.truncate(N), inv, inv, N)
    B = u_compose_biv(psi, inner, N)
    meta = dict(law.meta)
    meta["conjugated"] = True
    if check:
        return validate(B, assoc_window, law.height_hint, meta)
    return FormalGroupLaw(B, law.height_hint, meta)


def height(law: FormalGroupLaw):
    """log_p of v_x([p]_G), or INFINITE when [p]_G vanishes to precision."""
    v = v_x(law.p_series)
    if not is_exact(v):
        return INFINITE
    h, q = 0, 1
    while q < v:
        q *= law.p
        h += 1
    if q != v:
        raise LawError("height", (v,), f"v_x([p]) = {v} is not a power of {law.p}")
    return h


def w_proximity(u: TruncSeries):
    """v_x(u(x) - x); AtLeast(N+1) when u is the identity to precision."""
    return v_x(s_sub(u, identity_series(u.domain, u.N)))


def leading(f: TruncSeries):
    """(degree, coefficient) of the lowest monomial, or None for zero."""
    v = v_x(f)
    if not is_exact(v):
        return None
    return int(v), f.coeff(int(v))


# ------------------------------------------------------------------ files


def law_to_json(law: FormalGroupLaw) -> dict:
    G = law.G.to_json()
    body = json.dumps(G["coeffs"], separators=(",", ":"))
    meta = dict(law.meta)
    meta.setdefault("p", law.p)
    if law.height_hint is not None:
        meta.setdefault("h", law.height_hint)
    meta["source_hash"] = hashlib.sha256(body.encode()).hexdigest()
    return {"field": law.spec.to_json(), "N": law.N, "G": G["coeffs"], "meta": meta}


def law_from_json(obj: dict, assoc_window: int | None = None, check: bool = True) -> FormalGroupLaw:
    B = BivSeries.from_json({"domain": obj["field"], "N": obj["N"], "coeffs": obj["G"]})
    meta = dict(obj.get("meta", {}))
    h = meta.get("h")
    if check:
        return validate(B, assoc_window, h, meta)
    return FormalGroupLaw(B, h, meta)


def save_law(law: FormalGroupLaw, path) -> None:
    text = json.dumps(law_to_json(law), sort_keys=True, separators=(",", ":"))
    Path(path).write_text(text + "\n")


def load_law(path, assoc_window: int | None = None, check: bool = True) -> FormalGroupLaw:
    return law_from_json(json.loads(Path(path).read_text()), assoc_window, check)


GOLDEN = [(2, 2), (2, 3), (3, 2), (3, 1), (5, 1)]


def golden_precision(p: int, h: int) -> int:
    return min(p ** (2 * h), 256)


def golden_path(p: int, h: int) -> Path:
    return Path(__file__).parent / "data" / f"honda_p{p}_h{h}.json"


def load_golden(p: int, h: int, field_deg: int | None = None) -> FormalGroupLaw:
    law = load_law(golden_path(p, h), check=False)
    n = max(h, field_deg or 1)
    return law.over(FieldSpec(p, n)) if n > 1 else law


def scalar(spec: FieldSpec, c) -> FieldElement:
    if isinstance(c, FieldElement):
        return c
    return spec.from_int(int(c)) if not isinstance(c, (list, tuple)) else spec(c)


def monomial_endo(law: FormalGroupLaw, alpha, r: int) -> TruncSeries:
    """alpha x^{p^r}, an endomorphism of the standardized law for alpha in F_{p^h}."""
    from .pseries import monomial

    return monomial(law.spec, law.N, law.p**r, scalar(law.spec, alpha))



def multiplication(law: FormalGroupLaw, a: int) -> TruncSeries:
    """[a]_G; for an unmodified Honda law it is read off the logarithm directly."""
    if law.meta.get("construction") == "honda" and not law.meta.get("conjugated") \
            and law.height_hint is not None:
        from .lift import honda_multiplication
        from .pseries import to_field

        return to_field(honda_multiplication(law.p, law.height_hint, law.N, a), law.spec)
    return bracket_int(law, a)
