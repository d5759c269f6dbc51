"""Endomorphisms and automorphisms of a formal group law.

Solvers work degree by degree on truncated series; every result states the
window on which it has been checked.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .fgl import (
    ENDO_WINDOW,
    FormalGroupLaw,
    g_add,
    g_sub,
    is_endomorphism,
    leading,
    scalar,
    w_proximity,
)
from .gf import FieldElement, fq_in_subfield
from .pseries import (
    TruncSeries,
    _derivative_arrays,
    _fdata,
    _fmul,
    b_compose_separate,
    compose_arrays,
    identity_series,
    is_exact,
    s_compose,
    s_iterate,
    u_compose_biv,
    v_x,
    zero_series,
)

log = logging.getLogger(__name__)

NONTORSION = "nontorsion to precision"


class EndoError(ValueError):
    def __init__(self, message, degree=None, witness=None):
        super().__init__(message)
        self.degree = degree
        self.witness = witness


class HeightEstimateError(ValueError):
    def __init__(self, kind: str, message: str, ratios=None, ws=None):
        super().__init__(message)
        self.kind = kind
        self.ratios = list(ratios or [])
        self.ws = list(ws or [])


def ppower_exponent(d: int, p: int) -> int | None:
    """r with d == p^r, else None."""
    r = 0
    while d % p == 0:
        d //= p
        r += 1
    return r if d == 1 else None


def _elem_json(a: FieldElement) -> list[int]:
    return [int(c) for c in a.coords]


def _subfield_degree(law: FormalGroupLaw):
    h = law.height_hint
    if h is None:
        h = law.h
    if isinstance(h, int) and law.spec.n % h == 0:
        return h
    return None


# ---------------------------------------------------------- endomorphisms


@dataclass
class EndoSolution:
    series: TruncSeries
    alpha: FieldElement
    r: int
    window: int
    forced: dict = field(default_factory=dict)
    free: dict = field(default_factory=dict)
    obstructions: list = field(default_factory=list)
    complete: bool = True
    subfield_checked: bool = True

    def to_json(self) -> dict:
        return {
            "alpha": _elem_json(self.alpha),
            "r": self.r,
            "window": self.window,
            "complete": self.complete,
            "forced": {str(d): _elem_json(v) for d, v in sorted(self.forced.items())},
            "free": {str(d): _elem_json(v) for d, v in sorted(self.free.items())},
            "obstructions": self.obstructions,
            "series": self.series.to_json(),
        }


def _endo_defect(law, e_arr, w):
    """e(G(x, y)) - G(e(x), e(y)) on total degrees <= w, as planes."""
    spec = law.spec
    G = law.G.truncate(w)
    e = TruncSeries(spec, w, e_arr[:, : w + 1].copy())
    lhs = u_compose_biv(e, G, w)
    rhs = b_compose_separate(G, e, e, w)
    return (lhs.data - rhs.data) % spec.p


def _lowest(diff):
    bad = np.argwhere(diff.any(axis=0))
    if bad.size == 0:
        return None
    sums = bad.sum(axis=1)
    t = int(sums.min())
    return t


def _lucas_pivot(t: int, p: int) -> int | None:
    """Some 0 < j < t with binom(t, j) prime to p (exists iff t is not a p-power)."""
    digits, s = [], t
    while s:
        digits.append(s % p)
        s //= p
    # the lowest nonzero digit of t gives j = p^k with binom(t, j) = digit != 0
    for k, dg in enumerate(digits):
        if dg:
            j = p**k
            return j if j < t else None
    return None


def solve_endomorphism(law: FormalGroupLaw, alpha, r: int, policy: dict | None = None,
                       window: int | None = None) -> EndoSolution:
    """The endomorphism with lowest monomial alpha x^{p^r}.

    Coefficients at non-p-power degrees are forced.  At p-power degrees the
    defect must vanish and the coefficient comes from ``policy`` (degree ->
    value, default 0).
    """
    spec, p = law.spec, law.p
    W = min(law.N, window or ENDO_WINDOW)
    alpha = scalar(spec, alpha)
    h = _subfield_degree(law)
    d0 = p**r
    e = _fdata(spec, W)
    sol = EndoSolution(TruncSeries(spec, W, e), alpha, r, W, subfield_checked=h is not None)
    if alpha.is_zero():
        return sol
    if d0 > W:
        raise EndoError(f"x^{d0} lies beyond the window {W}", d0)
    if h is not None and not fq_in_subfield(alpha, h):
        raise EndoError(f"leading coefficient {alpha} is not in F_{p}^{h}", d0)
    e[:, d0] = alpha.coords
    nonzero_free = False
    for d in range(d0 + 1, W + 1):
        if ppower_exponent(d, p) is not None:
            v = scalar(spec, (policy or {}).get(d, 0))
            if h is not None and not fq_in_subfield(v, h):
                raise EndoError(f"free choice at x^{d} is not in F_{p}^{h}", d)
            e[:, d] = v.coords
            sol.free[d] = v
            nonzero_free |= not v.is_zero()
    for d in (policy or {}):
        if ppower_exponent(d, p) is None or d <= d0:
            raise EndoError(f"x^{d} is not a free degree", d)

    w, last = min(W, 16), d0
    while True:
        diff = _endo_defect(law, e, w)
        t = _lowest(diff)
        if t is None:
            if w >= W:
                break
            w = min(W, 2 * w)
            continue
        hom = diff[:, [i for i in range(t + 1)], [t - i for i in range(t + 1)]]  # coefficient of x^i y^(t-i)
        j = _lucas_pivot(t, p)
        if j is None:
            ii = int(np.argwhere(hom.any(axis=0))[0][0])
            note = {"degree": t, "monomial": [ii, t - ii]}
            sol.obstructions.append(note)
            if nonzero_free:
                sol.complete = False
                sol.window = t - 1
                log.info("obstruction at degree %d after nonzero free choices", t)
                break
            raise EndoError(f"nonvanishing obstruction at p-power degree {t}", t, (ii, t - ii))
        from math import comb

        binom = np.array([comb(t, i) % p for i in range(t + 1)], dtype=np.int64)
        binom[0] = binom[t] = 0
        coef = spec(hom[:, j])
        delta = -(coef / spec.from_int(int(binom[j])))
        change = np.outer(np.asarray(delta.coords), binom) % p
        if ((hom + change) % p).any():
            ii = int(np.argwhere(((hom + change) % p).any(axis=0))[0][0])
            raise EndoError(f"inconsistent homogeneous equation at degree {t}", t, (ii, t - ii))
        new = spec(e[:, t]) + delta
        e[:, t] = new.coords
        sol.forced[t] = new
        if h is not None and not fq_in_subfield(new, h):
            raise EndoError(f"forced coefficient at x^{t} is not in F_{p}^{h}", t)
        last = t
        w = min(W, max(w, 2 * last))
    for d in list(sol.forced):
        if sol.forced[d].is_zero():
            del sol.forced[d]
    sol.series = TruncSeries(spec, W, e)
    return sol


# --------------------------------------------------------------- commutants


@dataclass
class CommutantSolution:
    series: TruncSeries
    u: TruncSeries
    window: int
    linear: FieldElement
    status: str  # "consistent" | "infeasible"
    ledger: list = field(default_factory=list)
    free_degrees: list = field(default_factory=list)
    witness_degree: int | None = None

    @property
    def feasible(self) -> bool:
        return self.status == "consistent"

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "window": self.window,
            "linear": _elem_json(self.linear),
            "witness_degree": self.witness_degree,
            "free_degrees": self.free_degrees,
            "ledger": self.ledger,
            "series": self.series.to_json(),
        }


def _solve_mod_p(A: np.ndarray, b: np.ndarray, p: int):
    """One solution of A x = b over F_p (free variables 0) and the rank."""
    A = A.copy() % p
    b = b.copy() % p
    rows, cols = A.shape
    piv_cols, r = [], 0
    for c in range(cols):
        hit = next((i for i in range(r, rows) if A[i, c]), None)
        if hit is None:
            continue
        A[[r, hit]] = A[[hit, r]]
        b[[r, hit]] = b[[hit, r]]
        inv = pow(int(A[r, c]), -1, p)
        A[r] = A[r] * inv % p
        b[r] = b[r] * inv % p
        for i in range(rows):
            if i != r and A[i, c]:
                f = A[i, c]
                A[i] = (A[i] - f * A[r]) % p
                b[i] = (b[i] - f * b[r]) % p
        piv_cols.append(c)
        r += 1
        if r == rows:
            break
    if b[r:].any():
        return None, r
    x = np.zeros(cols, dtype=np.int64)
    for i, c in enumerate(piv_cols):
        x[c] = b[i]
    return x, r


def commutant_residual(psi: TruncSeries, u: TruncSeries) -> TruncSeries:
    """psi o u - u o psi."""
    a, b = s_compose(psi, u), s_compose(u, psi)
    return TruncSeries(a.domain, a.N, (a.data - b.data) % a.domain.p)


def commutes(psi: TruncSeries, u: TruncSeries):
    """(True, None) or (False, lowest degree of psi o u - u o psi)."""
    v = v_x(commutant_residual(psi, u))
    return (True, None) if not is_exact(v) else (False, int(v))


_ENUM_CAP = 4096


def solve_commutant(law: FormalGroupLaw | None, u: TruncSeries, D: int,
                    linear=None, prescribed: dict | None = None) -> CommutantSolution:
    """Series psi with psi'(0) = linear and psi o u = u o psi to degree D.

    Residual degrees are processed in increasing order.  At each degree the
    still-undetermined coefficients are probed along an F_p-basis; those that
    move the residual are solved for as an F_p-affine system (checked on extra
    points, with enumeration as fallback).  Directions left free are set to
    zero and logged.  Coefficients that never influence a residual degree
    within the window are reported free.
    """
    spec, p, n = u.domain, u.domain.p, u.domain.n
    D = min(D, u.N)
    if not u.data[:, 1].any():
        raise EndoError("u must be invertible")
    linear = scalar(spec, 1 if linear is None else linear)
    c = _fdata(spec, D)
    c[:, 1] = linear.coords
    known = {1}
    for d, v in (prescribed or {}).items():
        if 1 < d <= D:
            c[:, d] = scalar(spec, v).coords
            known.add(d)
    ua = u.data[:, : D + 1]
    basis = np.eye(n, dtype=np.int64)
    pending: list[int] = []
    ledger: list[dict] = []

    def residual(arr, P):
        a = compose_arrays(spec, arr[:, : P + 1], ua[:, : P + 1], P)
        b = compose_arrays(spec, ua[:, : P + 1], arr[:, : P + 1], P)
        return (a - b) % p

    def top(arr, P):
        return residual(arr, P)[:, P]

    # Changing c_d by b moves the residual by b (u^d - x^d u'(psi)) plus terms
    # of degree >= 2(d-1) + w(u) (Hasse-Taylor expansion of u around psi), so
    # below that degree the effect is F_q-linear and needs no probing.
    w = w_proximity(u)
    w = int(w) if is_exact(w) else D + 1
    upow = [None, ua.copy()]
    for d in range(2, D + 1):
        upow.append(_fmul(spec, upow[-1], ua, D))
    du = _derivative_arrays(spec, ua, D)
    elems = [FieldElement(spec, tuple(int(v) for v in b)) for b in basis]

    sol = CommutantSolution(TruncSeries(spec, D, c), u, D, linear, "consistent")
    for P in range(2, D + 1):
        if P not in known:
            pending.append(P)
        R0 = top(c, P)
        linear_ok = [d for d in pending if P < 2 * (d - 1) + w]
        if linear_ok:
            dup = compose_arrays(spec, du[:, : P + 1], c[:, : P + 1], P)
        cols, effects = [], []
        for d in pending:
            if d in linear_ok:
                k = (upow[d][:, P] - dup[:, P - d]) % p
                kel = FieldElement(spec, tuple(int(v) for v in k))
                for b, bel in zip(basis, elems):
                    cols.append((d, b))
                    effects.append(np.array((bel * kel).coords, dtype=np.int64))
                continue
            for b in basis:
                trial = c.copy()
                trial[:, d] = (trial[:, d] + b) % p
                eff = (top(trial, P) - R0) % p
                cols.append((d, b))
                effects.append(eff)
        probed = any(d not in linear_ok for d, _ in cols)
        touching = sorted({d for (d, _), eff in zip(cols, effects) if eff.any()})
        if not touching:
            if R0.any():
                sol.status, sol.witness_degree = "infeasible", P
                ledger.append({"degree": P, "status": "infeasible", "unknowns": []})
                break
            continue
        idx = [k for k, (d, _) in enumerate(cols) if d in touching]
        A = np.array([effects[k] for k in idx], dtype=np.int64).T

        def assign(vec, base=c):
            out = base.copy()
            for k, val in zip(idx, vec):
                d, b = cols[k]
                out[:, d] = (out[:, d] + val * b) % p
            return out

        affine = True
        for probe in (np.ones(len(idx), dtype=np.int64), np.arange(len(idx)) % p + 1) if probed else ():
            probe = probe % p
            if not ((top(assign(probe), P) - R0 - A @ probe) % p == 0).all():
                affine = False
                break
        entry = {"degree": P, "unknowns": touching}
        if affine:
            x, rank = _solve_mod_p(A, (-R0) % p, p)
            if x is None:
                entry["status"] = "infeasible"
                ledger.append(entry)
                sol.status, sol.witness_degree = "infeasible", P
                break
            c = assign(x)
            entry["free_dims"] = len(idx) - rank
        else:
            size = p ** len(idx)
            if size > _ENUM_CAP:
                raise EndoError(f"non-affine constraint with {len(idx)} unknown coordinates at degree {P}", P)
            found = None
            for vec in itertools.product(range(p), repeat=len(idx)):
                trial = assign(np.array(vec, dtype=np.int64))
                if not top(trial, P).any():
                    found = trial
                    break
            if found is None:
                entry["status"] = "infeasible"
                ledger.append(entry)
                sol.status, sol.witness_degree = "infeasible", P
                break
            c = found
            entry["free_dims"] = None
        entry["status"] = "forced" if entry.get("free_dims") == 0 else "free"
        entry["values"] = {str(d): [int(v) for v in c[:, d]] for d in touching}
        ledger.append(entry)
        for d in touching:
            pending.remove(d)
    sol.series = TruncSeries(spec, D, c)
    sol.ledger = ledger
    sol.free_degrees = list(pending)
    if sol.status == "consistent":
        bad = residual(c, D)
        if bad.any():
            sol.status = "infeasible"
            sol.witness_degree = int(np.argwhere(bad.any(axis=0))[0][0])
    return sol


# ----------------------------------------------------- nearest endomorphism


@dataclass
class DecompositionResult:
    g: TruncSeries
    delta: TruncSeries
    v: object  # int or AtLeast
    stop_reason: str
    rounds: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "v_delta": int(self.v) if is_exact(self.v) else f">={int(self.v)}",
            "stop_reason": self.stop_reason,
            "rounds": self.rounds,
            "g": self.g.to_json(),
            "delta": self.delta.to_json(),
        }


def nearest_endomorphism(law: FormalGroupLaw, psi: TruncSeries, window: int | None = None) -> DecompositionResult:
    """Greedy psi = g +_G delta with g an endomorphism and v_x(delta) maximal."""
    W = min(law.N, psi.N, window or ENDO_WINDOW)
    lw = law.truncate(W) if W < law.N else law
    psi = psi.truncate(W)
    h = _subfield_degree(law)
    g = zero_series(law.spec, W)
    rounds = []
    while True:
        delta = g_sub(lw, psi, g)
        lead = leading(delta)
        if lead is None:
            return DecompositionResult(g, delta, v_x(delta), "window exhausted", rounds)
        d, alpha = lead
        r = ppower_exponent(d, law.p)
        if r is None:
            return DecompositionResult(g, delta, d, "degree not a p-power", rounds)
        if h is None or not fq_in_subfield(alpha, h):
            return DecompositionResult(g, delta, d, f"coefficient not in F_{law.p}^{h}", rounds)
        e = solve_endomorphism(lw, alpha, r, window=W).series
        g = g_add(lw, g, e)
        rounds.append({"degree": d, "alpha": _elem_json(alpha)})


# ------------------------------------------------------------- valuations


def V_endo(law: FormalGroupLaw, z: TruncSeries, check: bool = True) -> Fraction:
    """(1/h) log_p v_x(z) for an endomorphism z."""
    h = law.h
    if not isinstance(h, int):
        raise EndoError("V needs a finite height")
    v = v_x(z)
    if not is_exact(v):
        raise EndoError(f"v_x(z) is at least {int(v)}; V is not determined")
    k = ppower_exponent(int(v), law.p)
    if k is None:
        raise EndoError(f"v_x(z) = {v} is not a power of {law.p}")
    if check:
        res = is_endomorphism(law, z)
        if not res.ok:
            raise EndoError("z is not an endomorphism", witness=res.witness)
    return Fraction(k, h)


def _stable(w: int, p: int, h: int) -> bool:
    # w > p^{h/(p-1)}  <=>  w^{p-1} > p^h
    return w ** (p - 1) > p**h


def in_stable_range(law: FormalGroupLaw, u: TruncSeries) -> bool:
    w = w_proximity(u)
    if not is_exact(w):
        log.warning("u is the identity to precision; treated as stable")
        return True
    return _stable(int(w), law.p, law.h)


@dataclass(frozen=True)
class GrowthRow:
    m: int
    w: object  # int or AtLeast
    case: str | None = None
    predicted: object = None
    held: bool | None = None
    note: str = ""

    def to_json(self) -> dict:
        w = int(self.w) if is_exact(self.w) else f">={int(self.w)}"
        return {"m": self.m, "w": w, "case": self.case, "predicted": self.predicted,
                "held": self.held, "note": self.note}


CASE_BELOW = "=w(u)^p"
CASE_BOUNDARY = ">=p^(ph/(p-1))"
CASE_ABOVE = "=p^h w(u)"


def growth_case(w: int, p: int, h: int):
    """(case label, predicted next w, exact?) for a finite w."""
    lhs, rhs = w ** (p - 1), p**h
    if lhs < rhs:
        return CASE_BELOW, w**p, True
    if lhs == rhs:
        return CASE_BOUNDARY, w**p, False  # here w^p = p^{ph/(p-1)}
    return CASE_ABOVE, p**h * w, True


def iterate_growth(law: FormalGroupLaw, u: TruncSeries, M: int) -> list[GrowthRow]:
    """w(u^{o p^m}) for m = 0..M, each transition checked against the trichotomy."""
    p, h = law.p, law.h
    ws = []
    cur = u
    for m in range(M + 1):
        w = w_proximity(cur)
        ws.append(w)
        if not is_exact(w) or m == M:
            break
        cur = s_iterate(cur, p)
    rows = []
    for m, w in enumerate(ws):
        if not is_exact(w):
            rows.append(GrowthRow(m, w, note="window exhausted"))
            break
        if m + 1 >= len(ws):
            rows.append(GrowthRow(m, w))
            break
        case, pred, exact = growth_case(int(w), p, h)
        nxt = ws[m + 1]
        if is_exact(nxt):
            held = (nxt == pred) if exact else (nxt >= pred)
            note = ""
        elif exact:
            held = None if pred > u.N else False
            note = "next value beyond window" if pred > u.N else "predicted value inside window not seen"
        else:
            held = True if int(nxt) >= pred else None
            note = "lower bound met by window" if held else "bound beyond window"
        rows.append(GrowthRow(m, w, case, pred, held, note))
    return rows


@dataclass(frozen=True)
class HeightEstimate:
    h: int
    ratios: list
    ws: list
    window: int

    def to_json(self) -> dict:
        return {"h": self.h, "ratios": [str(r) for r in self.ratios], "ws": self.ws, "window": self.window}


def _mult_order(a: FieldElement) -> int:
    one = a.spec.one()
    k, cur = 1, a
    while cur != one:
        cur = cur * a
        k += 1
    return k


def estimate_height(u: TruncSeries, max_steps: int = 16) -> HeightEstimate:
    """Height from one automorphism, without the group law.

    Reports h once two consecutive ratios w(u^{o p^{m+1}})/w(u^{o p^m}) agree
    on a power p^h of p and the current w lies in the stable range for h.
    """
    p = u.domain.p
    c1 = u.coeff(1)
    if c1.is_zero():
        raise EndoError("u is not invertible")
    k = _mult_order(c1)
    if k > 1:
        u = s_iterate(u, k)
    w = w_proximity(u)
    if not is_exact(w):
        raise HeightEstimateError("torsion-or-identity", "torsion-or-identity to precision")
    ws = [int(w)]
    ratios: list[Fraction] = []
    cur = u
    for _ in range(max_steps):
        cur = s_iterate(cur, p)
        w = w_proximity(cur)
        if not is_exact(w):
            if p * (ws[-1] - 1) + 1 <= u.N:
                # same heuristic as torsion_order
                raise HeightEstimateError("torsion-or-identity", "u is torsion to precision", ratios, ws)
            raise HeightEstimateError(
                "precision",
                f"precision {u.N} exhausted before the ratios stabilised (torsion not excluded)",
                ratios, ws)
        ws.append(int(w))
        ratios.append(Fraction(ws[-1], ws[-2]))
        if len(ratios) >= 2 and ratios[-1] == ratios[-2] and ratios[-1].denominator == 1:
            h = ppower_exponent(int(ratios[-1]), p)
            if h is not None and h > 0 and _stable(ws[-2], p, h):
                return HeightEstimate(h, ratios, ws, u.N)
    raise HeightEstimateError("precision", "no stable ratio within the step budget", ratios, ws)


# ------------------------------------------------------------ p-adic powers


def zp_digits(b, p: int, K: int) -> list[int]:
    """Base-p digits of b mod p^K for an integer or p-integral fraction b."""
    b = Fraction(b)
    if b.denominator % p == 0:
        raise ValueError(f"{b} is not {p}-integral")
    m = p**K
    a = b.numerator * pow(b.denominator, -1, m) % m
    return [(a // p**i) % p for i in range(K)]


@dataclass(frozen=True)
class PadicIterate:
    series: TruncSeries
    window: object  # agrees with the limit below x^window; int or AtLeast
    K: int
    complete: bool


def padic_iterate(rho: TruncSeries, digits, need: int | None = None) -> PadicIterate:
    """rho^{o b_K} with b_K = sum digits[i] p^i, plus its guarantee window.

    rho^{o b} and rho^{o b_K} differ by an iterate of rho^{o p^K}, so they agree
    below x^{w(rho^{o p^K})}; that valuation is computed.
    """
    p = rho.domain.p
    if rho.coeff(1) != rho.domain.one():
        raise EndoError("padic_iterate needs rho'(0) = 1")
    result = identity_series(rho.domain, rho.N)
    step = rho
    for d in digits:
        if d:
            result = s_compose(result, s_iterate(step, int(d)))
        step = s_iterate(step, p)
    window = w_proximity(step)
    complete = not is_exact(window) or window > rho.N
    if need is not None and is_exact(window) and window <= need:
        raise EndoError(f"K={len(digits)} digits only guarantee degrees below {window}")
    return PadicIterate(result, window, len(digits), complete)


def torsion_order(u: TruncSeries, bound: int):
    """Least n <= bound with u^{o n} = x to precision, else NONTORSION.

    A hit is only reported when truncation is an unlikely explanation: for
    the last p-power iterate z before the identity, w(z^{o p}) - 1 >= p (w(z) - 1)
    always holds, and that smallest possible value must fit in the window.
    This is a heuristic, not a proof of torsion.
    """
    x = identity_series(u.domain, u.N)
    cur = u
    hit = None
    for n in range(1, bound + 1):
        if cur == x:
            hit = n
            break
        cur = s_compose(cur, u)
    if hit is None:
        return NONTORSION
    p = u.domain.p
    k = _mult_order(u.coeff(1))
    m = hit // k
    if m == 1:
        return hit
    z = s_iterate(s_iterate(u, k), m // p)
    w = w_proximity(z)
    if is_exact(w) and p * (int(w) - 1) + 1 <= u.N:
        return hit
    return NONTORSION


@dataclass(frozen=True)
class Ramification:
    terms: list
    ws: list
    limit: Fraction | None
    note: str

    def to_json(self) -> dict:
        return {"terms": [str(t) for t in self.terms], "ws": self.ws,
                "limit": None if self.limit is None else str(self.limit), "note": self.note}


def ramification_number(u: TruncSeries, M: int) -> Ramification:
    """e_n = (p-1)(w(u^{o p^n}) - 1)/p^{n+1} for n < M and a guess at the limit."""
    p = u.domain.p
    if u.coeff(1) != u.domain.one():
        raise EndoError("ramification_number needs u'(0) = 1")
    terms, ws = [], []
    cur = u
    note = ""
    for n in range(M):
        w = w_proximity(cur)
        if not is_exact(w):
            if n == 0:
                raise EndoError("u is the identity to precision; e is undefined")
            note = f"window exhausted at n={n}"
            break
        ws.append(int(w))
        terms.append(Fraction((p - 1) * (int(w) - 1), p ** (n + 1)))
        if n + 1 < M:
            cur = s_iterate(cur, p)
    # once w grows exactly p-fold, (p-1) w_n / p^{n+1} is constant: that is the limit
    limit = None
    tail = [ws[i + 1] == p * ws[i] for i in range(len(ws) - 1)][-2:]
    if tail and all(tail):
        limit = Fraction((p - 1) * ws[-1], p ** len(ws))
    elif not note:
        note = "growth not yet p-fold; no limit reported"
    return Ramification(terms, ws, limit, note)


def teichmuller_automorphism(law: FormalGroupLaw, e: TruncSeries, budget: int = 64) -> TruncSeries:
    """lim e^{o q^m} with q = p^h, iterated until it stops changing."""
    h = law.h
    if not isinstance(h, int):
        raise EndoError("needs a finite height")
    q = law.p**h
    t = e
    for _ in range(budget):
        nxt = s_iterate(t, q)
        if nxt == t:
            break
        t = nxt
    else:
        raise EndoError("no stabilisation within the iteration budget")
    if s_iterate(t, q - 1) != identity_series(t.domain, t.N):
        raise EndoError("limit is not of order dividing q - 1")
    return t


__all__ = [
    "NONTORSION", "CommutantSolution", "DecompositionResult", "EndoError", "EndoSolution",
    "GrowthRow", "HeightEstimate", "HeightEstimateError", "PadicIterate", "Ramification",
    "V_endo", "commutant_residual", "commutes", "estimate_height", "growth_case",
    "in_stable_range", "iterate_growth", "nearest_endomorphism", "padic_iterate",
    "ppower_exponent", "ramification_number", "solve_commutant", "solve_endomorphism",
    "teichmuller_automorphism", "torsion_order", "zp_digits",
]
