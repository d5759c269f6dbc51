"""The experiment suites behind the CLI verbs.

Each ``cmd_*`` takes an :class:`ExperimentConfig` and returns an
:class:`ExperimentReport`.  Checks carry a short statement of the claim they
test (the ``anchor``).
"""
from __future__ import annotations

import json
import time
from fractions import Fraction

import numpy as np

from .. import _kernels as K
from ..endo import (
    CASE_ABOVE,
    CASE_BELOW,
    CASE_BOUNDARY,
    HeightEstimateError,
    commutes,
    estimate_height,
    growth_case,
    iterate_growth,
    nearest_endomorphism,
    ramification_number,
    solve_commutant,
    solve_endomorphism,
)
from ..fgl import (
    FormalGroupLaw,
    LawError,
    check_axioms,
    conjugate_law,
    g_add,
    g_commutator,
    height,
    is_endomorphism,
    law_from_json,
    law_to_json,
    multiplication,
    standard_law,
)
from ..gf import FieldSpec, fq_in_subfield
from ..lift import honda_law, honda_multiplication
from ..pseries import (
    TruncSeries,
    b_substitute,
    biv_partial_x,
    compose_arrays,
    first_difference,
    frobenius_series,
    identity_series,
    is_exact,
    monomial,
    s_add,
    s_compose,
    s_iterate,
    s_reverse,
    v_x,
)
from .config import ExperimentConfig
from .report import ExperimentReport
from .rng import SplitMix64

A_IDENTITY = "group-law identity axiom G(x,0) = x"
A_COMM = "one-dimensional laws are commutative"
A_ASSOC = "group-law associativity G(G(x,y),z) = G(x,G(y,z))"
A_PSERIES = "standardized law: [p](x) = x^(p^h)"
A_PARTIALS = "standardized law of height >= 2: both partial derivatives are 1"
A_HEIGHT = "height h means v_x([p]) = p^h"
A_FROB = "x^p is an endomorphism of any law with F_p coefficients"
A_BELOW = "iterate growth below the boundary: w(u^p) = w(u)^p"
A_BOUNDARY = "iterate growth at the boundary: w(u^p) >= p^(ph/(p-1))"
A_ABOVE = "iterate growth in the stable range: w(u^p) = p^h w(u)"
A_RATIO = "p^h is the stable value of w(u^(p^(m+1)))/w(u^(p^m))"
A_LINEAR = "a series commuting with a nontorsion automorphism has linear coefficient in F_(p^h)"
A_CENTRAL = "a series commuting with a nontorsion automorphism is an endomorphism"
A_LEADING = "commutator leading term (lam a^(p^m) - a lam^(p^r)) x^(p^(r+m))"
A_COMM_POWER = "v_x([u^p, d]) = p^h v_x([u, d]) for u in the stable range"
A_NORMAL = "automorphisms fix the law under conjugation"
A_NORMALIZER = "the automorphism group is its own normalizer among invertible series"
A_RAMIF = "e([1+p]) as the limit of (p-1)(w(u^(p^n)) - 1)/p^(n+1)"
A_RAMIF_LIMIT = "e([1+p]) = p-1 for p > 2 and 2 for p = 2"


def _el(a) -> list[int]:
    return [int(c) for c in a.coords]


def _wval(w):
    return int(w) if is_exact(w) else f">={int(w)}"


def _law(cfg: ExperimentConfig, N: int | None = None, n: int | None = None) -> FormalGroupLaw:
    return standard_law(cfg.p, cfg.h, N or cfg.precision, field_deg=n or cfg.n,
                        assoc_window=cfg.policy.get("assoc_window"), check=False)


def _report(cfg: ExperimentConfig) -> ExperimentReport:
    return ExperimentReport(cfg.echo())


def _axiom_checks(rep: ExperimentReport, B, window, tag=""):
    fails = {f.axiom: f for f in check_axioms(B, window)}
    for axiom, anchor in (("identity", A_IDENTITY), ("commutativity", A_COMM), ("associativity", A_ASSOC)):
        f = fails.get(axiom)
        rep.add(f"{tag}{axiom}", anchor, {"N": B.N, "window": window},
                None if f is None else {"witness": list(f.witness), "window": f.window}, None, f is None)


def _pseries_check(rep, law: FormalGroupLaw, h: int):
    from ..fgl import bracket_int

    ps = bracket_int(law, law.p)
    degs = ps.nonzero_degrees()
    target = law.p**h
    ok = degs == [target] and ps.coeff(target) == law.spec.one() if target <= law.N else degs == []
    rep.add("p-series", A_PSERIES, {"p": law.p, "h": h, "N": law.N},
            {"nonzero_degrees": degs[:8]}, {"nonzero_degrees": [target] if target <= law.N else []}, ok)


def _partials_check(rep, law: FormalGroupLaw):
    d = biv_partial_x(law.G)
    mons = d.monomials()
    ok = mons == [(0, 0)] and d.coeff(0, 0) == law.spec.one()
    rep.add("partial derivative", A_PARTIALS, {"N": law.N}, {"monomials": [list(m) for m in mons[:6]]},
            {"monomials": [[0, 0]]}, ok)


# ------------------------------------------------------------------ construct


def cmd_construct(cfg: ExperimentConfig):
    """Returns (law file text, report)."""
    p, h, N = cfg.p, cfg.h, cfg.precision
    B = honda_law(p, h, N)
    rep = _report(cfg)
    window = cfg.policy.get("assoc_window")
    _axiom_checks(rep, B, window)
    law = FormalGroupLaw(B, h, {"p": p, "h": h, "construction": "honda"})
    if N == 1:
        law.meta["degenerate"] = True
    _pseries_check(rep, law, h)
    if h >= 2:
        _partials_check(rep, law)
    text = json.dumps(law_to_json(law), sort_keys=True, separators=(",", ":")) + "\n"
    return text, rep


def cmd_verify_law(cfg: ExperimentConfig) -> ExperimentReport:
    with open(cfg.law_file) as fh:
        obj = json.load(fh)
    rep = _report(cfg)
    law = law_from_json(obj, check=False)
    window = cfg.policy.get("assoc_window")
    _axiom_checks(rep, law.G, window)
    if rep.failed:
        return rep
    law = FormalGroupLaw(law.G, None, law.meta)
    try:
        hh = height(law)
    except LawError as exc:
        rep.add("height", A_HEIGHT, {"N": law.N}, str(exc), "a power of p", False)
        return rep
    meta_h = obj.get("meta", {}).get("h")
    if hh == "infinite to precision":
        rep.add("height", A_HEIGHT, {"N": law.N}, "[p]=0, height infinite to precision",
                meta_h if meta_h is not None else "any", meta_h is None)
        return rep
    rep.add("height", A_HEIGHT, {"N": law.N}, hh, meta_h if meta_h is not None else hh,
            meta_h is None or hh == meta_h)
    if obj.get("meta", {}).get("construction") == "honda":
        _pseries_check(rep, law, hh)
        if hh >= 2:
            _partials_check(rep, law)
    spot = [("[2]", multiplication(FormalGroupLaw(law.G, None, {}), 2)),
            ("[-1]", law.inverse)]
    if law.spec.n == 1:
        spot.append(("frobenius", frobenius_series(law.spec, law.N)))
    for name, e in spot:
        res = is_endomorphism(law, e)
        rep.add(f"endomorphism {name}", A_FROB if name == "frobenius" else "Z maps into End(G)",
                {"N": law.N}, {"ok": res.ok, "window": res.window,
                               "witness": None if res.witness is None else list(res.witness)},
                {"ok": True}, res.ok)
    return rep


# ----------------------------------------------------------------- trichotomy


def _growth_row(rep, law, name, u, expected_w, expected_case):
    rows = iterate_growth(law, u, 1)
    w0 = rows[0].w
    rep.add(f"{name}: w(u)", "proximity w(u) = v_x(u(x) - x)", {"u": name}, _wval(w0), expected_w,
            is_exact(w0) and w0 == expected_w)
    row = rows[0]
    anchor = {CASE_BELOW: A_BELOW, CASE_BOUNDARY: A_BOUNDARY, CASE_ABOVE: A_ABOVE}[expected_case]
    nxt = rows[1].w if len(rows) > 1 else None
    measured = {"case": row.case, "w": _wval(w0), "w_next": None if nxt is None else _wval(nxt)}
    expected = {"case": expected_case, "w_next": row.predicted}
    passed = row.held if row.case == expected_case else False
    rep.add(f"{name}: growth", anchor, {"u": name, "N": law.N}, measured, expected, passed)


def cmd_trichotomy(cfg: ExperimentConfig) -> ExperimentReport:
    p, h = cfg.p, cfg.h
    law = _law(cfg)
    rep = _report(cfg)
    a = 1 + p * p
    _growth_row(rep, law, f"[{a}]", multiplication(law, a), p ** (2 * h), CASE_ABOVE)
    case, _, _ = growth_case(p**h, p, h)
    _growth_row(rep, law, f"[{1 + p}]", multiplication(law, 1 + p), p**h, case)
    low = g_add(law, law.x(), frobenius_series(law.spec, law.N))
    case, _, _ = growth_case(p, p, h)
    _growth_row(rep, law, "x +G x^p", low, p, case)
    return rep


# --------------------------------------------------------------------- height


def cmd_height(cfg: ExperimentConfig) -> ExperimentReport:
    p, h, N = cfg.p, cfg.h, cfg.precision
    rep = _report(cfg)
    a = 1 + p * p
    # only the serialized automorphism is handed to the estimator
    blob = json.dumps(honda_multiplication(p, h, N, a).to_json(), sort_keys=True)
    u = TruncSeries.from_json(json.loads(blob))
    try:
        est = estimate_height(u)
        rep.add(f"height from [{a}]", A_RATIO, {"p": p, "N": N, "u": f"[{a}]"},
                {"h": est.h, "ratios": [str(r) for r in est.ratios], "ws": est.ws},
                {"h": h, "ratio": str(p**h)}, est.h == h and est.ratios[-1] == p**h)
    except HeightEstimateError as exc:
        rep.add(f"height from [{a}]", A_RATIO, {"p": p, "N": N, "u": f"[{a}]"},
                {"error": str(exc), "ratios": [str(r) for r in exc.ratios], "ws": exc.ws},
                {"h": h}, None if exc.kind == "precision" else False)
    for name, series in (("identity", identity_series(FieldSpec(p, 1), N)),
                         ("[-1]", honda_multiplication(p, h, min(N, 256), -1))):
        try:
            est = estimate_height(series)
            rep.add(f"control {name}", "torsion or identity input has no height", {"u": name},
                    {"h": est.h}, "error", False)
        except HeightEstimateError as exc:
            rep.add(f"control {name}", "torsion or identity input has no height", {"u": name},
                    {"error": exc.kind}, "error", True)
    return rep


# ---------------------------------------------------------------- centralizer


def _field_sample(rng, spec, count, pred):
    pool = [a for a in spec.elements() if not a.is_zero() and pred(a)]
    if len(pool) <= count:
        return pool
    out = []
    while len(out) < count:
        a = pool[rng.below(len(pool))]
        if a not in out:
            out.append(a)
    return out


def _random_invertible(rng, spec, N, lead=None):
    data = np.zeros((spec.n, N + 1), dtype=np.int64)
    data[:, 1] = (lead or rng.element(spec, nonzero=True)).coords
    for d in range(2, N + 1):
        data[:, d] = rng.element(spec).coords
    return TruncSeries(spec, N, data)


def cmd_centralizer(cfg: ExperimentConfig) -> ExperimentReport:
    p, h, N = cfg.p, cfg.h, cfg.precision
    rng = SplitMix64(cfg.seed)
    rep = _report(cfg)
    law = _law(cfg)
    spec = law.spec
    a = 1 + p * p
    u = multiplication(law, a)

    # Linear coefficients of commutants, in F_(p^3h).  There alpha^(p^2h) = alpha
    # only on F_(p^h), so w(u) = p^2h already separates the two kinds.
    big = FieldSpec(p, 3 * h)
    ubig = multiplication(_law(cfg, n=big.n), a)
    D = min(N, int(cfg.policy.get("commutant_window", 2 * p ** (2 * h))))
    inside = _field_sample(rng, big, 4, lambda z: fq_in_subfield(z, h))
    outside = _field_sample(rng, big, 6, lambda z: not fq_in_subfield(z, h))
    solved, bad_solved, infeasible_out, rows = 0, 0, 0, []
    for alpha in inside + outside:
        sol = solve_commutant(None, ubig, D, linear=alpha)
        ok_in = fq_in_subfield(alpha, h)
        if sol.feasible:
            solved += 1
            bad_solved += not fq_in_subfield(sol.series.coeff(1), h)
        elif not ok_in:
            infeasible_out += 1
        rows.append({"alpha": _el(alpha), "in_subfield": ok_in, "status": sol.status,
                     "witness_degree": sol.witness_degree})
    rep.add("commutant linear coefficients", A_LINEAR, {"u": f"[{a}]", "D": D, "field": big.to_json()},
            {"solved": solved, "outside_subfield": bad_solved}, {"outside_subfield": 0},
            solved > 0 and bad_solved == 0)
    rep.add("prescribed linear coefficient outside F_(p^h)", A_LINEAR,
            {"u": f"[{a}]", "D": D, "alphas": [r["alpha"] for r in rows if not r["in_subfield"]]},
            {"infeasible": infeasible_out, "witness_degrees": [r["witness_degree"] for r in rows if not r["in_subfield"]]},
            {"infeasible": len(outside)}, len(outside) > 0 and infeasible_out == len(outside))
    rep.add("prescribed linear coefficient inside F_(p^h)", A_LINEAR,
            {"u": f"[{a}]", "D": D, "alphas": [r["alpha"] for r in rows if r["in_subfield"]]},
            {"feasible": sum(r["status"] == "consistent" for r in rows if r["in_subfield"])},
            {"feasible": len(inside)},
            all(r["status"] == "consistent" for r in rows if r["in_subfield"]))

    # positive controls
    zeta = spec.gen()
    controls = [("u", u), ("[7]", multiplication(law, 7)), ("[2]", multiplication(law, 2)),
                ("zeta x", monomial(spec, N, 1, zeta)), ("u o u", s_compose(u, u)),
                ("frobenius", frobenius_series(spec, N))]
    for name, psi in controls:
        ok, deg = commutes(psi, u)
        rep.add(f"control {name}", A_CENTRAL, {"psi": name, "u": f"[{a}]"},
                {"commutes": ok, "witness_degree": deg}, {"commutes": True}, ok)

    # seeded random non-endomorphisms do not commute
    trials = int(cfg.policy.get("trials", 50))
    degrees, ok_all = [], True
    for _ in range(trials):
        psi = _random_invertible(rng, spec, N)
        if is_endomorphism(law, psi).ok:
            continue
        ok, deg = commutes(psi, u)
        degrees.append(deg)
        ok_all &= not ok
    rep.add("random non-endomorphisms", A_CENTRAL, {"trials": trials, "N": N, "seed": cfg.seed},
            {"tested": len(degrees), "witness_degrees": degrees}, {"all_nonzero_residual": True},
            ok_all and len(degrees) >= min(trials, 50))

    if h == 1:
        _commutators_vanish(rep, law, rng, N, cfg.seed)
    else:
        _commutator_checks(rep, law, rng, cfg)
    return rep


def _commutators_vanish(rep, law, rng, N, seed):
    # over F_p at height 1 the endomorphism ring is commutative; the
    # leading-term formula degenerates to 0
    spec, p = law.spec, law.p
    nonzero = []
    for _ in range(10):
        m = 1 + rng.below(2)
        uu = g_add(law, law.x(), monomial(spec, N, p**m, rng.element(spec, nonzero=True)))
        dd = g_add(law, monomial(spec, N, 1, rng.element(spec, nonzero=True)),
                   monomial(spec, N, p, rng.element(spec)))
        c = g_commutator(law, uu, dd)
        if c.nonzero_degrees():
            nonzero.append(c.nonzero_degrees()[0])
    rep.add("commutators vanish at height 1", A_LEADING, {"pairs": 10, "N": N, "seed": seed},
            {"nonzero_at": nonzero}, {"nonzero_at": []}, not nonzero)


def _commutator_checks(rep, law, rng, cfg):
    p, h, N = law.p, cfg.h, law.N
    spec = law.spec
    # leading term of commutators
    pairs = int(cfg.policy.get("pairs", 20))
    results = []
    top = max(1, int(np.log(N) / np.log(p)) - 1)
    attempts = 0
    while len(results) < pairs and attempts < 50 * pairs:
        attempts += 1
        lam = rng.element(spec, nonzero=True)
        alpha = rng.element(spec, nonzero=True)
        m = 1 + rng.below(top)
        r = rng.below(max(1, top - m + 1))
        want = lam * alpha ** (p**m) - alpha * lam ** (p**r)
        if want.is_zero():
            continue  # the formula predicts a cancellation; nothing to compare
        uu = g_add(law, law.x(), monomial(spec, N, p**m, lam))
        dd = monomial(spec, N, p**r, alpha)
        if p ** (r + 1) <= N:
            dd = g_add(law, dd, monomial(spec, N, p ** (r + 1), rng.element(spec)))
        c = g_commutator(law, uu, dd)
        d = p ** (r + m)
        low_clean = all(k >= d for k in c.nonzero_degrees())
        results.append({"lam": _el(lam), "alpha": _el(alpha), "m": m, "r": r,
                        "coeff": _el(c.coeff(d)), "formula": _el(want),
                        "ok": bool(low_clean and c.coeff(d) == want)})
    rep.add("commutator leading term", A_LEADING, {"pairs": pairs, "N": N, "seed": cfg.seed},
            {"held": sum(x["ok"] for x in results), "pairs": results}, {"held": pairs},
            all(x["ok"] for x in results) and len(results) >= 20)

    # commutator valuation under u -> u^p in the stable range; d = alpha x^(p^r)
    # with a nonzero predicted leading coefficient, so v_x([u, d]) = p^(r+m)
    m = h // (p - 1) + 1
    checked, mismatches, skipped, attempts = 0, [], 0, 0
    while checked + skipped < 10 and attempts < 500:
        attempts += 1
        lam = rng.element(spec, nonzero=True)
        alpha = rng.element(spec, nonzero=True)
        r = rng.below(2)
        if (lam * alpha ** (p**m) - alpha * lam ** (p**r)).is_zero():
            continue
        uu = g_add(law, law.x(), monomial(spec, N, p**m, lam))
        dd = monomial(spec, N, p**r, alpha)
        v1 = v_x(g_commutator(law, uu, dd))
        v2 = v_x(g_commutator(law, s_iterate(uu, p), dd))
        if not (is_exact(v1) and is_exact(v2)):
            skipped += 1
            continue
        checked += 1
        if v2 != p**h * v1:
            mismatches.append([int(v1), int(v2)])
    rep.add("commutator valuation under p-th power", A_COMM_POWER, {"m": m, "N": N, "seed": cfg.seed},
            {"checked": checked, "skipped_beyond_window": skipped, "mismatches": mismatches},
            {"mismatches": []}, (not mismatches) if checked else None)


# ----------------------------------------------------------------- normalizer


def _random_aut(rng, law):
    spec, N, p = law.spec, law.N, law.p
    u = monomial(spec, N, 1, rng.element(spec, nonzero=True))
    for r in (1, 2):
        if p**r <= N:
            u = g_add(law, u, monomial(spec, N, p**r, rng.element(spec)))
    return u


def cmd_normalizer(cfg: ExperimentConfig) -> ExperimentReport:
    p, N = cfg.p, cfg.precision
    rng = SplitMix64(cfg.seed)
    rep = _report(cfg)
    law = _law(cfg)
    spec = law.spec
    samples = int(cfg.policy.get("samples", 10))
    fixed = []
    for _ in range(samples):
        u = _random_aut(rng, law)
        conj = conjugate_law(law, u, check=False)
        diff = first_difference(conj.G, law.G)
        fixed.append(None if diff is None else list(diff))
    rep.add("conjugation by automorphisms", A_NORMAL, {"samples": samples, "N": N, "seed": cfg.seed},
            {"differences": fixed}, {"differences": [None] * samples}, all(d is None for d in fixed))

    pool = [("zeta x", monomial(spec, N, 1, spec.gen())), (f"[{1 + p}]", multiplication(law, 1 + p)),
            ("x +G x^p", g_add(law, law.x(), frobenius_series(spec, N)))]
    pool += [(f"sample {k}", _random_aut(rng, law)) for k in range(4)]
    trials = int(cfg.policy.get("trials", 50))
    found, law_diffs, records = 0, 0, []
    # x + x^2 first, then seeded random series
    candidates = [s_add(law.x(), monomial(spec, N, 2))] if N >= 2 else []
    while len(candidates) < trials:
        candidates.append(_random_invertible(rng, spec, N))
    for psi in candidates:
        dec = nearest_endomorphism(law, psi)
        if dec.stop_reason == "window exhausted":
            continue
        inv = s_reverse(psi)
        hit = None
        for name, v in pool:
            res = is_endomorphism(law, s_compose(psi, s_compose(v, inv)))
            if not res.ok:
                hit = {"v": name, "witness": list(res.witness), "window": res.window}
                break
        found += hit is not None
        diff = first_difference(conjugate_law(law, psi, check=False).G, law.G)
        law_diffs += diff is not None
        records.append({"v_delta": int(dec.v), "hit": hit, "law_witness": None if diff is None else list(diff)})
    rep.add("non-endomorphisms leave the normalizer", A_NORMALIZER, {"trials": trials, "N": N, "seed": cfg.seed},
            {"found": found, "tested": len(records), "records": records}, {"found": len(records)},
            len(records) >= min(trials, 50) and found == len(records))
    rep.add("conjugated law differs", A_NORMALIZER, {"trials": trials, "N": N, "seed": cfg.seed},
            {"differs": law_diffs, "tested": len(records)}, {"differs": len(records)}, law_diffs == len(records))
    return rep


# --------------------------------------------------------------- ramification


def cmd_ramification(cfg: ExperimentConfig) -> ExperimentReport:
    p, N = cfg.p, cfg.precision
    rep = _report(cfg)
    u = honda_multiplication(p, 1, N, 1 + p)
    M = int(cfg.policy.get("terms", 4))
    ram = ramification_number(u, M)
    for n in range(M):
        w_exp = 2 ** (n + 2) if p == 2 else p ** (n + 1)
        expected = Fraction((p - 1) * (w_exp - 1), p ** (n + 1))
        if n < len(ram.terms):
            rep.add(f"e_{n}", A_RAMIF, {"p": p, "n": n, "u": f"[{1 + p}]"},
                    {"w": ram.ws[n], "e": str(ram.terms[n])}, {"w": w_exp, "e": str(expected)},
                    ram.terms[n] == expected)
        else:
            rep.add(f"e_{n}", A_RAMIF, {"p": p, "n": n, "u": f"[{1 + p}]"},
                    {"note": ram.note}, {"w": w_exp, "e": str(expected)}, None)
    want = Fraction(p - 1) if p > 2 else Fraction(2)
    rep.add("limit", A_RAMIF_LIMIT, {"p": p}, None if ram.limit is None else str(ram.limit), str(want),
            None if ram.limit is None else ram.limit == want)
    return rep


# ---------------------------------------------------------------------- bench


def _time(fn, repeat=1):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def cmd_bench(cfg: ExperimentConfig) -> ExperimentReport:
    p, h = cfg.p, cfg.h
    rng = SplitMix64(cfg.seed)
    rep = _report(cfg)
    sizes = [int(s) for s in str(cfg.policy.get("sizes", "128;256;512;1024")).split(";")]
    strategies = str(cfg.policy.get("strategies", "horner;blocked;frobenius")).split(";")
    spec = FieldSpec(p, cfg.n)
    timing: dict = {"backend": K.BACKEND, "compose": {}, "b_substitute": {}, "solve_endomorphism": {}}
    for N in sizes:
        f = _random_invertible(rng, spec, N)
        g = _random_invertible(rng, spec, N)
        outs = {}
        for s in strategies:
            compose_arrays(spec, f.data, g.data, min(N, 32), s)  # warm-up
            outs[s] = compose_arrays(spec, f.data, g.data, N, s)
            timing["compose"].setdefault(s, {})[str(N)] = _time(
                lambda s=s: compose_arrays(spec, f.data, g.data, N, s))
        agree = all(np.array_equal(outs[strategies[0]], o) for o in outs.values())
        rep.add(f"compose strategies agree N={N}", "composition is independent of the algorithm",
                {"N": N}, agree, True, agree)
        B = honda_law(p, h, N)
        from ..pseries import biv_to_field

        B = biv_to_field(B, spec)
        timing["b_substitute"][str(N)] = _time(lambda: b_substitute(B, f, g))
        law = FormalGroupLaw(B, h, {"construction": "honda"})
        W = min(N, 128)
        timing["solve_endomorphism"][str(N)] = _time(lambda: solve_endomorphism(law, spec.gen(), 0, window=W))
    # the same products on both kernel backends
    timing["backends"] = {}
    prev = K.BACKEND
    for name in ("numba", "numpy") if K.HAVE_NUMBA else ("numpy",):
        K.use_backend(name)
        try:
            for N in sizes:
                f = _random_invertible(SplitMix64(cfg.seed), spec, N)
                K.mul1(f.data, f.data, 8, p, spec.reduction)  # warm-up
                timing["backends"].setdefault(name, {})[str(N)] = _time(
                    lambda: K.mul1(f.data, f.data, N, p, spec.reduction))
        finally:
            K.use_backend(prev)
    rep.timing = timing
    return rep
