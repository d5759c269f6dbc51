"""Acceptance criteria 1-8, one test each.

Each test prints a single ``criterion N: PASS|FAIL  detail`` line; the lines
are repeated in the pytest terminal summary.  Run the file directly
(``python3 tests/test_acceptance.py``) to get just those lines.
"""
from __future__ import annotations

import json
import time
from fractions import Fraction

from fglab.endo import (
    CASE_ABOVE,
    CASE_BELOW,
    CASE_BOUNDARY,
    estimate_height,
    iterate_growth,
    padic_iterate,
    ramification_number,
    solve_endomorphism,
    zp_digits,
)
from fglab.fgl import (
    GOLDEN,
    bracket_int,
    check_axioms,
    g_add,
    golden_precision,
    is_endomorphism,
    multiplication,
    standard_law,
)
from fglab.lab import experiments as X
from fglab.lab.cli import main
from fglab.lab.config import ExperimentConfig
from fglab.lift import honda_multiplication
from fglab.pseries import (
    TruncSeries,
    b_substitute,
    biv_partial_x,
    frobenius_series,
    from_coeffs,
    s_compose,
    s_reverse,
)

LINES: list[str] = []


def report(k: int, ok: bool, detail: str) -> None:
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    LINES.append(line)
    print(line)


def _law_ok(p, h, N):
    law = standard_law(p, h, N, check=False)
    fails = check_axioms(law.G)
    ps = bracket_int(law, p)
    ok = not fails and ps.nonzero_degrees() == [p**h] and ps.coeff(p**h) == law.spec.one()
    if h >= 2:
        ok &= biv_partial_x(law.G).monomials() == [(0, 0)]
    return ok


def criterion_1():
    bad = [(p, h) for p, h in GOLDEN if not _law_ok(p, h, golden_precision(p, h))]
    t = time.perf_counter()
    big = _law_ok(2, 3, 512)
    secs = time.perf_counter() - t
    ok = not bad and big and secs < 120
    head = "all golden laws ok" if not bad else f"failing golden laws {bad}"
    return ok, f"{head}; (2,3) N=512 {'ok' if big else 'bad'} in {secs:.1f}s"


def _row(law, u, M=1):
    rows = iterate_growth(law, u, M)
    return rows[0].case, [int(r.w) for r in rows], rows[0].held


def criterion_2():
    out = []
    law = standard_law(2, 2, 80)
    out.append(("(2,2) [5]", _row(law, multiplication(law, 5)), (CASE_ABOVE, [16, 64], True)))
    law31 = standard_law(3, 1, 40)
    out.append(("(3,1) [10]", _row(law31, multiplication(law31, 10)), (CASE_ABOVE, [9, 27], True)))
    law23 = standard_law(2, 3, 80)
    low = g_add(law23, law23.x(), frobenius_series(law23.spec, 80))
    out.append(("(2,3) x+G x^2", _row(law23, low), (CASE_BELOW, [2, 4], True)))
    case, ws, held = _row(law, multiplication(law, 3))
    out.append(("(2,2) [3]", (case, ws[0], held and ws[1] >= 16), (CASE_BOUNDARY, 4, True)))
    ok = all(got == want for _, got, want in out)
    return ok, "; ".join(f"{n}: {g[1]}" for n, g, _ in out)


def criterion_3():
    found = {}
    for p, h in GOLDEN:
        N = p ** (4 * h) + 16
        blob = json.dumps(honda_multiplication(p, h, N, 1 + p * p).to_json())
        est = estimate_height(TruncSeries.from_json(json.loads(blob)))
        found[(p, h)] = (est.h, est.ratios[-1])
    ok = all(found[(p, h)] == (h, p**h) for p, h in GOLDEN)
    return ok, ", ".join(f"{k}->h={v[0]} ratio={v[1]}" for k, v in found.items())


def _suite(cmd, p, h, **policy):
    rep = cmd(ExperimentConfig(cmd.__name__[4:], p=p, h=h, policy=policy).validate())
    return rep.exit_code() == 0, [c.name for c in rep.checks if c.passed is not True], rep


def criterion_4():
    details, ok = [], True
    for p, h in [(2, 2), (3, 2), (3, 1)]:
        good, bad, rep = _suite(X.cmd_centralizer, p, h)
        rec = {c.name: c for c in rep.checks}
        rnd = rec["random non-endomorphisms"].measured
        good &= rnd["tested"] >= 50 and all(d is not None for d in rnd["witness_degrees"])
        if h >= 2:
            good &= rec["commutator leading term"].measured["held"] >= 20
            good &= rec["commutator valuation under p-th power"].measured["checked"] > 0
        ok &= good
        details.append(f"({p},{h}) {'ok' if good else 'failed ' + str(bad)}")
    return ok, "; ".join(details)


def criterion_5():
    details, ok = [], True
    for p, h in [(2, 2), (3, 2)]:
        good, bad, rep = _suite(X.cmd_normalizer, p, h)
        rec = {c.name: c for c in rep.checks}
        m = rec["non-endomorphisms leave the normalizer"].measured
        good &= m["tested"] >= 50 and all(r["hit"] and r["hit"]["witness"] for r in m["records"])
        good &= len(rec["conjugation by automorphisms"].measured["differences"]) >= 10
        ok &= good
        details.append(f"({p},{h}) {'ok' if good else 'failed ' + str(bad)}")
    return ok, "; ".join(details)


def criterion_6():
    details, ok = [], True
    for p in (3, 5, 2):
        N = (2**5 if p == 2 else p**4) + 16
        ram = ramification_number(honda_multiplication(p, 1, N, 1 + p), 4)
        want_w = [2 ** (n + 2) if p == 2 else p ** (n + 1) for n in range(4)]
        want_e = [Fraction((p - 1) * (w - 1), p ** (n + 1)) for n, w in enumerate(want_w)]
        limit = Fraction(p - 1) if p > 2 else Fraction(2)
        good = ram.terms == want_e and ram.limit == limit
        ok &= good
        miss = [n for n in range(4) if n >= len(ram.terms) or ram.terms[n] != want_e[n]]
        note = "".join(f" e_{n}={ram.terms[n] if n < len(ram.terms) else None} (expected {want_e[n]})" for n in miss)
        details.append(f"p={p} ws={ram.ws} limit={ram.limit}{note}")
    return ok, "; ".join(details)


def criterion_7():
    law = standard_law(2, 2, 128)
    x = law.x()
    c1 = bracket_int(law, 2) == b_substitute(law.G, x, x)
    f = from_coeffs(law.spec, 128, {1: law.spec.gen(), 2: 1, 5: 1, 9: law.spec.gen()})
    r = s_reverse(f)
    c2 = s_compose(f, r) == x and s_compose(r, f) == x
    c3 = True
    for alpha, rr in [(1, 0), (law.spec.gen(), 1), (1, 2)]:
        sol = solve_endomorphism(law, alpha, rr, policy={8: 1} if rr < 3 else None)
        c3 &= is_endomorphism(law, sol.series).ok
    law3 = standard_law(3, 1, 81)
    rho = multiplication(law3, 4)
    half = padic_iterate(rho, zp_digits(Fraction(1, 2), 3, 6))
    W = min(int(half.window) - 1, 81)
    c4 = s_compose(half.series, half.series).truncate(W) == rho.truncate(W) and W >= 81
    ok = c1 and c2 and c3 and c4
    return ok, f"[2]=G(x,x) {c1}, reverse {c2}, solver gated {c3}, sqrt window {W} {c4}"


def criterion_8():
    import contextlib
    import io

    runs = [
        ("trichotomy", "--p", "2", "--h", "2"),
        ("centralizer", "--p", "3", "--h", "1", "--seed", "11"),
        ("normalizer", "--p", "2", "--h", "2", "--seed", "3"),
        ("construct", "--p", "3", "--h", "2", "--prec", "81"),
    ]
    same = []
    for argv in runs:
        outs = []
        for _ in range(2):
            buf, err = io.StringIO(), io.StringIO()
            with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(err):
                main(list(argv))
            outs.append(buf.getvalue() + err.getvalue())
        same.append(outs[0] == outs[1] and len(outs[0]) > 0)
    return all(same), ", ".join(f"{a[0]} {'identical' if s else 'differs'}" for a, s in zip(runs, same))


def _check(k, fn):
    ok, detail = fn()
    report(k, ok, detail)
    assert ok, detail


def test_criterion_1_construction():
    _check(1, criterion_1)


def test_criterion_2_trichotomy():
    _check(2, criterion_2)


def test_criterion_3_height_detection():
    _check(3, criterion_3)


def test_criterion_4_centralizer():
    _check(4, criterion_4)


def test_criterion_5_normalizer():
    _check(5, criterion_5)


def test_criterion_6_ramification():
    _check(6, criterion_6)


def test_criterion_7_oracle_cross_checks():
    _check(7, criterion_7)


def test_criterion_8_determinism():
    _check(8, criterion_8)


if __name__ == "__main__":
    for k, fn in enumerate([criterion_1, criterion_2, criterion_3, criterion_4,
                            criterion_5, criterion_6, criterion_7, criterion_8], start=1):
        report(k, *fn())
