"""Acceptance criteria 1-12.

Each criterion is a function returning ``(passed, detail)``. Under pytest every
criterion is its own test and prints one ``criterion N: PASS|FAIL`` line;
``python tests/test_acceptance.py`` prints the same lines without pytest.
"""

from __future__ import annotations

import math
import subprocess
import sys
import time
from fractions import Fraction
from itertools import combinations
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import FIXTURES, mobius_oracle, random_poset  # noqa: E402
from latticecalc.bivaluation import (  # noqa: E402
    check_bayes,
    check_bi_sum_rule,
    check_chain_rule,
    check_diamond_lemma,
    check_product_rule,
    from_valuation,
)
from latticecalc.cli import run_command  # noqa: E402
from latticecalc.errors import Inconsistent  # noqa: E402
from latticecalc.io import parse_lattice, parse_lattice_file, serialize_lattice  # noqa: E402
from latticecalc.lattice import (  # noqa: E402
    boolean_lattice,
    chain_lattice,
    check_laws,
    divisor_lattice,
    downset_lattice,
    join_irreducibles,
    m3,
    n5,
)
from latticecalc.poset import mobius, zeta  # noqa: E402
from latticecalc.quantify import (  # noqa: E402
    FiniteOpTable,
    Quantification,
    ScaleFunction,
    check_abelian,
    check_consistency,
    check_product_distributivity,
    oplus,
    product_quantify,
    propagate,
)
from latticecalc.questions import (  # noqa: E402
    StatementSpace,
    enumerate_questions,
    mutual_information,
    parse_question,
    relevance,
)


def _random_downset_lattices(count, seed):
    rng = np.random.default_rng(seed)
    return [downset_lattice(random_poset(rng, int(rng.integers(1, 8)), float(rng.uniform(0.1, 0.5))))
            for _ in range(count)]


def _atom_measure(l, weights):
    return Quantification(l, [sum((weights[a] for a in s), start=0) for s in l.sets])


# -- criteria --------------------------------------------------------------------


def criterion_1():
    start = time.perf_counter()
    fixtures = [boolean_lattice(n) for n in (3, 4, 5)] + [chain_lattice(k) for k in range(1, 11)]
    fixtures += [divisor_lattice(360)] + _random_downset_lattices(100, 1)
    failing = [l.name for l in fixtures if not check_laws(l).passed]
    bad_witness = []
    for l in (m3(), n5()):
        rep = check_laws(l)
        w = rep["D1"].witness
        J, M = l.join_table, l.meet_table
        if rep["D1"].passed or w is None:
            bad_witness.append(l.name)
            continue
        a, b, c = w
        if J[a, M[b, c]] == M[J[a, b], J[a, c]]:
            bad_witness.append(l.name)
    elapsed = time.perf_counter() - start
    ok = not failing and not bad_witness and elapsed < 5.0
    wit = check_laws(m3()).witness_labels("D1"), check_laws(n5()).witness_labels("D1")
    return ok, f"{len(fixtures)} distributive lattices pass; M3/N5 D1 witnesses {wit}; {elapsed:.2f}s"


def criterion_2():
    rng = np.random.default_rng(2)
    posets = [boolean_lattice(4).poset, divisor_lattice(360).poset]
    posets += [random_poset(rng, int(rng.integers(1, 13)), float(rng.uniform(0.1, 0.6))) for _ in range(50)]
    bad = 0
    for p in posets:
        mu = mobius(p)
        if not np.array_equal(zeta(p) @ mu, np.eye(p.n, dtype=np.int64)):
            bad += 1
    mus = []
    for n in range(1, 6):
        b = boolean_lattice(n)
        mu = mobius(b.poset)[b.bottom, b.top]
        oracle = mobius_oracle(np.asarray(b.poset.order))[b.bottom, b.top]
        mus.append(int(mu))
        if mu != (-1) ** n or oracle != mu:
            bad += 1
    return bad == 0, f"zeta*mu = I on {len(posets)} posets; mu(bot,top) on B1..B5 = {mus}"


def criterion_3():
    rng = np.random.default_rng(3)
    fixtures = [boolean_lattice(n) for n in (2, 3, 4, 5)] + [chain_lattice(5), divisor_lattice(360)]
    fixtures += _random_downset_lattices(5, 33)
    failures = 0
    runs = 0
    for l in fixtures:
        irr = join_irreducibles(l)
        for _ in range(100):
            seed = {j: float(v) for j, v in zip(irr, rng.uniform(0.1, 10.0, size=len(irr)))}
            q = propagate(l, seed)
            runs += 1
            if not check_consistency(l, q, 1e-9).passed:
                failures += 1
    l = m3()
    try:
        propagate(l, {"a": 1, "b": 1, "c": 2})
        m3_ok, detail = False, "M3 propagation did not fail"
    except Inconsistent as exc:
        x, y = exc.witness
        Q = dict(zip(l.labels, [0, 1, 1, 2, 2]))
        r = Q[l.label(l.join(x, y))] - Q[l.label(x)] - Q[l.label(y)] + Q[l.label(l.meet(x, y))]
        m3_ok = r != 0 and r == exc.residual
        detail = f"M3 Inconsistent at {exc.labels} residual {exc.residual}"
    return failures == 0 and m3_ok, f"{runs} propagations consistent at 1e-9; {detail}"


def criterion_4():
    l = divisor_lattice(360)
    ds = [int(s) for s in l.labels]
    worst = 0.0
    ok = True
    for i, a in enumerate(ds):
        for j, b in enumerate(ds):
            lcm, gcd = ds[l.join_table[i, j]], ds[l.meet_table[i, j]]
            ok &= lcm == math.lcm(a, b) and gcd == math.gcd(a, b)
            lhs = math.log(lcm)
            rhs = math.log(a) + math.log(b) - math.log(gcd)
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    ok &= worst <= 1e-12
    return ok, f"{len(ds) ** 2} divisor pairs, max relative residual {worst:.2e}"


def criterion_5():
    details = []
    ok = True
    for f in (ScaleFunction.identity(), ScaleFunction.exp(), ScaleFunction.affine(2, 1)):
        grid = [float(f.forward(k)) for k in range(-4, 5)]
        t = FiniteOpTable.from_function(grid, lambda a, b, f=f: float(oplus(f, a, b)))
        rep = check_abelian(t, 1e-9)
        worst = 0.0
        for a in grid:
            for b in grid:
                lhs = f.inverse(oplus(f, a, b))
                rhs = f.inverse(a) + f.inverse(b)
                worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
        ok &= rep.abelian and worst <= 1e-9
        details.append(f"{f.kind}: abelian={rep.abelian} e={rep.identity:g} additivity={worst:.1e}")
    mx = check_abelian(FiniteOpTable.from_function([0, 1, 2], max))
    ok &= (not mx.inverses) and mx.inverse_witness == 2
    details.append(f"max: inverses={mx.inverses} witness a={mx.inverse_witness:g}")
    return ok, "; ".join(details)


def criterion_6():
    ok = True
    details = []
    B2, C2, C3, C4 = boolean_lattice(2), chain_lattice(2), chain_lattice(3), chain_lattice(4)
    cases = [
        (propagate(B2, {"{1}": 2, "{2}": 3}), Quantification(C2, [1, 5])),
        (Quantification(C3, [0, 2, 7]), Quantification(C4, [1, 3, 4, 9])),
    ]
    for qA, qB in cases:
        qP = product_quantify(qA, qB)
        nb = qB.lattice.n
        exact = all(qP.values[k] == qA.values[k // nb] * qB.values[k % nb] for k in range(qP.lattice.n))
        rep = check_product_distributivity(qA, qB, qP, tol=0.0)
        ok &= exact and rep.passed and rep.max_residual == 0 and rep.checked > 0
        details.append(f"{qP.lattice.name}: product exact={exact}, distributivity residual "
                       f"{rep.max_residual} over {rep.checked}")
    return ok, "; ".join(details)


def criterion_7():
    rng = np.random.default_rng(7)
    ok = True
    checked = 0
    for n in range(1, 6):
        l = boolean_lattice(n)
        atoms = sorted(set().union(*l.sets))
        measures = [_atom_measure(l, {a: 1 for a in atoms})]
        measures += [_atom_measure(l, {a: float(rng.uniform(0.05, 5.0)) for a in atoms}) for _ in range(3)]
        for q in measures:
            b = from_valuation(l, q)
            for t in np.nonzero(b.defined)[0]:
                ok &= check_bi_sum_rule(b, int(t), 1e-9).passed
            for check in (check_chain_rule, check_diamond_lemma, check_product_rule, check_bayes):
                ok &= check(b, 1e-9).passed
            B, O, M = b.matrix, np.asarray(l.poset.order), np.asarray(l.meet_table)
            for x in range(l.n):
                if not b.defined[x]:
                    continue
                ok &= B[x, x] == 1.0
                for y in range(l.n):
                    if O[x, y]:
                        ok &= B[y, x] == 1.0
                    if M[x, y] == l.bottom:
                        ok &= B[y, x] == 0.0
            checked += 1
    return bool(ok), f"{checked} (lattice, measure) pairs on B1..B5: five rules at 1e-9, identities exact"


def criterion_8():
    rng = np.random.default_rng(8)
    ok = True
    total = 0
    for n in range(1, 6):
        l = boolean_lattice(n)
        atoms = sorted(set().union(*l.sets))
        for w in ({a: 1 for a in atoms},
                  {a: Fraction(int(rng.integers(1, 40)), int(rng.integers(1, 7))) for a in atoms}):
            q = _atom_measure(l, w)
            b, b7 = from_valuation(l, q), from_valuation(l, q.scaled(7))
            for x in range(l.n):
                for t in np.nonzero(b.defined)[0]:
                    total += 1
                    ok &= b.value(x, int(t)) == b7.value(x, int(t))
    return bool(ok), f"{total} exact bi-quantification values unchanged under q -> 7q"


def criterion_9():
    sp = StatementSpace.uniform("abcd")
    q1 = parse_question(sp, "a | b∨c∨d")
    r1 = relevance(sp, q1)
    oracle1 = -(0.25 * math.log2(0.25) + 0.75 * math.log2(0.75)) / 2
    rI = relevance(sp, sp.central_issue())
    q2 = parse_question(sp, "a∨b | b∨c∨d")
    r2 = relevance(sp, q2)
    h = lambda *ps: -sum(p * math.log2(p) for p in ps)  # noqa: E731
    oracle2 = (h(0.5, 0.5) + h(0.25, 0.75) - h(0.25, 0.25, 0.5)) / h(0.25, 0.25, 0.25, 0.25)
    listed_q1 = {"a", "b∨c∨d", "b∨c", "b∨d", "c∨d", "b", "c", "d"}
    listed_join = {"a∨b", "a", "b", "b∨c∨d", "b∨c", "b∨d", "c∨d", "b", "c", "d"}
    listed_ab_cd = {"a∨b", "a", "b", "c∨d", "c", "d"}
    listed_meet = {"a", "b", "c∨d", "c", "d"}
    ab_cd = parse_question(sp, "a∨b | c∨d")
    sets_ok = (q1.statement_labels() == listed_q1 and q2.statement_labels() == listed_join
               and (ab_cd | q1) == q2 and ab_cd.statement_labels() == listed_ab_cd
               and (ab_cd & q1).statement_labels() == listed_meet)
    ok = (abs(r1 - 0.405639) <= 1e-6 and abs(r1 - oracle1) <= 1e-12 and rI == 1.0
          and abs(r2 - 0.155639) <= 1e-6 and abs(r2 - oracle2) <= 1e-12 and sets_ok)
    return ok, (f"b(A∨BCD,I)={r1:.6f}, b(I,I)={rI}, b(AB∨BCD,I)={r2:.6f}, "
                f"answer sets match={sets_ok} ({len(q1)} and {len(q2)} statements)")


def _brute_count(n):
    stmts = list(range(1, 1 << n))
    found = set()
    for bits in range(1 << len(stmts)):
        members = [s for k, s in enumerate(stmts) if bits >> k & 1]
        mset = set(members)
        if all(t in mset for s in members for t in stmts if t & ~s == 0):
            found.add(sum(1 << s for s in members))
    return found


def criterion_10():
    start = time.perf_counter()
    counts = {}
    ok = True
    for n in (2, 3, 4):
        sp = StatementSpace.uniform("abcd"[:n])
        qs = enumerate_questions(sp)
        members = {q.members for q in qs}
        counts[n] = len(qs)
        for a, b in combinations(qs, 2):
            j, m = a | b, a & b
            ok &= j.is_downset() and m.is_downset() and j.members in members and m.members in members
        if n == 4:
            n4_time = time.perf_counter() - start
    t_enum = time.perf_counter() - start
    ok &= counts[2] == 5
    brute = {n: _brute_count(n) for n in (2, 3, 4)}
    for n in (2, 3, 4):
        sp = StatementSpace.uniform("abcd"[:n])
        ok &= {q.members for q in enumerate_questions(sp)} == brute[n]
    ok &= n4_time < 10.0
    return bool(ok), f"counts {counts} match brute force; closure verified; enumeration+closure {t_enum:.2f}s"


def criterion_11():
    indep = [
        np.outer([0.5, 0.5], [0.5, 0.5]),
        np.outer([0.25, 0.75], [0.5, 0.25, 0.25]),
        np.outer([0.125, 0.375, 0.5], [0.75, 0.25]),
    ]
    mis = [float(mutual_information(P)) for P in indep]
    corr = mutual_information([[0.5, 0.0], [0.0, 0.5]])

    def h(p):
        p = np.asarray(p, dtype=float).ravel()
        p = p[p > 0]
        return float(-np.sum(p * np.log2(p)))

    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(50):
        P = rng.uniform(0.01, 1.0, size=(3, 4))
        P /= P.sum()
        worst = max(worst, abs(mutual_information(P) - (h(P.sum(1)) + h(P.sum(0)) - h(P))))
    ok = all(m == 0.0 for m in mis) and corr == 1.0 and worst <= 1e-12
    return ok, f"independent MI={mis}, correlated MI={corr}, max deviation from H(A)+H(B)-H(A,B) {worst:.1e}"


def criterion_12():
    lattice_docs = [p for p in sorted(FIXTURES.glob("*.yaml"))
                    if not any(k in p.read_text() for k in ("values", "prior", "grid")) and p.name != "bad_cover.yaml"]
    rt_ok = True
    for p in lattice_docs:
        l = parse_lattice_file(p)
        for explicit in (False, True):
            again = parse_lattice(serialize_lattice(l, explicit=explicit))
            rt_ok &= again.labels == l.labels and np.array_equal(again.poset.order, l.poset.order)
    report, code = run_command(["check", "--lattice", str(FIXTURES / "m3.yaml"), "--format", "json"])
    a, b, c = report["laws"]["D1"]["witness"]
    l = m3()
    replay_ok = code == 1 and l.join(a, l.meet(b, c)) != l.meet(l.join(a, b), l.join(a, c))
    cmd = [sys.executable, "-m", "latticecalc", "export-dot", "--lattice", str(FIXTURES / "d360.yaml")]
    outs = [subprocess.run(cmd, capture_output=True, check=True).stdout for _ in range(2)]
    dot_ok = outs[0] == outs[1] and len(outs[0]) > 0
    return bool(rt_ok and replay_ok and dot_ok), (
        f"round-trip on {len(lattice_docs)} fixtures={rt_ok}; M3 check exit {code} witness {(a, b, c)} "
        f"replays={replay_ok}; export-dot byte-stable={dot_ok}")


CRITERIA = {k: globals()[f"criterion_{k}"] for k in range(1, 13)}


def _line(k: int) -> tuple[bool, str]:
    try:
        ok, detail = CRITERIA[k]()
    except Exception as exc:  # a crash is a failure of the criterion, reported like one
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return ok, f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}"


@pytest.mark.parametrize("k", range(1, 13))
def test_criterion(k, capsys):
    ok, line = _line(k)
    with capsys.disabled():
        print(f"\n{line}")
    assert ok, line


if __name__ == "__main__":
    results = [_line(k) for k in range(1, 13)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
