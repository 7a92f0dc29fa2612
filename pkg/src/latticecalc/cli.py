"""Command-line front end: ``latticecalc <command> [options]``.

Exit codes: 0 when every check passes, 1 on a rule violation (the report
carries a witness), 2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import yaml

from . import bivaluation as bv
from . import questions as qs
from .errors import Inconsistent, LatticeError, ParseError, UsageError
from .io import export_dot, format_number, parse_assignment_file, parse_lattice_file
from .lattice import ABSENT, Lattice, check_laws, join_irreducibles, maximal_lower_bounds, minimal_upper_bounds, product
from .poset import mobius, zeta
from .quantify import (
    FiniteOpTable,
    Quantification,
    ScaleFunction,
    check_abelian,
    check_consistency,
    check_product_distributivity,
    fidelity_class,
    oplus,
    product_quantify,
    propagate,
    regraduate,
)

PASS, VIOLATION, USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else format_number(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if not np.isfinite(v) else float(format(v, ".12g"))
    return v


def _values(l: Lattice, vals) -> dict:
    return {l.label(i): v for i, v in enumerate(vals)}


def _lattice(args) -> Lattice:
    if not args.lattice:
        raise UsageError("--lattice is required")
    return parse_lattice_file(args.lattice)


def _assignment(args, required=True) -> dict | None:
    if not args.assign:
        if required:
            raise UsageError("--assign is required")
        return None
    return parse_assignment_file(args.assign)


def _resolve(l: Lattice, values: dict, path) -> dict:
    out = {}
    for k, v in values.items():
        if k not in l.labels:
            raise ParseError(f"assignment refers to unknown label {k!r}", None, path)
        out[l.index(k)] = v
    return out


def _quantification(l: Lattice, doc: dict, path) -> tuple[Quantification, str]:
    """Full assignment as given, otherwise propagation from join-irreducible seeds."""
    vals = _resolve(l, doc["values"], path)
    if doc["bottom"] is not None and l.bottom is not None:
        vals.setdefault(l.bottom, doc["bottom"])
    if len(vals) == l.n:
        return Quantification(l, [vals[i] for i in range(l.n)]), "given"
    bottom = doc["bottom"] if doc["bottom"] is not None else 0
    seed = {i: v for i, v in vals.items() if i != l.bottom}
    return propagate(l, seed, bottom_value=bottom), "propagated"


def _consistency_entry(l: Lattice, rep) -> dict:
    entry = {"check": rep.check, "passed": rep.passed, "max_residual": rep.max_residual,
             "tol": rep.tol, "checked": rep.checked}
    if rep.worst is not None and not rep.passed:
        entry["witness"] = [l.label(i) for i in rep.worst]
    for name, part in rep.parts.items():
        entry.setdefault("parts", {})[name] = _consistency_entry_generic(part)
    return entry


def _consistency_entry_generic(rep) -> dict:
    entry = {"check": rep.check, "passed": rep.passed, "max_residual": rep.max_residual,
             "tol": rep.tol, "checked": rep.checked}
    if rep.worst is not None and not rep.passed:
        entry["witness"] = list(rep.worst)
    return entry


# -- commands ------------------------------------------------------------------

def cmd_check(args) -> tuple[dict, int]:
    l = _lattice(args)
    report = {"lattice": l.name, "elements": l.n, "kind": l.kind}
    if not l.is_lattice:
        J, M = np.asarray(l.join_table), np.asarray(l.meet_table)
        missing = np.argwhere(J == ABSENT)
        op, pairs = ("join", missing) if len(missing) else ("meet", np.argwhere(M == ABSENT))
        x, y = (int(v) for v in pairs[0])
        bounds = minimal_upper_bounds(l, x, y) if op == "join" else maximal_lower_bounds(l, x, y)
        report["passed"] = False
        report["witness"] = {"missing": op, "pair": [l.label(x), l.label(y)],
                             "candidates": [l.label(b) for b in bounds]}
        return report, VIOLATION
    laws = check_laws(l)
    report["laws"] = {k: {"passed": r.passed, "witness": laws.witness_labels(k)} for k, r in laws.results.items()}
    report["distributive"] = laws.distributive
    report["passed"] = laws.passed
    return report, PASS if laws.passed else VIOLATION


def cmd_quantify(args) -> tuple[dict, int]:
    l = _lattice(args)
    l.require_lattice()
    doc = _assignment(args)
    report = {"lattice": l.name, "irreducibles": [l.label(i) for i in join_irreducibles(l)]}
    try:
        q, how = _quantification(l, doc, args.assign)
    except Inconsistent as exc:
        report.update(passed=False, mode="propagated", witness=list(exc.labels or exc.witness),
                      residual=exc.residual)
        return report, VIOLATION
    rep = check_consistency(l, q, args.tol)
    report.update(mode=how, values=_values(l, q.values), consistency=_consistency_entry(l, rep), passed=rep.passed)
    return report, PASS if rep.passed else VIOLATION


def cmd_fidelity(args) -> tuple[dict, int]:
    l = _lattice(args)
    q, how = _quantification(l, _assignment(args), args.assign)
    f = fidelity_class(l, q)
    report = {"lattice": l.name, "mode": how, "fidelity": f.kind, "valuation": f.is_valuation,
              "co_valuation": f.is_co_valuation, "passed": True}
    if f.note:
        report["note"] = f.note
    return report, PASS


def cmd_regraduate(args) -> tuple[dict, int]:
    l = _lattice(args)
    f = ScaleFunction.parse(args.scale)
    doc = _assignment(args)
    vals = _resolve(l, doc["values"], args.assign)
    if len(vals) != l.n:
        raise UsageError("regraduate needs a value for every element")
    q = Quantification(l, [vals[i] for i in range(l.n)])
    g = regraduate(q, f)
    tol = args.tol * (1.0 + float(np.max(np.abs(g.array().astype(float)))))
    rep = check_consistency(l, g, tol)
    report = {"lattice": l.name, "scale": args.scale, "values": _values(l, g.values),
              "consistency": _consistency_entry(l, rep), "passed": rep.passed}
    return report, PASS if rep.passed else VIOLATION


_OPS = {
    "add": lambda a, b: a + b,
    "mul": lambda a, b: a * b,
    "max": max,
    "min": min,
}


def _op_table(path) -> tuple[FiniteOpTable, str]:
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", None, str(path)) from None
    except yaml.YAMLError as exc:
        raise ParseError(f"invalid YAML: {exc}", None, str(path)) from None
    if not isinstance(data, dict) or not isinstance(data.get("grid"), list) or not data["grid"]:
        raise ParseError("operator document needs a non-empty 'grid' list", None, str(path))
    grid = [float(x) for x in data["grid"]]
    if "table" in data:
        try:
            return FiniteOpTable(grid, data["table"]), "table"
        except (LatticeError, ValueError) as exc:
            raise ParseError(str(exc), None, str(path)) from None
    if "scale" in data:
        f = ScaleFunction.parse(str(data["scale"]))
        return FiniteOpTable.from_function(grid, lambda a, b: float(oplus(f, a, b))), f"oplus[{data['scale']}]"
    name = str(data.get("op", ""))
    if name not in _OPS:
        raise ParseError(f"operator document needs 'table', 'scale' or op in {sorted(_OPS)}", None, str(path))
    return FiniteOpTable.from_function(grid, _OPS[name]), name


def cmd_abelian(args) -> tuple[dict, int]:
    t, desc = _op_table(args.op)
    rep = check_abelian(t, args.tol)
    report = {"operator": desc, "grid": list(t.grid), "commutative": rep.commutative,
              "associative": rep.associative, "identity": rep.identity, "inverses": rep.inverses,
              "unchecked_triples": rep.unchecked_triples, "passed": rep.abelian}
    witness = {}
    if rep.commutative_witness is not None:
        witness["commutative"] = list(rep.commutative_witness)
    if rep.associative_witness is not None:
        witness["associative"] = list(rep.associative_witness)
        report["associativity_residual"] = rep.associativity_residual
    if rep.identity is None:
        witness["identity"] = "no grid point acts as an identity"
    elif not rep.inverses:
        witness["inverse"] = rep.inverse_witness
        report["missing_inverses"] = list(rep.missing_inverses)
    if witness:
        report["witness"] = witness
    return report, PASS if rep.abelian else VIOLATION


def cmd_product(args) -> tuple[dict, int]:
    A = _lattice(args)
    if not args.other:
        raise UsageError("--other is required")
    B = parse_lattice_file(args.other)
    P = product(A, B)
    laws = check_laws(P)
    report = {"lattice": A.name, "other": B.name, "elements": P.n, "kind": P.kind,
              "laws_passed": laws.passed, "passed": True}
    if args.assign and args.other_assign:
        qA, _ = _quantification(A, parse_assignment_file(args.assign), args.assign)
        qB, _ = _quantification(B, parse_assignment_file(args.other_assign), args.other_assign)
        qP = product_quantify(qA, qB, P)
        report["values"] = _values(P, qP.values)
        rep = check_product_distributivity(qA, qB, qP, tol=args.tol)
        report["distributivity"] = _consistency_entry_generic(rep)
        report["passed"] = rep.passed
    return report, PASS if report["passed"] else VIOLATION


def cmd_bivalue(args) -> tuple[dict, int]:
    l = _lattice(args)
    q, _ = _quantification(l, _assignment(args), args.assign)
    b = bv.from_valuation(l, q)
    report = {"lattice": l.name, "check": args.check}
    if args.check == "sum":
        ctxs = [l.index(args.context)] if args.context else [int(k) for k in np.nonzero(b.defined)[0]]
        reps = {l.label(k): bv.check_bi_sum_rule(b, k, args.tol) for k in ctxs}
        report["contexts"] = {k: _consistency_entry(l, r) for k, r in reps.items()}
        passed = all(r.passed for r in reps.values())
    elif args.check == "zeta":
        rep = bv.degree_of_inclusion_report(l, b)
        report.update(checked=rep.checked, included=rep.included, exclusive=rep.exclusive, partial=rep.partial)
        if rep.violations:
            x, y, v, want = rep.violations[0]
            report["witness"] = {"interval": [l.label(x), l.label(y)], "value": v, "expected": want}
        passed = rep.passed
    else:
        fn = {"chain": bv.check_chain_rule, "product": bv.check_product_rule, "bayes": bv.check_bayes}[args.check]
        rep = fn(b, args.tol)
        report["result"] = _consistency_entry(l, rep)
        passed = rep.passed
    report["passed"] = passed
    return report, PASS if passed else VIOLATION


def cmd_relevance(args) -> tuple[dict, int]:
    doc = _assignment(args, required=False)
    prior = doc["prior"] if doc else None
    if prior is not None:
        space = qs.StatementSpace(list(prior), prior)
    else:
        atoms = [a.strip() for a in args.atoms.split(",") if a.strip()]
        space = qs.StatementSpace.uniform(atoms)
    q = qs.parse_question(space, args.question)
    ctx = qs.parse_question(space, args.context) if args.context else None
    r = qs.relevance(space, q, ctx)
    report = {"atoms": list(space.atoms), "question": q.name, "statements": len(q),
              "context": ctx.name if ctx is not None else "I", "relevance": r, "passed": True}
    return report, PASS


def cmd_mobius(args) -> tuple[dict, int]:
    l = _lattice(args)
    p = l.poset
    mu = mobius(p)
    ok = bool(np.array_equal(zeta(p) @ mu, np.eye(p.n, dtype=np.int64)))
    report = {"lattice": l.name, "labels": list(p.labels), "mobius": mu, "zeta_mobius_identity": ok, "passed": ok}
    if p.bottom() is not None and p.top() is not None:
        report["mu_bottom_top"] = int(mu[p.bottom(), p.top()])
    return report, PASS if ok else VIOLATION


def cmd_export_dot(args) -> tuple[dict, int]:
    l = _lattice(args)
    q = None
    if args.assign:
        q, _ = _quantification(l, parse_assignment_file(args.assign), args.assign)
    return {"lattice": l.name, "dot": export_dot(l, q), "passed": True}, PASS


COMMANDS = {
    "check": (cmd_check, "check lattice laws L1-L5 and distributivity D1-D2"),
    "quantify": (cmd_quantify, "propagate seeds with the sum rule and check consistency"),
    "fidelity": (cmd_fidelity, "classify a quantification as valuation or co-valuation"),
    "regraduate": (cmd_regraduate, "map values through the inverse of a scale function"),
    "abelian": (cmd_abelian, "check an operator table for the abelian group axioms"),
    "product": (cmd_product, "build the lattice product and apply the direct product rule"),
    "bivalue": (cmd_bivalue, "check bi-quantification rules"),
    "relevance": (cmd_relevance, "relevance of a question on a statement space"),
    "mobius": (cmd_mobius, "Möbius function and the zeta-Möbius identity"),
    "export-dot": (cmd_export_dot, "Hasse diagram in Graphviz DOT"),
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--lattice", help="lattice document (YAML)")
    common.add_argument("--assign", help="assignment document (YAML)")
    common.add_argument("--tol", type=float, default=1e-9, help="residual tolerance (default 1e-9)")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--out", help="write the report here instead of stdout")

    parser = _Parser(prog="latticecalc", description="Finite lattices, valuations and question relevance.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="command")
    sub.required = True
    cmds = {name: sub.add_parser(name, parents=[common], help=text) for name, (_, text) in COMMANDS.items()}
    cmds["regraduate"].add_argument("--scale", required=True, help="identity, log, exp or affine:ALPHA,BETA")
    cmds["abelian"].add_argument("--op", required=True, help="operator document (grid + table, op or scale)")
    cmds["product"].add_argument("--other", help="second lattice document")
    cmds["product"].add_argument("--other-assign", help="assignment for the second lattice")
    cmds["bivalue"].add_argument("--check", required=True, choices=("sum", "chain", "product", "bayes", "zeta"))
    cmds["bivalue"].add_argument("--context", help="context element for --check sum (default: all)")
    cmds["relevance"].add_argument("--question", required=True, help="generators, e.g. 'a | b∨c∨d'")
    cmds["relevance"].add_argument("--context", help="context question (default: the central issue)")
    cmds["relevance"].add_argument("--atoms", default="a,b,c,d", help="atoms for a uniform prior")
    return parser


def run_command(argv) -> tuple[dict, int]:
    """Run one command; returns the report and the exit code. Never raises for user errors."""
    command = argv[0] if argv else None
    try:
        args = build_parser().parse_args(argv)
        command = args.command
        handler = COMMANDS[command][0]
        report, code = handler(args)
    except (UsageError, ParseError) as exc:
        return {"command": command, "passed": False, "error": type(exc).__name__, "message": str(exc)}, USAGE
    except LatticeError as exc:
        report = {"command": command, "passed": False, "error": type(exc).__name__, "message": str(exc)}
        witness = getattr(exc, "labels", None) or getattr(exc, "witness", None)
        if witness is not None:
            report["witness"] = list(witness)
        return report, VIOLATION
    return {"command": command, **report}, code


def _text(report: dict) -> str:
    if report.get("command") == "export-dot" and "dot" in report:
        return report["dot"]
    lines = []

    def walk(d, indent=""):
        for k, v in d.items():
            if isinstance(v, dict):
                lines.append(f"{indent}{k}:")
                walk(v, indent + "  ")
            else:
                lines.append(f"{indent}{k}: {v}")

    walk(_jsonable(report))
    return "\n".join(lines) + "\n"


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_jsonable(report), indent=2, ensure_ascii=False) + "\n"
    return _text(report)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv in ([], ["-h"], ["--help"]) or (len(argv) == 2 and argv[1] in ("-h", "--help")):
        try:
            build_parser().parse_args(argv or ["--help"])
        except SystemExit as exc:
            return int(exc.code or 0)
    report, code = run_command(argv)
    fmt = "json" if "--format=json" in argv or _flag(argv, "--format") == "json" else "text"
    text = render(report, fmt)
    out = _flag(argv, "--out")
    if out and code != USAGE:
        Path(out).write_text(text, encoding="utf-8")
    else:
        stream = sys.stderr if code == USAGE else sys.stdout
        stream.write(text)
    return code


def _flag(argv, name):
    for k, a in enumerate(argv):
        if a == name and k + 1 < len(argv):
            return argv[k + 1]
        if a.startswith(name + "="):
            return a.split("=", 1)[1]
    return None


if __name__ == "__main__":
    sys.exit(main())
