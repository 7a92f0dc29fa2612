import json
import subprocess
import sys

import numpy as np
import pytest

from helpers import FIXTURES
from latticecalc.cli import main, run_command
from latticecalc.errors import CycleDetected, ParseError
from latticecalc.io import export_dot, parse_assignment, parse_lattice, parse_lattice_file, serialize_lattice
from latticecalc.lattice import boolean_lattice, chain_lattice, check_laws, m3
from latticecalc.quantify import propagate

LATTICE_FIXTURES = sorted(p for p in FIXTURES.glob("*.yaml") if "values" not in p.read_text()
                          and "prior" not in p.read_text() and "grid" not in p.read_text()
                          and p.name != "bad_cover.yaml")


def same_structure(a, b) -> bool:
    return a.labels == b.labels and np.array_equal(a.poset.order, b.poset.order) and a.kind == b.kind


@pytest.mark.parametrize("path", LATTICE_FIXTURES, ids=lambda p: p.name)
@pytest.mark.parametrize("explicit", [False, True])
def test_round_trip(path, explicit):
    l = parse_lattice_file(path)
    again = parse_lattice(serialize_lattice(l, explicit=explicit))
    assert same_structure(l, again)
    assert again.name == l.name


def test_explicit_m3_document():
    l = parse_lattice_file(FIXTURES / "m3.yaml")
    assert l.is_lattice and sorted(l.poset.cover_pairs()) == sorted(
        [("bot", "a"), ("bot", "b"), ("bot", "c"), ("a", "top"), ("b", "top"), ("c", "top")])


@pytest.mark.parametrize("text, line", [
    ("elements: [a, b]\ncovers:\n  - [a, b]\n  - [a, zz]\n", 4),
    ("elements: [a, a]\ncovers: []\n", 1),
    ("name: x\n", 1),
    ("elements: [a]\nstandard: {kind: m3}\n", 2),
    ("standard: {kind: boolean, parameter: 9}\n", 1),
    ("elements: [a, b\n", None),
])
def test_parse_errors(text, line):
    with pytest.raises(ParseError) as info:
        parse_lattice(text, "doc.yaml")
    if line is not None:
        assert info.value.line == line


def test_cycle_is_parse_error_with_line():
    with pytest.raises(ParseError) as info:
        parse_lattice("elements: [a, b]\ncovers: [[a, b], [b, a]]\n")
    assert info.value.line == 2 and "cycle" in str(info.value).lower()
    assert issubclass(CycleDetected, Exception)


def test_assignment_document():
    doc = parse_assignment("bottom: 0\nvalues:\n  x: 1/3\n  y: 2.5\n  12: 4\nprior: {a: 0.5, b: 0.5}\n")
    assert doc["values"] == {"x": __import__("fractions").Fraction(1, 3), "y": 2.5, "12": 4}
    assert doc["prior"] == {"a": 0.5, "b": 0.5}
    with pytest.raises(ParseError) as info:
        parse_assignment("prior: {a: 0.5, b: 0.4}\n")
    assert info.value.line == 1
    with pytest.raises(ParseError) as info:
        parse_assignment("values:\n  x: 1\n  y: nope\n")
    assert info.value.line == 3


def test_dot_export():
    one = chain_lattice(1)
    dot = export_dot(one)
    assert dot.count("[label=") == 1 and "->" not in dot
    b2 = boolean_lattice(2)
    dot = export_dot(b2)
    assert dot.count("[label=") == 4 and dot.count("->") == 4
    b3 = boolean_lattice(3)
    q = propagate(b3, {"{1}": 1, "{2}": 1, "{3}": 1})
    dot = export_dot(b3, q)
    for v in range(4):
        assert f"={v}\"" in dot
    assert export_dot(b3, q) == dot


def cli(*args):
    report, code = run_command([str(a) for a in args])
    return report, code


def test_cli_check_m3_witness_replays():
    report, code = cli("check", "--lattice", FIXTURES / "m3.yaml")
    assert code == 1 and report["laws"]["D1"]["passed"] is False
    a, b, c = report["laws"]["D1"]["witness"]
    l = m3()
    assert l.join(a, l.meet(b, c)) != l.meet(l.join(a, b), l.join(a, c))


def test_cli_check_pass_and_non_lattice():
    assert cli("check", "--lattice", FIXTURES / "d360.yaml")[1] == 0
    report, code = cli("check", "--lattice", FIXTURES / "bowtie.yaml")
    assert code == 1 and report["witness"]["missing"] == "join"
    assert sorted(report["witness"]["candidates"]) == ["c", "d"]


def test_cli_quantify():
    report, code = cli("quantify", "--lattice", FIXTURES / "b3.yaml", "--assign", FIXTURES / "b3_atoms.yaml")
    assert code == 0 and report["values"]["{1,2,3}"] == 6
    report, code = cli("quantify", "--lattice", FIXTURES / "m3.yaml", "--assign", FIXTURES / "m3_seeds.yaml")
    assert code == 1
    l = m3()
    x, y = report["witness"]
    vals = {"bot": 0, "a": 1, "b": 1, "c": 2, "top": 2}
    assert vals[l.label(l.join(x, y))] - vals[x] - vals[y] + vals[l.label(l.meet(x, y))] != 0


def test_cli_relevance():
    report, code = cli("relevance", "--question", "a | b∨c∨d", "--assign", FIXTURES / "fruit_prior.yaml")
    assert code == 0 and report["relevance"] == pytest.approx(0.405639, abs=1e-6)


def test_cli_abelian():
    report, code = cli("abelian", "--op", FIXTURES / "max_op.yaml")
    assert code == 1 and report["witness"]["inverse"] == 2
    assert cli("abelian", "--op", FIXTURES / "exp_op.yaml")[1] == 0


def test_cli_other_commands():
    b3, card = FIXTURES / "b3.yaml", FIXTURES / "b3_card.yaml"
    for check in ("sum", "chain", "product", "bayes", "zeta"):
        assert cli("bivalue", "--lattice", b3, "--assign", card, "--check", check)[1] == 0
    report, code = cli("mobius", "--lattice", b3)
    assert code == 0 and report["mu_bottom_top"] == -1
    report, code = cli("fidelity", "--lattice", b3, "--assign", card)
    assert code == 0 and report["fidelity"] == "valuation"
    report, code = cli("product", "--lattice", b3, "--other", FIXTURES / "c2.yaml",
                       "--assign", card, "--other-assign", FIXTURES / "c2_vals.yaml")
    assert code == 0 and report["elements"] == 16
    report, code = cli("export-dot", "--lattice", FIXTURES / "b2.yaml")
    assert code == 0 and report["dot"].count("->") == 4


def test_cli_regraduate(tmp_path):
    doc = tmp_path / "v.yaml"
    doc.write_text("values: {'{}': 1, '{1}': 3, '{2}': 5, '{1,2}': 7}\n")
    report, code = cli("regraduate", "--lattice", FIXTURES / "b2.yaml", "--assign", doc, "--scale", "affine:2,1")
    assert code == 0 and report["values"] == {"{}": 0, "{1}": 1, "{2}": 2, "{1,2}": 3}


@pytest.mark.parametrize("argv", [[], ["frob"], ["check"], ["check", "--lattice", "missing.yaml"],
                                  ["bivalue", "--lattice", "x", "--check", "nope"],
                                  ["check", "--lattice", str(FIXTURES / "bad_cover.yaml")]])
def test_cli_usage_errors_exit_2(argv):
    assert run_command(argv)[1] == 2


def test_main_json_and_out(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = main(["check", "--lattice", str(FIXTURES / "n5.yaml"), "--format", "json", "--out", str(out)])
    assert code == 1
    report = json.loads(out.read_text())
    assert report["command"] == "check" and report["laws"]["D1"]["witness"] == ["a", "b", "c"]
    code = main(["quantify", "--lattice", str(FIXTURES / "b3.yaml"), "--assign", str(FIXTURES / "b3_atoms.yaml"),
                 "--format", "json"])
    assert code == 0 and json.loads(capsys.readouterr().out)["values"]["{1,2,3}"] == 6


def test_export_dot_byte_stable_across_processes():
    cmd = [sys.executable, "-m", "latticecalc", "export-dot", "--lattice", str(FIXTURES / "d360.yaml")]
    runs = [subprocess.run(cmd, capture_output=True, check=True).stdout for _ in range(2)]
    assert runs[0] == runs[1] and runs[0].startswith(b"digraph")
