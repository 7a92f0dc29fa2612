"""Lattice and assignment documents (YAML), and Graphviz DOT export.

See FORMATS.md for the field reference.
"""

from __future__ import annotations

import math
from dataclasses import replace
from fractions import Fraction
from pathlib import Path
from typing import Any

import yaml

from .errors import CycleDetected, DuplicateLabel, LatticeError, ParseError, UnknownLabel
from .lattice import STANDARD_KINDS, Lattice, classify, make_standard
from .poset import Poset, build_poset


def _line_of(node, *path) -> int | None:
    """1-based source line of the node reached by following ``path`` (keys / indices)."""
    try:
        for step in path:
            if isinstance(node, yaml.MappingNode):
                node = next(v for k, v in node.value if k.value == str(step))
            else:
                node = node.value[step]
        return node.start_mark.line + 1
    except (StopIteration, IndexError, AttributeError, TypeError):
        return None


def _load(text: str, path=None) -> tuple[Any, Any]:
    try:
        data = yaml.safe_load(text)
        node = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ParseError(f"invalid YAML: {getattr(exc, 'problem', exc)}", line, path) from None
    if not isinstance(data, dict):
        raise ParseError("document must be a mapping", 1, path)
    return data, node


def _poset_from_fields(data: dict, node, path, prefix=()) -> Poset:
    elements = data.get("elements")
    covers = data.get("covers", []) or []
    if not isinstance(elements, list):
        raise ParseError("'elements' must be a list of labels", _line_of(node, *prefix, "elements"), path)
    if not isinstance(covers, list):
        raise ParseError("'covers' must be a list of [lower, upper] pairs", _line_of(node, *prefix, "covers"), path)
    labels = [str(e) for e in elements]
    known = set(labels)
    pairs = []
    for k, c in enumerate(covers):
        line = _line_of(node, *prefix, "covers", k)
        if not isinstance(c, (list, tuple)) or len(c) != 2:
            raise ParseError(f"cover #{k} must be a [lower, upper] pair, got {c!r}", line, path)
        a, b = str(c[0]), str(c[1])
        for end in (a, b):
            if end not in known:
                raise ParseError(f"cover #{k} refers to unknown label {end!r}", line, path)
        pairs.append((a, b))
    try:
        return build_poset(labels, pairs)
    except DuplicateLabel as exc:
        raise ParseError(str(exc), _line_of(node, *prefix, "elements"), path) from None
    except CycleDetected as exc:
        raise ParseError(str(exc), _line_of(node, *prefix, "covers"), path) from None
    except UnknownLabel as exc:
        raise ParseError(str(exc), _line_of(node, *prefix, "covers"), path) from None


def parse_lattice(text: str, path=None) -> Lattice:
    """Build a lattice (or semilattice / plain poset, see ``kind``) from document text."""
    data, node = _load(text, path)
    name = str(data.get("name", "") or "")
    has_explicit = "elements" in data or "covers" in data
    std = data.get("standard")
    if has_explicit and std is not None:
        raise ParseError("give either elements/covers or standard, not both", _line_of(node, "standard"), path)
    if std is not None:
        if not isinstance(std, dict) or "kind" not in std:
            raise ParseError("'standard' needs a 'kind'", _line_of(node, "standard"), path)
        kind = str(std["kind"]).lower()
        param = std.get("parameter")
        if kind in ("downset", "downset-of"):
            if not isinstance(param, dict):
                raise ParseError("downset standard needs a poset {elements, covers} parameter",
                                 _line_of(node, "standard"), path)
            param = _poset_from_fields(param, node, path, prefix=("standard", "parameter"))
        try:
            lat = make_standard(kind, param)
        except LatticeError as exc:
            raise ParseError(str(exc), _line_of(node, "standard"), path) from None
        return replace(lat, name=name) if name else lat
    if not has_explicit:
        raise ParseError("document needs either elements/covers or standard", 1, path)
    p = _poset_from_fields(data, node, path)
    return classify(p, name=name)


def parse_lattice_file(path) -> Lattice:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", None, str(path)) from None
    return parse_lattice(text, str(path))


def _poset_fields(p: Poset) -> dict:
    return {"elements": list(p.labels), "covers": [list(c) for c in p.cover_pairs()]}


def lattice_document(l: Lattice, explicit: bool = False) -> dict:
    doc: dict[str, Any] = {"name": l.name} if l.name else {}
    std = l.standard
    if not explicit and std is not None and std[0] in STANDARD_KINDS:
        kind, param = std
        if kind == "downset":
            param = _poset_fields(param)
        doc["standard"] = {"kind": kind, "parameter": param}
        return doc
    doc.update(_poset_fields(l.poset))
    return doc


def serialize_lattice(l: Lattice, explicit: bool = False) -> str:
    return yaml.safe_dump(lattice_document(l, explicit), sort_keys=False, allow_unicode=True)


# -- assignments ---------------------------------------------------------------------

def _number(v, where, node_line, path):
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise ParseError(f"{where}: expected a number, got {v!r}", node_line, path)
    if isinstance(v, str):
        try:
            v = Fraction(v.strip()) if "/" in v else float(v)
        except ValueError:
            raise ParseError(f"{where}: expected a number, got {v!r}", node_line, path) from None
    if isinstance(v, float) and not math.isfinite(v):
        raise ParseError(f"{where}: non-finite value", node_line, path)
    return v


def parse_assignment(text: str, path=None) -> dict:
    """Return ``{"values": {label: number}, "bottom": number | None, "prior": {atom: p} | None}``."""
    data, node = _load(text, path)
    out: dict[str, Any] = {"values": {}, "bottom": None, "prior": None}
    values = data.get("values", {}) or {}
    if not isinstance(values, dict):
        raise ParseError("'values' must be a mapping label -> number", _line_of(node, "values"), path)
    for k, v in values.items():
        out["values"][str(k)] = _number(v, f"values[{k}]", _line_of(node, "values", k), path)
    if data.get("bottom") is not None:
        out["bottom"] = _number(data["bottom"], "bottom", _line_of(node, "bottom"), path)
    prior = data.get("prior")
    if prior is not None:
        if not isinstance(prior, dict) or not prior:
            raise ParseError("'prior' must be a mapping atom -> probability", _line_of(node, "prior"), path)
        pr = {}
        for k, v in prior.items():
            p = float(_number(v, f"prior[{k}]", _line_of(node, "prior", k), path))
            if p < 0:
                raise ParseError(f"prior[{k}] is negative", _line_of(node, "prior", k), path)
            pr[str(k)] = p
        if abs(math.fsum(pr.values()) - 1.0) > 1e-12:
            raise ParseError(f"prior sums to {math.fsum(pr.values())!r}, not 1", _line_of(node, "prior"), path)
        out["prior"] = pr
    return out


def parse_assignment_file(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", None, str(path)) from None
    return parse_assignment(text, str(path))


# -- DOT ------------------------------------------------------------------------------

def format_number(v) -> str:
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return format(float(v), ".12g")


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def export_dot(l: Lattice, q=None) -> str:
    """Hasse diagram in DOT, bottom to top, nodes in index order."""
    lines = [f'digraph "{_dot_escape(l.name or "lattice")}" {{', "  rankdir=BT;", "  node [shape=plaintext];"]
    for i, lab in enumerate(l.labels):
        text = lab if q is None else f"{lab}={format_number(q.values[i])}"
        lines.append(f'  n{i} [label="{_dot_escape(text)}"];')
    for a, b in sorted(l.poset.covers):
        lines.append(f"  n{a} -> n{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"
