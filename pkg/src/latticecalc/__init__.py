"""Finite posets and lattices, consistent quantification, bi-quantification and question relevance."""

from .bivaluation import BiQuantification, bayes, from_valuation
from .errors import LatticeError
from .io import export_dot, parse_assignment_file, parse_lattice, parse_lattice_file, serialize_lattice
from .lattice import (
    Lattice,
    boolean_lattice,
    chain_lattice,
    check_laws,
    classify,
    divisor_lattice,
    downset_lattice,
    join_irreducibles,
    m3,
    make_standard,
    n5,
    product,
)
from .poset import Poset, build_poset, downsets, mobius, zeta
from .quantify import Quantification, ScaleFunction, check_consistency, fidelity_class, propagate, regraduate
from .questions import StatementSpace, mutual_information, parse_question, relevance

__version__ = "0.1.0"

__all__ = [
    "BiQuantification", "Lattice", "LatticeError", "Poset", "Quantification", "ScaleFunction",
    "StatementSpace", "bayes", "boolean_lattice", "build_poset", "chain_lattice", "check_consistency",
    "check_laws", "classify", "divisor_lattice", "downset_lattice", "downsets", "export_dot",
    "fidelity_class", "from_valuation", "join_irreducibles", "m3", "make_standard", "mobius",
    "mutual_information", "n5", "parse_assignment_file", "parse_lattice", "parse_lattice_file",
    "parse_question", "product", "propagate", "regraduate", "relevance", "serialize_lattice", "zeta",
]
