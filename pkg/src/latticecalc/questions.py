"""Questions as downsets of statements, and their entropy-ratio relevance.

A statement is a nonempty set of atoms (their disjunction), stored as a
bitmask over the atoms. A question is a downset of statements under
implication (subset), stored as a bitset whose bit ``s`` is set when the
statement with mask ``s`` answers it. Bit 0 is never used: the absurd
statement is left out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

from .errors import (
    DegeneratePrior,
    InvalidDistribution,
    InvalidPartition,
    NotReducible,
    SpaceMismatch,
    TooManyAtoms,
    UnknownStatement,
)
from .lattice import Lattice, downset_lattice
from .poset import Poset, build_poset, downsets, iter_bits

MAX_ATOMS = 4
OR = "∨"

StatementRef = Union[int, str, Iterable[str]]


def _submasks(s: int) -> Iterator[int]:
    sub = s
    while sub:
        yield sub
        sub = (sub - 1) & s


def shannon_entropy(probs: Iterable[float]) -> float:
    """Entropy in bits with ``0 log 0 = 0``."""
    h = 0.0
    for p in probs:
        if p > 0:
            h -= p * math.log2(p)
    return h


class StatementSpace:
    """Atoms with a prior; statements are the nonempty joins of atoms."""

    def __init__(self, atoms: Sequence[str], prior: Mapping[str, float] | Sequence[float] | None = None):
        atoms = tuple(str(a) for a in atoms)
        if len(set(atoms)) != len(atoms):
            raise InvalidDistribution(f"atom names must be unique: {atoms}")
        if not atoms:
            raise InvalidDistribution("a statement space needs at least one atom")
        if prior is None:
            probs = [1.0 / len(atoms)] * len(atoms)
        elif isinstance(prior, Mapping):
            unknown = set(map(str, prior)) - set(atoms)
            if unknown:
                raise InvalidDistribution(f"prior mentions unknown atoms {sorted(unknown)}")
            probs = [float(prior.get(a, 0.0)) for a in atoms]
        else:
            probs = [float(p) for p in prior]
            if len(probs) != len(atoms):
                raise InvalidDistribution(f"{len(probs)} prior entries for {len(atoms)} atoms")
        if any(p < 0 or not math.isfinite(p) for p in probs):
            raise InvalidDistribution(f"prior entries must be finite and non-negative: {probs}")
        if abs(math.fsum(probs) - 1.0) > 1e-12:
            raise InvalidDistribution(f"prior sums to {math.fsum(probs)!r}, not 1")
        self.atoms = atoms
        self.prior = tuple(probs)
        self._atom_index = {a: i for i, a in enumerate(atoms)}

    @classmethod
    def uniform(cls, atoms: Sequence[str]) -> "StatementSpace":
        return cls(atoms)

    def __repr__(self) -> str:
        return f"StatementSpace({dict(zip(self.atoms, self.prior))!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, StatementSpace) and self.atoms == other.atoms and self.prior == other.prior

    def __hash__(self) -> int:
        return hash((self.atoms, self.prior))

    @property
    def n(self) -> int:
        return len(self.atoms)

    @property
    def truism(self) -> int:
        return (1 << self.n) - 1

    @property
    def statements(self) -> list[int]:
        return sorted(range(1, 1 << self.n), key=lambda m: (m.bit_count(), m))

    def atom_mask(self, atom: str) -> int:
        try:
            return 1 << self._atom_index[atom]
        except KeyError:
            raise UnknownStatement(f"unknown atom {atom!r}") from None

    def statement(self, ref: StatementRef) -> int:
        """Mask of a statement given as a mask, ``"b∨c∨d"`` / ``"b+c+d"`` / ``"bcd"`` text, or atom names."""
        if isinstance(ref, (int, np.integer)) and not isinstance(ref, bool):
            if 0 < ref <= self.truism:
                return int(ref)
            raise UnknownStatement(f"statement mask {ref} out of range")
        if isinstance(ref, str):
            parts = [p.strip() for p in ref.replace("+", OR).split(OR)]
        else:
            parts = [str(p) for p in ref]
        if not parts or any(not p for p in parts):
            raise UnknownStatement(f"malformed statement {ref!r}")
        mask = 0
        for p in parts:
            if p not in self._atom_index and len(p) > 1 and all(ch in self._atom_index for ch in p):
                # "bcd" shorthand for single-character atom names
                for ch in p:
                    mask |= self.atom_mask(ch)
            else:
                mask |= self.atom_mask(p)
        return mask

    def statement_label(self, mask: int) -> str:
        return OR.join(self.atoms[i] for i in iter_bits(mask))

    def prob(self, mask: int) -> float:
        """Probability of a statement: the sum of its atoms' priors."""
        return math.fsum(self.prior[i] for i in iter_bits(mask))

    @cached_property
    def statement_poset(self) -> Poset:
        stmts = self.statements
        labels = [self.statement_label(s) for s in stmts]
        pos = {s: k for k, s in enumerate(stmts)}
        covers = [(pos[s], pos[s | 1 << i]) for s in stmts for i in range(self.n) if not s >> i & 1]
        return build_poset(labels, covers)

    def central_issue(self) -> "Question":
        return downset_close(self, [1 << i for i in range(self.n)])


@dataclass(frozen=True)
class Question:
    space: StatementSpace
    members: int

    def __contains__(self, ref) -> bool:
        return bool(self.members >> self.space.statement(ref) & 1)

    def __len__(self) -> int:
        return self.members.bit_count()

    def __le__(self, other: "Question") -> bool:
        _same_space(self, other)
        return self.members & ~other.members == 0

    def __lt__(self, other: "Question") -> bool:
        return self <= other and self.members != other.members

    def __or__(self, other: "Question") -> "Question":
        return question_join(self, other)

    def __and__(self, other: "Question") -> "Question":
        return question_meet(self, other)

    def statements(self) -> list[int]:
        return sorted(iter_bits(self.members), key=lambda m: (m.bit_count(), m))

    def statement_labels(self) -> set[str]:
        return {self.space.statement_label(s) for s in iter_bits(self.members)}

    def maximal(self) -> list[int]:
        ms = list(iter_bits(self.members))
        return sorted((s for s in ms if not any(t != s and s & ~t == 0 for t in ms)),
                      key=lambda m: m & -m)

    def is_downset(self) -> bool:
        return all(self.members >> sub & 1 for s in iter_bits(self.members) for sub in _submasks(s))

    @property
    def name(self) -> str:
        """``A∨BCD`` style name built from the maximal statements; the empty question is ``0``."""
        ms = self.maximal()
        if not ms:
            return "0"
        return OR.join("".join(self.space.atoms[i].upper() for i in iter_bits(s)) for s in ms)

    def __str__(self) -> str:
        return "{" + ", ".join(self.space.statement_label(s) for s in self.statements()) + "}"


def _same_space(q1: Question, q2: Question) -> None:
    if q1.space != q2.space:
        raise SpaceMismatch("questions belong to different statement spaces")


def downset_close(space: StatementSpace, generators: Iterable[StatementRef]) -> Question:
    """Smallest question containing ``generators``: every statement implying one of them."""
    members = 0
    for g in generators:
        for sub in _submasks(space.statement(g)):
            members |= 1 << sub
    return Question(space, members)


def parse_question(space: StatementSpace, text: str) -> Question:
    """Generators separated by ``|`` or ``,``, e.g. ``"a | b∨c∨d"``."""
    gens = [g.strip() for g in text.replace(",", "|").split("|") if g.strip()]
    if not gens:
        raise UnknownStatement(f"no statements in question {text!r}")
    return downset_close(space, gens)


def question_join(q1: Question, q2: Question) -> Question:
    _same_space(q1, q2)
    return Question(q1.space, q1.members | q2.members)


def question_meet(q1: Question, q2: Question) -> Question:
    _same_space(q1, q2)
    return Question(q1.space, q1.members & q2.members)


def _check_size(space: StatementSpace) -> None:
    if space.n > MAX_ATOMS:
        raise TooManyAtoms(f"question enumeration is limited to {MAX_ATOMS} atoms, got {space.n}")


def enumerate_questions(space: StatementSpace) -> list[Question]:
    """Every downset of the statement poset, the empty question included."""
    _check_size(space)
    p = space.statement_poset
    masks = space.statements
    out = []
    for d in downsets(p):
        members = 0
        for k in iter_bits(d):
            members |= 1 << masks[k]
        out.append(Question(space, members))
    return out


def question_lattice(space: StatementSpace) -> tuple[Lattice, list[Question]]:
    """The question lattice and the question behind each of its elements (by index)."""
    _check_size(space)
    lat = downset_lattice(space.statement_poset)
    masks = space.statements
    label_to_mask = {space.statement_label(m): m for m in masks}
    qs = []
    for s in lat.sets:
        members = 0
        for lab in s:
            members |= 1 << label_to_mask[lab]
        qs.append(Question(space, members))
    return lat, qs


# -- partitions and entropy -------------------------------------------------------------

def is_partition_question(space: StatementSpace, q: Question) -> tuple[bool, tuple[tuple[str, ...], ...]]:
    """Whether the maximal answers of ``q`` partition the atoms, and those blocks."""
    if q.space != space:
        raise SpaceMismatch("question belongs to another statement space")
    ms = q.maximal()
    blocks = tuple(tuple(space.atoms[i] for i in iter_bits(s)) for s in ms)
    union = 0
    for s in ms:
        if union & s:
            return False, blocks
        union |= s
    return bool(ms) and union == space.truism, blocks


def _block_masks(space: StatementSpace, blocks: Iterable) -> list[int]:
    masks = []
    for b in blocks:
        masks.append(space.statement(int(b) if isinstance(b, np.integer) else b))
    return masks


def entropy(space: StatementSpace, blocks: Iterable) -> float:
    """Shannon entropy (bits) of a partition of the atoms.

    Blocks may be masks, statement text (``"b∨c∨d"``), ``"bcd"`` shorthand or
    atom-name sequences.
    """
    masks = _block_masks(space, blocks)
    union = 0
    for m in masks:
        if union & m:
            raise InvalidPartition(f"blocks overlap at {space.statement_label(union & m)}")
        union |= m
    if union != space.truism:
        raise InvalidPartition(f"blocks miss atoms {space.statement_label(space.truism & ~union)}")
    return shannon_entropy(space.prob(m) for m in masks)


def set_partitions(items: Sequence) -> Iterator[list[list]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for k in range(len(part)):
            yield part[:k] + [[first] + part[k]] + part[k + 1:]


def partition_questions(space: StatementSpace) -> list[Question]:
    _check_size(space)
    out = []
    for part in set_partitions(list(range(space.n))):
        out.append(downset_close(space, [sum(1 << i for i in block) for block in part]))
    return out


def _partition_entropy(space: StatementSpace, q: Question) -> float:
    return shannon_entropy(space.prob(m) for m in q.maximal())


# -- relevance --------------------------------------------------------------------

def _context_entropy(space: StatementSpace, context: Question | None, tol: float) -> float:
    if context is None:
        context = space.central_issue()
    ok, _ = is_partition_question(space, context)
    if not ok:
        raise NotReducible(f"context {context.name} is not a partition question")
    h = _partition_entropy(space, context)
    if h <= tol:
        raise DegeneratePrior(f"context {context.name} has entropy {h!r}; relevance is undefined")
    return h


def generating_partitions(space: StatementSpace, q: Question) -> list[Question]:
    """The maximal partition questions contained in ``q``.

    Raises :class:`NotReducible` when their join falls short of ``q``.
    """
    inside = [p for p in partition_questions(space) if p <= q]
    maximal = [p for p in inside if not any(p < r for r in inside)]
    union = 0
    for p in maximal:
        union |= p.members
    if union != q.members or not maximal:
        raise NotReducible(f"question {q.name} is not a join of partition questions")
    return sorted(maximal, key=lambda p: p.members)


def relevance_of_join(space: StatementSpace, family: Sequence[Question], context: Question | None = None,
                      tol: float = 1e-12) -> float:
    """Relevance of the join of partition questions, by inclusion-exclusion over their meets."""
    h_ctx = _context_entropy(space, context, tol)
    total = 0.0
    for r in range(1, len(family) + 1):
        sign = 1.0 if r % 2 else -1.0
        for combo in combinations(family, r):
            members = combo[0].members
            for f in combo[1:]:
                members &= f.members
            m = Question(space, members)
            ok, _ = is_partition_question(space, m)
            if not ok:
                raise NotReducible(f"meet {m.name} of partition questions is not a partition question")
            total += sign * _partition_entropy(space, m)
    return total / h_ctx


def relevance(space: StatementSpace, q: Question, context: Question | None = None, tol: float = 1e-12) -> float:
    """Degree to which ``q`` resolves ``context`` (default: the central issue).

    Partition questions get the ratio ``H(q) / H(context)``; any other question
    is decomposed into its maximal partition sub-questions and evaluated with
    the sum rule.
    """
    if q.space != space:
        raise SpaceMismatch("question belongs to another statement space")
    if not q.members:
        raise NotReducible("the empty question has no relevance")
    ok, _ = is_partition_question(space, q)
    if ok:
        return _partition_entropy(space, q) / _context_entropy(space, context, tol)
    return relevance_of_join(space, generating_partitions(space, q), context, tol)


def relevance_sum_rule(space: StatementSpace, q1: Question, q2: Question, context: Question | None = None,
                       tol: float = 1e-12) -> float:
    """``b(q1, c) + b(q2, c) - b(q1 ^ q2, c)``, the sum-rule value for ``b(q1 v q2, c)``."""
    return (relevance(space, q1, context, tol) + relevance(space, q2, context, tol)
            - relevance(space, q1 & q2, context, tol))


# -- mutual information ---------------------------------------------------------------

def _joint_array(joint) -> np.ndarray:
    if isinstance(joint, Mapping):
        xs = sorted({k[0] for k in joint}, key=str)
        ys = sorted({k[1] for k in joint}, key=str)
        arr = np.zeros((len(xs), len(ys)))
        xi = {x: i for i, x in enumerate(xs)}
        yi = {y: i for i, y in enumerate(ys)}
        for (x, y), p in joint.items():
            arr[xi[x], yi[y]] += p
        return arr
    arr = np.asarray(joint, dtype=float)
    if arr.ndim != 2:
        raise InvalidDistribution(f"joint distribution must be two-dimensional, got shape {arr.shape}")
    return arr


def mutual_information(joint) -> float:
    """``H(X) + H(Y) - H(X, Y)`` in bits for a joint given as a 2-D array or ``{(x, y): p}``."""
    P = _joint_array(joint)
    if not np.all(np.isfinite(P)) or np.any(P < 0):
        raise InvalidDistribution("joint probabilities must be finite and non-negative")
    if abs(P.sum() - 1.0) > 1e-9:
        raise InvalidDistribution(f"joint sums to {P.sum()!r}, not 1")
    hx = shannon_entropy(P.sum(axis=1))
    hy = shannon_entropy(P.sum(axis=0))
    hxy = shannon_entropy(P.ravel())
    return hx + hy - hxy
