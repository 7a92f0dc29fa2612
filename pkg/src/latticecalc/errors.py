"""Exception hierarchy shared by every layer of the package."""


class LatticeError(Exception):
    """Base class for all errors raised by latticecalc."""


class DuplicateLabel(LatticeError):
    pass


class UnknownLabel(LatticeError):
    pass


class UnknownElement(LatticeError):
    pass


class CycleDetected(LatticeError):
    """The cover relation contains a cycle, so antisymmetry cannot hold."""


class BoundMissing(LatticeError):
    """A join or meet was requested for a pair that has none (semilattice case)."""


class NotALattice(LatticeError):
    pass


class NotDistributive(LatticeError):
    pass


class ParameterOutOfRange(LatticeError):
    pass


class NonFiniteInput(LatticeError, ValueError):
    pass


class MissingSeed(LatticeError):
    pass


class Inconsistent(LatticeError):
    """Propagated values violate the sum rule on some pair.

    ``witness`` holds the offending pair of element indices and ``residual``
    the signed residual ``q(x v y) - q(x) - q(y) + q(x ^ y)``.
    """

    def __init__(self, witness, residual, labels=None):
        self.witness = tuple(witness)
        self.residual = residual
        self.labels = tuple(labels) if labels is not None else None
        shown = self.labels if self.labels is not None else self.witness
        super().__init__(f"sum rule violated at pair {shown} (residual {residual!r})")


class DomainError(LatticeError, ValueError):
    pass


class ShapeMismatch(LatticeError):
    pass


class NonPositiveValuation(LatticeError):
    pass


class InconsistentValuation(LatticeError):
    pass


class ZeroDenominator(LatticeError, ZeroDivisionError):
    pass


class UnknownStatement(LatticeError):
    pass


class SpaceMismatch(LatticeError):
    pass


class TooManyAtoms(LatticeError):
    pass


class InvalidPartition(LatticeError):
    pass


class DegeneratePrior(LatticeError):
    pass


class NotReducible(LatticeError):
    """A question cannot be written as a join of partition questions."""


class InvalidDistribution(LatticeError, ValueError):
    pass


class ParseError(LatticeError):
    def __init__(self, reason, line=None, path=None):
        self.reason = reason
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {reason}" if where else reason)


class UsageError(LatticeError):
    pass
