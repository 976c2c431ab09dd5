"""Exception hierarchy.

Input problems derive from :class:`GraphonError` (a ``ValueError``); failures
of a numerical precondition (no simple spectrum, insufficient coverage,
degenerate degree) derive from :class:`PreconditionFailure` and carry a
machine-readable ``reason`` code used by the CLI.
"""


class GraphonError(ValueError):
    """Invalid input to a graphon operation."""


class BlockLimitError(GraphonError):
    """Block count or motif size above a configured enumeration ceiling."""


class IncompatibleRefinementError(GraphonError):
    """Operands do not share the required block structure."""


class PreconditionFailure(ArithmeticError):
    reason = "precondition"

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class MultiplicityError(PreconditionFailure):
    reason = "multiplicity"


class CoverageError(PreconditionFailure):
    reason = "coverage"


class DegenerateDegreeError(PreconditionFailure):
    reason = "degenerate_degree"
