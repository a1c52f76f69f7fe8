"""Exception hierarchy.

Two families matter to callers: input problems (bad shapes, malformed
scenario files, points outside a domain) and numerical breakdowns (rank
inconsistencies, degenerate pencils, failed purity). The CLI maps them to
exit codes 2 and 3.
"""


class QuotspecError(Exception):
    """Base class for all package errors."""


class InputError(QuotspecError, ValueError):
    """Malformed or inconsistent input."""


class NotPSDError(InputError):
    """Matrix has an eigenvalue below the allowed negative tolerance."""


class NotCommutingError(InputError):
    """Tuple entries fail to commute within tolerance."""


class DomainError(InputError):
    """Operation requires a row contraction (or pure one) and did not get it."""


class SizeCapError(InputError):
    """Polynomial matrix too large for cofactor expansion."""


class OutsideDomainError(InputError):
    """Point lies outside the extension domain of the characteristic function."""


class NearlyDependentNodesError(InputError):
    """Kernel nodes span a numerically degenerate subspace."""


class NumericalBreakdown(QuotspecError, ArithmeticError):
    """A computation produced results that are internally inconsistent."""


class DegeneratePencilError(NumericalBreakdown):
    """Random linear combinations kept producing ambiguous eigenvalue clusters."""


class RankToleranceError(NumericalBreakdown):
    """Rank differences gave a negative homology dimension."""


class PurityError(NumericalBreakdown):
    """A tuple expected to be pure did not decay."""
