"""Exception hierarchy.

Three broad families, mirrored by the CLI exit codes: invalid input
(caller handed us something malformed), mathematical domain failures
(well-formed input the algorithms legitimately reject), and internal
precision failures (budget exhausted -- a bug or an unmet hypothesis,
never silently absorbed).
"""


class HyperzetaError(Exception):
    """Base class for all package errors."""


class InvalidInput(HyperzetaError):
    """Malformed or out-of-scope input (p=2, composite p, bad schema)."""


class DomainError(HyperzetaError):
    """Mathematically invalid request (non-integral evaluation point, ...)."""


class NonUnit(DomainError):
    """Inversion of an element with positive valuation."""


class SingularCurve(DomainError):
    """Input curve polynomial is not squarefree."""


class BadBaseCurve(DomainError):
    """Default base curve of the family is singular (should not happen)."""


class SingularLeadingCoefficient(DomainError):
    """A_0 or B_0 of a differential system is not invertible."""


class ValuationViolation(DomainError):
    """A coefficient valuation bound required by the system is violated."""


class DegreeOverflow(DomainError):
    """A degree bound guaranteed by the construction failed (internal bug)."""


class BudgetExceeded(DomainError):
    """Point-count enumeration would exceed the configured budget."""


class InternalPrecisionFailure(HyperzetaError):
    """Precision bookkeeping failure; results would be unreliable."""


class GuardExhausted(InternalPrecisionFailure):
    """Guard digits for exact divisions were exhausted."""


class PrecisionExhausted(InternalPrecisionFailure):
    """Cumulative precision loss exceeded the working budget."""


class LinearSolveFailure(InternalPrecisionFailure):
    """Exact linear solve failed (working precision too small)."""


class LiftOutOfWindow(InternalPrecisionFailure):
    """Integer lift fell outside its proven uniqueness window."""


class FunctionalEquationViolation(InternalPrecisionFailure):
    """Recovered zeta numerator violates the functional equation."""


class NegativeCount(InternalPrecisionFailure):
    """Derived point count is negative (invalid numerator)."""
