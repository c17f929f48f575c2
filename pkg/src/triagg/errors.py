"""Exception hierarchy.

Every error raised deliberately by the package derives from ``TriaggError``
and carries a short ``category`` string used by the CLI for its
machine-readable error output.
"""


class TriaggError(Exception):
    category = "error"


class DimensionError(TriaggError, ValueError):
    category = "dimension"


class DegenerateError(TriaggError, ValueError):
    """Base-case size for which the aggregation construction is undefined."""

    category = "degenerate"


class SingularMatrixError(TriaggError, ValueError):
    category = "singular"


class NotKinError(TriaggError, ValueError):
    category = "not-kin"


class BudgetExceeded(TriaggError, RuntimeError):
    """Exact expansion would accumulate more terms than allowed.

    Use randomized verification (``verify_random``) instead.
    """

    category = "budget"


class PrimeError(TriaggError, ValueError):
    category = "prime"


class FormatError(TriaggError, ValueError):
    category = "format"


class SubstitutionError(TriaggError, ValueError):
    category = "substitution"


class VerificationFailed(TriaggError):
    category = "verification-failed"
