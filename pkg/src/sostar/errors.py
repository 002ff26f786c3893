"""Exception hierarchy.

Every error carries a stable ``code`` string so the CLI can emit
machine-readable failures.
"""


class SoStarError(Exception):
    code = "error"


class NonFinite(SoStarError, ValueError):
    code = "non_finite"


class NotAntisymmetric(SoStarError, ValueError):
    code = "not_antisymmetric"


class DomainViolation(SoStarError, ValueError):
    code = "domain_violation"


class ConvergenceFailure(SoStarError, ArithmeticError):
    code = "convergence_failure"


class IndexOutOfRange(SoStarError, IndexError):
    code = "index_out_of_range"


class SingularDenominator(SoStarError, ArithmeticError):
    code = "singular_denominator"


class SingularA(SoStarError, ArithmeticError):
    code = "singular_a"


class SingularMatrix(SoStarError, ArithmeticError):
    code = "singular_matrix"


class RankNotTwo(SoStarError, ValueError):
    code = "rank_not_two"


class ZeroMatrix(SoStarError, ValueError):
    code = "zero_matrix"


class ZeroRank(SoStarError, ValueError):
    code = "zero_rank"


class CapacityExceeded(SoStarError, MemoryError):
    code = "capacity_exceeded"


class CutoffExceeded(SoStarError, ValueError):
    code = "cutoff_exceeded"


class NonUnitDeterminant(SoStarError, ValueError):
    code = "non_unit_determinant"


class IncompatibleShape(SoStarError, ValueError):
    code = "incompatible_shape"


class UnsupportedObservable(SoStarError, TypeError):
    code = "unsupported_observable"


class ParseError(SoStarError, ValueError):
    code = "parse_error"
