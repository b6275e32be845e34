"""Exception hierarchy. The CLI maps these onto exit codes."""


class QdsimError(Exception):
    pass


class DomainError(QdsimError, ValueError):
    """Argument outside the allowed physical domain."""


class ConfigError(QdsimError, ValueError):
    pass


class SchemaError(QdsimError, ValueError):
    """Malformed dataset file or report."""


class NumericError(QdsimError, ArithmeticError):
    pass


class DegenerateLinesError(NumericError):
    pass


class StepSizeError(NumericError):
    """Density-matrix invariants drifted during integration; dt is too large."""


class OverlapError(NumericError):
    pass


class SingularJacobianError(NumericError):
    pass


class NoOscillationError(NumericError):
    pass


class CoverageError(NumericError):
    pass


class GridError(NumericError):
    pass


class RankError(NumericError):
    """Linear design matrix is rank deficient."""
