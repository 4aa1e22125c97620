"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, data-shaped errors
(SchemaError, DataError) -> 3, numerical errors (SingularDesignError,
DegenerateSampleError) -> 4.
"""


class SamplabError(Exception):
    """Base class for all package errors."""


class ConfigError(SamplabError):
    """Invalid configuration value or inconsistent parameter combination."""


class SchemaError(SamplabError):
    """Malformed input file; message names the offending row/field."""


class DataError(SamplabError):
    """Well-formed input that violates a semantic precondition."""


class DesignError(ConfigError):
    """Inclusion design produces probabilities outside (0, 1]."""


class GeometryError(DataError):
    """Degenerate or invalid polygon input."""


class ConstraintError(ConfigError):
    """Parameter combination violates a hard platform constraint."""


class ClockError(DataError):
    """Snowflake generator observed a clock regression."""


class ExhaustionError(DataError):
    """Identifier space exhausted (unreachable at desk scale)."""


class InsufficientUsersError(DataError):
    """Requested a larger subsample than available; carries the count."""

    def __init__(self, requested, available):
        super().__init__(
            f"requested {requested} users but only {available} available"
        )
        self.requested = requested
        self.available = available


class SingularDesignError(SamplabError):
    """Rank-deficient regression design; names the collinear columns."""

    def __init__(self, columns):
        super().__init__(f"design matrix is rank deficient; collinear columns: {columns}")
        self.columns = list(columns)


class UnpredictableUnitError(DataError):
    """All cells of a geographic unit were dropped; nothing to predict."""


class DegenerateSampleError(SamplabError):
    """Statistical test input too small or with zero variance."""
