"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: configuration / parameter
problems exit 2, data-quality problems exit 3, numeric failures exit 4.
"""


class SpherealError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(SpherealError):
    """Invalid or inconsistent run configuration."""

    exit_code = 2


class ParameterError(ConfigError):
    """An operation received an out-of-contract argument."""


class DataError(SpherealError):
    """Input data is malformed, missing, or fails quality checks."""

    exit_code = 3


class DegeneratePointError(DataError):
    """A sample row cannot be projected onto the sphere."""

    def __init__(self, row_index: int, norm: float):
        self.row_index = int(row_index)
        self.norm = float(norm)
        super().__init__(
            f"row {row_index} has norm {norm:.3e} below 1e-12 and cannot be "
            "projected onto the unit sphere"
        )


class NumericError(SpherealError):
    """A numeric computation overflowed or produced non-finite values."""

    exit_code = 4
