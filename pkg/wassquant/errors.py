"""
Exception hierarchy for the wassquant package.

Every error carries the process exit code the CLI reports for it, so commands
can translate library failures without a lookup table.
"""


class WassquantError(Exception):
    """Base class for all wassquant errors."""

    exit_code: int = 1


class MeasureFormatError(WassquantError, ValueError):
    """A measure, codebook or sample file could not be parsed."""

    exit_code = 2


class ConfigError(WassquantError, ValueError):
    """An experiment config violates the versioned schema."""

    exit_code = 2


class DimensionMismatchError(WassquantError, ValueError):
    """Two objects that must share an ambient dimension do not."""

    exit_code = 3


class ParameterError(WassquantError, ValueError):
    """A numerical parameter is outside its admissible range."""

    exit_code = 4


class SolverError(WassquantError, RuntimeError):
    """The exact transport solver failed on valid input (internal fault)."""

    exit_code = 1


def check_dims(left: int, right: int, what: str = "points") -> None:
    """Raise DimensionMismatchError unless both dimensions agree.

    Args:
        left: Dimension of the first operand
        right: Dimension of the second operand
        what: Description used in the error message
    """
    if left != right:
        raise DimensionMismatchError(
            f"Dimension mismatch between {what}: {left} != {right}"
        )
