"""gapflow - construct, evaluate and analyze Hadamard gap series in
weighted growth spaces of harmonic functions on the unit disk."""
from typing import Any
from typing import Dict
from typing import Optional

FREQUENCY_CAP_BITS = 62
FREQUENCY_CAP = 2**FREQUENCY_CAP_BITS  # largest admissible frequency

SCHEMA = "gapflow/1"

DEFAULT_SEED = 20240229

QUADRATURE_RTOL = 1e-9
QUADRATURE_MAX_PANELS = 2**16

KWW_GRID_POINTS = 2**14
CIRCLE_SAMPLES_CAP = 2**22

# trend thresholds for gamma profiles (slope per unit of log N)
BOUNDED_SLOPE = 0.02
GROWING_SLOPE = 0.1

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_CAPACITY = 4


class GapflowError(Exception):
    """Base class for gapflow errors."""

    exit_code = EXIT_USAGE


class DomainError(GapflowError, ValueError):
    """Argument outside the domain of a weight or series operation."""


class GapValidationError(GapflowError, ValueError):
    """Frequencies do not form a valid gap sequence."""

    def __init__(self, message: str, index: Optional[int] = None) -> None:
        super().__init__(message)
        self.index = index


class ConfigurationError(GapflowError, ValueError):
    """Bad weight spec, run config or split multiplier."""


class AliasingError(GapflowError, ValueError):
    exit_code = EXIT_NUMERIC


class UndefinedWitnessError(GapflowError, ValueError):
    exit_code = EXIT_NUMERIC


class NumericError(GapflowError, ArithmeticError):
    """Quadrature non-convergence or overflow, with diagnostics attached."""

    exit_code = EXIT_NUMERIC

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class CapacityError(GapflowError, OverflowError):
    """Frequency beyond the 2**62 cap; use surrogate-phase mode instead."""

    exit_code = EXIT_CAPACITY
