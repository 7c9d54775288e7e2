"""Exception types shared across the package."""


class ParanlsError(Exception):
    """Base class for all package errors."""


class DimensionError(ParanlsError, ValueError):
    """Array sizes or truncations do not match."""


class RangeError(ParanlsError, ValueError):
    """An index or parameter is outside its admissible range."""


class StructureError(ParanlsError, ValueError):
    """A structural invariant (evenness, realification) is violated beyond tolerance."""


class HypothesisError(ParanlsError, ValueError):
    """The nonlinearity violates the standing structural hypothesis."""


class ConfigError(ParanlsError, ValueError):
    """Invalid configuration (cut-off parameters, experiment files)."""


class CapabilityError(ParanlsError, ValueError):
    """A symbolic operation exceeds what the representation supports."""


class DegeneracyError(ParanlsError, ValueError):
    """Small-data regime violated: a pointwise quantity left its admissible range."""


class PreconditionError(ParanlsError, ValueError):
    """An operation-specific precondition failed (e.g. nonzero mean input)."""


class MeasurementError(ParanlsError, RuntimeError):
    """A fit or measurement could not be carried out (degenerate range, empty support)."""


class SmallDivisorError(ParanlsError, RuntimeError):
    """A divisor fell below the safety floor; carries the offending tuple."""

    def __init__(self, message, tuple_=None, value=None):
        super().__init__(message)
        self.tuple_ = tuple_
        self.value = value


class EnumerationBudgetError(ParanlsError, RuntimeError):
    """A scan would exceed the tuple-enumeration budget."""


class StepFailureError(ParanlsError, RuntimeError):
    """A time step produced non-finite values."""
