"""Exception types. Every error carries a stable ``name`` used by the CLI."""

from __future__ import annotations


class TimesymError(ValueError):
    def __init__(self, message: str = "", **details):
        super().__init__(message)
        self.details = details

    @property
    def name(self) -> str:
        return type(self).__name__


# matrix kernel
class NonSquare(TimesymError): ...
class NotHermitian(TimesymError): ...
class ConvergenceFailure(TimesymError): ...
class NotPSD(TimesymError): ...
class DimensionMismatch(TimesymError): ...

# states
class NotNormalized(TimesymError): ...
class NotUnitVector(TimesymError): ...
class ZeroTrace(TimesymError): ...
class InvalidState(TimesymError): ...

# operations
class InvalidKraus(TimesymError): ...
class NotCP(TimesymError): ...
class NotTraceNonIncreasing(TimesymError): ...
class EmptyInstrument(TimesymError): ...
class InvalidInstrument(TimesymError): ...

# reversal
class NotTimeSymmetric(TimesymError): ...
class SupportMismatch(TimesymError): ...
class NotChannel(TimesymError): ...
class NotComplementary(TimesymError): ...

# symmetry
class MixedKinds(TimesymError): ...


class NotASymmetry(TimesymError):
    def __init__(self, message: str = "", stage: str = "", **details):
        super().__init__(message, stage=stage, **details)
        self.stage = stage


# tsqt
class NotOrthonormal(TimesymError): ...
class Incomplete(TimesymError): ...
class NotProjector(TimesymError): ...
class NotComplete(TimesymError): ...
class NotOrthogonal(TimesymError): ...
class NotPSDEffect(TimesymError): ...
class NotNormalizedPOVM(TimesymError): ...

# file formats
class ParseError(TimesymError): ...
class InvariantViolation(TimesymError): ...
