"""Exception hierarchy.

Every failure raised by the library derives from :class:`FuelCleanError`, so
callers (and the CLI) can catch one type. Precondition failures also subclass
``ValueError`` and I/O failures subclass ``OSError``.
"""

from __future__ import annotations


class FuelCleanError(Exception):
    """Base class for all library errors."""


class DataError(FuelCleanError, ValueError):
    """Input data violates an operation precondition."""


class ConfigError(FuelCleanError, ValueError):
    """Invalid pipeline configuration."""


# -- ingestion / persistence -------------------------------------------------


class MissingFile(FuelCleanError, FileNotFoundError):
    pass


class IoFailure(FuelCleanError, OSError):
    pass


class MalformedRow(DataError):
    def __init__(self, line: int, detail: str = "") -> None:
        self.line = line
        msg = f"malformed row at line {line}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class NonMonotoneIndex(DataError):
    def __init__(self, line: int, index: int | None = None) -> None:
        self.line = line
        self.index = index
        super().__init__(f"index {index} at line {line} is not strictly increasing")


# -- shared preconditions ----------------------------------------------------


class TooShort(DataError):
    pass


class EmptyInput(DataError):
    pass


class NotFilled(DataError):
    """Missing samples remain where a fully repaired trace is required."""


# -- preprocess --------------------------------------------------------------


class UnboundedGap(DataError):
    """A missing run touches a trace boundary and cannot be interpolated."""


class InsufficientData(DataError):
    pass


# -- clustering --------------------------------------------------------------


class DegenerateBandwidth(DataError):
    pass


class SingularDegree(DataError):
    pass


# -- wavelet -----------------------------------------------------------------


class BadLevels(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class EmptyDetails(DataError):
    pass


# -- medianfilter / peaks ----------------------------------------------------


class EvenWindow(DataError):
    pass


class IndexOutOfRange(DataError, IndexError):
    pass


# -- evaluation / synth ------------------------------------------------------


class DegenerateTruth(DataError):
    pass


class NonPositiveTruth(DataError):
    pass


class InfeasibleSchedule(DataError):
    pass
