"""Domain types shared by every pipeline stage.

A :class:`Trace` stores its samples column-wise as two read-only numpy arrays.
Missing levels are NaN; a literal ``0.0`` is a real reading until
:func:`fuelclean.preprocess.zeros_to_missing` says otherwise.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DataError, NonMonotoneIndex

MISSING = float("nan")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Sample:
    index: int
    level: float | None  # None marks a missing reading

    @property
    def missing(self) -> bool:
        return self.level is None


@dataclass(frozen=True, eq=False)
class Trace:
    """Ordered fuel-level samples of one vehicle."""

    index: np.ndarray
    level: np.ndarray
    vehicle_id: str = ""

    def __post_init__(self) -> None:
        idx = np.asarray(self.index)
        lvl = np.asarray(self.level, dtype=float)
        if idx.ndim != 1 or lvl.ndim != 1 or idx.shape != lvl.shape:
            raise DataError("index and level must be 1-D arrays of equal length")
        if idx.size and not np.issubdtype(idx.dtype, np.integer):
            if not np.all(np.equal(np.mod(idx, 1), 0)):
                raise DataError("sample indices must be integers")
        idx = idx.astype(np.int64)
        if idx.size and idx[0] < 0:
            raise DataError("sample indices must be non-negative")
        bad = np.flatnonzero(np.diff(idx) <= 0)
        if bad.size:
            pos = int(bad[0]) + 1
            raise NonMonotoneIndex(line=pos, index=int(idx[pos]))
        if np.any(np.isinf(lvl)):
            raise DataError("levels must be finite or missing")
        object.__setattr__(self, "index", _frozen(idx))
        object.__setattr__(self, "level", _frozen(lvl))

    @classmethod
    def from_levels(cls, levels: Iterable[float | None], vehicle_id: str = "") -> Trace:
        """Trace with indices 0..n-1; ``None`` entries become missing."""
        lvl = np.array([MISSING if v is None else v for v in levels], dtype=float)
        return cls(np.arange(lvl.size), lvl, vehicle_id)

    @classmethod
    def from_samples(cls, samples: Iterable[Sample], vehicle_id: str = "") -> Trace:
        samples = list(samples)
        idx = np.array([s.index for s in samples], dtype=np.int64)
        lvl = np.array([MISSING if s.level is None else s.level for s in samples], dtype=float)
        return cls(idx, lvl, vehicle_id)

    def with_levels(self, levels: np.ndarray) -> Trace:
        return Trace(self.index, levels, self.vehicle_id)

    def __len__(self) -> int:
        return int(self.index.size)

    def __iter__(self) -> Iterator[Sample]:
        return iter(self.samples)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trace):
            return NotImplemented
        return (
            self.vehicle_id == other.vehicle_id
            and np.array_equal(self.index, other.index)
            and np.array_equal(self.level, other.level, equal_nan=True)
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def samples(self) -> tuple[Sample, ...]:
        return tuple(
            Sample(int(i), None if np.isnan(v) else float(v))
            for i, v in zip(self.index, self.level)
        )

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.level)

    @property
    def is_filled(self) -> bool:
        return not bool(self.missing.any())


@dataclass(frozen=True)
class CandidatePeak:
    """A detected rise. ``index`` is the last sample before the level jumps."""

    index: int
    pre_level: float
    post_level: float
    stop_index: int | None = None

    @property
    def volume(self) -> float:
        return self.post_level - self.pre_level

    def shifted(self, offset: int) -> CandidatePeak:
        stop = None if self.stop_index is None else self.stop_index + offset
        return dataclasses.replace(self, index=self.index + offset, stop_index=stop)


@dataclass(frozen=True)
class RefillEvent:
    start_index: int
    stop_index: int
    detected_volume: float

    def __post_init__(self) -> None:
        if self.start_index > self.stop_index:
            raise DataError(f"start_index {self.start_index} > stop_index {self.stop_index}")
        if not self.detected_volume > 0:
            raise DataError(f"detected_volume must be positive, got {self.detected_volume}")


@dataclass(frozen=True)
class ConsumptionSegment:
    from_index: int
    to_index: int
    consumed_volume: float

    def __post_init__(self) -> None:
        if self.from_index >= self.to_index:
            raise DataError("from_index must precede to_index")


@dataclass(frozen=True)
class GroundTruth:
    """Labels of a synthetic trace.

    ``refills`` holds ``(index, volume)`` pairs where ``index`` is the first
    sample at the new level, i.e. ``clean_signal[index] - clean_signal[index-1]
    == volume``.
    """

    clean_signal: np.ndarray
    refills: tuple[tuple[int, float], ...] = ()
    plateaus: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "clean_signal", _frozen(np.asarray(self.clean_signal, dtype=float)))
        object.__setattr__(self, "refills", tuple((int(i), float(v)) for i, v in self.refills))
        object.__setattr__(self, "plateaus", tuple((int(a), int(b)) for a, b in self.plateaus))

    @classmethod
    def from_refills(cls, refills: Iterable[tuple[int, float]]) -> GroundTruth:
        """Label-only truth, as read back from a truth CSV."""
        return cls(np.empty(0), tuple(refills))

    @property
    def refill_indices(self) -> np.ndarray:
        return np.array([i for i, _ in self.refills], dtype=np.int64)

    @property
    def refill_volumes(self) -> np.ndarray:
        return np.array([v for _, v in self.refills], dtype=float)


@dataclass(frozen=True)
class PipelineConfig:
    """Thresholds and window sizes for every stage.

    Fields beyond the core thresholds are tuning knobs; the README lists
    what each one does.
    """

    white_noise_passes: int = 2
    white_noise_step_guard: bool = True
    cluster_threshold_T: float = 0.1
    cluster_window: int = 200
    cluster_window_step: int = 200
    cluster_tie_method: str = "agglomerative"
    cluster_min_run: int = 3
    cluster_gap_factor: float = 3.0
    wavelet_alpha: float = 0.05
    wavelet_levels: int = 4
    align_max_lag: int = 6000
    median_window: int = 5
    peak_deviation: float = 4.0
    level_window: int = 40
    match_tolerance: int = 100
    final_distance: int = 30
    final_difference: float = 5.0

    def __post_init__(self) -> None:
        positive = (
            "white_noise_passes",
            "cluster_window",
            "cluster_window_step",
            "cluster_min_run",
            "wavelet_levels",
            "median_window",
            "level_window",
        )
        for name in positive:
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.median_window < 3 or self.median_window % 2 == 0:
            raise ConfigError("median_window must be an odd integer >= 3")
        if self.peak_deviation <= 0:
            raise ConfigError("peak_deviation must be positive")
        non_negative = (
            "cluster_threshold_T",
            "cluster_gap_factor",
            "wavelet_alpha",
            "align_max_lag",
            "match_tolerance",
            "final_distance",
            "final_difference",
        )
        for name in non_negative:
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.cluster_tie_method not in ("agglomerative", "spectral"):
            raise ConfigError("cluster_tie_method must be 'agglomerative' or 'spectral'")

    @classmethod
    def field_types(cls) -> dict[str, type]:
        return {f.name: type(f.default) for f in dataclasses.fields(cls)}

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> PipelineConfig:
        """Build from raw (possibly string) values; unknown keys are errors."""
        types = cls.field_types()
        kwargs: dict[str, Any] = {}
        for key, raw in values.items():
            if key not in types:
                raise ConfigError(f"unknown config key {key!r}")
            kwargs[key] = _coerce(key, raw, types[key])
        return cls(**kwargs)

    def replace(self, **changes: Any) -> PipelineConfig:
        return dataclasses.replace(self, **changes)


def _coerce(key: str, raw: Any, typ: type) -> Any:
    if not isinstance(raw, str):
        if typ is float and isinstance(raw, int) and not isinstance(raw, bool):
            return float(raw)
        if isinstance(raw, typ):
            return raw
        raise ConfigError(f"config key {key!r}: expected {typ.__name__}, got {raw!r}")
    text = raw.strip()
    try:
        if typ is bool:
            lowered = text.lower()
            if lowered in ("true", "yes", "1", "on"):
                return True
            if lowered in ("false", "no", "0", "off"):
                return False
            raise ValueError(text)
        if typ is int:
            return int(text)
        if typ is float:
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"config key {key!r}: cannot parse {text!r} as {typ.__name__}") from None


def as_array(values: Sequence[float] | np.ndarray) -> np.ndarray:
    return np.asarray(values, dtype=float)


__all__ = [
    "MISSING",
    "Sample",
    "Trace",
    "CandidatePeak",
    "RefillEvent",
    "ConsumptionSegment",
    "GroundTruth",
    "PipelineConfig",
    "as_array",
]
