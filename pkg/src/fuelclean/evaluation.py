"""Scoring detected refills against ground truth."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateTruth, EmptyInput, NonPositiveTruth, ShapeMismatch, TooShort
from .model import GroundTruth, RefillEvent


@dataclass(frozen=True)
class EventMatch:
    detected: RefillEvent
    truth_index: int
    truth_volume: float
    error: float
    percentage_error: float


@dataclass(frozen=True)
class ScoreReport:
    r_squared: float | None  # None when undefined (fewer than two matches or constant truth)
    rmse: float | None
    matches: list[EventMatch] = field(default_factory=list)
    missed: int = 0
    spurious: int = 0

    def to_text(self) -> str:
        def fmt(x: float | None) -> str:
            return "n/a" if x is None else repr(float(x))

        lines = [
            f"r_squared: {fmt(self.r_squared)}",
            f"rmse: {fmt(self.rmse)}",
            f"matched: {len(self.matches)}",
            f"missed: {self.missed}",
            f"spurious: {self.spurious}",
        ]
        if self.matches:
            lines.append("")
            lines.append("Start_index_refill,Stop_index_refill,Deducted_value,Real_value,Error,Percentage_error")
            for m in self.matches:
                d = m.detected
                lines.append(
                    ",".join(
                        repr(v) if isinstance(v, float) else str(v)
                        for v in (
                            d.start_index, d.stop_index, float(d.detected_volume),
                            float(m.truth_volume), float(m.error), float(m.percentage_error),
                        )
                    )
                )
        return "\n".join(lines) + "\n"


def event_error(detected_volume: float, truth_volume: float) -> tuple[float, float]:
    """Absolute error in litres and as a percentage of the true volume."""
    if not truth_volume > 0:
        raise NonPositiveTruth(f"truth volume must be positive, got {truth_volume}")
    error = abs(detected_volume - truth_volume)
    return error, 100.0 * error / truth_volume


def match_events(
    detected: Sequence[RefillEvent], truth: GroundTruth, tolerance: int = 100
) -> tuple[list[EventMatch], int, int]:
    """Pair each detected event with the nearest unused truth refill within ``tolerance``.

    Returns ``(matches, missed, spurious)``.
    """
    t_idx = truth.refill_indices
    t_vol = truth.refill_volumes
    used = np.zeros(t_idx.size, dtype=bool)
    matches = []
    for ev in detected:
        if not t_idx.size:
            break
        dist = np.abs(t_idx - ev.start_index).astype(float)
        dist[used] = np.inf
        j = int(np.argmin(dist))
        if dist[j] <= tolerance:
            used[j] = True
            err, pct = event_error(ev.detected_volume, float(t_vol[j]))
            matches.append(EventMatch(ev, int(t_idx[j]), float(t_vol[j]), err, pct))
    return matches, int(t_idx.size - used.sum()), len(detected) - len(matches)


def _pair(detected: Sequence[float], truth: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    d = np.asarray(detected, dtype=float)
    t = np.asarray(truth, dtype=float)
    if d.shape != t.shape:
        raise ShapeMismatch("detected and truth volumes must have equal length")
    return d, t


def r_squared(detected: Sequence[float], truth: Sequence[float]) -> float:
    d, t = _pair(detected, truth)
    if d.size < 2:
        raise TooShort("r_squared needs at least two pairs")
    ss_tot = float(np.sum((t - t.mean()) ** 2))
    if ss_tot == 0:
        raise DegenerateTruth("truth volumes have zero variance")
    return 1.0 - float(np.sum((d - t) ** 2)) / ss_tot


def rmse(detected: Sequence[float], truth: Sequence[float]) -> float:
    d, t = _pair(detected, truth)
    if d.size == 0:
        raise EmptyInput("rmse needs at least one pair")
    return math.sqrt(float(np.mean((d - t) ** 2)))


def score(detected: Sequence[RefillEvent], truth: GroundTruth, tolerance: int = 100) -> ScoreReport:
    matches, missed, spurious = match_events(detected, truth, tolerance)
    d = [m.detected.detected_volume for m in matches]
    t = [m.truth_volume for m in matches]
    try:
        r2: float | None = r_squared(d, t)
    except (TooShort, DegenerateTruth):
        r2 = None
    return ScoreReport(r2, rmse(d, t) if matches else None, matches, missed, spurious)
