"""Missing-sample repair and white-noise removal."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientData, NotFilled, TooShort, UnboundedGap
from .model import PipelineConfig, Trace


@dataclass(frozen=True)
class WhiteNoiseMark:
    index: int
    alpha: float


def zeros_to_missing(trace: Trace) -> Trace:
    level = trace.level.copy()
    level[level == 0.0] = np.nan
    return trace.with_levels(level)


def _interior_missing(missing: np.ndarray) -> np.ndarray:
    known = np.flatnonzero(~missing)
    if known.size == 0:
        return np.zeros_like(missing)
    inside = np.zeros_like(missing)
    inside[known[0] : known[-1] + 1] = True
    return missing & inside


def interpolate_linear(trace: Trace, strict: bool = True) -> Trace:
    """Fill interior missing samples on the line through the straddling known samples.

    With ``strict`` a missing run touching either end raises :class:`UnboundedGap`;
    otherwise such runs are left for :func:`extrapolate_midpoint`.
    """
    missing = trace.missing
    if not missing.any():
        return trace
    interior = _interior_missing(missing)
    if strict and (interior != missing).any():
        first = int(trace.index[np.flatnonzero(missing & ~interior)[0]])
        raise UnboundedGap(f"missing run at index {first} touches the trace boundary")
    if not interior.any():
        return trace
    x = trace.index.astype(float)
    level = trace.level.copy()
    known = ~missing
    level[interior] = np.interp(x[interior], x[known], level[known])
    return trace.with_levels(level)


def extrapolate_midpoint(trace: Trace) -> Trace:
    """Fill boundary missing runs with the midpoint of the two nearest known levels.

    Works inward-out, so each new value feeds the next one. Interior gaps are
    left untouched.
    """
    missing = trace.missing
    known = np.flatnonzero(~missing)
    if known.size < 2:
        raise InsufficientData("midpoint extrapolation needs at least two known samples")
    if not missing.any():
        return trace
    level = trace.level.copy()
    first, last = int(known[0]), int(known[-1])
    for i in range(first - 1, -1, -1):
        level[i] = 0.5 * (level[i + 1] + level[i + 2])
    for i in range(last + 1, level.size):
        level[i] = 0.5 * (level[i - 1] + level[i - 2])
    return trace.with_levels(level)


def repair(trace: Trace) -> Trace:
    """Zeros become missing, then interior interpolation, then boundary extrapolation."""
    trace = zeros_to_missing(trace)
    return extrapolate_midpoint(interpolate_linear(trace, strict=False))


def spike_alpha(values: np.ndarray) -> np.ndarray:
    """Product ``(x[i]-x[i+1]) * (x[i]-x[i-1])`` for interior samples.

    Entries where the sample equals either neighbour are NaN (the rule does not
    apply there). Positive values flag local extrema.
    """
    x = np.asarray(values, dtype=float)
    prev_d = x[1:-1] - x[:-2]
    next_d = x[1:-1] - x[2:]
    alpha = next_d * prev_d
    alpha[(prev_d == 0) | (next_d == 0)] = np.nan
    return alpha


def remove_white_noise(
    trace: Trace, passes: int = 2, step_guard: bool = True
) -> tuple[Trace, list[WhiteNoiseMark]]:
    """Remove isolated local extrema and re-interpolate them.

    Each pass marks every interior sample whose spike product is positive and
    refills the marks linearly. ``step_guard`` spares extrema that sit on the
    corner of a level shift: a sample is only marked when its neighbours are
    closer to each other than either is to it, which holds for a spike but
    not for the top or bottom of a refill step.
    """
    if passes < 1:
        raise ValueError("passes must be >= 1")
    if not trace.is_filled:
        raise NotFilled("remove_white_noise needs a fully repaired trace")
    marks: list[WhiteNoiseMark] = []
    if len(trace) < 3:
        return trace, marks
    for _ in range(passes):
        x = trace.level
        alpha = spike_alpha(x)
        flagged = alpha > 0
        if step_guard:
            spread = np.abs(x[2:] - x[:-2])
            excursion = np.minimum(np.abs(x[1:-1] - x[:-2]), np.abs(x[1:-1] - x[2:]))
            flagged &= spread < excursion
        pos = np.flatnonzero(flagged) + 1
        if pos.size == 0:
            break
        marks.extend(WhiteNoiseMark(int(trace.index[p]), float(alpha[p - 1])) for p in pos)
        level = x.copy()
        level[pos] = np.nan
        trace = interpolate_linear(trace.with_levels(level))
    return trace, marks


def difference_feature(trace: Trace) -> np.ndarray:
    if len(trace) < 2:
        raise TooShort("difference feature needs at least two samples")
    return np.diff(trace.level)


def preprocess(trace: Trace, config: PipelineConfig | None = None) -> Trace:
    config = config or PipelineConfig()
    cleaned, _ = remove_white_noise(
        repair(trace), config.white_noise_passes, config.white_noise_step_guard
    )
    return cleaned
