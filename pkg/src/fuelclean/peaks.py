"""Refill detection and cross-branch peak validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import IndexOutOfRange, TooShort
from .model import CandidatePeak

BRANCHES = ("cluster", "cluster+wavelet", "cluster+median", "cluster+median+wavelet")


@dataclass(frozen=True)
class BranchOutput:
    branch_id: str
    peaks: tuple[CandidatePeak, ...] = ()
    shift_compensated: bool = False
    lag: int = 0
    series: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.branch_id not in BRANCHES:
            raise ValueError(f"unknown branch {self.branch_id!r}")
        object.__setattr__(self, "peaks", tuple(sorted(self.peaks, key=lambda p: p.index)))
        if "wavelet" in self.branch_id and not self.shift_compensated:
            raise ValueError("wavelet branches must be shift-compensated")


def sma3(values: Sequence[float] | np.ndarray, i: int) -> float:
    """Mean of ``values[i-1]``, ``values[i]`` and ``values[i+1]``."""
    n = len(values)
    if not 1 <= i <= n - 2:
        raise IndexOutOfRange(f"sma3 needs 1 <= i <= {n - 2}, got {i}")
    return (float(values[i - 1]) + float(values[i]) + float(values[i + 1])) / 3.0


def rise_points(values: np.ndarray, deviation: float) -> np.ndarray:
    """Positions ``i`` whose next sample exceeds the 3-point average ending at ``i``.

    That average is ``sma3(values, i - 1)``; comparing against it rather than
    the centred one keeps the full step height in the test.
    """
    x = np.asarray(values, dtype=float)
    if x.size < 4:
        return np.empty(0, dtype=np.int64)
    trailing = (x[:-3] + x[1:-2] + x[2:-1]) / 3.0  # sma3 centred at i-1, for i = 2..n-2
    return np.flatnonzero(x[3:] - trailing > deviation) + 2


def local_level(values: np.ndarray, start: int, stop: int, at: int) -> float:
    """Robust straight-line fit (Theil-Sen) of ``values[start:stop]`` evaluated at ``at``."""
    y = values[start:stop]
    if y.size == 1:
        return float(y[0])
    x = np.arange(start, stop, dtype=float)
    i, j = np.triu_indices(y.size, k=1)
    slope = float(np.median((y[j] - y[i]) / (x[j] - x[i])))
    intercept = float(np.median(y - slope * x))
    return intercept + slope * at


def stabilization_index(values: np.ndarray, start: int, deviation: float) -> int | None:
    """First ``j >= start`` where three consecutive samples span less than ``deviation``."""
    x = values
    chunk = 256
    # scan forward in growing chunks; the answer is usually a few samples away
    lo = start
    while x.size - lo >= 3:
        hi = min(x.size, lo + chunk + 2)
        win = np.lib.stride_tricks.sliding_window_view(x[lo:hi], 3)
        ok = np.flatnonzero(win.max(axis=1) - win.min(axis=1) < deviation)
        if ok.size:
            return int(ok[0]) + lo
        lo = hi - 2
        chunk *= 2
    return None


def detect_peaks(
    values: Sequence[float] | np.ndarray, deviation: float = 4.0, level_window: int = 40
) -> list[CandidatePeak]:
    """Upward level shifts of more than ``deviation``.

    Consecutive rise points form one event starting at the first of them.
    The event stops at the first point after the rise where the level is
    stable again. Levels before and after come from robust line fits over
    ``level_window`` samples ending at the start and beginning at the stop;
    ``level_window=1`` uses the raw samples.
    """
    x = np.asarray(values, dtype=float)
    if x.size < 3:
        raise TooShort("peak detection needs at least three samples")
    if not deviation > 0:
        raise ValueError("deviation must be positive")
    rises = rise_points(x, deviation)
    # first point of each run of consecutive rise points
    starts = rises[np.r_[True, np.diff(rises) > 1]] if rises.size else rises
    peaks: list[CandidatePeak] = []
    last_stop = -1
    for pos in starts:
        pos = int(pos)
        if pos <= last_stop:
            continue
        stop = stabilization_index(x, pos + 1, deviation)
        if stop is None:
            break
        pre = local_level(x, max(0, pos - level_window + 1), pos + 1, pos)
        post = local_level(x, stop, min(x.size, stop + level_window), stop)
        last_stop = stop
        if post - pre > deviation:
            peaks.append(CandidatePeak(pos, pre, post, stop))
    return peaks


def _greedy_match(a: Sequence[CandidatePeak], b: Sequence[CandidatePeak], tolerance: int) -> list[CandidatePeak]:
    b_idx = np.array([p.index for p in b], dtype=np.int64)
    used = np.zeros(b_idx.size, dtype=bool)
    kept = []
    for peak in a:
        if not b_idx.size:
            break
        dist = np.abs(b_idx - peak.index).astype(float)
        dist[used] = np.inf
        j = int(np.argmin(dist))
        if dist[j] <= tolerance:
            used[j] = True
            kept.append(peak)
    return kept


def validate_cross_branch(a: BranchOutput, b: BranchOutput, tolerance: int = 100) -> list[CandidatePeak]:
    """Keep peaks of ``a`` that have a partner in ``b`` within ``tolerance`` indices.

    Each ``a`` peak takes its nearest still-unmatched ``b`` peak. Levels come
    from ``a``, the less transformed branch.
    """
    return _greedy_match(a.peaks, b.peaks, tolerance)


def validate_final(
    peaks: Iterable[CandidatePeak], final_distance: int = 30, final_difference: float = 5.0
) -> list[CandidatePeak]:
    """Drop a peak squeezed between close neighbours that change by about the same amount.

    One left-to-right pass over triples (previous kept, current, next). The
    first and last peaks are never removed.
    """
    peaks = list(peaks)
    if len(peaks) < 3:
        return peaks
    kept = [peaks[0]]
    for i in range(1, len(peaks) - 1):
        prev, cur, nxt = kept[-1], peaks[i], peaks[i + 1]
        a = prev.post_level - cur.post_level
        b = cur.post_level - nxt.post_level
        close = cur.index - prev.index < final_distance and nxt.index - cur.index < final_distance
        if close and abs(a - b) < final_difference:
            continue
        kept.append(cur)
    kept.append(peaks[-1])
    return kept
