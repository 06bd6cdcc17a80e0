"""Labelled synthetic fuel traces.

:func:`generate_clean` builds a piecewise-linear tank level: driving stretches
drain at a constant rate, engine-off plateaus hold the level, and refills are
instantaneous upward steps. :func:`corrupt` then layers the sensor failure
modes on top: white noise, impulse spikes, stuck-at readings and zeroed rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, InfeasibleSchedule
from .model import GroundTruth, Trace

SLOPE_RANGE = (0.0005, 0.005)  # litres per sample while driving
MIN_REFILL = 5.0
EDGE_MARGIN = 200  # no refill closer than this to either end
MIN_SPACING = 300  # between refills
QUIET = 40  # no change of drain rate this close to a refill
MAX_ATTEMPTS = 50


@dataclass(frozen=True)
class NoiseProfile:
    white_sigma: float = 0.0
    spike_prob: float = 0.0
    spike_max: float = 0.0
    stuck_prob: float = 0.0
    stuck_len: tuple[int, int] = (20, 200)
    zero_prob: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("spike_prob", "stuck_prob", "zero_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise DataError(f"{name} must be a probability, got {p}")
        if self.white_sigma < 0 or self.spike_max < 0:
            raise DataError("noise magnitudes must be non-negative")
        lo, hi = self.stuck_len
        if not 1 <= lo <= hi:
            raise DataError(f"stuck_len must satisfy 1 <= lo <= hi, got {self.stuck_len}")


@dataclass(frozen=True)
class Corruption:
    """A corrupted trace plus the masks of the samples each failure mode touched."""

    trace: Trace
    spikes: np.ndarray
    stuck: np.ndarray
    zeros: np.ndarray


def _refill_positions(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    room = n - 2 * EDGE_MARGIN - (k - 1) * MIN_SPACING
    if k and room <= 0:
        raise InfeasibleSchedule(f"{k} refills do not fit in {n} samples")
    base = np.sort(rng.choice(room, size=k, replace=False)) if k else np.empty(0, dtype=np.int64)
    return (base + EDGE_MARGIN + np.arange(k) * MIN_SPACING).astype(np.int64)


def _drain_profile(
    rng: np.random.Generator, n: int, refills: np.ndarray, tank: float = np.inf
) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Per-sample level decrement and the engine-off plateaus.

    Every stretch between refills drives, rests for 10-30% of its length and
    drives again, each leg at its own rate. A stretch that would burn more
    than 90% of the tank has its rates scaled down, never below the minimum.
    """
    drain = np.zeros(n)
    plateaus = []
    bounds = np.concatenate([[1], refills, [n]])
    for a, b in zip(bounds[:-1], bounds[1:]):
        a, b = int(a), int(b)
        p_len = int(round(rng.uniform(0.1, 0.3) * (b - a)))
        if p_len > 0 and b - a - p_len >= 2 * QUIET:
            p0 = int(rng.integers(a + QUIET, b - QUIET - p_len + 1))
            p1 = p0 + p_len
        else:
            p0 = p1 = (a + b) // 2
        drain[a:p0] = rng.uniform(*SLOPE_RANGE)
        drain[p1:b] = rng.uniform(*SLOPE_RANGE)
        used = float(drain[a:b].sum())
        if used > 0.9 * tank:
            drain[a:b] = np.maximum(drain[a:b] * (0.9 * tank / used), SLOPE_RANGE[0]) * (drain[a:b] > 0)
        if p1 > p0:
            plateaus.append((p0, p1))
    # refills are instantaneous: no drain on the step itself
    drain[refills] = 0.0
    return drain, plateaus


def _schedule_volumes(
    rng: np.random.Generator, drain: np.ndarray, refills: np.ndarray, tank: float
) -> tuple[float, list[float]]:
    n = drain.size
    cum = np.cumsum(drain)
    edges = np.concatenate([[0], refills, [n]])
    consumed = [float(cum[b - 1] - cum[a]) for a, b in zip(edges[:-1], edges[1:])]
    start = min(consumed[0] + rng.uniform(0.3, 0.5) * tank, tank)
    if consumed[0] > tank:
        raise InfeasibleSchedule("initial drain exceeds the tank")
    level_pre = start - consumed[0]
    volumes = []
    for k in range(refills.size):
        cap = min(0.8 * tank, tank - level_pre - 1e-6)
        if cap < MIN_REFILL:
            raise InfeasibleSchedule(f"no room for refill {k}: level {level_pre:.2f} L")
        wanted = rng.uniform(0.3, 0.5) * tank + consumed[k + 1] - level_pre
        topup = rng.uniform(MIN_REFILL, 8.0)
        v = float(min(wanted if wanted >= MIN_REFILL else topup, cap))
        level_pre = level_pre + v - consumed[k + 1]
        if level_pre < 0:
            raise InfeasibleSchedule(f"level runs dry after refill {k}")
        volumes.append(v)
    return start, volumes


def generate_clean(n: int = 100_000, tank: float = 60.0, n_refills: int = 37, seed: int = 0) -> GroundTruth:
    """Seeded clean trace with ``n_refills`` labelled refills.

    Refill volumes steer the level towards a random target of 30-50% of the
    tank before the next refill; when that would ask for less than the 5 L
    minimum, a small top-up of 5-8 L is drawn instead.
    """
    if n < 1000:
        raise DataError("n must be at least 1000")
    if n_refills < 0:
        raise DataError("n_refills must be non-negative")
    if tank <= 0:
        raise DataError("tank must be positive")
    if MIN_REFILL > 0.8 * tank:
        raise InfeasibleSchedule(f"a {tank} L tank cannot take a {MIN_REFILL} L refill")
    rng = np.random.default_rng(seed)
    failure = None
    for _ in range(MAX_ATTEMPTS):
        refills = _refill_positions(rng, n, n_refills)
        drain, plateaus = _drain_profile(rng, n, refills, tank)
        try:
            start, volumes = _schedule_volumes(rng, drain, refills, tank)
            break
        except InfeasibleSchedule as exc:
            failure = exc
    else:
        raise InfeasibleSchedule(f"no feasible schedule in {MAX_ATTEMPTS} attempts: {failure}")

    steps = -drain
    steps[0] = start
    steps[refills] = volumes
    clean = np.cumsum(steps)
    return GroundTruth(clean, tuple(zip(refills.tolist(), volumes)), tuple(plateaus))


def corrupt_detailed(truth: GroundTruth, profile: NoiseProfile) -> Corruption:
    """Apply ``profile`` to the clean signal; each failure mode has its own random stream."""
    clean = np.asarray(truth.clean_signal, dtype=float)
    n = clean.size
    white_rng, stuck_rng, spike_rng, zero_rng = (
        np.random.default_rng(s) for s in np.random.SeedSequence(profile.seed).spawn(4)
    )
    x = clean.copy()
    if profile.white_sigma > 0:
        x += white_rng.normal(0.0, profile.white_sigma, n)

    stuck = np.zeros(n, dtype=bool)
    if profile.stuck_prob > 0:
        lo, hi = profile.stuck_len
        for seg in range(0, n, hi):
            if stuck_rng.random() < profile.stuck_prob:
                length = int(stuck_rng.integers(lo, hi + 1))
                s0 = seg + int(stuck_rng.integers(0, hi))
                s1 = min(n, s0 + length)
                if s0 < n:
                    x[s0:s1] = x[s0]
                    stuck[s0 + 1 : s1] = True

    spikes = np.zeros(n, dtype=bool)
    if profile.spike_prob > 0 and profile.spike_max > 0:
        spikes = (spike_rng.random(n) < profile.spike_prob) & ~stuck
        count = int(spikes.sum())
        sign = np.where(spike_rng.random(count) < 0.5, -1.0, 1.0)
        x[spikes] += sign * spike_rng.uniform(0.0, profile.spike_max, count)

    zeros = np.zeros(n, dtype=bool)
    if profile.zero_prob > 0:
        zeros = zero_rng.random(n) < profile.zero_prob
        x[zeros] = 0.0
    return Corruption(Trace(np.arange(n), x), spikes, stuck, zeros)


def corrupt(truth: GroundTruth, profile: NoiseProfile) -> Trace:
    return corrupt_detailed(truth, profile).trace
