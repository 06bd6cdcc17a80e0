"""End-to-end refill extraction: repair, cluster, four detection branches, validation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import wavelet
from .clustering import hybrid_cluster_denoise
from .errors import TooShort
from .medianfilter import median_filter
from .model import CandidatePeak, ConsumptionSegment, PipelineConfig, RefillEvent, Trace
from .peaks import BranchOutput, _greedy_match, detect_peaks, validate_cross_branch, validate_final
from .preprocess import preprocess


@dataclass(frozen=True)
class PipelineResult:
    events: list[RefillEvent]
    segments: list[ConsumptionSegment]
    stages: dict[str, np.ndarray] = field(repr=False)
    branches: dict[str, BranchOutput] = field(repr=False)
    survivors: list[CandidatePeak] = field(repr=False)


def _wavelet_branch(values: np.ndarray, config: PipelineConfig) -> tuple[np.ndarray, int]:
    levels = min(config.wavelet_levels, int(math.log2(values.size)))
    cfg = config.replace(wavelet_levels=levels) if levels != config.wavelet_levels else config
    smooth = wavelet.denoise(values, cfg)
    max_lag = min(config.align_max_lag, (values.size - 1) // 2)
    lag = wavelet.align_shift(values, smooth, max_lag) if max_lag > 0 else 0
    return smooth, lag


def _branch(branch_id: str, series: np.ndarray, config: PipelineConfig, lag: int = 0) -> BranchOutput:
    peaks = detect_peaks(series, config.peak_deviation, config.level_window)
    if lag:
        peaks = [p.shifted(-lag) for p in peaks]
    return BranchOutput(branch_id, tuple(peaks), shift_compensated="wavelet" in branch_id, lag=lag, series=series)


def _segments(
    trace: Trace, series: np.ndarray, peaks: list[CandidatePeak]
) -> list[ConsumptionSegment]:
    """Level drops before, between and after refills."""
    if not peaks:
        return []
    idx = trace.index
    out = []
    first = peaks[0]
    if first.index > 0:
        out.append(ConsumptionSegment(int(idx[0]), int(idx[first.index]), max(0.0, series[0] - first.pre_level)))
    for cur, nxt in zip(peaks, peaks[1:]):
        if cur.stop_index < nxt.index:
            out.append(
                ConsumptionSegment(
                    int(idx[cur.stop_index]), int(idx[nxt.index]), max(0.0, cur.post_level - nxt.pre_level)
                )
            )
    last = peaks[-1]
    if last.stop_index < series.size - 1:
        out.append(
            ConsumptionSegment(int(idx[last.stop_index]), int(idx[-1]), max(0.0, last.post_level - series[-1]))
        )
    return out


def analyze(trace: Trace, config: PipelineConfig | None = None) -> PipelineResult:
    """Run every stage and keep the intermediate series for inspection."""
    config = config or PipelineConfig()
    if len(trace) < 3:
        raise TooShort("the pipeline needs at least three samples")
    cleaned = preprocess(trace, config)
    clustered = hybrid_cluster_denoise(cleaned, config).level

    wav, wav_lag = _wavelet_branch(clustered, config)
    med = median_filter(clustered, config.median_window)
    med_wav, med_wav_lag = _wavelet_branch(med, config)

    b1 = _branch("cluster", clustered, config)
    b2 = _branch("cluster+wavelet", wav, config, wav_lag)
    b3 = _branch("cluster+median", med, config)
    b4 = _branch("cluster+median+wavelet", med_wav, config, med_wav_lag)

    first = validate_cross_branch(b1, b2, config.match_tolerance)
    second = validate_cross_branch(b3, b4, config.match_tolerance)
    both = _greedy_match(first, second, config.match_tolerance)
    survivors = validate_final(both, config.final_distance, config.final_difference)

    idx = trace.index
    events = [
        RefillEvent(int(idx[p.index]), int(idx[p.stop_index]), p.post_level - p.pre_level) for p in survivors
    ]
    final = np.roll(med_wav, -med_wav_lag) if med_wav_lag else med_wav
    stages = {
        "preprocessed": cleaned.level,
        "clustered": clustered,
        "wavelet": wav,
        "median": med,
        "final": final,
    }
    return PipelineResult(
        events,
        _segments(trace, clustered, survivors),
        stages,
        {b.branch_id: b for b in (b1, b2, b3, b4)},
        survivors,
    )


def run_pipeline(
    trace: Trace, config: PipelineConfig | None = None
) -> tuple[list[RefillEvent], list[ConsumptionSegment]]:
    result = analyze(trace, config)
    return result.events, result.segments
