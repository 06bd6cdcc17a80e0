"""Fuel level trace denoising and refill detection."""

from .errors import FuelCleanError
from .evaluation import EventMatch, ScoreReport, event_error, match_events, r_squared, rmse, score
from .io import load_config, load_trace, write_refill_report
from .model import (
    CandidatePeak,
    ConsumptionSegment,
    GroundTruth,
    PipelineConfig,
    RefillEvent,
    Sample,
    Trace,
)
from .pipeline import PipelineResult, analyze, run_pipeline
from .synth import NoiseProfile, corrupt, generate_clean

__all__ = [
    "CandidatePeak",
    "ConsumptionSegment",
    "EventMatch",
    "FuelCleanError",
    "GroundTruth",
    "NoiseProfile",
    "PipelineConfig",
    "PipelineResult",
    "RefillEvent",
    "Sample",
    "ScoreReport",
    "Trace",
    "analyze",
    "corrupt",
    "event_error",
    "generate_clean",
    "load_config",
    "load_trace",
    "match_events",
    "r_squared",
    "rmse",
    "run_pipeline",
    "score",
    "write_refill_report",
]
