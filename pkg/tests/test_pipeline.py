import numpy as np
import pytest

from fuelclean.model import GroundTruth, PipelineConfig, Trace
from fuelclean.pipeline import analyze, run_pipeline
from fuelclean.evaluation import match_events
from fuelclean.synth import NoiseProfile, corrupt, generate_clean


def one_refill_trace(volume=17.77, n=3000, at=1500):
    steps = np.full(n, -0.002)
    steps[0] = 40.0
    steps[at] = volume  # no drain on the refill sample itself
    return Trace.from_levels(np.cumsum(steps))


def test_single_noiseless_refill():
    events, segments = run_pipeline(one_refill_trace())
    assert len(events) == 1
    assert events[0].start_index == 1499
    assert events[0].detected_volume == pytest.approx(17.77, abs=1e-6)
    assert len(segments) == 2


def test_constant_trace_has_nothing():
    events, segments = run_pipeline(Trace.from_levels([25.0] * 1000))
    assert events == [] and segments == []


def test_indices_are_reported_in_trace_coordinates():
    t = one_refill_trace()
    shifted = Trace(t.index * 10 + 7, t.level)
    events, _ = run_pipeline(shifted)
    assert events[0].start_index == 1499 * 10 + 7


def test_stages_match_input_length():
    r = analyze(one_refill_trace(n=1234, at=600))
    assert set(r.stages) == {"preprocessed", "clustered", "wavelet", "median", "final"}
    assert all(v.shape == (1234,) for v in r.stages.values())
    assert all(b.shift_compensated for k, b in r.branches.items() if "wavelet" in k)


def test_short_trace_runs():
    events, _ = run_pipeline(Trace.from_levels([10.0, 10.0, 10.0, 20.0, 20.0, 20.0, 20.0]))
    assert len(events) <= 1


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_mass_balance_noiseless(seed):
    g = generate_clean(30_000, 60.0, 10, seed)
    t = corrupt(g, NoiseProfile())
    events, segments = run_pipeline(t)
    consumed = sum(s.consumed_volume for s in segments)
    refilled = sum(e.detected_volume for e in events)
    x = g.clean_signal
    assert consumed + x[-1] - x[0] == pytest.approx(refilled, abs=0.5)


def test_thirty_seven_survivors_on_moderate_noise():
    g = generate_clean(100_000, 60.0, 37, seed=7)
    t = corrupt(g, NoiseProfile(0.5, 0.005, 20.0, 0.02, zero_prob=0.002, seed=7))
    events, _ = run_pipeline(t)
    assert len(events) == 37
    matches, missed, spurious = match_events(events, g)
    assert (missed, spurious) == (0, 0)


def test_config_is_honoured():
    t = one_refill_trace(volume=6.0)
    assert len(run_pipeline(t)[0]) == 1
    assert run_pipeline(t, PipelineConfig(peak_deviation=8.0))[0] == []
