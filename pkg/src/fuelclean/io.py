"""CSV and config file reading and writing."""

from __future__ import annotations

import csv
import math
import os
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, IoFailure, MalformedRow, MissingFile, NonMonotoneIndex
from .evaluation import match_events
from .model import ConsumptionSegment, GroundTruth, PipelineConfig, RefillEvent, Trace

PathLike = str | os.PathLike

REPORT_COLUMNS = ("Start_index_refill", "Stop_index_refill", "Deducted_value")
TRUTH_COLUMNS = ("Real_value", "Error", "Percentage_error")


def format_number(x: float | int) -> str:
    """Shortest decimal that round-trips; integers print without a point."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return ""
    return repr(x)


def _read_rows(path: PathLike) -> tuple[list[str], list[tuple[int, list[str]]]]:
    """Header and ``(line_number, fields)`` for every non-blank data row."""
    p = Path(path)
    if not p.is_file():
        raise MissingFile(f"no such file: {p}")
    try:
        with p.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IoFailure(f"cannot read {p}: {exc}") from exc
    if not rows:
        raise MalformedRow(1, "missing header")
    body = [(n, r) for n, r in enumerate(rows[1:], start=2) if r and any(f.strip() for f in r)]
    return [h.strip() for h in rows[0]], body


def _parse_int(line: int, text: str, what: str) -> int:
    try:
        value = int(text.strip())
    except ValueError:
        raise MalformedRow(line, f"{what} is not an integer: {text!r}") from None
    return value


def _parse_float(line: int, text: str, what: str) -> float:
    try:
        value = float(text.strip())
    except ValueError:
        raise MalformedRow(line, f"{what} is not a number: {text!r}") from None
    if not math.isfinite(value):
        raise MalformedRow(line, f"{what} must be finite: {text!r}")
    return value


def load_trace(path: PathLike, vehicle_id: str = "") -> Trace:
    """Read ``index,level`` rows after a one-line header.

    An empty level is missing; a literal ``0`` stays 0.0 until preprocessing.
    """
    _, body = _read_rows(path)
    index = np.empty(len(body), dtype=np.int64)
    level = np.empty(len(body), dtype=float)
    prev = None
    for k, (line, row) in enumerate(body):
        if len(row) != 2:
            raise MalformedRow(line, f"expected 2 fields, got {len(row)}")
        idx = _parse_int(line, row[0], "index")
        if idx < 0:
            raise MalformedRow(line, f"index must be non-negative, got {idx}")
        if prev is not None and idx <= prev:
            raise NonMonotoneIndex(line, idx)
        prev = idx
        index[k] = idx
        level[k] = np.nan if not row[1].strip() else _parse_float(line, row[1], "level")
    return Trace(index, level, vehicle_id or Path(path).stem)


def _write(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[object]]) -> None:
    p = Path(path)
    try:
        with p.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([format_number(v) if isinstance(v, (int, float, np.number)) else v for v in row])
    except OSError as exc:
        raise IoFailure(f"cannot write {p}: {exc}") from exc


def write_trace(trace: Trace, path: PathLike) -> None:
    _write(path, ("index", "level"), zip(trace.index.tolist(), trace.level.tolist()))


def write_series(index: Sequence[int], values: Sequence[float], path: PathLike) -> None:
    _write(path, ("index", "level"), zip(np.asarray(index).tolist(), np.asarray(values, dtype=float).tolist()))


def write_refill_report(
    events: Sequence[RefillEvent],
    truth: GroundTruth | None,
    path: PathLike,
    tolerance: int = 100,
) -> None:
    """Refill table; with ``truth`` each matched row also gets its error columns.

    Unmatched events leave the truth columns blank.
    """
    if truth is None:
        rows = [(e.start_index, e.stop_index, float(e.detected_volume)) for e in events]
        _write(path, REPORT_COLUMNS, rows)
        return
    matches, _, _ = match_events(events, truth, tolerance)
    by_event = {id(m.detected): m for m in matches}
    rows = []
    for e in events:
        m = by_event.get(id(e))
        extra = ("", "", "") if m is None else (m.truth_volume, m.error, m.percentage_error)
        rows.append((e.start_index, e.stop_index, float(e.detected_volume), *extra))
    _write(path, REPORT_COLUMNS + TRUTH_COLUMNS, rows)


def read_refill_report(path: PathLike) -> list[RefillEvent]:
    header, body = _read_rows(path)
    if tuple(header[:3]) != REPORT_COLUMNS:
        raise MalformedRow(1, f"expected columns {','.join(REPORT_COLUMNS)}")
    events = []
    for line, row in body:
        if len(row) != len(header):
            raise MalformedRow(line, f"expected {len(header)} fields, got {len(row)}")
        try:
            events.append(
                RefillEvent(
                    _parse_int(line, row[0], "start index"),
                    _parse_int(line, row[1], "stop index"),
                    _parse_float(line, row[2], "volume"),
                )
            )
        except MalformedRow:
            raise
        except ValueError as exc:
            raise MalformedRow(line, str(exc)) from None
    return sorted(events, key=lambda e: e.start_index)


def write_truth(truth: GroundTruth, path: PathLike) -> None:
    _write(path, ("index", "volume"), [(int(i), float(v)) for i, v in truth.refills])


def read_truth(path: PathLike) -> GroundTruth:
    """Refill labels from an ``index,volume`` file; the clean signal is left empty."""
    header, body = _read_rows(path)
    if tuple(header) != ("index", "volume"):
        raise MalformedRow(1, "expected columns index,volume")
    refills = []
    for line, row in body:
        if len(row) != 2:
            raise MalformedRow(line, f"expected 2 fields, got {len(row)}")
        volume = _parse_float(line, row[1], "volume")
        if not volume > 0:
            raise MalformedRow(line, f"volume must be positive, got {volume}")
        refills.append((_parse_int(line, row[0], "index"), volume))
    refills.sort()
    return GroundTruth.from_refills(refills)


def write_consumption(segments: Sequence[ConsumptionSegment], path: PathLike) -> None:
    _write(
        path,
        ("from_index", "to_index", "consumed_volume"),
        [(s.from_index, s.to_index, float(s.consumed_volume)) for s in segments],
    )


def parse_config(text: str) -> PipelineConfig:
    """Flat ``key = value`` lines; ``#`` starts a comment. Unknown keys are errors."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value.strip()
    return PipelineConfig.from_mapping(values)


def load_config(path: PathLike | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    return parse_config(text)
