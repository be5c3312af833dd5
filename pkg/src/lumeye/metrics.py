"""Scoring for recognition studies.

A response record is one participant answering one stimulus.  Command
stimuli are scored 0..100 by several raters and aggregated by plain
averaging; gaze stimuli collect reported angles and aggregate with the
circular mean, so 350 and 10 average to 0 rather than 180.

Accuracy is the mean aggregated score over command records, expressed on
the 0..100 scale.  Operational accuracy restricts that mean to records
whose confidence is at least OPERATIONAL_CONFIDENCE; when nothing clears
the bar it returns None rather than pretending a number exists.

Inter-rater agreement uses Fleiss' kappa over a subjects-by-categories
count table.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import normalize_angle

CONDITIONS = ("trained", "oled", "untrained")
OPERATIONAL_CONFIDENCE = 6.0


class MetricsError(ValueError):
    """Raised for malformed records, tables or response files."""


@dataclass(frozen=True)
class ResponseRecord:
    participant: str
    condition: str
    shown: str
    responses: tuple[float, ...]
    confidence: float
    time_to_answer_s: float

    def __post_init__(self) -> None:
        if self.condition not in CONDITIONS:
            raise MetricsError(
                f"condition must be one of {CONDITIONS}, got {self.condition!r}"
            )
        if not self.responses:
            raise MetricsError("record needs at least one response")
        if not self.is_gaze:
            for s in self.responses:
                if not 0.0 <= s <= 100.0:
                    raise MetricsError(f"rater score {s!r} outside 0..100")
        if self.time_to_answer_s < 0:
            raise MetricsError("time_to_answer_s must be >= 0")

    @property
    def is_gaze(self) -> bool:
        """Gaze trials carry the shown angle in degrees; commands carry an id."""
        try:
            float(self.shown)
            return True
        except ValueError:
            return False


def circular_mean(angles_deg: list[float] | tuple[float, ...]) -> float:
    """Direction of the resultant vector, in [0, 360)."""
    if not angles_deg:
        raise MetricsError("circular mean of nothing")
    x = sum(math.cos(math.radians(a)) for a in angles_deg)
    y = sum(math.sin(math.radians(a)) for a in angles_deg)
    if math.hypot(x, y) < 1e-12:
        raise MetricsError("angles cancel out; mean direction undefined")
    return normalize_angle(math.degrees(math.atan2(y, x)))


def aggregate_score(record: ResponseRecord) -> float:
    """One number per record: mean score, or mean reported angle for gaze."""
    if record.is_gaze:
        return circular_mean(record.responses)
    return sum(record.responses) / len(record.responses)


def circular_error(a_deg: float, b_deg: float) -> float:
    """Shortest angular distance, in [0, 180]."""
    d = abs(normalize_angle(a_deg) - normalize_angle(b_deg))
    return min(d, 360.0 - d)


def accuracy(records: list[ResponseRecord]) -> float:
    """Mean aggregated score over command records, 0..100."""
    scores = [aggregate_score(r) for r in records if not r.is_gaze]
    if not scores:
        raise MetricsError("no command records to score")
    return sum(scores) / len(scores)


def operational_accuracy(
    records: list[ResponseRecord],
    threshold: float = OPERATIONAL_CONFIDENCE,
) -> float | None:
    """Accuracy over confident answers only; None when no record qualifies."""
    confident = [r for r in records if not r.is_gaze and r.confidence >= threshold]
    if not confident:
        return None
    return accuracy(confident)


def mean_gaze_error(records: list[ResponseRecord]) -> float | None:
    """Mean circular error of aggregated reported angles, or None."""
    errors = [
        circular_error(aggregate_score(r), float(r.shown))
        for r in records
        if r.is_gaze
    ]
    if not errors:
        return None
    return sum(errors) / len(errors)


def adjust_time(records: list[ResponseRecord], swim_time_s: float) -> list[ResponseRecord]:
    """Add travel time to the remote-display condition.

    Answering from a handheld display means swimming to the vehicle first;
    records from the 'oled' condition get that time added so timing
    comparisons are like for like.  Returns new records.
    """
    if swim_time_s < 0:
        raise MetricsError("swim time must be >= 0")
    return [
        replace(r, time_to_answer_s=r.time_to_answer_s + swim_time_s)
        if r.condition == "oled"
        else r
        for r in records
    ]


def mean_time(records: list[ResponseRecord]) -> float | None:
    if not records:
        return None
    return sum(r.time_to_answer_s for r in records) / len(records)


# ---------------------------------------------------------------------------
# Fleiss' kappa
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FleissResult:
    kappa: float
    degenerate: bool = False


def fleiss_kappa(table: list[list[int]]) -> FleissResult:
    """Fleiss' kappa for a subjects x categories table of rating counts.

    Args:
        table: one row per subject, one column per category; cell (i, j)
            counts raters who put subject i in category j.  Every row must
            sum to the same number of raters, at least 2.

    Returns:
        FleissResult with the kappa value.  When expected agreement is 1
        (all ratings in a single category) chance cannot be corrected for;
        by convention kappa is 1.0 and the degenerate flag is set.
    """
    arr = np.asarray(table, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 2:
        raise MetricsError("table must be subjects x categories with >= 2 categories")
    if (arr < 0).any():
        raise MetricsError("rating counts must be non-negative")
    raters = arr.sum(axis=1)
    n = int(raters[0])
    if n < 2 or not (raters == n).all():
        raise MetricsError("every subject needs the same rater count, >= 2")
    arr = arr.astype(float)
    subjects = arr.shape[0]
    p_i = ((arr * arr).sum(axis=1) - n) / (n * (n - 1))
    p_bar = p_i.mean()
    p_cat = arr.sum(axis=0) / (subjects * n)
    p_e = float((p_cat * p_cat).sum())
    if p_e >= 1.0:
        return FleissResult(kappa=1.0, degenerate=True)
    return FleissResult(kappa=float((p_bar - p_e) / (1.0 - p_e)))


# ---------------------------------------------------------------------------
# Response files and reports
# ---------------------------------------------------------------------------

_RESPONSE_HEADERS = ("ratings", "rater_scores", "reported_angles")


def parse_responses(text: str) -> list[ResponseRecord]:
    """Parse the response CSV.

    Columns: participant, condition, shown, ratings (semicolon separated),
    confidence, time_s.  The fourth column may also be titled rater_scores
    or reported_angles.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise MetricsError("empty response file") from None
    header = [h.strip() for h in header]
    expected = ["participant", "condition", "shown", None, "confidence", "time_s"]
    if len(header) != 6 or any(
        e is not None and h != e for h, e in zip(header, expected)
    ) or header[3] not in _RESPONSE_HEADERS:
        raise MetricsError(
            "header must be participant,condition,shown,"
            "ratings|rater_scores|reported_angles,confidence,time_s"
        )
    records = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 6:
            raise MetricsError(f"line {line_no}: expected 6 columns, got {len(row)}")
        participant, condition, shown, scores_raw, conf_raw, time_raw = (
            c.strip() for c in row
        )
        try:
            responses = tuple(float(s) for s in scores_raw.split(";") if s.strip())
            confidence = float(conf_raw)
            time_s = float(time_raw)
        except ValueError:
            raise MetricsError(f"line {line_no}: numeric field is not a number") from None
        try:
            records.append(
                ResponseRecord(participant, condition, shown, responses,
                               confidence, time_s)
            )
        except MetricsError as exc:
            raise MetricsError(f"line {line_no}: {exc}") from None
    return records


def parse_rating_table(text: str) -> list[list[int]]:
    """Parse a rating-count table: one CSV row of integers per subject."""
    rows = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([int(c.strip()) for c in line.split(",")])
        except ValueError:
            raise MetricsError(f"line {line_no}: counts must be integers") from None
    if not rows:
        raise MetricsError("empty rating table")
    return rows


def summarize(
    records: list[ResponseRecord],
    rating_table: list[list[int]] | None = None,
) -> dict[str, object]:
    """All study numbers in one ordered mapping, ready for reporting."""
    out: dict[str, object] = {"records": len(records)}
    command = [r for r in records if not r.is_gaze]
    gaze = [r for r in records if r.is_gaze]
    out["command_records"] = len(command)
    out["gaze_records"] = len(gaze)
    out["accuracy"] = accuracy(records) if command else None
    out["operational_accuracy"] = operational_accuracy(records)
    out["mean_time_s"] = mean_time(records)
    out["gaze_mean_error_deg"] = mean_gaze_error(records)
    for condition in CONDITIONS:
        subset = [r for r in command if r.condition == condition]
        out[f"condition.{condition}.accuracy"] = accuracy(subset) if subset else None
    for shown in sorted({r.shown for r in command}):
        subset = [r for r in command if r.shown == shown]
        out[f"luceme.{shown}.accuracy"] = accuracy(subset)
    if rating_table is not None:
        result = fleiss_kappa(rating_table)
        out["fleiss_kappa"] = result.kappa
        out["fleiss_degenerate"] = result.degenerate
    return out


def report_kv(summary: dict[str, object]) -> str:
    """Line-delimited key=value form of a summary."""
    lines = []
    for key, value in summary.items():
        if value is None:
            lines.append(f"{key}=NA")
        elif isinstance(value, bool):
            lines.append(f"{key}={'true' if value else 'false'}")
        elif isinstance(value, float):
            lines.append(f"{key}={value:.6g}")
        else:
            lines.append(f"{key}={value}")
    return "\n".join(lines) + "\n"


def report_text(summary: dict[str, object]) -> str:
    """Short human-readable form of a summary."""
    def fmt(key, suffix=""):
        v = summary.get(key)
        return "n/a" if v is None else f"{v:.1f}{suffix}"

    lines = [
        f"records: {summary['records']} "
        f"({summary['command_records']} command, {summary['gaze_records']} gaze)",
        f"accuracy: {fmt('accuracy')}",
        f"operational accuracy (confidence >= {OPERATIONAL_CONFIDENCE:g}): "
        f"{fmt('operational_accuracy')}",
        f"mean answer time: {fmt('mean_time_s', ' s')}",
        f"mean gaze error: {fmt('gaze_mean_error_deg', ' deg')}",
    ]
    if "fleiss_kappa" in summary:
        flag = " (degenerate)" if summary.get("fleiss_degenerate") else ""
        lines.append(f"fleiss kappa: {summary['fleiss_kappa']:.3f}{flag}")
    return "\n".join(lines) + "\n"
