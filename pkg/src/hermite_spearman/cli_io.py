"""File formats and the tick-to-returns pipeline used by the ``corr`` command."""
from __future__ import annotations

import csv
import json
import math
import re
import sys
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, NamedTuple

import numpy as np

from .errors import InputError


class TickRecord(NamedTuple):
    timestamp_ms: int
    bid: float
    ask: float


@dataclass(frozen=True)
class TickSeries:
    """Top-of-book quotes of one instrument, timestamps in epoch milliseconds."""

    timestamp_ms: np.ndarray
    bid: np.ndarray
    ask: np.ndarray

    def __post_init__(self):
        if not (self.timestamp_ms.shape == self.bid.shape == self.ask.shape):
            raise InputError("tick columns differ in length")
        if np.any(self.bid <= 0) or np.any(self.ask <= 0):
            raise InputError("quotes must be positive")
        if np.any(self.ask < self.bid):
            raise InputError("ask below bid")
        if np.any(np.diff(self.timestamp_ms) < 0):
            raise InputError("tick timestamps must be non-decreasing")

    @classmethod
    def from_records(cls, records: Iterable[TickRecord]) -> "TickSeries":
        rows = list(records)
        return cls(
            np.array([r.timestamp_ms for r in rows], dtype=np.int64),
            np.array([r.bid for r in rows], dtype=float),
            np.array([r.ask for r in rows], dtype=float),
        )

    @property
    def mid(self) -> np.ndarray:
        return (self.bid + self.ask) / 2.0

    def __len__(self) -> int:
        return self.timestamp_ms.size


class ReturnSeries(NamedTuple):
    """Aligned basis-point log returns; ``timestamp_ms[j]`` closes return j."""

    timestamp_ms: np.ndarray
    r1: np.ndarray
    r2: np.ndarray


_INTERVAL = re.compile(r"^\s*(\d+(?:\.\d+)?)\s*(ms|s|m|min|h)?\s*$")
_UNIT_MS = {"ms": 1, "s": 1000, None: 1000, "m": 60_000, "min": 60_000, "h": 3_600_000}


def parse_interval(text: str) -> int:
    """'60s', '1m', '500ms', '2h' or bare seconds -> milliseconds."""
    match = _INTERVAL.match(str(text))
    if not match:
        raise InputError(f"cannot parse interval {text!r}")
    ms = float(match.group(1)) * _UNIT_MS[match.group(2)]
    if ms < 1 or ms != int(ms):
        raise InputError(f"interval must be a positive whole number of milliseconds, got {text!r}")
    return int(ms)


def previous_tick_prices(ts: np.ndarray, prices: np.ndarray, boundaries: np.ndarray) -> np.ndarray:
    """Price of the latest tick at or before each boundary; NaN before the first tick."""
    pos = np.searchsorted(ts, boundaries, side="right") - 1
    out = np.where(pos >= 0, prices[np.maximum(pos, 0)], np.nan)
    return out


def log_returns_bp(prices: np.ndarray) -> np.ndarray:
    return 1e4 * np.diff(np.log(prices))


def previous_tick_resample(left: TickSeries, right: TickSeries, interval_ms: int) -> ReturnSeries:
    """Sample both mid-price series on a common grid and return aligned bp log returns.

    Grid points are epoch multiples of ``interval_ms`` lying between the later
    first tick and the earlier last tick of the two instruments.
    """
    if interval_ms <= 0:
        raise InputError("interval must be positive")
    if len(left) < 2 or len(right) < 2:
        raise InputError("each instrument needs at least 2 ticks")
    start = max(int(left.timestamp_ms[0]), int(right.timestamp_ms[0]))
    end = min(int(left.timestamp_ms[-1]), int(right.timestamp_ms[-1]))
    first = -(-start // interval_ms) * interval_ms
    last = (end // interval_ms) * interval_ms
    if last <= first:
        raise InputError("the instruments' tick histories do not overlap by a full interval")
    boundaries = np.arange(first, last + 1, interval_ms, dtype=np.int64)
    p1 = previous_tick_prices(left.timestamp_ms, left.mid, boundaries)
    p2 = previous_tick_prices(right.timestamp_ms, right.mid, boundaries)
    return ReturnSeries(boundaries[1:], log_returns_bp(p1), log_returns_bp(p2))


def _numeric_row(row: list[str], width: int) -> list[float] | None:
    if len(row) < width:
        return None
    try:
        return [float(v) for v in row[:width]]
    except ValueError:
        return None


_STDERR = object()


def iter_pairs(stream: IO[str], warn=_STDERR) -> Iterator[tuple[float, float]]:
    """Yield ``(x, y)`` from the first two columns of a CSV; a non-numeric first row is a header.

    Malformed rows are skipped with a warning on ``warn`` (standard error by
    default, ``None`` for silence).
    """
    if warn is _STDERR:
        warn = sys.stderr
    skipped = 0
    for lineno, row in enumerate(csv.reader(stream), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        values = _numeric_row(row, 2)
        if values is None:
            if lineno == 1:
                continue
            skipped += 1
            if warn is not None:
                print(f"warning: skipping malformed row {lineno}: {','.join(row)!r}", file=warn)
            continue
        yield values[0], values[1]
    if skipped and warn is not None:
        print(f"warning: {skipped} malformed row(s) skipped", file=warn)


def read_pairs_csv(path: str) -> np.ndarray:
    with open(path, newline="") as fh:
        return np.array(list(iter_pairs(fh, warn=None)), dtype=float).reshape(-1, 2)


def read_ticks_csv(path: str) -> TickSeries:
    """Read ``timestamp_ms,bid,ask`` rows (header optional)."""
    records = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            values = _numeric_row(row, 3)
            if values is None:
                if lineno == 1:
                    continue
                raise InputError(f"{path}:{lineno}: malformed tick row {row!r}")
            ts, bid, ask = values
            if ts != int(ts):
                raise InputError(f"{path}:{lineno}: timestamp must be integral milliseconds")
            records.append(TickRecord(int(ts), bid, ask))
    return TickSeries.from_records(records)


def write_ticks_csv(path: str, ticks: TickSeries) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp_ms", "bid", "ask"])
        for t, b, a in zip(ticks.timestamp_ms.tolist(), ticks.bid.tolist(), ticks.ask.tolist()):
            w.writerow([t, repr(b), repr(a)])


def write_returns_csv(path: str, returns: ReturnSeries) -> None:
    # x,y first so the file feeds straight into `corr stream`
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "timestamp_ms"])
        for r1, r2, t in zip(returns.r1.tolist(), returns.r2.tolist(), returns.timestamp_ms.tolist()):
            w.writerow([repr(r1), repr(r2), t])


def write_pairs_csv(path: str, x, y) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y"])
        for a, b in zip(np.asarray(x, float).tolist(), np.asarray(y, float).tolist()):
            w.writerow([repr(a), repr(b)])


def write_rows_csv(path_or_fh, rows: list[dict]) -> None:
    """Write dict rows; floats use the shortest repr that round-trips exactly."""
    if not rows:
        raise InputError("no rows to write")
    fields = list(rows[0])

    def _emit(fh):
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for row in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})

    if hasattr(path_or_fh, "write"):
        _emit(path_or_fh)
    else:
        with open(path_or_fh, "w", newline="") as fh:
            _emit(fh)


def json_line(record: dict) -> str:
    # json serializes floats with repr, which round-trips exactly; NaN becomes null
    clean = {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in record.items()}
    return json.dumps(clean)
