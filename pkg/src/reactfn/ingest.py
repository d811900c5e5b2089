"""Price file loading and trading-session structure."""

from __future__ import annotations

import csv
import logging
import math
import re
import statistics
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path

import numpy as np

from .errors import EmptySeriesError, FormatError, InputError, RowError

log = logging.getLogger(__name__)

FORMATS = ("simple", "ohlc")

# plain decimal only: no thousands separators, underscores, nan or inf
_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


@dataclass(frozen=True)
class PricePoint:
    timestamp: datetime
    price: float

    @property
    def session(self) -> date:
        return self.timestamp.date()


@dataclass(frozen=True)
class PriceSeries:
    """Prices of one instrument, sorted by timestamp.

    The trading day of a point is the calendar date of its timestamp in
    the file's own clock; no exchange calendar is consulted.
    """

    instrument: str
    points: tuple[PricePoint, ...]
    reordered: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.points:
            raise EmptySeriesError(f"{self.instrument}: price series is empty")
        for a, b in zip(self.points, self.points[1:]):
            if not a.timestamp < b.timestamp:
                raise InputError(f"{self.instrument}: timestamps not strictly increasing at {b.timestamp}")

    def __len__(self) -> int:
        return len(self.points)

    def session_of(self, ts: datetime) -> date:
        return ts.date()

    @property
    def timestamps(self) -> list[datetime]:
        return [p.timestamp for p in self.points]

    @property
    def prices(self) -> np.ndarray:
        return np.array([p.price for p in self.points], dtype=float)

    def sessions(self) -> dict[date, list[PricePoint]]:
        """Points grouped by trading day, in chronological order."""
        out: dict[date, list[PricePoint]] = {}
        for p in self.points:
            out.setdefault(p.session, []).append(p)
        return out


@dataclass(frozen=True)
class SessionReport:
    count: int
    min_points: int
    median_points: float
    max_points: int
    sessions: tuple[tuple[date, int], ...]


def parse_timestamp(text: str) -> datetime:
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    return datetime.fromisoformat(text)


def parse_price(text: str) -> float:
    text = text.strip()
    if not _NUMBER.match(text):
        raise ValueError(f"not a plain decimal number: {text!r}")
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"non-finite price: {text!r}")
    return value


def _looks_like_header(row: list[str]) -> bool:
    try:
        parse_timestamp(row[0])
        return False
    except (ValueError, IndexError):
        return True


def _column_indices(header: list[str] | None, fmt: str, width: int) -> tuple[int, int]:
    if header is None:
        if fmt == "simple":
            if width < 2:
                raise FormatError("simple format needs columns timestamp,price")
            return 0, 1
        if width < 5:
            raise FormatError("ohlc format needs columns timestamp,open,high,low,close")
        return 0, 4
    names = [h.strip().lower() for h in header]
    wanted = "price" if fmt == "simple" else "close"
    if "timestamp" not in names:
        raise FormatError(f"header has no timestamp column: {header}")
    if wanted not in names:
        raise FormatError(f"header has no {wanted} column: {header}")
    return names.index("timestamp"), names.index(wanted)


def load_prices(path: str | Path, format: str = "simple", instrument: str | None = None) -> PriceSeries:
    """Read a price CSV into a validated, sorted :class:`PriceSeries`.

    ``format`` is ``"simple"`` (timestamp,price; header optional) or
    ``"ohlc"`` (timestamp,open,high,low,close; the close is the price).
    Rows out of chronological order are sorted and counted in
    ``series.reordered``. Duplicate timestamps are an error.
    """
    if format not in FORMATS:
        raise FormatError(f"unknown format {format!r}, expected one of {FORMATS}")
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc

    rows = [(i, r) for i, r in enumerate(csv.reader(text.splitlines()), start=1) if r and any(c.strip() for c in r)]
    if not rows:
        raise EmptySeriesError(f"{path}: no data rows")

    header = None
    if _looks_like_header(rows[0][1]):
        header = rows[0][1]
        rows = rows[1:]
    if not rows:
        raise EmptySeriesError(f"{path}: no data rows")
    ts_col, px_col = _column_indices(header, format, len(rows[0][1]))

    points: list[PricePoint] = []
    reordered = 0
    for lineno, row in rows:
        if len(row) <= max(ts_col, px_col):
            raise RowError(lineno, f"expected at least {max(ts_col, px_col) + 1} columns, got {len(row)}")
        try:
            ts = parse_timestamp(row[ts_col])
        except ValueError as exc:
            raise RowError(lineno, f"unparseable timestamp {row[ts_col]!r}") from exc
        try:
            price = parse_price(row[px_col])
        except ValueError as exc:
            raise RowError(lineno, str(exc)) from exc
        if price <= 0:
            raise RowError(lineno, f"non-positive price {price!r}")
        if points:
            try:
                if ts < points[-1].timestamp:
                    reordered += 1
            except TypeError as exc:
                raise RowError(lineno, "mixes timestamps with and without UTC offset") from exc
        points.append(PricePoint(ts, price))

    points.sort(key=lambda p: p.timestamp)
    for a, b in zip(points, points[1:]):
        if a.timestamp == b.timestamp:
            raise InputError(f"{path}: duplicate timestamp {b.timestamp.isoformat()}")
    if reordered:
        log.warning("%s: %d rows out of chronological order, sorted", path, reordered)

    return PriceSeries(
        instrument=instrument or path.stem,
        points=tuple(points),
        reordered=reordered,
        meta={"path": str(path), "format": format, "rows": len(points)},
    )


def validate_sessions(series: PriceSeries) -> SessionReport:
    groups = series.sessions()
    sizes = [len(v) for v in groups.values()]
    return SessionReport(
        count=len(groups),
        min_points=min(sizes),
        median_points=statistics.median(sizes),
        max_points=max(sizes),
        sessions=tuple((d, len(v)) for d, v in groups.items()),
    )
