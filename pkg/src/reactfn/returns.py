"""Return series at daily and k-minute scales.

Minute-scale returns never cross a trading-day boundary: each session is
sampled on its own grid of k-minute steps anchored at the session's first
minute, and minutes missing from the data are skipped, not filled.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime

import numpy as np

from .errors import EmptySeriesError, InputError
from .ingest import PriceSeries

KINDS = ("simple", "log")


@dataclass(frozen=True)
class ReturnScale:
    kind: str = "daily"
    k: int = 1

    def __post_init__(self):
        if self.kind not in ("daily", "minutes"):
            raise InputError(f"unknown scale kind {self.kind!r}")
        if self.k < 1:
            raise InputError(f"minute step must be >= 1, got {self.k}")

    @classmethod
    def daily(cls) -> ReturnScale:
        return cls("daily", 1)

    @classmethod
    def minutes(cls, k: int) -> ReturnScale:
        return cls("minutes", k)

    @classmethod
    def parse(cls, text: str) -> ReturnScale:
        """Accepts ``1d``/``daily`` or ``<N>m`` (``1m``, ``5m``, ``15m`` ...)."""
        t = text.strip().lower()
        if t in ("1d", "d", "daily", "day"):
            return cls.daily()
        m = re.fullmatch(r"(\d+)\s*(m|min|minute|minutes)", t)
        if m and int(m.group(1)) >= 1:
            return cls.minutes(int(m.group(1)))
        raise InputError(f"unrecognised scale {text!r}; use 1d or <N>m")

    @property
    def label(self) -> str:
        return "1d" if self.kind == "daily" else f"{self.k}m"


@dataclass(frozen=True)
class ReturnSeries:
    """Observed returns of one instrument at one scale.

    ``start`` and ``end`` hold, for each return, the indices of the two
    price points it was computed from (empty when the values did not come
    from a price series).
    """

    instrument: str
    scale: ReturnScale
    kind: str
    values: np.ndarray
    start: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64), compare=False)
    end: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64), compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown return kind {self.kind!r}")
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    @property
    def sample_count(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.sample_count

    @classmethod
    def from_values(cls, values, instrument: str = "sample", kind: str = "simple",
                    scale: ReturnScale | None = None) -> ReturnSeries:
        return cls(instrument, scale or ReturnScale.daily(), kind, np.asarray(values, dtype=float))


_EPOCH = datetime(1970, 1, 1)


def _minute_key(ts: datetime) -> int:
    # whole minutes in the timestamp's own clock; seconds are truncated
    return int((ts.replace(tzinfo=None) - _EPOCH).total_seconds() // 60)


def _session_minute_grid(indices: list[int], series: PriceSeries) -> dict[int, int]:
    """Minute offset from session start -> index of the last point in that minute."""
    grid: dict[int, int] = {}
    first = None
    for i in indices:
        key = _minute_key(series.points[i].timestamp)
        if first is None:
            first = key
        grid[key - first] = i
    return grid


def _pairs(series: PriceSeries, scale: ReturnScale, overlapping: bool) -> tuple[list[int], list[int]]:
    groups: dict = {}
    for i, p in enumerate(series.points):
        groups.setdefault(p.session, []).append(i)

    start: list[int] = []
    end: list[int] = []
    if scale.kind == "daily":
        closes = [idx[-1] for idx in groups.values()]
        start.extend(closes[:-1])
        end.extend(closes[1:])
        return start, end

    k = scale.k
    for indices in groups.values():
        grid = _session_minute_grid(indices, series)
        if overlapping:
            offsets = sorted(grid)
        else:
            offsets = range(0, max(grid) + 1, k)
        for m in offsets:
            if m in grid and m + k in grid:
                start.append(grid[m])
                end.append(grid[m + k])
    return start, end


def compute_returns(series: PriceSeries, scale: ReturnScale | None = None, kind: str = "simple",
                    overlapping: bool = False) -> ReturnSeries:
    """Returns of ``series`` at ``scale``.

    Daily returns are close-to-close using each session's last price.
    Minute returns use non-overlapping k-minute steps within each session
    unless ``overlapping`` is set, in which case every minute present
    starts a k-minute return.
    """
    scale = scale or ReturnScale.daily()
    if kind not in KINDS:
        raise InputError(f"unknown return kind {kind!r}")
    start, end = _pairs(series, scale, overlapping)
    if not start:
        raise EmptySeriesError(f"{series.instrument}: no usable price pairs at scale {scale.label}")
    prices = series.prices
    s = np.asarray(start, dtype=np.int64)
    e = np.asarray(end, dtype=np.int64)
    ratio = prices[e] / prices[s]
    values = np.log(ratio) if kind == "log" else ratio - 1.0
    return ReturnSeries(series.instrument, scale, kind, values, s, e)
