"""Equal-width histogram, empirical CDF and quantiles of a return sample."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRangeError, EmptySeriesError, InputError
from .returns import ReturnSeries

DEFAULT_BINS = 150

HISTOGRAM_COLUMNS = ("edge_lo", "edge_hi", "count", "rel_freq", "density")


def _values(sample) -> np.ndarray:
    if isinstance(sample, ReturnSeries):
        return sample.values
    return np.asarray(sample, dtype=float).ravel()


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    """Histogram of a return sample on ``bin_count`` equal-width bins.

    ``masses`` are the per-bin probability masses. For a histogram built
    from a sample they are ``counts / n`` and sum to one; a distribution
    built from exact masses (:meth:`from_masses`) has no counts and its
    masses may sum to less than one when the edges do not cover the
    whole support.
    """

    edges: np.ndarray
    masses: np.ndarray
    counts: np.ndarray | None = None
    n: int | None = None

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        masses = np.asarray(self.masses, dtype=float)
        if edges.ndim != 1 or edges.size < 2:
            raise InputError("need at least one bin")
        if masses.shape != (edges.size - 1,):
            raise InputError("masses must have one entry per bin")
        if not np.all(np.diff(edges) > 0):
            raise InputError("bin edges must be strictly increasing")
        if np.any(masses < 0):
            raise InputError("bin masses must be non-negative")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "masses", masses)

    @classmethod
    def from_masses(cls, edges, masses) -> EmpiricalDistribution:
        return cls(np.asarray(edges, dtype=float), np.asarray(masses, dtype=float))

    @property
    def bin_count(self) -> int:
        return self.masses.size

    @property
    def lo(self) -> float:
        return float(self.edges[0])

    @property
    def hi(self) -> float:
        return float(self.edges[-1])

    @property
    def bin_width(self) -> float:
        return (self.hi - self.lo) / self.bin_count

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def mids(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def rel_freq(self) -> np.ndarray:
        return self.masses

    @property
    def density(self) -> np.ndarray:
        return self.masses / self.widths

    def bin_index(self, x: float) -> int:
        """Index of the bin (edges[i], edges[i+1]] holding ``x``; ``lo`` maps to bin 0."""
        i = int(np.searchsorted(self.edges, x, side="left")) - 1
        return min(max(i, 0), self.bin_count - 1)

    def cdf(self, x: float) -> float:
        """Mass at or below ``x``, uniform within each bin, clamped to the range."""
        x = min(max(x, self.lo), self.hi)
        i = int(np.searchsorted(self.edges, x, side="right")) - 1
        if i >= self.bin_count:
            return float(self.masses.sum())
        below = float(self.masses[:i].sum())
        frac = (x - self.edges[i]) / (self.edges[i + 1] - self.edges[i])
        return below + float(self.masses[i]) * frac

    def median(self) -> float:
        """Median by inverting the within-bin-uniform CDF at half the total mass."""
        cum = np.concatenate([[0.0], np.cumsum(self.masses)])
        target = 0.5 * cum[-1]
        i = int(np.searchsorted(cum, target, side="left")) - 1
        i = min(max(i, 0), self.bin_count - 1)
        if self.masses[i] == 0:
            return float(self.edges[i + 1])
        frac = (target - cum[i]) / self.masses[i]
        return float(self.edges[i] + frac * (self.edges[i + 1] - self.edges[i]))

    def rows(self) -> list[tuple]:
        counts = self.counts if self.counts is not None else [None] * self.bin_count
        dens = self.density
        return [
            (self.edges[i], self.edges[i + 1], counts[i], self.masses[i], dens[i])
            for i in range(self.bin_count)
        ]


def build_histogram(returns, bin_count: int = DEFAULT_BINS) -> EmpiricalDistribution:
    """Histogram over ``[min, max]`` of the sample with ``bin_count`` equal bins.

    Bins are half-open ``[a, b)`` except the last, which also holds the
    maximum.
    """
    x = _values(returns)
    if x.size == 0:
        raise EmptySeriesError("cannot build a histogram of an empty sample")
    if bin_count < 1:
        raise InputError(f"bin_count must be >= 1, got {bin_count}")
    if not np.all(np.isfinite(x)):
        raise InputError("sample contains non-finite values")
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        raise DegenerateRangeError(f"all {x.size} values equal {lo!r}; histogram range is empty")
    edges = np.linspace(lo, hi, bin_count + 1)
    idx = np.searchsorted(edges, x, side="right") - 1
    np.clip(idx, 0, bin_count - 1, out=idx)
    counts = np.bincount(idx, minlength=bin_count)
    return EmpiricalDistribution(edges, counts / x.size, counts, int(x.size))


def quantile(sample, q: float) -> float:
    """Interpolated order statistic at position ``q * (n - 1)`` of the sorted sample."""
    if not 0.0 <= q <= 1.0 or math.isnan(q):
        raise InputError(f"quantile level must lie in [0, 1], got {q}")
    x = np.sort(_values(sample))
    if x.size == 0:
        raise EmptySeriesError("quantile of an empty sample")
    p = q * (x.size - 1)
    i = int(math.floor(p))
    if i >= x.size - 1:
        return float(x[-1])
    frac = p - i
    return float(x[i] + frac * (x[i + 1] - x[i]))


def cdf_between(dist: EmpiricalDistribution, a: float, b: float) -> float:
    """Mass in ``(a, b]`` under the uniform-within-bin rule."""
    if a > b:
        raise InputError(f"cdf_between needs a <= b, got a={a}, b={b}")
    return dist.cdf(b) - dist.cdf(a)
