"""Reaction-function estimation from a return histogram.

The observed return ``y`` is modelled as ``y - mu = R * (r - mu)`` with the
undistorted impact ``r ~ N(mu, sigma^2)``. Given a histogram of ``y``:

1. ``mu`` is the sample median and ``sigma`` is fixed by matching the
   normal's peak density to the mass of the bin(s) around the median
   (:func:`calibrate_normal`).
2. Each bin's mass is treated as ``width * pdf`` with the density held
   constant across the bin, and the normal density relation is solved for
   ``R`` at the bin midpoint (:func:`reaction_curve`).

The bin holding the median carries the convention ``R = 0``.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .empirical import EmpiricalDistribution, build_histogram, quantile
from .errors import CalibrationError, InputError

log = logging.getLogger(__name__)

SQRT_2PI = math.sqrt(2.0 * math.pi)

VALID = "valid"
CENTRAL = "central"
EMPTY_BIN = "empty_bin"
LOG_DOMAIN = "log_domain_violation"
STATUSES = (VALID, CENTRAL, EMPTY_BIN, LOG_DOMAIN)

CURVE_COLUMNS = ("r_mid", "value", "status", "delta_f", "model_mass")


@dataclass(frozen=True)
class HypotheticalNormal:
    mu: float
    sigma: float
    mu_minus: float
    mu_plus: float
    central_mass: float
    window: int = 0
    central_bin: int = 0
    clamped: bool = False

    def __post_init__(self):
        if not self.mu_minus <= self.mu <= self.mu_plus:
            raise CalibrationError(f"mu={self.mu} outside calibration interval [{self.mu_minus}, {self.mu_plus}]")
        if not 0.0 < self.central_mass <= 1.0 + 1e-12:
            raise CalibrationError(f"central mass {self.central_mass} outside (0, 1]")
        if not self.sigma > 0:
            raise CalibrationError(f"sigma must be positive, got {self.sigma}")

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.sigma
        return np.exp(-0.5 * z * z) / (SQRT_2PI * self.sigma)

    @property
    def peak_density(self) -> float:
        return 1.0 / (SQRT_2PI * self.sigma)


@dataclass(frozen=True)
class ReactionPoint:
    r_lo: float
    r_hi: float
    delta_f: float
    status: str
    value: float | None = None
    # empirical bin density over the normal's peak density
    ratio: float = math.nan

    @property
    def r_mid(self) -> float:
        return 0.5 * (self.r_lo + self.r_hi)

    @property
    def has_value(self) -> bool:
        return self.value is not None


@dataclass(frozen=True, eq=False)
class ReactionCurve:
    normal: HypotheticalNormal
    points: tuple[ReactionPoint, ...]
    source: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def r_mid(self) -> np.ndarray:
        return np.array([p.r_mid for p in self.points])

    @property
    def values(self) -> np.ndarray:
        """Reaction values with NaN where undefined."""
        return np.array([p.value if p.value is not None else math.nan for p in self.points])

    @property
    def ratios(self) -> np.ndarray:
        return np.array([p.ratio for p in self.points])

    @property
    def statuses(self) -> list[str]:
        return [p.status for p in self.points]

    def status_counts(self) -> dict[str, int]:
        c = Counter(self.statuses)
        return {s: c.get(s, 0) for s in STATUSES}

    def valid(self) -> list[ReactionPoint]:
        return [p for p in self.points if p.status == VALID]

    def nearest_valid(self, r: float) -> ReactionPoint | None:
        """Valid point whose midpoint is closest to ``r`` on the same side of ``mu``."""
        mu = self.normal.mu
        side = [p for p in self.valid() if (p.r_mid > mu) == (r > mu)]
        if not side:
            return None
        return min(side, key=lambda p: abs(p.r_mid - r))


def calibrate_normal(dist: EmpiricalDistribution, sample=None, window: int = 0, *,
                     mu: float | None = None) -> HypotheticalNormal:
    """Fix the undistorted normal from the histogram's centre.

    ``mu`` is the sample median (or the histogram median when no sample is
    given, or an explicit value). With ``c`` the bin holding ``mu``, the
    bins ``c - window .. c + window`` span ``[mu_minus, mu_plus]`` and

        sigma = (mu_plus - mu_minus) / (sqrt(2 pi) * central_mass)
    """
    if window < 0:
        raise InputError(f"calibration window must be >= 0, got {window}")
    if mu is None:
        mu = quantile(sample, 0.5) if sample is not None else dist.median()
    c = dist.bin_index(mu)
    first, last = c - window, c + window
    clamped = first < 0 or last > dist.bin_count - 1
    if clamped:
        log.warning("calibration window %d around bin %d exceeds histogram; clamped", window, c)
        first, last = max(first, 0), min(last, dist.bin_count - 1)
    mu_minus = float(dist.edges[first])
    mu_plus = float(dist.edges[last + 1])
    central_mass = float(dist.masses[first:last + 1].sum())
    if central_mass <= 0:
        raise CalibrationError(f"no mass in calibration bins {first}..{last}")
    sigma = (mu_plus - mu_minus) / (SQRT_2PI * central_mass)
    return HypotheticalNormal(mu, sigma, mu_minus, mu_plus, central_mass, window, c, clamped)


def reaction_curve(dist: EmpiricalDistribution, normal: HypotheticalNormal,
                   source: dict | None = None) -> ReactionCurve:
    """Invert each bin's mass into a reaction value at the bin midpoint.

    With ``A = sqrt(2 pi) sigma dF / width`` the bin value is
    ``|r_mid - mu| / (sigma sqrt(-2 ln A))``. Bins without mass, and bins
    denser than the normal's peak (``A >= 1``), get no value.
    """
    mu, sigma = normal.mu, normal.sigma
    central = dist.bin_index(mu)
    edges, masses = dist.edges, dist.masses
    points = []
    for i in range(dist.bin_count):
        lo, hi, dF = float(edges[i]), float(edges[i + 1]), float(masses[i])
        ratio = SQRT_2PI * sigma * dF / (hi - lo)
        if i == central:
            points.append(ReactionPoint(lo, hi, dF, CENTRAL, 0.0, ratio))
        elif dF == 0:
            points.append(ReactionPoint(lo, hi, dF, EMPTY_BIN, None, ratio))
        elif ratio >= 1:
            points.append(ReactionPoint(lo, hi, dF, LOG_DOMAIN, None, ratio))
        else:
            dev = abs(0.5 * (lo + hi) - mu)
            points.append(ReactionPoint(lo, hi, dF, VALID, dev / (sigma * math.sqrt(-2.0 * math.log(ratio))), ratio))
    meta = {"bin_count": dist.bin_count, "n": dist.n}
    meta.update(source or {})
    return ReactionCurve(normal, tuple(points), meta)


@dataclass(frozen=True)
class ModelMass:
    r_lo: float
    r_hi: float
    r_mid: float
    status: str
    delta_f: float
    model_mass: float


def reconstruct_density(curve: ReactionCurve) -> list[ModelMass]:
    """Per-bin masses implied by the normal and the reaction values.

    Valid bins get ``width * pdf(mu + (r_mid - mu) / R)``; the central bin
    gets ``width`` times the peak density. Bins without a value are left
    out.
    """
    mu, sigma = curve.normal.mu, curve.normal.sigma
    out = []
    for p in curve.points:
        if p.status == CENTRAL:
            mass = (p.r_hi - p.r_lo) / (SQRT_2PI * sigma)
        elif p.status == VALID:
            z = (p.r_mid - mu) / (sigma * p.value)
            mass = (p.r_hi - p.r_lo) / (SQRT_2PI * sigma) * math.exp(-0.5 * z * z)
        else:
            continue
        out.append(ModelMass(p.r_lo, p.r_hi, p.r_mid, p.status, p.delta_f, mass))
    return out


def self_consistency_error(curve: ReactionCurve) -> float:
    """Largest relative gap between a valid bin's mass and its reconstruction."""
    errs = [abs(m.model_mass - m.delta_f) / m.delta_f for m in reconstruct_density(curve) if m.status == VALID]
    return max(errs, default=0.0)


@dataclass(frozen=True)
class CurveSummary:
    """Crossings of ``R = 1`` and the positive-minus-negative asymmetry.

    ``crossings_pos`` / ``crossings_neg`` hold signed return levels, ordered
    outward from ``mu``; ``None`` means that side had too few valid points.
    """

    valid_pos: int
    valid_neg: int
    crossings_pos: tuple[float, ...] | None
    crossings_neg: tuple[float, ...] | None
    asymmetry: dict[int, float | None]

    def as_dict(self) -> dict:
        return {
            "valid_pos": self.valid_pos,
            "valid_neg": self.valid_neg,
            "crossings_pos": None if self.crossings_pos is None else list(self.crossings_pos),
            "crossings_neg": None if self.crossings_neg is None else list(self.crossings_neg),
            "asymmetry": {str(k): v for k, v in self.asymmetry.items()},
        }


MIN_SIDE_POINTS = 3


def _crossings(points: list[ReactionPoint]) -> tuple[float, ...]:
    found = []
    for a, b in zip(points, points[1:]):
        if (a.value < 1.0) != (b.value < 1.0):
            t = (1.0 - a.value) / (b.value - a.value)
            found.append(a.r_mid + t * (b.r_mid - a.r_mid))
    return tuple(found)


def curve_summary(curve: ReactionCurve, ks=(1, 2, 3)) -> CurveSummary:
    mu, sigma = curve.normal.mu, curve.normal.sigma
    valid = curve.valid()
    pos = sorted((p for p in valid if p.r_mid > mu), key=lambda p: p.r_mid)
    neg = sorted((p for p in valid if p.r_mid < mu), key=lambda p: -p.r_mid)
    ok_pos, ok_neg = len(pos) >= MIN_SIDE_POINTS, len(neg) >= MIN_SIDE_POINTS

    asym: dict[int, float | None] = {}
    for k in ks:
        if not (ok_pos and ok_neg):
            asym[k] = None
            continue
        up = min(pos, key=lambda p: abs(p.r_mid - (mu + k * sigma)))
        down = min(neg, key=lambda p: abs(p.r_mid - (mu - k * sigma)))
        asym[k] = up.value - down.value

    return CurveSummary(
        valid_pos=len(pos),
        valid_neg=len(neg),
        crossings_pos=_crossings(pos) if ok_pos else None,
        crossings_neg=_crossings(neg) if ok_neg else None,
        asymmetry=asym,
    )


def estimate(sample, bin_count: int = 150, window: int = 0, source: dict | None = None):
    """Histogram, calibration and inversion in one call.

    Returns ``(dist, normal, curve)``.
    """
    dist = build_histogram(sample, bin_count)
    normal = calibrate_normal(dist, sample, window)
    return dist, normal, reaction_curve(dist, normal, source)
