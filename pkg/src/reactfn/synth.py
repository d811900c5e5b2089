"""Synthetic returns from a known reaction function, and exact oracles.

A sample is ``g(r) = mu + R(r) (r - mu)`` with ``r ~ N(mu, sigma^2)``.
Normal draws use inverse-CDF sampling: 53-bit uniforms from numpy's
PCG64 generator, mapped onto the open interval (0, 1), through
``scipy.special.ndtri``. Identical specs give identical bytes.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path

import numpy as np
from scipy import special

from .errors import InputError, SpecError
from .returns import ReturnScale, ReturnSeries

SHAPES = {
    "constant": ("c",),
    "linear_vee": ("a",),
    "asymmetric": ("a_pos", "a_neg"),
    "power": ("p", "a"),
}

# validation grid for R >= 0 and monotone g
GRID_POINTS = 10_000
GRID_HALF_WIDTH = 6.0
# bracket for inverting g, in units of sigma
INVERSE_HALF_WIDTH = 8.0
BISECTION_TOL = 1e-12


class CoverageWarning(UserWarning):
    """Bin edges reach beyond the image of g over mu +/- 8 sigma."""


@dataclass(frozen=True)
class ReactionShape:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in SHAPES:
            raise SpecError(f"unknown reaction kind {self.kind!r}; expected one of {sorted(SHAPES)}")
        names = SHAPES[self.kind]
        if set(self.params) != set(names):
            raise SpecError(f"{self.kind} takes parameters {names}, got {sorted(self.params)}")
        for k, v in self.params.items():
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                raise SpecError(f"parameter {k} must be a finite number, got {v!r}")
        if self.kind == "power" and self.params["p"] <= 0:
            raise SpecError("power exponent p must be positive")

    @classmethod
    def constant(cls, c: float) -> ReactionShape:
        return cls("constant", {"c": c})

    @classmethod
    def linear_vee(cls, a: float) -> ReactionShape:
        return cls("linear_vee", {"a": a})

    @classmethod
    def asymmetric(cls, a_pos: float, a_neg: float) -> ReactionShape:
        return cls("asymmetric", {"a_pos": a_pos, "a_neg": a_neg})

    @classmethod
    def power(cls, p: float, a: float) -> ReactionShape:
        return cls("power", {"p": p, "a": a})

    def __call__(self, z):
        """Reaction at standardised impact ``z = (r - mu) / sigma``."""
        z = np.asarray(z, dtype=float)
        p = self.params
        if self.kind == "constant":
            return np.full_like(z, float(p["c"]))
        if self.kind == "linear_vee":
            return 1.0 + p["a"] * np.abs(z)
        if self.kind == "asymmetric":
            return 1.0 + np.where(z > 0, p["a_pos"], p["a_neg"]) * np.abs(z)
        return 1.0 + p["a"] * np.abs(z) ** p["p"]


@dataclass(frozen=True)
class GeneratorSpec:
    mu: float
    sigma: float
    reaction: ReactionShape
    seed: int = 0
    n: int = 1000

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise SpecError(f"sigma must be positive, got {self.sigma}")
        if not math.isfinite(self.mu):
            raise SpecError(f"mu must be finite, got {self.mu}")
        if not isinstance(self.n, int) or self.n < 1:
            raise SpecError(f"n must be a positive integer, got {self.n!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise SpecError(f"seed must be a non-negative integer, got {self.seed!r}")
        z = np.linspace(-GRID_HALF_WIDTH, GRID_HALF_WIDTH, GRID_POINTS)
        if np.any(self.reaction(z) < 0):
            raise SpecError("reaction function is negative somewhere on mu +/- 6 sigma")
        if np.any(np.diff(self.g(self.mu + self.sigma * z)) < 0):
            raise SpecError("g(r) = mu + R(r)(r - mu) is not non-decreasing on mu +/- 6 sigma")

    def g(self, r):
        r = np.asarray(r, dtype=float)
        z = (r - self.mu) / self.sigma
        return self.mu + self.reaction(z) * (r - self.mu)

    def reaction_at(self, r):
        return self.reaction((np.asarray(r, dtype=float) - self.mu) / self.sigma)

    def g_prime(self, r):
        """dg/dr = R(z) + z R'(z), closed form per shape."""
        z = (np.asarray(r, dtype=float) - self.mu) / self.sigma
        p, az = self.reaction.params, np.abs(z)
        kind = self.reaction.kind
        if kind == "constant":
            return np.full_like(z, float(p["c"]))
        if kind == "linear_vee":
            return 1.0 + 2.0 * p["a"] * az
        if kind == "asymmetric":
            return 1.0 + 2.0 * np.where(z > 0, p["a_pos"], p["a_neg"]) * az
        return 1.0 + p["a"] * (p["p"] + 1.0) * az ** p["p"]

    def density(self, y):
        """Density of g(r) at ``y`` (change of variables through g^-1)."""
        r = g_inverse(self, y)
        z = (r - self.mu) / self.sigma
        return np.exp(-0.5 * z * z) / (math.sqrt(2 * math.pi) * self.sigma * self.g_prime(r))

    def strictly_increasing(self) -> bool:
        z = np.linspace(-GRID_HALF_WIDTH, GRID_HALF_WIDTH, GRID_POINTS)
        return bool(np.all(np.diff(self.g(self.mu + self.sigma * z)) > 0))

    def to_dict(self) -> dict:
        return {
            "mu": self.mu,
            "sigma": self.sigma,
            "reaction": {"kind": self.reaction.kind, "params": dict(self.reaction.params)},
            "seed": self.seed,
            "n": self.n,
        }

    @classmethod
    def from_dict(cls, d: dict) -> GeneratorSpec:
        try:
            r = d["reaction"]
            return cls(
                mu=float(d["mu"]),
                sigma=float(d["sigma"]),
                reaction=ReactionShape(r["kind"], dict(r.get("params", {}))),
                seed=d.get("seed", 0),
                n=d["n"],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"malformed generator spec: {exc!r}") from exc

    @classmethod
    def load(cls, path: str | Path) -> GeneratorSpec:
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read generator spec {path}: {exc}") from exc
        if not isinstance(d, dict):
            raise SpecError("generator spec must be a JSON object")
        return cls.from_dict(d)


def open_uniforms(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniforms on the 2**53 midpoint lattice of (0, 1); never 0 or 1."""
    return (rng.integers(0, 2**53, size=n, dtype=np.int64) + 0.5) / 2.0**53


def normal_cdf(z):
    return special.ndtr(z)


def normal_ppf(p):
    return special.ndtri(p)


def generate(spec: GeneratorSpec) -> ReturnSeries:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    r = spec.mu + spec.sigma * normal_ppf(open_uniforms(rng, spec.n))
    return ReturnSeries("synth", ReturnScale.daily(), "simple", spec.g(r))


def heavy_tail_sample(nu: float, n: int, seed: int, mu: float = 0.0, sigma: float = 0.01) -> ReturnSeries:
    """Student-t draws scaled so the peak density equals that of N(mu, sigma^2)."""
    if nu <= 0:
        raise SpecError("degrees of freedom must be positive")
    peak = math.exp(math.lgamma((nu + 1) / 2) - math.lgamma(nu / 2)) / math.sqrt(nu * math.pi)
    scale = sigma * math.sqrt(2 * math.pi) * peak
    rng = np.random.Generator(np.random.PCG64(seed))
    t = special.stdtrit(nu, open_uniforms(rng, n))
    return ReturnSeries("student_t", ReturnScale.daily(), "simple", mu + scale * t)


def g_inverse(spec: GeneratorSpec, y) -> np.ndarray:
    """Invert g by bisection on mu +/- 8 sigma to 1e-12 absolute in r.

    Values outside the image of that interval are clamped to its ends
    with a :class:`CoverageWarning`.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    lo_r = spec.mu - INVERSE_HALF_WIDTH * spec.sigma
    hi_r = spec.mu + INVERSE_HALF_WIDTH * spec.sigma
    g_lo, g_hi = float(spec.g(lo_r)), float(spec.g(hi_r))
    if not g_hi > g_lo:
        raise SpecError("g is not strictly increasing; cannot invert")
    outside = (y < g_lo) | (y > g_hi)
    if np.any(outside):
        warnings.warn(f"{int(outside.sum())} value(s) outside the image of g over mu +/- 8 sigma; "
                      "their tail mass is dropped", CoverageWarning, stacklevel=3)
    a = np.full_like(y, lo_r)
    b = np.full_like(y, hi_r)
    for _ in range(200):
        if np.all(b - a <= BISECTION_TOL):
            break
        m = 0.5 * (a + b)
        below = spec.g(m) < y
        a = np.where(below, m, a)
        b = np.where(below, b, m)
    r = 0.5 * (a + b)
    r[y <= g_lo] = lo_r
    r[y >= g_hi] = hi_r
    return r


def _require_strict(spec: GeneratorSpec):
    if not spec.strictly_increasing():
        raise SpecError("oracle needs a strictly increasing g")


def pushforward_masses(spec: GeneratorSpec, edges) -> np.ndarray:
    """Exact probability of each bin ``(e1, e2]`` under the law of g(r)."""
    _require_strict(spec)
    edges = np.asarray(edges, dtype=float)
    z = (g_inverse(spec, edges) - spec.mu) / spec.sigma
    lo, hi = z[:-1], z[1:]
    # subtract upper-tail probabilities on the right half to keep precision
    right = lo > 0
    return np.where(right, normal_cdf(-lo) - normal_cdf(-hi), normal_cdf(hi) - normal_cdf(lo))


def oracle_curve(spec: GeneratorSpec, edges) -> np.ndarray:
    """``R(g^-1(y))`` at each bin midpoint ``y``."""
    _require_strict(spec)
    edges = np.asarray(edges, dtype=float)
    mids = 0.5 * (edges[:-1] + edges[1:])
    return spec.reaction_at(g_inverse(spec, mids))


def price_path(values, start_price: float = 100.0, start_date: date = date(1900, 1, 1)):
    """Daily price rows whose simple close-to-close returns are ``values``."""
    values = np.asarray(values, dtype=float)
    if np.any(values <= -1):
        raise SpecError("simple returns must exceed -1 to form a price path")
    if values.size + 1 > (date.max - start_date).days:
        raise SpecError(f"{values.size} daily returns do not fit the calendar from {start_date}")
    prices = start_price * np.concatenate([[1.0], np.cumprod(1.0 + values)])
    return [(start_date + timedelta(days=i), p) for i, p in enumerate(prices)]
