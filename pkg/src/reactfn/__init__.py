"""Reaction-function estimation for asset return distributions."""

from .empirical import EmpiricalDistribution, build_histogram, cdf_between, quantile
from .errors import (CalibrationError, DegenerateDataError, DegenerateRangeError, EmptySeriesError, FormatError,
                     InputError, ReactfnError, RowError, SpecError)
from .ingest import PricePoint, PriceSeries, SessionReport, load_prices, validate_sessions
from .reaction import (HypotheticalNormal, ReactionCurve, ReactionPoint, calibrate_normal, curve_summary, estimate,
                       reaction_curve, reconstruct_density, self_consistency_error)
from .returns import ReturnScale, ReturnSeries, compute_returns
from .synth import GeneratorSpec, ReactionShape, generate, heavy_tail_sample, oracle_curve, pushforward_masses

__version__ = "0.1.0"
