"""Machine-readable outputs.

Floats are written with 12 significant digits everywhere so identical
inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .empirical import HISTOGRAM_COLUMNS, EmpiricalDistribution
from .reaction import CENTRAL, CURVE_COLUMNS, VALID, CurveSummary, ReactionCurve, reconstruct_density, self_consistency_error

SIG_DIGITS = 12


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        if math.isnan(x):
            return ""
        return f"{float(x):.{SIG_DIGITS}g}"
    return str(x)


def _round(obj):
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            return None
        return float(f"{float(obj):.{SIG_DIGITS}g}")
    return obj


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_json(path: Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(_round(payload), indent=2, sort_keys=False) + "\n", encoding="utf-8")


def write_values(path: Path, values) -> None:
    Path(path).write_text("".join(fmt(float(v)) + "\n" for v in values), encoding="utf-8")


def write_histogram(path: Path, dist: EmpiricalDistribution) -> None:
    write_csv(path, HISTOGRAM_COLUMNS, dist.rows())


def curve_rows(curve: ReactionCurve) -> list[tuple]:
    model = {(m.r_lo, m.r_hi): m.model_mass for m in reconstruct_density(curve)}
    return [(p.r_mid, p.value, p.status, p.delta_f, model.get((p.r_lo, p.r_hi))) for p in curve.points]


def write_curve(path: Path, curve: ReactionCurve) -> None:
    write_csv(path, CURVE_COLUMNS, curve_rows(curve))


def estimate_report(curve: ReactionCurve, summary: CurveSummary, extra: dict | None = None) -> dict:
    nrm = curve.normal
    report = {
        "mu": nrm.mu,
        "sigma": nrm.sigma,
        "mu_plus": nrm.mu_plus,
        "mu_minus": nrm.mu_minus,
        "central_mass": nrm.central_mass,
        "window": nrm.window,
        "window_clamped": nrm.clamped,
        "bin_count": curve.source.get("bin_count"),
        "n": curve.source.get("n"),
        "status_counts": curve.status_counts(),
        "crossings": {"positive": summary.as_dict()["crossings_pos"], "negative": summary.as_dict()["crossings_neg"]},
        "asymmetry": summary.as_dict()["asymmetry"],
        "valid_points": {"positive": summary.valid_pos, "negative": summary.valid_neg},
        "max_reconstruction_error": self_consistency_error(curve),
        "source": {k: v for k, v in curve.source.items() if k not in ("bin_count", "n")},
    }
    if extra:
        report.update(extra)
    return report


def read_csv(path: Path) -> tuple[list[str], list[dict]]:
    with open(path, encoding="utf-8", newline="") as fh:
        r = csv.DictReader(fh)
        return list(r.fieldnames or []), list(r)


def _num(text: str) -> float:
    return math.nan if text == "" else float(text)


PLOT_HISTOGRAM_COLUMNS = ("edge_lo", "edge_hi", "r_mid", "density", "normal_density")
PLOT_NORMAL_COLUMNS = ("r", "normal_density")
PLOT_CURVE_COLUMNS = ("r_mid", "value", "status")
PLOT_INVALID_COLUMNS = ("r_mid", "status", "delta_f")
NORMAL_GRID_POINTS = 1001


def plot_series(report: dict, histogram: list[dict], curve: list[dict]) -> dict[str, tuple]:
    """Plot-ready tables from estimate outputs, keyed by output file name."""
    mu, sigma = float(report["mu"]), float(report["sigma"])

    def pdf(x):
        z = (np.asarray(x, dtype=float) - mu) / sigma
        return np.exp(-0.5 * z * z) / (math.sqrt(2 * math.pi) * sigma)

    lo = np.array([float(r["edge_lo"]) for r in histogram])
    hi = np.array([float(r["edge_hi"]) for r in histogram])
    mid = 0.5 * (lo + hi)
    dens = [float(r["density"]) for r in histogram]
    hist_rows = list(zip(lo, hi, mid, dens, pdf(mid)))

    grid = np.linspace(lo[0], hi[-1], NORMAL_GRID_POINTS)
    normal_rows = list(zip(grid, pdf(grid)))

    main, invalid = [], []
    for r in curve:
        if r["status"] in (VALID, CENTRAL):
            main.append((_num(r["r_mid"]), _num(r["value"]), r["status"]))
        else:
            invalid.append((_num(r["r_mid"]), r["status"], _num(r["delta_f"])))
    return {
        "plot_histogram.csv": (PLOT_HISTOGRAM_COLUMNS, hist_rows),
        "plot_normal.csv": (PLOT_NORMAL_COLUMNS, normal_rows),
        "plot_curve.csv": (PLOT_CURVE_COLUMNS, main),
        "plot_curve_invalid.csv": (PLOT_INVALID_COLUMNS, invalid),
    }
