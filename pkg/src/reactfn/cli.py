"""Command line entry point: ``reactfn {returns,estimate,synth,plotdata}``.

Exit codes: 0 ok, 2 input or configuration error, 3 degenerate data.
Errors are reported as one JSON line on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .empirical import DEFAULT_BINS, build_histogram
from .errors import InputError, ReactfnError
from .ingest import FORMATS, load_prices, validate_sessions
from .reaction import calibrate_normal, curve_summary, reaction_curve
from .report import (estimate_report, plot_series, read_csv, write_csv, write_curve, write_histogram, write_json,
                     write_values)
from .returns import KINDS, ReturnScale, compute_returns
from .synth import GeneratorSpec, generate, price_path

log = logging.getLogger("reactfn")

EMITS = ("csv", "json", "both")


@dataclass(frozen=True)
class RunConfig:
    input: Path
    format: str = "simple"
    scale: ReturnScale = ReturnScale.daily()
    returns_kind: str = "simple"
    bins: int = DEFAULT_BINS
    window: int = 0
    overlapping: bool = False
    out: Path = Path(".")
    emit: str = "both"

    def __post_init__(self):
        if self.bins < 3:
            raise InputError(f"--bins must be >= 3, got {self.bins}")
        if self.window < 0:
            raise InputError(f"--window must be >= 0, got {self.window}")
        if self.format not in FORMATS:
            raise InputError(f"--format must be one of {FORMATS}")
        if self.returns_kind not in KINDS:
            raise InputError(f"--returns-kind must be one of {KINDS}")
        if self.emit not in EMITS:
            raise InputError(f"--emit must be one of {EMITS}")

    @classmethod
    def from_args(cls, args) -> RunConfig:
        return cls(
            input=Path(args.input),
            format=args.format,
            scale=ReturnScale.parse(args.scale),
            returns_kind=args.returns_kind,
            bins=args.bins,
            window=args.window,
            overlapping=args.overlapping,
            out=Path(args.out),
            emit=args.emit,
        )


def _load_returns(cfg: RunConfig):
    series = load_prices(cfg.input, cfg.format)
    sessions = validate_sessions(series)
    log.info("%s: %d points in %d sessions", series.instrument, len(series), sessions.count)
    rets = compute_returns(series, cfg.scale, cfg.returns_kind, overlapping=cfg.overlapping)
    return series, rets


def cmd_returns(cfg: RunConfig) -> list[Path]:
    series, rets = _load_returns(cfg)
    cfg.out.mkdir(parents=True, exist_ok=True)
    values_path = cfg.out / "returns.txt"
    sidecar = cfg.out / "returns.json"
    write_values(values_path, rets.values)
    write_json(sidecar, {
        "instrument": rets.instrument,
        "scale": cfg.scale.label,
        "kind": rets.kind,
        "overlapping": cfg.overlapping,
        "n": rets.sample_count,
        "reordered_rows": series.reordered,
    })
    return [values_path, sidecar]


def cmd_estimate(cfg: RunConfig) -> list[Path]:
    series, rets = _load_returns(cfg)
    dist = build_histogram(rets, cfg.bins)
    normal = calibrate_normal(dist, rets, cfg.window)
    source = {"instrument": rets.instrument, "scale": cfg.scale.label, "returns_kind": rets.kind,
              "overlapping": cfg.overlapping}
    curve = reaction_curve(dist, normal, source)
    summary = curve_summary(curve)
    cfg.out.mkdir(parents=True, exist_ok=True)
    written = []
    if cfg.emit in ("csv", "both"):
        write_curve(cfg.out / "curve.csv", curve)
        write_histogram(cfg.out / "histogram.csv", dist)
        written += [cfg.out / "curve.csv", cfg.out / "histogram.csv"]
    if cfg.emit in ("json", "both"):
        write_json(cfg.out / "report.json", estimate_report(curve, summary))
        written.append(cfg.out / "report.json")
    return written


def cmd_synth(spec_path: Path, out: Path) -> list[Path]:
    spec = GeneratorSpec.load(spec_path)
    sample = generate(spec)
    rows = price_path(sample.values)
    out.mkdir(parents=True, exist_ok=True)
    prices = out / "synth_prices.csv"
    sidecar = out / "synth_prices.json"
    write_csv(prices, ("timestamp", "price"), ((d.isoformat(), p) for d, p in rows))
    write_json(sidecar, {
        "spec": spec.to_dict(),
        "format": "simple",
        "returns_kind": "simple",
        "scale": "1d",
        "start_price": rows[0][1],
        "start_date": rows[0][0].isoformat(),
        "n": sample.sample_count,
    })
    return [prices, sidecar]


def _estimate_outputs(path: Path) -> tuple[Path, Path, Path]:
    base = path if path.is_dir() else path.parent
    files = (base / "report.json", base / "histogram.csv", base / "curve.csv")
    missing = [str(f) for f in files if not f.is_file()]
    if missing:
        raise InputError(f"missing estimate outputs: {', '.join(missing)}")
    return files


def cmd_plotdata(input_path: Path, out: Path) -> list[Path]:
    report_path, hist_path, curve_path = _estimate_outputs(input_path)
    try:
        report = json.loads(report_path.read_text(encoding="utf-8"))
        _, hist = read_csv(hist_path)
        _, curve = read_csv(curve_path)
        tables = plot_series(report, hist, curve)
    except (OSError, ValueError, KeyError) as exc:
        raise InputError(f"cannot read estimate outputs: {exc}") from exc
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, (header, rows) in tables.items():
        write_csv(out / name, header, rows)
        written.append(out / name)
    return written


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="reactfn", description="Estimate market reaction functions from returns.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", required=True, help="price file")
    data.add_argument("--format", choices=FORMATS, default="simple")
    data.add_argument("--scale", default="1d", help="1d, or Nm for N-minute returns (1m, 5m, 15m)")
    data.add_argument("--returns-kind", choices=KINDS, default="simple")
    data.add_argument("--overlapping", action="store_true", help="sliding k-minute windows")
    data.add_argument("--out", default=".", help="output directory")

    sub.add_parser("returns", parents=[data], help="write the return series")

    est = sub.add_parser("estimate", parents=[data], help="histogram, calibration and reaction curve")
    est.add_argument("--bins", type=int, default=DEFAULT_BINS)
    est.add_argument("--window", type=int, default=0, help="extra bins each side of the median bin for sigma")
    est.add_argument("--emit", choices=EMITS, default="both")

    syn = sub.add_parser("synth", help="generate a synthetic price file from a generator spec")
    syn.add_argument("--spec", required=True, help="generator spec JSON")
    syn.add_argument("--out", default=".")

    plot = sub.add_parser("plotdata", help="plot-ready CSV series from estimate outputs")
    plot.add_argument("--input", required=True, help="estimate output directory or its report.json")
    plot.add_argument("--out", default=".")
    return p


def _configure_logging():
    level = os.environ.get("REACTFN_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _fail(kind: str, code: int, message: str) -> int:
    print(json.dumps({"error": kind, "exit_code": code, "message": message}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            written = cmd_synth(Path(args.spec), Path(args.out))
        elif args.command == "plotdata":
            written = cmd_plotdata(Path(args.input), Path(args.out))
        else:
            if args.command == "returns":
                args.bins, args.window, args.emit = DEFAULT_BINS, 0, "both"
            cfg = RunConfig.from_args(args)
            written = cmd_returns(cfg) if args.command == "returns" else cmd_estimate(cfg)
    except ReactfnError as exc:
        return _fail(type(exc).__name__, exc.exit_code, str(exc))
    except OSError as exc:
        return _fail(type(exc).__name__, 2, str(exc))
    for path in written:
        log.info("wrote %s", path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
