"""Command-line interface.

Exit codes: 0 success, 2 input/data error, 3 configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from ._io import atomic_write_text
from .bootstrap import BootstrapConfig
from .errors import ConfigError, DataError, InvalidParameterError, VBPBBError
from .inference import analyze
from .ingest import IngestConfig, load_csv
from .kz import KZFTPlan, kzft_apply, reconstruct_real
from .series import ComponentSpec, TimeSeries
from .synth import SynthSpec, coverage_experiment, generate

log = logging.getLogger("vbpbb")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(ConfigError.exit_code)


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _alpha(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {text}")
    return v


def _fraction(text: str) -> Fraction:
    try:
        v = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected NUM/DEN or a decimal, got {text!r}") from None
    if not 0 <= v <= Fraction(1, 2):
        raise argparse.ArgumentTypeError(f"frequency must lie in [0, 1/2], got {text}")
    return v


def _component(text: str) -> ComponentSpec:
    try:
        return ComponentSpec.parse(text)
    except InvalidParameterError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _m_override(text: str) -> tuple[ComponentSpec, int]:
    try:
        comp, m = text.split("=", 1)
        return ComponentSpec.parse(comp), int(m)
    except (ValueError, InvalidParameterError):
        raise argparse.ArgumentTypeError(f"expected PERIOD:HARMONIC=M, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vbpbb", description="Periodic block bootstrap with KZFT band-pass filtering.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="CSV -> series JSON")
    p.add_argument("--input", required=True)
    p.add_argument("--date-col", default="date")
    p.add_argument("--value-col", default="value")
    p.add_argument("--cumulative", action="store_true", help="input holds running totals")
    p.add_argument("--population", type=_positive_float)
    p.add_argument("--per", type=_positive_float, default=100_000.0)
    p.add_argument("--gap-policy", choices=["reject", "zero-fill"], default="reject")
    p.add_argument("--out", required=True)

    p = sub.add_parser("analyze", help="significance, bands and width ratios")
    p.add_argument("--series", required=True)
    p.add_argument("--period", type=_positive_int, action="append", required=True)
    p.add_argument("--harmonics", type=_positive_int, default=1, help="highest harmonic index per period")
    p.add_argument("--B", type=_positive_int, default=10000)
    p.add_argument("--alpha", type=_alpha, default=0.05)
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--method", choices=["pbb", "vbpbb", "both"], default="both")
    p.add_argument("--resample-mode", choices=["block", "phasewise"], default="block")
    p.add_argument("--m-override", type=_m_override, action="append", default=[])
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--bands-dir")

    p = sub.add_parser("filter", help="apply a KZFT filter")
    p.add_argument("--series", required=True)
    p.add_argument("--nu", type=_fraction, default=Fraction(0))
    p.add_argument("--m", type=_positive_int, required=True)
    p.add_argument("--k", type=_positive_int, default=1)
    p.add_argument("--edge", choices=["valid", "renormalized"], default="valid")
    p.add_argument("--out", required=True)

    p = sub.add_parser("synth", help="generate a synthetic series")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("coverage", help="Monte-Carlo coverage experiment")
    p.add_argument("--spec", required=True)
    p.add_argument("--component", type=_component, required=True)
    p.add_argument("--replications", type=_positive_int, default=100)
    p.add_argument("--B", type=_positive_int, default=2000)
    p.add_argument("--alpha", type=_alpha, default=0.05)
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--resample-mode", choices=["block", "phasewise"], default="block")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", help="summary tables from report.json")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--format", choices=["csv", "json", "markdown"], default="markdown")
    p.add_argument("--out")
    return parser


# -- subcommands ---------------------------------------------------------------------


def _cmd_ingest(args) -> None:
    cfg = IngestConfig(
        args.input, args.date_col, args.value_col, args.cumulative, args.population, args.per, args.gap_policy
    )
    series = load_csv(cfg)
    series.save(args.out)
    log.info("wrote %d samples from %s to %s", series.n, series.origin_label, args.out)


def _read_series(path: str) -> tuple[TimeSeries, str]:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read series file {path}: {exc}") from exc
    try:
        text = raw.decode()
    except UnicodeDecodeError as exc:
        raise DataError(f"series file {path} is not UTF-8") from exc
    return TimeSeries.from_json(text), hashlib.sha256(raw).hexdigest()


def _cmd_analyze(args) -> None:
    series, digest = _read_series(args.series)
    cfg = BootstrapConfig(args.B, args.alpha, args.seed, args.resample_mode)
    report = analyze(
        series,
        args.period,
        args.harmonics,
        cfg,
        args.method,
        dict(args.m_override),
        workers=args.workers,
        dataset_digest=digest,
    )
    outputs = {Path(args.out): report.to_json()}
    if args.bands_dir:
        bands = Path(args.bands_dir)
        for r in report.reports:
            if r.band is not None:
                name = f"band_{r.component.period}_{r.component.harmonic}_{r.method.lower()}.csv"
                outputs[bands / name] = r.band.to_csv()
        for p, band in report.combined_bands.items():
            outputs[bands / f"band_{p}_combined_vbpbb.csv"] = band.to_csv()
    for path, text in outputs.items():
        atomic_write_text(path, text)


def _cmd_filter(args) -> None:
    series, _ = _read_series(args.series)
    fc = kzft_apply(series, KZFTPlan(args.m, args.k, args.nu), edge=args.edge)
    reconstruct_real(fc).save(args.out)


def _cmd_synth(args) -> None:
    generate(SynthSpec.load(args.spec)).save(args.out)


def _cmd_coverage(args) -> None:
    spec = SynthSpec.load(args.spec)
    cfg = BootstrapConfig(args.B, args.alpha, args.seed, args.resample_mode)
    res = coverage_experiment(spec, args.component, cfg, args.replications, workers=args.workers)
    doc = {"component": args.component.key, "B": args.B, "alpha": args.alpha, "seed": args.seed, **res.to_dict()}
    atomic_write_text(args.out, json.dumps(doc, indent=2) + "\n")


def _summary_rows(doc: dict) -> list[dict]:
    ratios = doc.get("width_ratios", {})
    rows = []
    for c in doc["components"]:
        key = f"{c['period']}:{c['harmonic']}"
        rows.append(
            {
                "period": c["period"],
                "harmonic": c["harmonic"],
                "method": c["method"],
                "m": c.get("m"),
                "significant": c["significant"],
                "median_width": c["median_width"],
                "max_lower": c["max_lower"],
                "min_upper": c["min_upper"],
                "width_ratio": ratios.get(key),
            }
        )
    return rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def render_report(doc: dict, fmt: str) -> str:
    rows = _summary_rows(doc)
    if fmt == "json":
        return json.dumps({"components": rows, "r_squared": doc.get("r_squared", {})}, indent=2) + "\n"
    cols = list(rows[0]) if rows else ["period", "harmonic", "method"]
    if fmt == "csv":
        lines = [",".join(cols)] + [",".join(_fmt(r[c]) for c in cols) for r in rows]
        return "\n".join(lines) + "\n"
    lines = [
        f"seed {doc['seed']}, B {doc['B']}, alpha {doc['alpha']}, dataset {doc['dataset_digest'][:12]}",
        "",
        "| " + " | ".join(cols) + " |",
        "|" + "---|" * len(cols),
    ]
    lines += ["| " + " | ".join(_fmt(r[c]) for c in cols) + " |" for r in rows]
    r2 = doc.get("r_squared", {})
    if r2:
        lines += ["", "| components | R^2 |", "|---|---|"]
        lines += [f"| {k} | {_fmt(v)} |" for k, v in r2.items()]
    return "\n".join(lines) + "\n"


def _cmd_report(args) -> None:
    try:
        doc = json.loads(Path(args.input).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read report {args.input}: {exc}") from exc
    if not isinstance(doc, dict) or "components" not in doc:
        raise DataError(f"{args.input} is not an analysis report")
    text = render_report(doc, args.format)
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)


_COMMANDS = {
    "ingest": _cmd_ingest,
    "analyze": _cmd_analyze,
    "filter": _cmd_filter,
    "synth": _cmd_synth,
    "coverage": _cmd_coverage,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        _COMMANDS[args.command](args)
    except VBPBBError as exc:
        print(f"vbpbb {args.command}: error: {' '.join(str(exc).split())}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
