"""Batch command-line frontend.

Every subcommand reads files, writes one or more reports and exits with

* 0 on success,
* 1 on usage or configuration errors,
* 2 on data errors (missing files, malformed CSV, misaligned predictions),
* 3 when a numeric failure hit every instance.

``--config`` names a JSON object whose keys are option names (dashes or
underscores); explicit command-line flags win over it.  Reports go to
``--out DIR`` when given, otherwise the main report is printed to standard
output.  Logging goes to standard error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .bands import DEFAULT_BAND_COUNT, make_partition, parse_edges
from .errors import DataError, InvalidConfigError, ScplurError, ZeroVarianceError
from .evaluation import (
    STRATEGIES,
    TOY_PAIR_LENGTH,
    TOY_WELCH,
    aggregate_scp,
    band_energy_table,
    correlate,
    drift_profile,
    run_toy_study,
    stratify_by_p,
    summarize_band_lur,
    toy_band_lur,
)
from .io import (
    DEFAULT_FRACTIONS,
    SPLITS,
    align_predictions,
    load_csv,
    read_predictions,
    read_records,
    render_report,
    windowize,
    write_report,
    write_report_config,
)
from .lur import PredictionTriple, compute_lur
from .scp import BatchFailure, scp_batch
from .spectral import WINDOWS, WelchConfig
from .synth import MultibandSpec, NoiseSpec, generate_multiband_gp

log = logging.getLogger("scplur")


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors as config errors (exit 1)."""

    def error(self, message):
        raise InvalidConfigError(f"{self.prog}: {message}")


def _float_list(text: str) -> list:
    return parse_edges(text)


# --------------------------------------------------------------------------- flag groups


def _global_flags() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    g = p.add_argument_group("global")
    g.add_argument("--config", help="JSON file of option defaults")
    g.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    g.add_argument("--threads", type=int, default=1, help="worker threads for instance loops")
    g.add_argument("--out", help="output directory (default: main report to stdout)")
    g.add_argument("--format", choices=("json", "csv"), default="json")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def _data_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("dataset")
    g.add_argument("--data", required=True, help="ETT-style CSV")
    g.add_argument("--timestamp-column", default="date")
    g.add_argument("--columns", type=lambda s: [c.strip() for c in s.split(",") if c.strip()],
                   help="comma-separated value columns (default: all)")
    g.add_argument("--standardize", action="store_true", help="z-score with train-split statistics")
    g.add_argument("--history", type=int, default=96, help="history length N = horizon")
    g.add_argument("--stride", type=int, default=1)
    g.add_argument("--split", choices=SPLITS, default="test")
    g.add_argument("--fractions", type=_float_list, default=list(DEFAULT_FRACTIONS),
                   help="train,val,test fractions")


def _welch_flags(p: argparse.ArgumentParser, defaults: Optional[WelchConfig] = None) -> None:
    g = p.add_argument_group("welch")
    g.add_argument("--segment", type=int, default=defaults.segment_length if defaults else None,
                   help="segment length (default N // 4)")
    g.add_argument("--overlap", type=int, default=defaults.overlap if defaults else None,
                   help="segment overlap (default segment // 2)")
    g.add_argument("--window", choices=WINDOWS, default="hann")
    g.add_argument("--epsilon", type=float, default=None, help="coherence regularizer (default relative)")


def _band_flags(p: argparse.ArgumentParser, single: bool = False) -> None:
    g = p.add_argument_group("bands")
    g.add_argument("--scheme", choices=("equal_width", "thirds", "custom"), default="equal_width")
    g.add_argument("--band-count", type=int, default=DEFAULT_BAND_COUNT)
    g.add_argument("--edges", type=_float_list, help="custom edges, e.g. 0,0.05,0.2,0.5")
    if single:
        g.add_argument("--band", type=int, help="restrict aggregation to this band index")


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = _Parser(prog="scplur", description="Spectral coherence predictability and linear utilization.",
                     epilog="Global flags (--config, --seed, --threads, --out, --format) follow the subcommand.")
    parser.add_argument("--version", action="version", version=f"scplur {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("scp", parents=[common], help="per-instance SCP and aggregates")
    _data_flags(p)
    _welch_flags(p)
    _band_flags(p, single=True)
    p.set_defaults(func=cmd_scp)

    p = sub.add_parser("lur", parents=[common], help="LUR of a prediction dump")
    _data_flags(p)
    p.add_argument("--predictions", required=True, help="prediction-dump CSV")
    _welch_flags(p)
    _band_flags(p)
    p.add_argument("--tolerance", type=float, default=0.05)
    p.set_defaults(func=cmd_lur)

    p = sub.add_parser("bands", parents=[common], help="band energy shares and band-wise P")
    _data_flags(p)
    _welch_flags(p)
    _band_flags(p)
    p.set_defaults(func=cmd_bands)

    p = sub.add_parser("toy", parents=[common], help="synthetic noise sweep")
    g = p.add_argument_group("toy")
    g.add_argument("--total-length", type=int, default=2048)
    g.add_argument("--peak-bins", type=_float_list, default=[32, 96, 192, 384])
    g.add_argument("--peak-widths", type=_float_list, default=[6, 10, 14, 18])
    g.add_argument("--peak-amplitudes", type=_float_list, default=[3.0, 2.0, 1.5, 1.0])
    g.add_argument("--target-band", type=int, default=1)
    g.add_argument("--noise-levels", type=_float_list, default=[0.0, 0.25, 0.5, 1.0, 2.0, 4.0])
    g.add_argument("--trials", type=int, default=3)
    g.add_argument("--pair-length", type=int, default=TOY_PAIR_LENGTH)
    g.add_argument("--fir-length", type=int, default=64)
    g.add_argument("--ridge", type=float, default=1e-6)
    g.add_argument("--strategy", choices=STRATEGIES, default="recursive")
    g.add_argument("--band-lur", action="store_true", help="also write the noiseless band-wise LUR table")
    g.add_argument("--export-series", help="write the noiseless series of trial 0 to this CSV")
    _welch_flags(p, TOY_WELCH)
    _band_flags(p)
    p.set_defaults(func=cmd_toy)

    p = sub.add_parser("drift", parents=[common], help="band-wise predictable share along one channel")
    _data_flags(p)
    p.add_argument("--channel", required=True)
    p.add_argument("--predictions", help="optional prediction-dump CSV")
    _welch_flags(p)
    _band_flags(p)
    p.set_defaults(func=cmd_drift)

    p = sub.add_parser("stratify", parents=[common], help="model MSE stratified by P")
    p.add_argument("--records", required=True, help="instance-record CSV")
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--min-count", type=int, default=20)
    p.set_defaults(func=cmd_stratify)

    p = sub.add_parser("correlate", parents=[common], help="Pearson R of model MSE against mse_lb")
    p.add_argument("--records", required=True, help="instance-record CSV")
    p.set_defaults(func=cmd_correlate)
    return parser


# --------------------------------------------------------------------------- helpers


def _welch(args, n: int) -> WelchConfig:
    if args.segment is None:
        base = WelchConfig.default_for(n, args.epsilon)
        seg = base.segment_length
        overlap = base.overlap if args.overlap is None else args.overlap
    else:
        seg = args.segment
        overlap = seg // 2 if args.overlap is None else args.overlap
    return WelchConfig(seg, overlap, args.window, args.epsilon)


def _partition(args):
    return make_partition(args.scheme, args.band_count, args.edges)


def _load_pairs(args):
    if len(args.fractions) != 3:
        raise InvalidConfigError("--fractions needs three values")
    table = load_csv(args.data, args.timestamp_column, args.columns, args.standardize, args.fractions[0])
    log.info("loaded %s: %d rows, %d channels", args.data, len(table), len(table.channels))
    return windowize(table, args.history, args.history, args.stride, args.split, args.fractions)


def resolved_config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "verbose")}
    return json.loads(json.dumps(cfg, default=str))


class _Sink:
    """Writes reports into ``--out`` or the main one to stdout."""

    def __init__(self, args):
        self.args = args
        self.config = resolved_config(args)
        if args.out:
            try:
                os.makedirs(args.out, exist_ok=True)
            except OSError as exc:
                raise DataError(f"cannot create output directory {args.out}: {exc}") from None

    def emit(self, name: str, report, main: bool = False) -> None:
        fmt = self.args.format
        meta = {"tool": "scplur", "version": __version__, "command": self.args.command, "report": name}
        if self.args.out:
            path = os.path.join(self.args.out, f"{name}.{fmt}")
            write_report(report, fmt, path, config=self.config, metadata=meta)
            if fmt == "csv":
                # CSV has no room for provenance; keep the resolved config beside it
                write_report_config(os.path.join(self.args.out, f"{name}.config.json"), self.config, meta)
            log.info("wrote %s", path)
        elif main:
            sys.stdout.write(render_report(report, fmt, config=self.config, metadata=meta))


# --------------------------------------------------------------------------- commands


def cmd_scp(args) -> int:
    pairs_by_channel = _load_pairs(args)
    cfg = _welch(args, args.history)
    partition = _partition(args)
    band = None
    if args.band is not None:
        if not 0 <= args.band < len(partition):
            raise InvalidConfigError(f"--band {args.band} out of range for {len(partition)} bands")
        band = partition.bands[args.band]
        log.info("restricting aggregation to band %d %s", args.band, band)
    pairs = [p for ps in pairs_by_channel.values() for p in ps]
    results = scp_batch(pairs, cfg, band_partition=partition, band=band, threads=args.threads)
    failures = [r for r in results if isinstance(r, BatchFailure)]
    if failures:
        log.warning("%d of %d instances failed (first: %s)", len(failures), len(results), failures[0].message)
    if len(failures) == len(results):
        raise ZeroVarianceError("every instance failed")
    sink = _Sink(args)
    aggregate = aggregate_scp(results)
    sink.emit("scp_aggregate", aggregate, main=True)
    sink.emit("scp_instances", results)
    log.info("mean mse_lb %.6g, mean P %.6g over %d instances", aggregate.mean_mse_lb, aggregate.mean_p,
             aggregate.count)
    return 0


def _triples(args, pairs_by_channel, dumps):
    triples = []
    for model, dump in dumps.items():
        for pair, y_hat in align_predictions(dump, pairs_by_channel):
            triples.append(PredictionTriple(pair.x, pair.y, y_hat, model, pair.channel_id, pair.index))
    return triples


def _map(fn, items, threads: int) -> list:
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def cmd_lur(args) -> int:
    pairs_by_channel = _load_pairs(args)
    dumps = read_predictions(args.predictions)
    if not dumps:
        raise DataError(f"{args.predictions}: no predictions")
    cfg = _welch(args, args.history)
    partition = _partition(args)
    triples = _triples(args, pairs_by_channel, dumps)

    def one(t):
        try:
            return compute_lur(t, cfg, band_partition=partition)
        except ScplurError as exc:
            return BatchFailure(-1, t.channel_id, t.index, type(exc).__name__, str(exc))

    results = _map(one, triples, args.threads)
    reports = [r for r in results if not isinstance(r, BatchFailure)]
    if not reports:
        raise ZeroVarianceError("every instance failed")
    if len(reports) < len(results):
        log.warning("%d of %d instances failed", len(results) - len(reports), len(results))
    sink = _Sink(args)
    summary = summarize_band_lur(reports, args.tolerance)
    sink.emit("lur_bands", summary, main=True)
    sink.emit("lur_instances", results)
    for model in dumps:
        vals = [r.lur for r in reports if r.model_id == model and r.lur is not None]
        if vals:
            log.info("model %s: mean LUR %.4g over %d instances", model, float(np.mean(vals)), len(vals))
    return 0


def cmd_bands(args) -> int:
    pairs_by_channel = _load_pairs(args)
    table = band_energy_table(pairs_by_channel, _welch(args, args.history), _partition(args))
    _Sink(args).emit("band_energy", table, main=True)
    return 0


def _toy_specs(args):
    spec = MultibandSpec(
        args.total_length,
        tuple(int(b) for b in args.peak_bins),
        tuple(args.peak_widths),
        tuple(args.peak_amplitudes),
        args.seed,
    )
    noise = NoiseSpec(args.target_band, tuple(args.noise_levels), args.trials)
    noise.check_against(spec)
    return spec, noise


def cmd_toy(args) -> int:
    spec, noise = _toy_specs(args)
    welch = _welch(args, args.pair_length)
    result = run_toy_study(spec, noise, welch, args.fir_length, args.ridge, args.pair_length, args.strategy)
    sink = _Sink(args)
    sink.emit("toy_study", result, main=True)
    for row in result.rows:
        log.info("noise %.3g: mse %.4g, mse_lb %.4g, P %.4f", row.noise_level, row.model_mse, row.mse_lb, row.p)
    if args.band_lur:
        summary = toy_band_lur(spec, noise, 0.0, welch, _partition(args), args.fir_length, args.ridge,
                               args.strategy)
        sink.emit("toy_band_lur", summary)
    if args.export_series:
        series = generate_multiband_gp(spec)
        try:
            with open(args.export_series, "w") as fh:
                fh.write("date,value\n")
                for t, v in enumerate(series):
                    fh.write(f"{t},{format(float(v), '.17g')}\n")
        except OSError as exc:
            raise DataError(f"cannot write {args.export_series}: {exc}") from None
    return 0


def cmd_drift(args) -> int:
    pairs_by_channel = _load_pairs(args)
    if args.channel not in pairs_by_channel:
        raise DataError(f"unknown channel {args.channel!r}")
    pairs = pairs_by_channel[args.channel]
    predictions = None
    if args.predictions:
        predictions = {}
        for model, dump in read_predictions(args.predictions).items():
            missing = [p.index for p in pairs if (args.channel, p.index) not in dump.forecasts]
            if missing:
                raise DataError(f"model {model!r} has no forecast for (channel={args.channel!r}, index={missing[0]})")
            predictions[model] = [dump.get(args.channel, p.index) for p in pairs]
    series = drift_profile(pairs, _welch(args, args.history), _partition(args), predictions)
    _Sink(args).emit("drift", series, main=True)
    return 0


def cmd_stratify(args) -> int:
    report = stratify_by_p(read_records(args.records), args.bins, args.min_count)
    _Sink(args).emit("stratified", report, main=True)
    return 0


def cmd_correlate(args) -> int:
    report = correlate(read_records(args.records))
    _Sink(args).emit("correlation", report, main=True)
    for m, r in report.r.items():
        log.info("model %s: R = %s", m, "undefined" if r is None else f"{r:.4f}")
    return 0


# --------------------------------------------------------------------------- entry point


def _apply_config(parser, sub_parser, argv, args):
    """Reparse with config-file values installed as defaults."""
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise InvalidConfigError(f"cannot read config {args.config}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InvalidConfigError(f"config {args.config} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise InvalidConfigError("config file must hold a JSON object")
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    known = set(vars(args))
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise InvalidConfigError(f"unknown config keys for {args.command!r}: {unknown}")
    sub_parser.set_defaults(**cfg)
    return parser.parse_args(argv)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return 1
        if args.config:
            sub_parser = parser._subparsers._group_actions[0].choices[args.command]
            args = _apply_config(parser, sub_parser, argv, args)
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
            stream=sys.stderr,
            force=True,
        )
        if args.threads < 1:
            raise InvalidConfigError("--threads must be >= 1")
        return args.func(args)
    except ScplurError as exc:
        print(f"scplur: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
