"""Command-line surface.

Subcommands:
  run          stream-cluster a CSV file or a synthetic stream
  noise        normalize a CSV and corrupt a fraction of its cells
  synth        generate a synthetic stream and persist it as CSV
  outlier-exp  half/half outlier-detection comparison (SRV vs 1-NN)

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import dataio, evaluate
from .engine import run_stream
from .errors import ConfigError, DataError, SparseStreamError, StreamError
from .model import DataWindow, PipelineConfig, SolverConfig
from .synth import StreamSpec, gen_subspace_stream


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsestream",
        description="Streaming subspace clustering via sparse self-representation.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="cluster a stream window by window")
    src = run_p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="CSV dataset (rows are objects)")
    src.add_argument("--synth", metavar="KEY=VAL,...",
                     help="synthetic stream spec, e.g. d=20,k=3,r=2,n=150,windows=10")
    run_p.add_argument("--window-size", type=int, default=200)
    run_p.add_argument("--lambda", dest="lam", type=float, default=1.0,
                       help="noise tradeoff of the sparse-coding solver")
    run_p.add_argument("--m-prime", type=float, default=1.0,
                       help="microcluster multiplier in [1, 2]")
    run_p.add_argument("--k-max", type=int, required=True,
                       help="maximum class count expected in the stream")
    run_p.add_argument("--sigma", type=float, default=0.5,
                       help="SRV outlier threshold in (0, 1)")
    run_p.add_argument("--fine-tune", type=int, choices=(0, 1), default=1)
    run_p.add_argument("--rep-fraction", type=float, default=0.1)
    run_p.add_argument("--noise-norm", choices=("l21", "l1", "fro"), default="l21")
    run_p.add_argument("--max-iters", type=int, default=500)
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--shuffle", action="store_true",
                       help="shuffle object order before windowing (seeded)")
    run_p.add_argument("--has-header", action="store_true")
    run_p.add_argument("--label-column", choices=("last", "none"), default="last")
    run_p.add_argument("--output", help="report file (default: stdout)")
    run_p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    run_p.add_argument("--timings", action="store_true",
                       help="include wall-clock runtimes in the records "
                            "(breaks byte-for-byte reproducibility)")
    run_p.add_argument("--no-figures", action="store_true",
                       help="skip rendering the metrics figure next to --output")

    noise_p = sub.add_parser("noise", help="min-max normalize and corrupt a CSV")
    noise_p.add_argument("--input", required=True)
    noise_p.add_argument("--output", required=True)
    noise_p.add_argument("--ratio", type=float, required=True,
                         help="fraction of cells to replace with U[0,1] draws")
    noise_p.add_argument("--seed", type=int, default=0)
    noise_p.add_argument("--has-header", action="store_true")
    noise_p.add_argument("--label-column", choices=("last", "none"), default="last")

    synth_p = sub.add_parser("synth", help="generate a synthetic stream CSV")
    synth_p.add_argument("--output", required=True)
    synth_p.add_argument("--d", type=int, default=20, help="feature count")
    synth_p.add_argument("--k", type=int, default=3, help="cluster count")
    synth_p.add_argument("--subspace-dim", type=int, default=2)
    synth_p.add_argument("--n-per-window", type=int, default=150)
    synth_p.add_argument("--windows", type=int, default=10)
    synth_p.add_argument("--drift-angle", type=float, default=0.0,
                         help="degrees of subspace rotation per window")
    synth_p.add_argument("--noise-sigma", type=float, default=0.0)
    synth_p.add_argument("--outlier-fraction", type=float, default=0.0)
    synth_p.add_argument("--seed", type=int, default=0)
    synth_p.add_argument("--shift-window", type=int, default=None,
                         help="redraw one subspace at this window (concept shift)")
    synth_p.add_argument("--shift-cluster", type=int, default=0)

    out_p = sub.add_parser("outlier-exp",
                           help="SRV vs 1-NN outlier detection comparison")
    out_p.add_argument("--trials", type=int, default=10)
    out_p.add_argument("--d", type=int, default=100)
    out_p.add_argument("--k", type=int, default=3)
    out_p.add_argument("--subspace-dim", type=int, default=3)
    out_p.add_argument("--window-size", type=int, default=40)
    out_p.add_argument("--outlier-fraction", type=float, default=0.05)
    out_p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    out_p.add_argument("--sigma", type=float, default=0.05)
    out_p.add_argument("--seed", type=int, default=0)
    out_p.add_argument("--output", help="write the two error rates as JSON")
    out_p.add_argument("--figure", help="render a comparison bar chart")
    return parser


def _parse_synth_spec(text: str, window_size: int, seed: int) -> StreamSpec:
    keys = {
        "d": "n_features", "k": "n_clusters", "r": "subspace_dim",
        "n": "per_window", "windows": "n_windows", "drift": "drift_degrees",
        "noise": "noise_sigma", "outliers": "outlier_fraction",
        "shift_window": "shift_window", "shift_cluster": "shift_cluster",
    }
    kwargs = {"per_window": window_size, "seed": seed}
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "=" not in part:
            raise ConfigError(f"bad synth spec item {part!r}; expected key=value")
        key, value = part.split("=", 1)
        key = key.strip()
        if key not in keys:
            raise ConfigError(
                f"unknown synth key {key!r}; known: {', '.join(keys)}")
        field = keys[key]
        if field in ("drift_degrees", "noise_sigma", "outlier_fraction"):
            kwargs[field] = float(value)
        else:
            kwargs[field] = int(value)
    return StreamSpec(**kwargs)


def _cmd_run(args) -> int:
    cfg = PipelineConfig(
        window_size=args.window_size,
        k_max=args.k_max,
        m_prime=args.m_prime,
        sigma=args.sigma,
        fine_tune=bool(args.fine_tune),
        rep_fraction=args.rep_fraction,
        seed=args.seed,
        solver=SolverConfig(lam=args.lam, noise_norm=args.noise_norm,
                            max_iters=args.max_iters),
    )
    if args.input:
        source = dataio.load_csv(
            args.input, window_size=args.window_size,
            has_header=args.has_header,
            label_column=args.label_column,
            shuffle=args.shuffle, seed=args.seed)
    else:
        spec = _parse_synth_spec(args.synth, args.window_size, args.seed)
        source = gen_subspace_stream(spec)

    reports = run_stream(source, cfg)

    if args.output:
        dataio.emit_reports(reports, args.output, format=args.format,
                            include_runtime=args.timings)
        if not args.no_figures:
            from . import plots  # deferred: pulls in matplotlib
            figure = Path(args.output).with_suffix(".png")
            plots.render_window_metrics(reports, figure)
    else:
        for rec in dataio.report_records(reports, args.timings):
            print(json.dumps(rec))
    return 0


def _cmd_noise(args) -> int:
    features, labels = dataio.load_csv_matrix(
        args.input, has_header=args.has_header, label_column=args.label_column)
    corrupted = evaluate.inject_noise(
        evaluate.min_max_normalize(features), args.ratio, args.seed)
    out = DataWindow(matrix=corrupted, labels=labels)
    dataio.save_stream_csv([out], args.output)
    return 0


def _cmd_synth(args) -> int:
    spec = StreamSpec(
        n_features=args.d,
        n_clusters=args.k,
        subspace_dim=args.subspace_dim,
        per_window=args.n_per_window,
        n_windows=args.windows,
        drift_degrees=args.drift_angle,
        noise_sigma=args.noise_sigma,
        outlier_fraction=args.outlier_fraction,
        seed=args.seed,
        shift_window=args.shift_window,
        shift_cluster=args.shift_cluster,
    )
    dataio.save_stream_csv(list(gen_subspace_stream(spec)), args.output)
    return 0


def _cmd_outlier_exp(args) -> int:
    spec = StreamSpec(
        n_features=args.d,
        n_clusters=args.k,
        subspace_dim=args.subspace_dim,
        per_window=args.window_size,
        n_windows=2 * args.trials,
        outlier_fraction=args.outlier_fraction,
        seed=args.seed,
    )
    val_spec = StreamSpec(
        n_features=args.d,
        n_clusters=args.k,
        subspace_dim=args.subspace_dim,
        per_window=args.window_size,
        n_windows=2,
        outlier_fraction=args.outlier_fraction,
        seed=args.seed + 1,
    )
    cfg = PipelineConfig(
        window_size=args.window_size, k_max=args.k,
        sigma=args.sigma, seed=args.seed,
        solver=SolverConfig(lam=args.lam))
    srv_rate, nn_rate = evaluate.outlier_experiment(
        list(gen_subspace_stream(spec)), cfg, trials=args.trials,
        validation_windows=list(gen_subspace_stream(val_spec)))
    result = {"srv_error_rate": srv_rate, "one_nn_error_rate": nn_rate,
              "trials": args.trials}
    print(json.dumps(result))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(result, fh)
            fh.write("\n")
    if args.figure:
        from . import plots  # deferred: pulls in matplotlib
        plots.render_outlier_comparison(srv_rate, nn_rate, args.figure)
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "noise": _cmd_noise,
    "synth": _cmd_synth,
    "outlier-exp": _cmd_outlier_exp,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except StreamError as exc:
        cause = exc.cause
        if isinstance(cause, ConfigError):
            print(f"configuration error: {exc}", file=sys.stderr)
            return 2
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except (DataError, SparseStreamError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
