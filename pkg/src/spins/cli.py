"""Command-line entry point: ``spins generate|run|summarize``.

Exit codes: 0 on success, 1 for invalid configs or inputs, 2 when a run fails.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import models
from .errors import SpinsError
from .experiments import (
    ConfigError,
    format_table,
    load_config,
    prepare_dataset,
    run_experiment,
    summarize_traces,
)

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors are validation failures, not argparse's default 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spins", description="Constrained-domain MCMC experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="experiment config (path or bundled name)")
        p.add_argument("--out", type=Path, help="output directory (default: the config's output_dir)")
        p.add_argument("--seed", type=_u64, help="override the config's seed")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")

    common(sub.add_parser("generate", help="simulate the config's dataset to CSV + JSON"))
    common(sub.add_parser("run", help="run every configured sampler"))
    summ = sub.add_parser("summarize", help="compare samplers from a report or trace files")
    common(summ, config_required=False)
    summ.add_argument("inputs", nargs="+", type=Path, help="report.json or trace CSV files")
    summ.add_argument("--burn-in", type=int, default=None, help="iterations to discard (default: report's burn-in or 0)")
    summ.add_argument("--ball-center", help="comma-separated center for iterations_to_ball")
    summ.add_argument("--ball-radius", type=float, default=0.05)
    return parser


def cmd_generate(args) -> int:
    cfg = load_config(args.config)
    data = prepare_dataset(cfg, args.seed)
    out = args.out if args.out is not None else cfg.resolve(cfg.output_dir)
    csv_path, meta_path = models.save_dataset(data, Path(out) / f"{cfg.name}_data.csv")
    if not args.quiet:
        print(f"wrote {csv_path} ({len(data)} x {data.observations.shape[1]}) and {meta_path}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if not cfg.samplers:
        raise ConfigError("config lists no samplers")
    log = (lambda msg: None) if args.quiet else print
    report = run_experiment(cfg, out_dir=args.out, seed=args.seed, log=log)
    if not args.quiet:
        rows = {k: v["diagnostics"] for k, v in report["samplers"].items()}
        print(format_table(rows))
        print(f"report: {Path(report['output_dir']) / 'report.json'}")
    return EXIT_OK


def cmd_summarize(args) -> int:
    traces, burn_in, ball = [], args.burn_in, None
    if args.ball_center:
        ball = (np.array([float(v) for v in args.ball_center.split(",")]), args.ball_radius)
    for path in args.inputs:
        if path.suffix == ".json":
            try:
                report = json.loads(path.read_text())
                traces.extend(Path(s["trace"]) for s in report["samplers"].values())
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ConfigError(f"{path}: not a run report ({exc})") from exc
            if burn_in is None:
                burn_in = int(report.get("burn_in", 0))
            if ball is None and report.get("ball"):
                ball = (np.asarray(report["ball"]["center"]), float(report["ball"]["radius"]))
        else:
            traces.append(path)
    missing = [str(p) for p in traces if not p.exists()]
    if missing:
        raise ConfigError(f"missing trace files: {', '.join(missing)}")
    try:
        rows = summarize_traces(traces, burn_in or 0, ball)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = args.out if args.out is not None else Path(".")
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(json.dumps(rows, indent=2) + "\n")
    if not args.quiet:
        print(format_table(rows))
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "run": cmd_run, "summarize": cmd_summarize}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SpinsError, OSError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
