"""Command line front end.

Subcommands
-----------
discover
    Run the full pipeline on a CSV file and write the result as JSON
    plus a DOT graph next to the input (or under ``--out``).
simulate
    Recovery-rate sweep over random models.
outlier-grid
    Single-outlier contamination grid on the bivariate chain.
benchmark
    The simulate sweep reported as a timing table with KBI/DCorr
    wall-clock ratios.

Exit status: 0 on success, 2 on input errors (unreadable or malformed
files, bad flag values), 3 on numeric failures such as degenerate data.
Any subcommand accepts ``--config FILE`` with a JSON object of flag
defaults; flags given on the command line win over the file.  The
``ROBUSTLINGAM_WORKERS`` environment variable sets the worker count for
the sweep subcommands (default 1).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .discovery import DiscoveryConfig, discover
from .exceptions import ParseError, RobustLingamError
from .harness import SimulationSettings, run_benchmark, run_outlier_grid, run_simulation
from .scm import DataMatrix, noise_from_string

__all__ = ["main"]


def _int_value(raw, flag):
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise ParseError(f"{flag} expects an integer, got {raw!r}") from None


def _float_value(raw, flag):
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ParseError(f"{flag} expects a number, got {raw!r}") from None


def _int_list(raw, flag):
    # config files may hand over a real JSON list, flags a comma string
    if isinstance(raw, (list, tuple)):
        return [_int_value(v, flag) for v in raw]
    items = [part.strip() for part in str(raw).split(",") if part.strip()]
    return [_int_value(v, flag) for v in items]


def _method_list(raw):
    if isinstance(raw, (list, tuple)):
        tags = [str(v) for v in raw]
    else:
        tags = [part.strip() for part in str(raw).split(",") if part.strip()]
    methods = []
    for tag in tags:
        parts = tag.split("+")
        if len(parts) != 2:
            raise ParseError(f"method {tag!r} is not of the form slope+measure")
        try:
            methods.append(DiscoveryConfig(slope=parts[0], measure=parts[1]))
        except ValueError as exc:
            raise ParseError(f"method {tag!r}: {exc}") from None
    return methods


def _settings_from_args(args) -> SimulationSettings:
    try:
        return SimulationSettings(
            p=_int_value(args.p, "--p"),
            sample_sizes=tuple(_int_list(args.n, "--n")),
            q=_float_value(args.q, "--q"),
            noise=noise_from_string(str(args.noise)),
            methods=tuple(_method_list(args.methods)),
            replications=_int_value(args.reps, "--reps"),
            master_seed=_int_value(args.seed, "--seed"),
        )
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def _emit(report, args) -> int:
    if getattr(args, "out", None):
        with open(args.out, "w") as handle:
            handle.write(report.to_json() + "\n")
        print(f"report written to {args.out}")
    if args.format == "json":
        print(report.to_json())
    elif args.format == "csv":
        print(report.to_csv(), end="")
    else:
        print(report.to_text(), end="")
    return 0


def _cmd_discover(args) -> int:
    data = DataMatrix.from_csv(args.csv)
    if data.values.shape[1] < 2:
        raise ParseError("discovery needs at least 2 columns")
    config = DiscoveryConfig(slope=args.slope, measure=args.measure,
                             prune=not args.no_prune)
    result = discover(data.values, config)
    out_dir = args.out if args.out else (os.path.dirname(args.csv) or ".")
    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.csv))[0]
    json_path = os.path.join(out_dir, stem + ".result.json")
    dot_path = os.path.join(out_dir, stem + ".dot")
    with open(json_path, "w") as handle:
        handle.write(result.to_json() + "\n")
    with open(dot_path, "w") as handle:
        handle.write(result.to_dot(names=data.names))
    order_names = [data.names[j] for j in result.ordering]
    print("estimated order:", " -> ".join(order_names))
    print(f"wrote {json_path}")
    print(f"wrote {dot_path}")
    return 0


def _cmd_simulate(args) -> int:
    return _emit(run_simulation(_settings_from_args(args)), args)


def _cmd_benchmark(args) -> int:
    return _emit(run_benchmark(_settings_from_args(args)), args)


def _cmd_grid(args) -> int:
    exponents = _int_list(args.exponents, "--exponents")
    try:
        report = run_outlier_grid(
            base_seed=_int_value(args.seed, "--seed"),
            n=_int_value(args.n, "--n"),
            grid_exponents=exponents,
            methods=_method_list(args.methods),
            replications=_int_value(args.reps, "--reps"),
        )
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return _emit(report, args)


def _add_report_flags(sub):
    sub.add_argument("--out", default=None, help="write the JSON report here")
    sub.add_argument("--format", choices=["text", "csv", "json"], default="text",
                     help="stdout rendering (default aligned text)")
    sub.add_argument("--config", default=None,
                     help="JSON file with default flag values")


def _add_sweep_flags(sub):
    sub.add_argument("--p", default=2, help="model dimension")
    sub.add_argument("--n", default="100", help="comma list of sample sizes")
    sub.add_argument("--q", default=1.0, help="parent inclusion probability")
    sub.add_argument("--noise", default="t:5",
                     help="noise spec, e.g. t:5, lognormal:0:1, pareto:1.5:1, exp:1")
    sub.add_argument("--methods", default="ols+kbi,theil-sen+kbi",
                     help="comma list of slope+measure tags")
    sub.add_argument("--reps", default=100, help="replications")
    sub.add_argument("--seed", default=0, help="master seed")
    _add_report_flags(sub)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="robustlingam",
        description="Robust causal discovery for linear non-Gaussian models.",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    children = {}

    disc = subs.add_parser("discover", help="run discovery on a CSV file")
    disc.add_argument("csv", help="input data, one column per variable")
    disc.add_argument("--slope", default="theil-sen",
                      help="ols, theil-sen (ts) or repeated-median (rm)")
    disc.add_argument("--measure", default="kbi", help="kbi or dcorr")
    disc.add_argument("--no-prune", action="store_true",
                      help="keep the dense connection matrix")
    disc.add_argument("--out", default=None, help="output directory")
    disc.add_argument("--config", default=None,
                      help="JSON file with default flag values")
    disc.set_defaults(func=_cmd_discover)
    children["discover"] = disc

    sim = subs.add_parser("simulate", help="recovery-rate sweep")
    _add_sweep_flags(sim)
    sim.set_defaults(func=_cmd_simulate)
    children["simulate"] = sim

    grid = subs.add_parser("outlier-grid", help="single-outlier contamination grid")
    grid.add_argument("--n", default=500, help="sample size")
    grid.add_argument("--reps", default=100, help="replications")
    grid.add_argument("--exponents", default="0,5,10",
                      help="comma list of magnitude exponents in 0..10")
    grid.add_argument(
        "--methods",
        default="ols+kbi,theil-sen+kbi,repeated-median+kbi",
        help="comma list of slope+measure tags",
    )
    grid.add_argument("--seed", default=0, help="base seed")
    _add_report_flags(grid)
    grid.set_defaults(func=_cmd_grid)
    children["outlier-grid"] = grid

    bench = subs.add_parser("benchmark", help="timing sweep with KBI/DCorr ratios")
    _add_sweep_flags(bench)
    bench.set_defaults(func=_cmd_benchmark)
    children["benchmark"] = bench

    return parser, children


def _apply_config(argv, children):
    """Install config-file values as defaults on the chosen subparser.

    Flags typed on the command line then override them in the normal
    argparse way.
    """
    path = None
    for i, token in enumerate(argv):
        if token == "--config":
            if i + 1 >= len(argv):
                raise ParseError("--config expects a file path")
            path = argv[i + 1]
        elif token.startswith("--config="):
            path = token.split("=", 1)[1]
    if path is None:
        return
    command = next((t for t in argv if not t.startswith("-")), None)
    if command not in children:
        return
    try:
        with open(path) as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise ParseError(f"cannot read config file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("config file must hold a JSON object")
    sub = children[command]
    known = {action.dest for action in sub._actions}
    for key in doc:
        dest = key.replace("-", "_")
        if dest not in known:
            raise ParseError(f"unknown config key {key!r} for {command}")
    sub.set_defaults(**{k.replace("-", "_"): v for k, v in doc.items()})


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, children = _build_parser()
    try:
        _apply_config(argv, children)
        args = parser.parse_args(argv)
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return int(exc.code or 0)
    except (RobustLingamError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
