"""
Command-line entry point.

Subcommands: ``run`` (one scenario), ``sweep`` (grid file), ``ablate-bandwidth``
(256-GPU bandwidth doubling), ``report`` (re-plot an existing CSV) and
``radius`` (largest distance meeting an overlap target, per fiber).

Exit codes: 0 ok, 2 usage, 3 parse/config/validation, 4 I/O, 5 simulation,
6 metrics/report.
"""
from dataclasses import replace
from pathlib import Path
from typing import Iterable, Optional, Sequence
import argparse
import logging
import os
import sys

from . import __version__
from .engine import run_iteration, write_trace
from .exceptions import (
    ConfigError,
    ConfigValidationError,
    GeoOverlapError,
    MetricsError,
    ParseError,
    SimulationError,
    SweepError,
    ValidationError,
    WorkloadError,
)
from .metrics import delta_eta, is_baseline, peak_delta, row_from_trace, time_multiplier
from .models import BASELINE_DISTANCE_M, JobConfig
from .parser import parse_config_file
from .report import PLOT_FILES, emit_csv, emit_plots, read_csv_file, write_csv
from .sweep import (
    DEFAULT_MAX_CONFIGS,
    at_distance,
    bandwidth_ablation,
    expand_sweep,
    feasible_radii,
    parse_sweep,
    run_sweep,
    with_baselines,
    with_quantum,
)
from .utils import load_text, slugify
from .validators import validate

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_IO = 4
EXIT_SIMULATION = 5
EXIT_METRICS = 6

RESULTS_CSV = "results.csv"
DELTA_CSV = "delta.csv"
TRACE_DIR = "traces"


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _unit_fraction(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not 0 < value <= 1:
        raise argparse.ArgumentTypeError(f"expected a value in (0, 1], got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG"
    )
    common.add_argument(
        "--quantum-ps",
        type=_positive_int,
        default=None,
        help="round every duration up to this many picoseconds",
    )
    common.add_argument(
        "--jobs",
        type=_positive_int,
        default=os.cpu_count() or 1,
        help="worker processes (default: available CPUs)",
    )

    parser = argparse.ArgumentParser(
        prog="geo-overlap-sim",
        description="Compute/communication overlap of two-datacenter LLM training "
        "over single-mode and hollow-core fiber",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="simulate one scenario")
    run.add_argument("--config", required=True, type=Path, help="scenario file")
    run.add_argument("--trace", action="store_true", help="dump the event trace")
    run.add_argument("--out", type=Path, default=Path("."), help="directory for the trace")
    run.add_argument("--overwrite", action="store_true")
    run.set_defaults(handler=cmd_run)

    sweep = sub.add_parser("sweep", parents=[common], help="run a parameter grid")
    sweep.add_argument("--grid", required=True, type=Path, help="sweep file")
    sweep.add_argument("--out", required=True, type=Path, help="output directory")
    sweep.add_argument("--plots", action="store_true", help="also write SVG figures")
    sweep.add_argument("--trace", action="store_true", help="dump one event trace per run")
    sweep.add_argument("--overwrite", action="store_true")
    sweep.add_argument("--max-configs", type=_positive_int, default=DEFAULT_MAX_CONFIGS)
    sweep.set_defaults(handler=cmd_sweep)

    ablate = sub.add_parser(
        "ablate-bandwidth", parents=[common], help="double the inter-DC bandwidth"
    )
    ablate.add_argument("--total-gpus", type=_positive_int, default=256)
    ablate.add_argument("--csv", type=Path, default=None, help="write base and doubled rows")
    ablate.add_argument("--overwrite", action="store_true")
    ablate.set_defaults(handler=cmd_ablate_bandwidth)

    report = sub.add_parser("report", parents=[common], help="plot an existing results CSV")
    report.add_argument("--csv", required=True, type=Path)
    report.add_argument("--out", required=True, type=Path)
    report.add_argument("--overwrite", action="store_true")
    report.set_defaults(handler=cmd_report)

    radius = sub.add_parser(
        "radius", parents=[common], help="largest distance meeting an overlap target"
    )
    radius.add_argument("--config", required=True, type=Path)
    radius.add_argument("--eta-target", required=True, type=_unit_fraction)
    radius.set_defaults(handler=cmd_radius)
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _claim(paths: Iterable[Path], overwrite: bool) -> None:
    """Refuse to clobber existing outputs unless overwrite was asked for."""
    existing = [str(p) for p in paths if p.exists()]
    if existing and not overwrite:
        raise FileExistsError(
            f"refusing to overwrite {', '.join(existing)} (pass --overwrite)"
        )


def _load_config(path: Path, quantum_ps: Optional[int]) -> JobConfig:
    config = parse_config_file(path)
    if quantum_ps is not None:
        config = validate(config.model_copy(update={"quantum_ps": quantum_ps}))
    return config


def cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args.config, args.quantum_ps)
    trace_path = args.out / f"{slugify(config.label())}.trace"
    if args.trace:
        _claim([trace_path], args.overwrite)

    trace = run_iteration(config, record_events=args.trace)
    row = row_from_trace(config, trace)
    if is_baseline(row):
        baseline = row
    else:
        baseline_config = at_distance(config, BASELINE_DISTANCE_M)
        baseline_trace = run_iteration(baseline_config, record_events=False)
        baseline = row_from_trace(baseline_config, baseline_trace)
    row = replace(row, multiplier=time_multiplier(row, baseline))

    emit_csv([row], sys.stdout)
    if args.trace:
        args.out.mkdir(parents=True, exist_ok=True)
        with open(trace_path, "w", encoding="utf-8", newline="\n") as f:
            write_trace(trace, f)
        logger.info("wrote %d event(s) to %s", len(trace.events), trace_path)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    spec = parse_sweep(load_text(args.grid), args.max_configs)
    if args.quantum_ps is not None:
        spec = with_quantum(spec, args.quantum_ps)
    configs = with_baselines(expand_sweep(spec))

    out: Path = args.out
    targets = [out / RESULTS_CSV, out / DELTA_CSV]
    if args.plots:
        targets += [out / name for name in PLOT_FILES]
    if args.trace:
        targets.append(out / TRACE_DIR)
    _claim(targets, args.overwrite)
    out.mkdir(parents=True, exist_ok=True)

    outcome = run_sweep(configs, jobs=args.jobs, record_events=args.trace)
    deltas, _ = delta_eta(outcome.rows)
    write_csv(outcome.rows, out / RESULTS_CSV)
    write_csv(deltas, out / DELTA_CSV, delta=True)
    print(f"wrote {len(outcome.rows)} row(s) to {out / RESULTS_CSV}")

    for peak in peak_delta(deltas).values():
        logger.info(
            "peak delta eta %.4f at %g km (%s %s, %d GPUs)",
            peak.delta_eta, peak.distance_m / 1000, peak.model, peak.gpu, peak.total_gpus,
        )

    if args.trace:
        trace_dir = out / TRACE_DIR
        trace_dir.mkdir(exist_ok=True)
        for index, trace in enumerate(outcome.traces):
            path = trace_dir / f"{index:05d}-{slugify(trace.label)}.trace"
            with open(path, "w", encoding="utf-8", newline="\n") as f:
                write_trace(trace, f)

    if args.plots:
        for path in emit_plots(outcome.rows, out):
            print(f"wrote {path}")

    if outcome.failures:
        for failure in outcome.failures:
            print(
                f"error: run {failure.index} ({failure.label}) failed: {failure.error}",
                file=sys.stderr,
            )
        return EXIT_SIMULATION
    return EXIT_OK


def cmd_ablate_bandwidth(args: argparse.Namespace) -> int:
    if args.csv is not None:
        _claim([args.csv], args.overwrite)
    result = bandwidth_ablation(
        total_gpus=args.total_gpus, jobs=args.jobs, quantum_ps=args.quantum_ps or 1
    )
    print(f"max η improvement: {result.max_improvement:.6f}")
    print(f"max analytic bound: {result.max_analytic_bound:.6f}")
    if args.csv is not None:
        rows = [p.base for p in result.points] + [p.doubled for p in result.points]
        write_csv(rows, args.csv)
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    rows = read_csv_file(args.csv)
    _claim([args.out / name for name in PLOT_FILES], args.overwrite)
    for path in emit_plots(rows, args.out):
        print(f"wrote {path}")
    return EXIT_OK


def cmd_radius(args: argparse.Namespace) -> int:
    config = _load_config(args.config, args.quantum_ps)
    radii = feasible_radii(config, args.eta_target)
    print("fiber,radius_km")
    for fiber, radius in radii.items():
        print(f"{fiber},{radius / 1000:.3f}")
    return EXIT_OK


def _report_error(error: BaseException) -> None:
    print(f"error: {error}", file=sys.stderr)
    if isinstance(error, ConfigValidationError):
        for violation in error.violations:
            print(f"  {violation}", file=sys.stderr)
    elif isinstance(error, SweepError):
        for detail in error.errors:
            print(f"  {detail}", file=sys.stderr)


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, (ParseError, ConfigError, ValidationError, SweepError)):
        return EXIT_INPUT
    if isinstance(error, (WorkloadError, SimulationError)):
        return EXIT_SIMULATION
    if isinstance(error, MetricsError):
        return EXIT_METRICS
    if isinstance(error, OSError):
        return EXIT_IO
    return EXIT_SIMULATION


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return args.handler(args)
    except (GeoOverlapError, OSError) as e:
        _report_error(e)
        return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())
