# -*- coding: utf-8 -*-

"""
Command line entry point.

Exit codes: 0 success, 1 failed seed check, 2 configuration error,
3 runtime error.
"""
import argparse
import dataclasses
import logging
import sys
import time

from pathlib import Path
from typing import List
from typing import Optional

from .config import RunConfig
from .config import load_config
from .exceptions import AggrefemError
from .exceptions import ConfigError
from .exceptions import OutputError
from .invariants import run_invariant_suite
from .output import CsvDiagnosticsSink
from .output import VtkSnapshotSink
from .output import write_vtk_snapshot
from .solver import init_from_function
from .solver import run
from .workers import ENV_THREADS
from .workers import resolve_workers

log = logging.getLogger('aggrefem.cli')

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='aggrefem',
        description="Finite element solver for the aggregation equation with degenerate diffusion",
    )
    parser.add_argument("--config", type=Path, help="TOML run configuration (defaults if omitted)")
    parser.add_argument("--out-dir", type=Path, help="output directory, overrides [output] directory")
    parser.add_argument(
        "--threads", type=int,
        help=f"worker threads for the convolution (overrides {ENV_THREADS} and [output] threads)",
    )
    parser.add_argument("--snapshot-every", type=int, help="write a VTK snapshot every N steps")
    parser.add_argument(
        "--seed-check", action="store_true",
        help="run the invariant self-check suite instead of a simulation",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    return parser


def _configure_logging(verbosity: int):
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')


def _resolve(args) -> RunConfig:
    config = load_config(args.config) if args.config is not None else RunConfig()
    if args.out_dir is not None:
        config = config.replace(output_dir=args.out_dir)
    if args.snapshot_every is not None:
        config = config.replace(time=dataclasses.replace(config.time, snapshot_every=args.snapshot_every))
    return config


def _simulate(config: RunConfig, workers: int) -> str:
    out = config.output_dir
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(out, e.strerror or str(e)) from e

    mesh = config.build_mesh()
    write_vtk_snapshot(mesh, None, out / 'mesh.vtk')
    rho0 = init_from_function(mesh, config.build_initial())
    sinks = [CsvDiagnosticsSink(out / 'diagnostics.csv'), VtkSnapshotSink(out)]

    started = time.perf_counter()
    result = run(
        mesh, config.build_law(), config.build_kernel(), rho0, config.time, sinks, workers=workers
    )
    wall = time.perf_counter() - started

    if result.energy:
        held = all(record.holds for record in result.energy)
        log.info("energy inequality %s over %d steps", 'held' if held else 'VIOLATED', len(result.energy) - 1)

    last = result.diagnostics[-1]
    return (
        f"aggrefem: {result.final.step_index} steps in {wall:.2f} s, "
        f"final mass {last.mass:.12g}, Linf {last.linf:.6g}"
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Command line entry point; returns the exit status"""
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)

    try:
        config = _resolve(args)
        workers = resolve_workers(args.threads, config.threads)
    except ConfigError as e:
        print(f"aggrefem: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    if args.seed_check:
        results = run_invariant_suite(workers)
        for result in results:
            print(f"{'PASS' if result.ok else 'FAIL'} {result.name}: {result.detail}")
        failed = sum(not result.ok for result in results)
        print(f"aggrefem: {len(results) - failed}/{len(results)} checks passed")
        return EXIT_OK if failed == 0 else EXIT_CHECK_FAILED

    try:
        summary = _simulate(config, workers)
    except ConfigError as e:
        print(f"aggrefem: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except AggrefemError as e:
        log.debug("run failed", exc_info=True)
        print(f"aggrefem: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME

    print(summary)
    return EXIT_OK
