"""
Arguments and helpers shared by the solver management commands.

Defaults come from the ``EUR_*`` Django settings; explicit flags win.
"""

import argparse
from pathlib import Path

from django.conf import settings
from django.core.management.base import CommandError

from eur_bounds_algo.applications import FamilyName, MeasurementFamily
from eur_bounds_algo.entropy import EntropyFamily, EntropySpec
from eur_bounds_algo.exceptions import EurBoundsError
from eur_bounds_algo.serialization import (
    Units,
    dumps_json,
    load_spec,
    spec_bases,
    write_json,
)
from eur_bounds_algo.solver import SolverConfig

EXIT_UNCONVERGED = 2


def add_entropy_arguments(parser):
    parser.add_argument(
        "--entropy",
        choices=[family.value for family in EntropyFamily],
        default=EntropyFamily.SHANNON.value,
        help="Entropy family to minimize (default: shannon)",
    )
    parser.add_argument(
        "--alpha",
        type=float,
        default=None,
        help="Order of the Tsallis or Renyi entropy",
    )


def add_solver_arguments(parser):
    parser.add_argument(
        "--epsilon",
        type=float,
        default=settings.EUR_DEFAULT_EPSILON,
        help="Target gap h_plus - h_minus (default: %(default)s)",
    )
    parser.add_argument(
        "--max-iter",
        type=int,
        default=settings.EUR_DEFAULT_MAX_ITERATIONS,
        help="Iteration cap (default: %(default)s)",
    )
    parser.add_argument(
        "--pairs",
        action=argparse.BooleanOptionalAction,
        default=settings.EUR_USE_PAIR_CONSTRAINTS,
        help="Add pairwise spectral constraints to the initial polytope",
    )
    parser.add_argument(
        "--vertex-limit",
        type=int,
        default=settings.EUR_VERTEX_LIMIT,
        help="Abort once the polytope has more vertices (default: %(default)s)",
    )
    parser.add_argument(
        "--multi-start",
        type=int,
        default=0,
        help="Random directions whose ground states seed the upper bound",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="Seed for --multi-start directions",
    )
    parser.add_argument(
        "--bits",
        action="store_true",
        help="Report log-based values in bits instead of nats",
    )
    parser.add_argument(
        "--timing",
        action="store_true",
        help="Include wall-clock timing in the result file",
    )


def entropy_spec(options) -> EntropySpec:
    try:
        return EntropySpec(options["entropy"], options["alpha"])
    except EurBoundsError as exc:
        raise CommandError(f"InvalidEntropySpec: {exc}") from exc


def solver_config(options, spec: EntropySpec) -> SolverConfig:
    try:
        return SolverConfig(
            epsilon=options["epsilon"],
            max_iterations=options["max_iter"],
            use_pair_constraints=options["pairs"],
            vertex_limit=options["vertex_limit"],
            entropy=spec,
            rank_tolerance=settings.EUR_RANK_TOLERANCE,
            stall_window=settings.EUR_STALL_WINDOW,
            multi_start=options["multi_start"],
            seed=options["seed"] or 0,
        )
    except ValueError as exc:
        raise CommandError(str(exc)) from exc


def units(options) -> Units:
    return Units(bits=options["bits"])


def failure(exc: EurBoundsError) -> CommandError:
    return CommandError(f"{type(exc).__name__}: {exc}")


def emit_json(command, payload, path=None):
    """Write ``payload`` to ``path``, or to the command's stdout without a path."""
    if path:
        write_json(path, payload)
    else:
        command.stdout.write(dumps_json(payload), ending="")


def add_family_arguments(parser):
    parser.add_argument(
        "--family",
        choices=[name.value for name in FamilyName],
        default=FamilyName.M2.value,
        help="Measurement family to sweep (default: M2)",
    )
    parser.add_argument(
        "--input",
        type=str,
        default=None,
        help="Specification file with the bases of a custom family",
    )
    parser.add_argument(
        "--points",
        type=int,
        default=None,
        help="Grid points per parameter axis (default: 61 for M2, 31 for M3)",
    )
    parser.add_argument(
        "--jobs",
        type=int,
        default=settings.EUR_SWEEP_JOBS,
        help="Worker processes (default: %(default)s)",
    )
    parser.add_argument(
        "--output",
        type=str,
        required=True,
        help="Output path prefix; writes <prefix>.csv and <prefix>.json",
    )


def measurement_family(options) -> MeasurementFamily:
    name = FamilyName(options["family"])
    if name is not FamilyName.CUSTOM:
        if options["input"]:
            raise CommandError("--input is only used with --family custom")
        return MeasurementFamily(name)
    if not options["input"]:
        raise CommandError("--family custom needs --input")
    try:
        spec_file, _ = load_spec(options["input"])
        return MeasurementFamily.custom(spec_bases(spec_file))
    except EurBoundsError as exc:
        raise failure(exc) from exc


def output_paths(prefix: str) -> tuple[Path, Path]:
    base = Path(prefix)
    if base.suffix in {".csv", ".json"}:
        base = base.with_suffix("")
    return base.with_name(base.name + ".csv"), base.with_name(base.name + ".json")
