"""
Steering visibility thresholds for isotropic states over a measurement family.

For every grid point the optimal Tsallis-2 bound ``q`` is computed and turned
into ``eta = sqrt(1 - d q / (N (d - 1)))``. ``--comparison`` takes a CSV with a
``q`` column (one row per grid point, e.g. a majorization bound computed
elsewhere) and adds its thresholds as extra columns.

Examples
--------
>>> python manage.py steering_thresholds --family M2 --output results/steering_m2
>>> python manage.py steering_thresholds --family M2 --comparison maj.csv --output s
"""

import logging
import time

from django.core.management.base import BaseCommand, CommandError

from eur_bounds_algo.applications import default_grid, steering_sweep
from eur_bounds_algo.config.solver_defaults import STEERING_ALPHA
from eur_bounds_algo.entropy import EntropySpec
from eur_bounds_algo.exceptions import EurBoundsError
from eur_bounds_algo.management.commands._shared import (
    EXIT_UNCONVERGED,
    add_family_arguments,
    add_solver_arguments,
    failure,
    measurement_family,
    output_paths,
    solver_config,
)
from eur_bounds_algo.serialization import (
    read_comparison_csv,
    steering_payload,
    steering_table,
    write_csv,
    write_json,
)

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "Isotropic-state steering thresholds from optimal Tsallis-2 bounds"

    def add_arguments(self, parser):
        add_family_arguments(parser)
        add_solver_arguments(parser)
        parser.add_argument(
            "--comparison",
            type=str,
            default=None,
            help="CSV with an external q value per grid point (column 'q')",
        )

    def handle(self, *args, **options):
        config = solver_config(options, EntropySpec.tsallis(STEERING_ALPHA))
        family = measurement_family(options)
        try:
            grid = default_grid(family, options["points"])
        except ValueError as exc:
            raise CommandError(str(exc)) from exc

        started = time.perf_counter()
        try:
            comparison = None
            if options["comparison"]:
                comparison = read_comparison_csv(options["comparison"])
            result = steering_sweep(
                family, grid, config, jobs=options["jobs"], comparison=comparison
            )
        except EurBoundsError as exc:
            raise failure(exc) from exc
        except ValueError as exc:
            raise CommandError(str(exc)) from exc
        elapsed = time.perf_counter() - started

        csv_path, json_path = output_paths(options["output"])
        header, rows = steering_table(result, family)
        write_csv(csv_path, header, rows)
        payload = steering_payload(result, family, config)
        if options["timing"]:
            payload["timing"] = {"seconds": elapsed}
        write_json(json_path, payload)

        clamped = int(result.clamped.sum())
        if clamped:
            self.stdout.write(
                self.style.WARNING(f"{clamped} threshold(s) clamped to [0, 1]")
            )
        incomplete = sum(1 for point in result.points if not point.converged)
        if incomplete:
            raise CommandError(
                f"{incomplete} of {len(grid)} points without converged bounds",
                returncode=EXIT_UNCONVERGED,
            )
        self.stdout.write(
            self.style.SUCCESS(f"Wrote {len(rows)} thresholds to {csv_path}")
        )
