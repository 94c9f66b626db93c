"""
Sweep the optimal entropic bound over a measurement family.

Writes ``<prefix>.csv`` (one row per grid point: parameters, q_optimal, gap,
q_mu/q_cp/q_rpz for two-basis families, iterations, vertex_count_max) and
``<prefix>.json`` with the full per-point summaries.

Points that fail are recorded with their error and the sweep continues; the
command then exits with status 2, as it does when some point did not converge.

Examples
--------
>>> python manage.py sweep_bounds --family M2 --output results/m2
>>> python manage.py sweep_bounds --family M3 --points 11 --jobs 8 --output results/m3
>>> python manage.py sweep_bounds --family custom --input bases.json --output custom
"""

import logging
import time

from django.core.management.base import BaseCommand, CommandError

from eur_bounds_algo.applications import default_grid, sweep_bounds
from eur_bounds_algo.exceptions import EurBoundsError
from eur_bounds_algo.management.commands._shared import (
    EXIT_UNCONVERGED,
    add_entropy_arguments,
    add_family_arguments,
    add_solver_arguments,
    entropy_spec,
    failure,
    measurement_family,
    output_paths,
    solver_config,
    units,
)
from eur_bounds_algo.serialization import (
    sweep_payload,
    sweep_table,
    write_csv,
    write_json,
)

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "Optimal entropic bounds over the parameter grid of a measurement family"

    def add_arguments(self, parser):
        add_family_arguments(parser)
        add_entropy_arguments(parser)
        add_solver_arguments(parser)

    def handle(self, *args, **options):
        spec = entropy_spec(options)
        config = solver_config(options, spec)
        scale = units(options)
        family = measurement_family(options)
        try:
            grid = default_grid(family, options["points"])
        except ValueError as exc:
            raise CommandError(str(exc)) from exc

        self.stdout.write(
            f"Sweeping {family.name.value} over {len(grid)} points "
            f"with {options['jobs']} job(s)..."
        )
        started = time.perf_counter()
        try:
            result = sweep_bounds(family, grid, spec, config, jobs=options["jobs"])
        except EurBoundsError as exc:
            raise failure(exc) from exc
        elapsed = time.perf_counter() - started

        csv_path, json_path = output_paths(options["output"])
        header, rows = sweep_table(result, scale)
        write_csv(csv_path, header, rows)
        write_json(
            json_path,
            sweep_payload(result, scale, elapsed if options["timing"] else None),
        )

        failed = len(result.failures)
        unconverged = sum(
            1 for point in result.points if point.error is None and not point.converged
        )
        if failed or unconverged:
            self.stdout.write(
                self.style.WARNING(
                    f"{failed} failed and {unconverged} unconverged points "
                    f"written to {csv_path}"
                )
            )
            raise CommandError(
                f"{failed + unconverged} of {len(grid)} points without converged bounds",
                returncode=EXIT_UNCONVERGED,
            )
        self.stdout.write(
            self.style.SUCCESS(f"Wrote {len(rows)} rows to {csv_path} and {json_path}")
        )
