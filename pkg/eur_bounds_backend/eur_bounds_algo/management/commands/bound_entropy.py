"""
Bound the minimal entropy of a set of measurements.

Reads a measurement specification file, combines its measurements into one
effective POVM and runs the outer-approximation solver. The JSON result holds
the certified bracket ``[h_minus, h_plus]`` and the uncertainty-relation bounds
derived from ``h_minus``.

Exit status is 0 when the gap target was met, 2 when the bounds are valid but
not converged (iteration cap or stall), and 1 on any error.

Examples
--------
>>> python manage.py bound_entropy qubit_xz.json --epsilon 1e-6
>>> python manage.py bound_entropy qubit_xz.json --entropy tsallis --alpha 2 --output xz.json
>>> python manage.py bound_entropy haar_d100.json --max-iter 120 --trace trace.json --timing

See Also
--------
eur_bounds_algo.serialization : file formats
eur_bounds_algo.solver : the solver loop
"""

import logging
import time
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from eur_bounds_algo.entropy import eur_bounds_from_hmin
from eur_bounds_algo.exceptions import EurBoundsError
from eur_bounds_algo.management.commands._shared import (
    EXIT_UNCONVERGED,
    add_entropy_arguments,
    add_solver_arguments,
    emit_json,
    entropy_spec,
    failure,
    solver_config,
    units,
)
from eur_bounds_algo.quantum_core import combine_povms
from eur_bounds_algo.serialization import (
    iteration_payload,
    load_spec,
    result_payload,
    spec_povms,
    write_json,
)
from eur_bounds_algo.solver import minimize_entropy

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "Certified bounds on the minimal entropy of combined measurements"

    def add_arguments(self, parser):
        parser.add_argument("input", type=str, help="Measurement specification file")
        add_entropy_arguments(parser)
        add_solver_arguments(parser)
        parser.add_argument(
            "--output", type=str, default=None, help="Result file (default: stdout)"
        )
        parser.add_argument(
            "--trace", type=str, default=None, help="Write the per-iteration trace here"
        )
        parser.add_argument(
            "--dump-polytope",
            type=str,
            default=None,
            help="Write the final polytope (H and V lines) here",
        )

    def handle(self, *args, **options):
        spec = entropy_spec(options)
        config = solver_config(options, spec)
        scale = units(options)

        final = {}

        def keep_polytope(index, polytope):
            final["polytope"] = polytope

        hook = keep_polytope if options["dump_polytope"] else None
        started = time.perf_counter()
        try:
            spec_file, digest = load_spec(options["input"])
            povms = spec_povms(spec_file)
            certificate = minimize_entropy(combine_povms(povms), config, hook)
            bounds = eur_bounds_from_hmin(certificate.final_h_minus, len(povms), spec)
            dump = final["polytope"].dump_text() if "polytope" in final else None
        except EurBoundsError as exc:
            logger.error("bound_entropy failed on %s: %s", options["input"], exc)
            raise failure(exc) from exc
        elapsed = time.perf_counter() - started

        payload = result_payload(
            "bound_entropy",
            digest,
            certificate,
            bounds,
            scale,
            dim=spec_file.dim,
            seed=options["seed"],
            seconds=elapsed if options["timing"] else None,
        )
        emit_json(self, payload, options["output"])
        if options["trace"]:
            factor = scale.family_scale(spec)
            write_json(
                options["trace"],
                [iteration_payload(r, factor) for r in certificate.iterations],
            )
        if options["dump_polytope"]:
            if dump is None:
                # state-independent measurements are solved without a polytope
                logger.warning("no polytope built for %s", options["input"])
                self.stderr.write(
                    f"No polytope to dump ({certificate.stop_reason.value}); "
                    f"wrote an empty {options['dump_polytope']}",
                    style_func=self.style.WARNING,
                )
            Path(options["dump_polytope"]).write_text(dump or "", encoding="utf-8")

        if options["output"]:
            summary = (
                f"h in [{payload['bounds']['h_minus']:.10g}, "
                f"{payload['bounds']['h_plus']:.10g}] {scale.name} after "
                f"{certificate.iteration_count} iterations ({certificate.stop_reason.value})"
            )
            style = self.style.SUCCESS if certificate.converged else self.style.WARNING
            self.stdout.write(style(summary))
        if not certificate.converged:
            raise CommandError(
                f"bounds not converged ({certificate.stop_reason.value}); "
                f"gap {certificate.gap:.3e} > {config.epsilon:.3e}",
                returncode=EXIT_UNCONVERGED,
            )
