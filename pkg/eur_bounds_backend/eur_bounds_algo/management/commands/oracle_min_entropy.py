"""
Internal: brute-force estimate of the minimal entropy of a measurement file.

Used to record reference values for the test fixtures. The estimate is an
upper bound on the true minimum (random pure states plus derivative-free local
refinement); it is slow and limited to ``d <= 6``.

Examples
--------
>>> python manage.py oracle_min_entropy qubit_xz.json --samples 100000 --seed 3 \\
...     --output eur_bounds_tests/fixtures/oracle_qubit_xz_shannon.json
"""

import logging

from django.core.management.base import BaseCommand, CommandError

from eur_bounds_algo.exceptions import EurBoundsError
from eur_bounds_algo.management.commands._shared import (
    add_entropy_arguments,
    emit_json,
    entropy_spec,
    failure,
)
from eur_bounds_algo.oracle import brute_force_min_entropy
from eur_bounds_algo.quantum_core import combine_povms
from eur_bounds_algo.serialization import (
    SCHEMA_VERSION,
    complex_pairs,
    load_spec,
    spec_povms,
)

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "(internal) Brute-force minimal entropy for recording test fixtures"

    def add_arguments(self, parser):
        parser.add_argument("input", type=str, help="Measurement specification file")
        add_entropy_arguments(parser)
        parser.add_argument(
            "--samples",
            type=int,
            default=20000,
            help="Random states (default: %(default)s)",
        )
        parser.add_argument("--seed", type=int, default=0, help="Sampling seed")
        parser.add_argument(
            "--output", type=str, default=None, help="Record file (default: stdout)"
        )

    def handle(self, *args, **options):
        spec = entropy_spec(options)
        try:
            spec_file, digest = load_spec(options["input"])
            povm = combine_povms(spec_povms(spec_file))
            result = brute_force_min_entropy(
                povm, spec, options["samples"], options["seed"]
            )
        except EurBoundsError as exc:
            raise failure(exc) from exc
        except ValueError as exc:
            raise CommandError(str(exc)) from exc

        logger.info(
            "oracle estimate for %s: %.12g", options["input"], result.h_estimate
        )
        emit_json(
            self,
            {
                "schema_version": SCHEMA_VERSION,
                "command": "oracle_min_entropy",
                "input_digest": digest,
                "entropy": spec.describe(),
                "h_estimate": result.h_estimate,
                "best_state": complex_pairs(result.best_state.amplitudes),
                "samples": result.samples,
                "refinement_steps": result.refinement_steps,
                "seed": options["seed"],
            },
            options["output"],
        )
