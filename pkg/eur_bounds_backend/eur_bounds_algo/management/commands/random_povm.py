"""
Write a random POVM as a measurement specification file.

The POVM comes from the Ginibre construction in
:func:`eur_bounds_algo.quantum_core.random_haar_povm`; equal ``(d, m, seed)``
give byte-identical files.

Examples
--------
>>> python manage.py random_povm 100 4 1 --output haar_d100_seed1.json
>>> python manage.py bound_entropy haar_d100_seed1.json --max-iter 120
"""

from django.core.management.base import BaseCommand, CommandError

from eur_bounds_algo.management.commands._shared import emit_json
from eur_bounds_algo.quantum_core import random_haar_povm
from eur_bounds_algo.serialization import povm_spec, serialize_spec


class Command(BaseCommand):
    help = "Generate a seeded random POVM specification file"

    def add_arguments(self, parser):
        parser.add_argument("d", type=int, help="Hilbert-space dimension")
        parser.add_argument("m", type=int, help="Number of outcomes")
        parser.add_argument("seed", type=int, help="Generator seed")
        parser.add_argument(
            "--output", type=str, default=None, help="Spec file (default: stdout)"
        )

    def handle(self, *args, **options):
        try:
            povm = random_haar_povm(options["d"], options["m"], options["seed"])
        except ValueError as exc:
            raise CommandError(str(exc)) from exc
        emit_json(self, serialize_spec(povm_spec([povm])), options["output"])
        if options["output"]:
            self.stdout.write(
                self.style.SUCCESS(
                    f"Wrote d={povm.dim}, m={povm.num_outcomes} POVM to {options['output']}"
                )
            )
