"""
Compare the optimal Shannon bound of two bases with the closed-form bounds.

The input must hold exactly two ``basis`` measurements. The result file has
the solver output plus ``q_mu``, ``q_cp``, ``q_rpz`` and ``q_optimal`` (the
Shannon-sum bound ``2 h - 2 ln 2`` from the certified ``h_minus``), and a
dominance check ``q_optimal >= max(q_mu, q_cp, q_rpz) - 2 epsilon``.

Examples
--------
>>> python manage.py compare_bounds qubit_xz.json
>>> python manage.py compare_bounds m2_theta_pi5.json --bits --output m2.json
"""

import logging
import warnings

from django.core.management.base import BaseCommand, CommandError

from eur_bounds_algo.analytic_bounds import cp_bound, mu_bound, overlaps, rpz_bound
from eur_bounds_algo.entropy import EntropySpec, eur_bounds_from_hmin
from eur_bounds_algo.exceptions import DegenerateOverlapWarning, EurBoundsError
from eur_bounds_algo.management.commands._shared import (
    EXIT_UNCONVERGED,
    add_solver_arguments,
    emit_json,
    failure,
    solver_config,
    units,
)
from eur_bounds_algo.quantum_core import combine_povms, pvm_from_basis
from eur_bounds_algo.serialization import load_spec, result_payload, spec_bases
from eur_bounds_algo.solver import minimize_entropy

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = "Optimal Shannon bound of two bases next to the MU, CP and RPZ bounds"

    def add_arguments(self, parser):
        parser.add_argument("input", type=str, help="Specification with two bases")
        add_solver_arguments(parser)
        parser.add_argument(
            "--output", type=str, default=None, help="Result file (default: stdout)"
        )

    def handle(self, *args, **options):
        spec = EntropySpec.shannon()
        config = solver_config(options, spec)
        scale = units(options)
        try:
            spec_file, digest = load_spec(options["input"])
            bases = spec_bases(spec_file, count=2)
            data = overlaps(bases[0], bases[1])
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", DegenerateOverlapWarning)
                analytic = {
                    "q_mu": mu_bound(data),
                    "q_cp": cp_bound(data),
                    "q_rpz": rpz_bound(data),
                }
            povm = combine_povms([pvm_from_basis(basis) for basis in bases])
            certificate = minimize_entropy(povm, config)
            bounds = eur_bounds_from_hmin(certificate.final_h_minus, 2, spec)
        except EurBoundsError as exc:
            logger.error("compare_bounds failed on %s: %s", options["input"], exc)
            raise failure(exc) from exc

        q_optimal = bounds.q_shannon_sum
        margin = q_optimal - max(analytic.values())
        holds = margin >= -2.0 * config.epsilon
        factor = scale.log_scale

        payload = result_payload(
            "compare_bounds",
            digest,
            certificate,
            bounds,
            scale,
            dim=spec_file.dim,
            seed=options["seed"],
        )
        payload["analytic"] = {
            "c": data.c,
            "c2": data.c2,
            "degenerate_overlap": bool(caught),
            **{name: value * factor for name, value in analytic.items()},
        }
        payload["q_optimal"] = q_optimal * factor
        payload["dominance"] = {"holds": holds, "margin": margin * factor}
        emit_json(self, payload, options["output"])

        if not holds:
            logger.warning("dominance violated by %.3e", -margin)
        if options["output"]:
            rows = [("q_optimal", q_optimal)] + list(analytic.items())
            for name, value in rows:
                self.stdout.write(f"{name:>10} = {value * factor:.10f} {scale.name}")
            style = self.style.SUCCESS if holds else self.style.ERROR
            self.stdout.write(style(f"dominance margin {margin * factor:.3e}"))
        if not certificate.converged:
            raise CommandError(
                f"bounds not converged ({certificate.stop_reason.value})",
                returncode=EXIT_UNCONVERGED,
            )
