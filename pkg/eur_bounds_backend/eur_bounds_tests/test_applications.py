import math
from unittest import mock

import numpy as np
import pytest
from django.test import SimpleTestCase

from eur_bounds_algo.applications import (
    FamilyName,
    MeasurementFamily,
    build_family_bases,
    default_grid,
    steering_sweep,
    steering_threshold,
    sweep_bounds,
)
from eur_bounds_algo.entropy import EntropySpec, eur_bounds_from_hmin
from eur_bounds_algo.exceptions import OutOfRange, TooManyVertices
from eur_bounds_algo.quantum_core import PureState, combine_povms, pvm_from_basis
from eur_bounds_algo.solver import SolverConfig, minimize_entropy


def gram_deviation(basis):
    matrix = np.column_stack([v.amplitudes for v in basis])
    return np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[1])))


def qubit_xz_family():
    return MeasurementFamily.custom(
        [
            [PureState.basis_state(2, 0), PureState.basis_state(2, 1)],
            [PureState.from_vector([1, 1]), PureState.from_vector([1, -1])],
        ]
    )


class FamilyTests(SimpleTestCase):
    def test_m2_starts_from_the_computational_basis(self):
        """theta = 0 makes the first M2 basis computational."""
        bases = build_family_bases(MeasurementFamily.m2(), {"theta": 0.0})
        self.assertAlmostEqual(gram_deviation(bases[0]), 0.0)
        np.testing.assert_allclose(
            np.column_stack([v.amplitudes for v in bases[0]]), np.eye(3), atol=1e-15
        )

    def test_m2_bases_are_orthonormal_on_the_grid(self):
        """Every default M2 grid point gives orthonormal bases."""
        family = MeasurementFamily.m2()
        for point in default_grid(family):
            for basis in build_family_bases(family, point):
                self.assertLess(gram_deviation(basis), 1e-12)

    def test_m3_bases_are_orthonormal(self):
        """The M3 bases are orthonormal away from the grid too."""
        point = {"a": 0.5, "phi": math.pi / 3}
        bases = build_family_bases(MeasurementFamily.m3(), point)
        self.assertEqual(len(bases), 3)
        for basis in bases:
            self.assertLess(gram_deviation(basis), 1e-12)

    def test_m3_third_basis_at_a_equal_one(self):
        """a = 1 makes the third M3 basis computational up to phases."""
        bases = build_family_bases(MeasurementFamily.m3(), {"a": 1.0, "phi": 0.0})
        magnitudes = np.abs(np.column_stack([v.amplitudes for v in bases[2]]))
        np.testing.assert_allclose(magnitudes, np.eye(3), atol=1e-15)

    def test_parameters_out_of_range(self):
        """Parameters outside their domain raise OutOfRange."""
        with self.assertRaises(OutOfRange):
            build_family_bases(MeasurementFamily.m2(), {"theta": -0.1})
        with self.assertRaises(OutOfRange):
            build_family_bases(MeasurementFamily.m2(), {"theta": 2 * math.pi})
        with self.assertRaises(OutOfRange):
            build_family_bases(MeasurementFamily.m3(), {"a": 1.5, "phi": 0.0})
        with self.assertRaises(OutOfRange):
            build_family_bases(MeasurementFamily.m3(), {"a": 0.5})

    def test_default_grid_sizes(self):
        """61 M2 points, 31 x 31 M3 points, and overrides per axis."""
        self.assertEqual(len(default_grid(MeasurementFamily.m2())), 61)
        self.assertEqual(len(default_grid(MeasurementFamily.m3())), 961)
        self.assertEqual(len(default_grid(MeasurementFamily.m3(), points=4)), 16)
        self.assertEqual(default_grid(qubit_xz_family()), [{}])
        with self.assertRaises(ValueError):
            default_grid(MeasurementFamily.m2(), points=0)

    def test_family_metadata(self):
        """Families know their parameters and measurement counts."""
        self.assertEqual(MeasurementFamily.m2().parameters, ("theta",))
        self.assertEqual(MeasurementFamily.m3().n_measurements, 3)
        family = qubit_xz_family()
        self.assertIs(family.name, FamilyName.CUSTOM)
        self.assertEqual((family.dim, family.n_measurements), (2, 2))


class SweepTests(SimpleTestCase):
    def setUp(self):
        self.family = MeasurementFamily.m2()
        self.grid = default_grid(self.family, points=3)
        self.config = SolverConfig(epsilon=1e-6)

    def test_optimal_bound_dominates_closed_forms(self):
        """q_optimal is never below MU, CP or RPZ beyond the solver tolerance."""
        result = sweep_bounds(
            self.family, self.grid, EntropySpec.shannon(), self.config
        )
        self.assertEqual(len(result.points), 3)
        self.assertEqual(result.failures, [])
        for point in result.points:
            self.assertTrue(point.converged)
            best_closed_form = max(point.q_mu, point.q_cp, point.q_rpz)
            self.assertGreaterEqual(point.q_optimal, best_closed_form - 2e-6)

    def test_single_point_matches_direct_solve(self):
        """A one-point sweep reports exactly what the solver returns."""
        point = {"theta": math.pi / 5}
        result = sweep_bounds(self.family, [point], EntropySpec.shannon(), self.config)
        bases = build_family_bases(self.family, point)
        certificate = minimize_entropy(
            combine_povms([pvm_from_basis(b) for b in bases]), self.config
        )
        bounds = eur_bounds_from_hmin(
            certificate.final_h_minus, 2, EntropySpec.shannon()
        )
        self.assertEqual(result.points[0].h_minus, certificate.final_h_minus)
        self.assertEqual(result.points[0].q_optimal, bounds.q_shannon_sum)

    def test_worker_processes_give_identical_results(self):
        """Parallel sweeps keep grid order and values."""
        grid = self.grid[:2]
        serial = sweep_bounds(self.family, grid, EntropySpec.shannon(), self.config)
        parallel = sweep_bounds(
            self.family, grid, EntropySpec.shannon(), self.config, jobs=2
        )
        np.testing.assert_array_equal(serial.q_optimal, parallel.q_optimal)
        self.assertEqual(serial.parameter_grid, parallel.parameter_grid)

    def test_failed_points_are_recorded(self):
        """A failing point carries its error and the sweep continues."""
        with mock.patch(
            "eur_bounds_algo.applications.minimize_entropy",
            side_effect=TooManyVertices("limit reached"),
        ):
            result = sweep_bounds(
                self.family, self.grid, EntropySpec.shannon(), self.config
            )
        self.assertEqual(len(result.failures), 3)
        self.assertEqual(result.failures[0].error, "TooManyVertices: limit reached")
        self.assertTrue(np.all(np.isnan(result.q_optimal)))

    def test_entropy_spec_overrides_config(self):
        """The sweep solves for the requested family."""
        result = sweep_bounds(
            self.family, self.grid[:1], EntropySpec.tsallis(2), self.config
        )
        self.assertEqual(result.config.entropy, EntropySpec.tsallis(2))
        self.assertEqual(result.points[0].q_optimal, result.points[0].q_tsallis)

    @pytest.mark.slow
    def test_optimal_bound_is_strictly_better_somewhere(self):
        """On the full M2 grid the optimal bound beats every closed form somewhere."""
        result = sweep_bounds(
            self.family, default_grid(self.family), EntropySpec.shannon(), self.config
        )
        self.assertEqual(result.failures, [])
        closed_form = np.maximum.reduce(
            [result.column("q_mu"), result.column("q_cp"), result.column("q_rpz")]
        )
        self.assertTrue(np.all(result.q_optimal >= closed_form - 2e-6))
        self.assertGreater(np.max(result.q_optimal - closed_form), 1e-3)


class SteeringTests(SimpleTestCase):
    def test_threshold_endpoints(self):
        """q = 0 gives 1 and the maximal q gives 0."""
        self.assertEqual(steering_threshold(0.0, 2, 3).eta, 1.0)
        self.assertAlmostEqual(steering_threshold(2 * 2 / 3, 2, 3).eta, 0.0)

    def test_threshold_is_decreasing(self):
        """Larger bounds give smaller thresholds."""
        values = [steering_threshold(q, 3, 3).eta for q in np.linspace(0, 2, 21)]
        self.assertTrue(all(a >= b for a, b in zip(values, values[1:])))

    def test_clamping_is_reported(self):
        """Arguments outside [0, 1] are clamped and flagged."""
        threshold = steering_threshold(5.0, 2, 2)
        self.assertEqual(threshold.eta, 0.0)
        self.assertTrue(threshold.clamped)
        self.assertFalse(steering_threshold(0.5, 2, 2).clamped)

    def test_qubit_mutually_unbiased_bases(self):
        """X and Z give q = 1/2 and eta = 1/sqrt(2)."""
        self.assertAlmostEqual(steering_threshold(0.5, 2, 2).eta, 1 / math.sqrt(2))
        result = steering_sweep(qubit_xz_family(), [{}], SolverConfig(epsilon=1e-7))
        self.assertAlmostEqual(result.q_tsallis_2[0], 0.5, places=5)
        self.assertAlmostEqual(result.eta_threshold[0], 1 / math.sqrt(2), places=4)
        self.assertEqual((result.n_measurements, result.dim), (2, 2))

    def test_comparison_thresholds(self):
        """External bounds get their own thresholds."""
        result = steering_sweep(
            qubit_xz_family(), [{}], SolverConfig(), comparison=[0.25]
        )
        self.assertAlmostEqual(result.comparison_eta[0], math.sqrt(0.75))

    def test_comparison_length_must_match(self):
        """One comparison value per grid point is required."""
        with self.assertRaises(ValueError):
            steering_sweep(
                qubit_xz_family(), [{}], SolverConfig(), comparison=[0.1, 0.2]
            )
