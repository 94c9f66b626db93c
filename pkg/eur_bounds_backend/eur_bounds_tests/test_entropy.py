import math

import numpy as np
from django.test import SimpleTestCase

from eur_bounds_algo.entropy import (
    EntropyFamily,
    EntropySpec,
    concatenate_scaled,
    entropy_gradient,
    entropy_value,
    entropy_values,
    eur_bounds_from_hmin,
    objective_to_family,
    renyi_from_tsallis,
    solver_objective,
    tsallis_concat_identity_check,
    tsallis_from_renyi,
)
from eur_bounds_algo.exceptions import InvalidDistribution, InvalidEntropySpec

FAMILIES = [
    EntropySpec.shannon(),
    EntropySpec.tsallis(0.5),
    EntropySpec.tsallis(2.0),
    EntropySpec.renyi(0.5),
    EntropySpec.renyi(3.0),
]


class EntropySpecTests(SimpleTestCase):
    def test_alpha_one_is_rejected(self):
        """alpha = 1 belongs to the Shannon family."""
        with self.assertRaises(InvalidEntropySpec):
            EntropySpec.tsallis(1.0)

    def test_non_positive_alpha_is_rejected(self):
        """alpha must be positive."""
        with self.assertRaises(InvalidEntropySpec):
            EntropySpec.renyi(0.0)

    def test_missing_alpha_is_rejected(self):
        """Tsallis and Renyi need an order."""
        with self.assertRaises(InvalidEntropySpec):
            EntropySpec("tsallis")

    def test_unknown_family_is_rejected(self):
        """Only the three supported families parse."""
        with self.assertRaises(InvalidEntropySpec):
            EntropySpec("min-entropy", 2.0)

    def test_shannon_drops_alpha(self):
        """An alpha given with Shannon is ignored."""
        spec = EntropySpec("shannon", 3.0)
        self.assertIs(spec.family, EntropyFamily.SHANNON)
        self.assertIsNone(spec.alpha)

    def test_describe(self):
        """describe() gives the family name and order."""
        self.assertEqual(
            EntropySpec.tsallis(2).describe(), {"family": "tsallis", "alpha": 2.0}
        )


class EntropyValueTests(SimpleTestCase):
    def test_known_values(self):
        """Uniform and two-point distributions give textbook values."""
        self.assertAlmostEqual(
            entropy_value(EntropySpec.shannon(), [0.25] * 4), math.log(4), places=14
        )
        self.assertAlmostEqual(entropy_value(EntropySpec.tsallis(2), [0.5, 0.5]), 0.5)
        self.assertAlmostEqual(
            entropy_value(EntropySpec.renyi(2), [0.5, 0.5]), math.log(2), places=14
        )

    def test_zero_log_zero(self):
        """Deterministic distributions have zero entropy."""
        for spec in FAMILIES:
            self.assertAlmostEqual(entropy_value(spec, [1.0, 0.0, 0.0]), 0.0, places=14)

    def test_negative_entry_is_rejected(self):
        """Entries below -1e-10 are invalid."""
        with self.assertRaises(InvalidDistribution):
            entropy_value(EntropySpec.shannon(), [1.1, -0.1])

    def test_small_negative_entry_is_clamped(self):
        """Rounding noise below zero is clamped rather than rejected."""
        value = entropy_value(EntropySpec.shannon(), [1.0 + 1e-11, -1e-11])
        self.assertAlmostEqual(value, 0.0, places=9)

    def test_wrong_total_is_rejected(self):
        """Distributions must sum to one within 1e-8."""
        with self.assertRaises(InvalidDistribution):
            entropy_value(EntropySpec.shannon(), [0.5, 0.4])

    def test_rows_are_evaluated_independently(self):
        """entropy_values works row by row."""
        rows = np.array([[1.0, 0.0], [0.5, 0.5]])
        np.testing.assert_allclose(
            entropy_values(EntropySpec.shannon(), rows), [0.0, math.log(2)]
        )


class EntropyGradientTests(SimpleTestCase):
    def test_gradient_matches_finite_differences(self):
        """Analytic gradients agree with central differences in the interior."""
        rng = np.random.default_rng(0)
        step = 1e-6
        for spec in FAMILIES:
            for _ in range(100):
                p = rng.uniform(0.5, 1.5, size=5)
                p /= p.sum()
                gradient = entropy_gradient(spec, p)
                for i in range(p.size):
                    shift = np.zeros_like(p)
                    shift[i] = step
                    numeric = (
                        entropy_values(spec, p + shift, check=False)
                        - entropy_values(spec, p - shift, check=False)
                    ) / (2 * step)
                    self.assertLess(
                        abs(numeric - gradient[i]) / max(abs(gradient[i]), 1.0), 1e-5
                    )

    def test_gradient_is_finite_at_the_boundary(self):
        """Zero probabilities are floored at the clamp epsilon."""
        gradient = entropy_gradient(EntropySpec.shannon(), [1.0, 0.0])
        self.assertTrue(np.all(np.isfinite(gradient)))
        self.assertAlmostEqual(gradient[1], -(1.0 + math.log(1e-12)))


class ConversionTests(SimpleTestCase):
    def test_renyi_tsallis_maps_are_inverse(self):
        """The monotone maps undo each other."""
        for alpha in (0.5, 2.0, 3.0):
            for h in (0.0, 0.1, 0.4):
                back = tsallis_from_renyi(renyi_from_tsallis(h, alpha), alpha)
                self.assertAlmostEqual(back, h, places=14)

    def test_renyi_is_minimized_through_tsallis(self):
        """A Renyi spec is solved through the Tsallis entropy of the same order."""
        spec = EntropySpec.renyi(2.0)
        objective = solver_objective(spec)
        self.assertIs(objective.family, EntropyFamily.TSALLIS)
        self.assertEqual(objective.alpha, 2.0)
        self.assertAlmostEqual(objective_to_family(spec, 0.625), math.log(8 / 3))

    def test_tsallis_concatenation_identity(self):
        """Separate and combined Tsallis entropies satisfy the scaling identity."""
        rng = np.random.default_rng(3)
        for alpha in (0.3, 0.5, 2.0, 3.0):
            for n in (1, 2, 3, 5):
                for _ in range(63):
                    sizes = rng.integers(2, 6, size=n)
                    p_list = [rng.dirichlet(np.ones(size)) for size in sizes]
                    self.assertLess(tsallis_concat_identity_check(p_list, alpha), 1e-12)

    def test_concatenate_scaled(self):
        """Combined distributions are rescaled by 1/N."""
        np.testing.assert_allclose(
            concatenate_scaled([[1.0, 0.0], [0.5, 0.5]]), [0.5, 0.0, 0.25, 0.25]
        )


class EurBoundsTests(SimpleTestCase):
    def test_shannon_sum_bound(self):
        """h = 3/2 ln 2 for two bases gives q = ln 2."""
        bounds = eur_bounds_from_hmin(1.5 * math.log(2), 2, EntropySpec.shannon())
        self.assertAlmostEqual(bounds.q_shannon_sum, math.log(2), places=14)
        self.assertAlmostEqual(bounds.headline, math.log(2), places=14)
        self.assertEqual(bounds.alpha, 1.0)

    def test_tsallis_sum_bound(self):
        """h = 5/8 for two qubit MUBs gives q = 1/2 at alpha = 2."""
        bounds = eur_bounds_from_hmin(0.625, 2, EntropySpec.tsallis(2))
        self.assertAlmostEqual(bounds.q_tsallis, 0.5, places=14)
        self.assertAlmostEqual(bounds.q_renyi, math.log(8 / 3), places=14)
        self.assertIsNone(bounds.q_shannon_sum)

    def test_renyi_input(self):
        """Renyi minima are reported together with the equivalent Tsallis bound."""
        bounds = eur_bounds_from_hmin(math.log(8 / 3), 2, EntropySpec.renyi(2))
        self.assertAlmostEqual(bounds.q_tsallis, 0.5, places=12)
        self.assertAlmostEqual(bounds.q_renyi, math.log(8 / 3), places=14)

    def test_negative_minimum_is_rejected(self):
        """Clearly negative entropies are an error."""
        with self.assertRaises(ValueError):
            eur_bounds_from_hmin(-0.1, 2, EntropySpec.shannon())

    def test_rounding_noise_is_clamped(self):
        """A minimum of -1e-15 is treated as zero."""
        bounds = eur_bounds_from_hmin(-1e-15, 1, EntropySpec.shannon())
        self.assertEqual(bounds.h_min, 0.0)
