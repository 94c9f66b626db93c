import math

import numpy as np
from django.test import SimpleTestCase

from eur_bounds_algo.analytic_bounds import (
    OverlapData,
    cp_bound,
    mu_bound,
    overlaps,
    rpz_bound,
)
from eur_bounds_algo.applications import MeasurementFamily, build_family_bases
from eur_bounds_algo.exceptions import DegenerateOverlapWarning, NotOrthonormal
from eur_bounds_algo.quantum_core import PureState


def computational(d):
    return [PureState.basis_state(d, i) for i in range(d)]


def fourier(d):
    omega = np.exp(2j * math.pi / d)
    return [
        PureState.from_vector([omega ** (j * k) for j in range(d)]) for k in range(d)
    ]


class OverlapTests(SimpleTestCase):
    def test_identical_bases(self):
        """A basis has c = c2 = 1 with itself."""
        data = overlaps(computational(3), computational(3))
        self.assertAlmostEqual(data.c, 1.0)
        self.assertAlmostEqual(data.c2, 1.0)
        self.assertAlmostEqual(data.b, 1.0)

    def test_fourier_basis(self):
        """The Fourier basis is unbiased to the computational one."""
        data = overlaps(computational(3), fourier(3))
        self.assertAlmostEqual(data.c, 1 / 3, places=12)
        self.assertAlmostEqual(data.c2, 1 / 3, places=12)

    def test_m2_overlaps_match_direct_evaluation(self):
        """c and c2 are the two largest squared overlaps."""
        bases = build_family_bases(MeasurementFamily.m2(), {"theta": math.pi / 5})
        a = np.column_stack([v.amplitudes for v in bases[0]])
        b = np.column_stack([v.amplitudes for v in bases[1]])
        ranked = np.sort(np.abs(a.conj().T @ b).ravel() ** 2)[::-1]
        data = overlaps(bases[0], bases[1])
        self.assertAlmostEqual(data.c, ranked[0], places=12)
        self.assertAlmostEqual(data.c2, ranked[1], places=12)
        self.assertAlmostEqual(data.b, (1 + math.sqrt(ranked[0])) / 2, places=12)

    def test_non_orthonormal_basis(self):
        """Two copies of the same vector are not a basis."""
        repeated = [PureState.basis_state(2, 0), PureState.basis_state(2, 0)]
        with self.assertRaises(NotOrthonormal):
            overlaps(repeated, computational(2))

    def test_dimension_mismatch(self):
        """Bases must live in the same space."""
        with self.assertRaises(NotOrthonormal):
            overlaps(computational(2), computational(3))


class ClosedFormTests(SimpleTestCase):
    def test_qubit_mutually_unbiased_bases(self):
        """All three bounds equal ln 2 for the qubit X and Z bases."""
        data = overlaps(computational(2), fourier(2))
        for bound in (mu_bound, cp_bound, rpz_bound):
            self.assertAlmostEqual(bound(data), math.log(2), places=12)

    def test_identical_bases_give_zero(self):
        """A basis measured twice has no uncertainty."""
        data = overlaps(computational(3), computational(3))
        for bound in (mu_bound, cp_bound, rpz_bound):
            self.assertAlmostEqual(bound(data), 0.0, places=12)

    def test_formulas(self):
        """CP and RPZ follow their closed forms."""
        data = OverlapData(c=0.6, c2=0.3, b=(1 + math.sqrt(0.6)) / 2)
        self.assertAlmostEqual(mu_bound(data), -math.log(0.6))
        self.assertAlmostEqual(
            cp_bound(data),
            math.log(1 / 0.6) + 0.5 * (1 - math.sqrt(0.6)) * math.log(0.6 / 0.3),
        )
        b_sq = data.b**2
        self.assertAlmostEqual(
            rpz_bound(data), math.log(1 / 0.6) - math.log(b_sq + 0.5 * (1 - b_sq))
        )

    def test_refinements_dominate_mu(self):
        """CP and RPZ are never below MU."""
        rng = np.random.default_rng(1)
        for _ in range(500):
            d = int(rng.integers(2, 8))
            c = rng.uniform(1 / d, 1.0)
            c2 = rng.uniform(1e-6, c)
            data = OverlapData(c=c, c2=c2, b=(1 + math.sqrt(c)) / 2)
            self.assertGreaterEqual(cp_bound(data), mu_bound(data) - 1e-12)
            self.assertGreaterEqual(rpz_bound(data), mu_bound(data) - 1e-12)

    def test_vanishing_second_overlap(self):
        """c2 = 0 warns and falls back to the MU value."""
        data = OverlapData(c=1.0, c2=0.0, b=1.0)
        with self.assertWarns(DegenerateOverlapWarning):
            self.assertEqual(cp_bound(data), mu_bound(data))
        with self.assertWarns(DegenerateOverlapWarning):
            self.assertEqual(rpz_bound(data), mu_bound(data))
