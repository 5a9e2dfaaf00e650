# -*- coding: utf-8 -*-
import numpy as np
from django.test import SimpleTestCase

from sampling.exceptions import InvalidParameterError, OutOfRangeTimeError
from sampling.schedule import alpha_sigma, drift_diffusion, make_vp_linear_schedule, psi


class AlphaSigmaTestCase(SimpleTestCase):
    """Tests pour a_t et σ_t du schéma VP linéaire"""

    def setUp(self):
        self.sched = make_vp_linear_schedule(1e-4, 2e-2, 1000)
        self.rng = np.random.default_rng(7)

    def test_boundaries(self):
        self.assertEqual(alpha_sigma(self.sched, 0.0), (1.0, 0.0))
        a1, sigma1 = alpha_sigma(self.sched, 1.0)
        self.assertAlmostEqual(a1, 6.33e-3, delta=1e-4)
        self.assertAlmostEqual(sigma1, 0.99998, delta=1e-5)

    def test_variance_preserving(self):
        t = self.rng.uniform(0.0, 1.0, 1000)
        a, sigma = self.sched.alpha_sigma(t)
        np.testing.assert_allclose(a * a + sigma * sigma, 1.0, atol=1e-12)

    def test_monotone(self):
        t = np.sort(self.rng.uniform(0.0, 1.0, 500))
        a, sigma = self.sched.alpha_sigma(t)
        self.assertTrue(np.all(np.diff(a) <= 0))
        self.assertTrue(np.all(np.diff(sigma) >= 0))

    def test_sigma_accurate_near_zero(self):
        """σ² ≈ β_1·t·N sur le premier segment, sans annulation"""
        sigma2 = self.sched.alpha_sigma(1e-6)[1] ** 2
        beta_1 = 1e-4 + (2e-2 - 1e-4) / 1000
        self.assertAlmostEqual(sigma2 / (beta_1 * 1e-3), 1.0, delta=1e-3)

    def test_out_of_range(self):
        for t in (-0.1, 1.1, float('nan')):
            with self.assertRaises(OutOfRangeTimeError):
                self.sched.alpha_sigma(t)

    def test_invalid_parameters(self):
        with self.assertRaises(InvalidParameterError):
            make_vp_linear_schedule(2e-2, 1e-4)
        with self.assertRaises(InvalidParameterError):
            make_vp_linear_schedule(1e-4, 2e-2, 1)
        with self.assertRaises(ValueError):
            make_vp_linear_schedule(0.0, 2e-2)


class DriftDiffusionTestCase(SimpleTestCase):
    """Tests pour (f_t, g_t²)"""

    def setUp(self):
        self.sched = make_vp_linear_schedule(1e-4, 2e-2, 1000)

    def test_vp_identity(self):
        t = np.random.default_rng(3).uniform(0.0, 1.0, 1000)
        f, g2 = drift_diffusion(self.sched, t)
        np.testing.assert_allclose(g2, -2.0 * f, rtol=1e-6)
        self.assertTrue(np.all(f < 0))

    def test_midpoint_value(self):
        f, _ = self.sched.drift_diffusion(0.5)
        self.assertLess(abs(f + 5.05) / 5.05, 0.01)

    def test_segment_midpoints_use_exact_slope(self):
        """Au milieu d'un segment, la différence centrée couvre exactement le segment"""
        index = np.array([0, 10, 250, 500, 998])
        t = (index + 0.5) / 1000
        f, _ = self.sched.drift_diffusion(t)
        expected = self.sched.segment_slopes[index] / self.sched.alpha(t)
        np.testing.assert_allclose(f, expected, rtol=1e-9)
        np.testing.assert_allclose(self.sched.alpha_slope(t), self.sched.segment_slopes[index], rtol=0)

    def test_dsigma2_matches_finite_difference(self):
        t = np.linspace(0.01, 0.99, 50)
        h = 1e-7
        numeric = (self.sched.alpha_sigma(t + h)[1] ** 2 - self.sched.alpha_sigma(t - h)[1] ** 2) / (2 * h)
        a = self.sched.alpha(t)
        f, g2 = self.sched.drift_diffusion(t)
        analytic = g2 + 2.0 * f * (1.0 - a * a)
        np.testing.assert_allclose(analytic, numeric, rtol=1e-4)


class PsiTestCase(SimpleTestCase):
    """Tests pour Ψ(t, s) = a_t / a_s"""

    def setUp(self):
        self.sched = make_vp_linear_schedule(1e-4, 2e-2, 1000)

    def test_identity(self):
        for t in (0.0, 0.3, 1.0):
            self.assertEqual(psi(self.sched, t, t), 1.0)

    def test_semigroup(self):
        rng = np.random.default_rng(11)
        t, u, s = rng.uniform(0.0, 1.0, (3, 1000))
        np.testing.assert_allclose(
            psi(self.sched, t, u) * psi(self.sched, u, s), psi(self.sched, t, s), rtol=1e-12
        )

    def test_full_transfer(self):
        self.assertAlmostEqual(psi(self.sched, 0.0, 1.0), 158.0, delta=1.0)
