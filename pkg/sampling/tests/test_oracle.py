# -*- coding: utf-8 -*-
import numpy as np
from django.test import SimpleTestCase

from sampling.exceptions import DimensionMismatchError, InvalidParameterError, NotSingleGaussianError
from sampling.oracle import (
    NOISE_PRED,
    SAMPLE_PRED,
    GaussianMixture,
    MixtureComponent,
    MixtureScore,
    convert_parameterisation,
    exact_gaussian_flow,
    gmm_log_density,
    gmm_marginal,
    gmm_score,
    score_from_parameterisation,
)
from sampling.schedule import make_vp_linear_schedule


def random_mixture(rng, dim):
    return GaussianMixture([
        MixtureComponent(0.2, tuple(rng.uniform(-2, 2, dim)), 0.3),
        MixtureComponent(0.3, tuple(rng.uniform(-2, 2, dim)), 0.5),
        MixtureComponent(0.5, tuple(rng.uniform(-2, 2, dim)), 1.0),
    ])


class GaussianMixtureTestCase(SimpleTestCase):
    """Tests pour la validation du mélange"""

    def test_weights_must_sum_to_one(self):
        with self.assertRaises(InvalidParameterError):
            GaussianMixture([MixtureComponent(0.5, (0.0,), 1.0), MixtureComponent(0.4, (1.0,), 1.0)])

    def test_positive_std_and_weights(self):
        with self.assertRaises(InvalidParameterError):
            GaussianMixture([MixtureComponent(1.0, (0.0,), 0.0)])
        with self.assertRaises(InvalidParameterError):
            GaussianMixture([MixtureComponent(1.5, (0.0,), 1.0), MixtureComponent(-0.5, (1.0,), 1.0)])

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            GaussianMixture([MixtureComponent(0.5, (0.0,), 1.0), MixtureComponent(0.5, (1.0, 0.0), 1.0)])

    def test_sample_deterministic(self):
        mix = GaussianMixture.single_gaussian([1.0, -1.0], 0.5)
        first = mix.sample(4000, seed=5)
        np.testing.assert_array_equal(first, mix.sample(4000, seed=5))
        self.assertFalse(np.array_equal(first, mix.sample(4000, seed=6)))
        np.testing.assert_allclose(first.mean(axis=0), [1.0, -1.0], atol=0.05)
        np.testing.assert_allclose(first.std(axis=0), [0.5, 0.5], atol=0.05)


class GMMScoreTestCase(SimpleTestCase):
    """Tests pour le score exact du mélange"""

    def setUp(self):
        self.sched = make_vp_linear_schedule(1e-4, 2e-2, 1000)

    def test_standard_gaussian(self):
        mix = GaussianMixture.single_gaussian([0.0, 0.0, 0.0], 1.0)
        x = np.random.default_rng(0).standard_normal((16, 3))
        for t in (0.0, 0.3, 1.0):
            np.testing.assert_allclose(gmm_score(mix, self.sched, x, t), -x, atol=1e-12)

    def test_symmetric_origin(self):
        mix = GaussianMixture([MixtureComponent(0.5, (-1.0, 0.0), 0.3), MixtureComponent(0.5, (1.0, 0.0), 0.3)])
        np.testing.assert_allclose(gmm_score(mix, self.sched, np.zeros(2), 0.4), 0.0, atol=1e-12)

    def test_marginal_parameters(self):
        mix = GaussianMixture([MixtureComponent(0.25, (2.0,), 0.5), MixtureComponent(0.75, (-1.0,), 0.1)])
        a, sigma = self.sched.alpha_sigma(0.3)
        marginal = gmm_marginal(mix, self.sched, 0.3)
        self.assertEqual([w for w, _, _ in marginal], [0.25, 0.75])
        np.testing.assert_allclose(marginal[0][1], [2.0 * a])
        self.assertAlmostEqual(marginal[1][2], a * a * 0.01 + sigma * sigma, places=14)

    def test_matches_log_density_gradient(self):
        """Score vs gradient par différences finies de log p_t, 100 couples (x, t) par dimension"""
        rng = np.random.default_rng(42)
        h = 1e-5
        for dim in (1, 2, 8):
            mix = random_mixture(rng, dim)
            for _ in range(100):
                t = rng.uniform(0.01, 1.0)
                a, sigma = self.sched.alpha_sigma(t)
                k = rng.choice(3, p=mix.weights)
                x = a * mix.means[k] + np.sqrt(a * a * mix.stds[k] ** 2 + sigma * sigma) * rng.standard_normal(dim)

                numeric = np.empty(dim)
                for d in range(dim):
                    step = np.zeros(dim)
                    step[d] = h
                    numeric[d] = (gmm_log_density(mix, self.sched, x + step, t)
                                  - gmm_log_density(mix, self.sched, x - step, t)) / (2 * h)
                exact = gmm_score(mix, self.sched, x, t)
                self.assertLessEqual(
                    np.linalg.norm(exact - numeric), 1e-4 * max(np.linalg.norm(exact), 1.0)
                )

    def test_wrong_dimension(self):
        score = MixtureScore(GaussianMixture.single_gaussian([0.0, 0.0], 1.0), self.sched)
        with self.assertRaises(DimensionMismatchError):
            score.evaluate(np.zeros((4, 3)), 0.5)


class ParameterisationTestCase(SimpleTestCase):
    """Tests pour les conversions score ↔ bruit ↔ donnée"""

    def setUp(self):
        self.sched = make_vp_linear_schedule(1e-4, 2e-2, 1000)
        rng = np.random.default_rng(1)
        self.x = rng.standard_normal((8, 2))
        self.score = rng.standard_normal((8, 2))

    def test_noise_prediction_round_trip(self):
        for t in (0.001, 0.2, 1.0):
            self.assertGreaterEqual(self.sched.alpha_sigma(t)[1], 1e-3)
            eps = convert_parameterisation(self.score, self.x, t, self.sched, NOISE_PRED)
            back = score_from_parameterisation(eps, self.x, t, self.sched, NOISE_PRED)
            np.testing.assert_allclose(back, self.score, rtol=1e-12, atol=1e-12)

    def test_sample_prediction_round_trip(self):
        for t in (0.1, 0.5, 0.9):
            self.assertGreaterEqual(self.sched.alpha_sigma(t)[1], 0.1)
            x0 = convert_parameterisation(self.score, self.x, t, self.sched, SAMPLE_PRED)
            back = score_from_parameterisation(x0, self.x, t, self.sched, SAMPLE_PRED)
            np.testing.assert_allclose(back, self.score, atol=1e-11)

    def test_noise_is_minus_sigma_score(self):
        sigma = self.sched.alpha_sigma(0.4)[1]
        eps = convert_parameterisation(self.score, self.x, 0.4, self.sched, NOISE_PRED)
        np.testing.assert_allclose(eps, -sigma * self.score)

    def test_undefined_at_zero(self):
        with self.assertRaises(InvalidParameterError):
            convert_parameterisation(self.score, self.x, 0.0, self.sched, NOISE_PRED)
        with self.assertRaises(InvalidParameterError):
            convert_parameterisation(self.score, self.x, 0.5, self.sched, 'velocity')


class ExactFlowTestCase(SimpleTestCase):
    """Tests pour le flot exact d'une gaussienne"""

    def setUp(self):
        self.sched = make_vp_linear_schedule(1e-4, 2e-2, 1000)
        self.x1 = np.random.default_rng(2).standard_normal((32, 2))

    def test_standard_gaussian_is_fixed(self):
        mix = GaussianMixture.single_gaussian([0.0, 0.0], 1.0)
        np.testing.assert_allclose(exact_gaussian_flow(mix, self.sched, self.x1, 1.0, 0.0), self.x1, rtol=1e-10)

    def test_terminal_values(self):
        mix = GaussianMixture.single_gaussian([1.0, 0.0], 0.5)
        a1, sigma1 = self.sched.alpha_sigma(1.0)
        v1 = a1 * a1 * 0.25 + sigma1 * sigma1
        expected = np.array([1.0, 0.0]) + (0.5 / np.sqrt(v1)) * (self.x1 - a1 * np.array([1.0, 0.0]))
        np.testing.assert_allclose(exact_gaussian_flow(mix, self.sched, self.x1, 1.0, 0.0), expected, rtol=1e-12)

    def test_same_time(self):
        mix = GaussianMixture.single_gaussian([1.0, 0.0], 0.5)
        np.testing.assert_array_equal(exact_gaussian_flow(mix, self.sched, self.x1, 0.3, 0.3), self.x1)

    def test_mixture_rejected(self):
        mix = GaussianMixture([MixtureComponent(0.5, (-1.0,), 0.3), MixtureComponent(0.5, (1.0,), 0.3)])
        with self.assertRaises(NotSingleGaussianError):
            exact_gaussian_flow(mix, self.sched, np.zeros((2, 1)), 1.0, 0.0)

    def test_composition(self):
        mix = GaussianMixture.single_gaussian([1.0, -0.5], 0.3)
        for t1, t2, t3 in ((1.0, 0.6, 0.0), (0.9, 0.2, 0.05), (0.1, 0.7, 1.0)):
            staged = exact_gaussian_flow(mix, self.sched, exact_gaussian_flow(mix, self.sched, self.x1, t1, t2), t2, t3)
            direct = exact_gaussian_flow(mix, self.sched, self.x1, t1, t3)
            np.testing.assert_allclose(staged, direct, rtol=1e-12, atol=1e-12)

    def test_standardised_state_is_conserved(self):
        """z = (x_t − a_t μ)/√v(t) ne dépend pas de t le long du flot"""
        mean = np.array([1.0, -0.5])
        mix = GaussianMixture.single_gaussian(mean, 0.3)

        def standardised(x, t):
            a, sigma = self.sched.alpha_sigma(t)
            return (x - a * mean) / np.sqrt(a * a * 0.09 + sigma * sigma)

        z1 = standardised(self.x1, 1.0)
        for t in (0.8, 0.4, 0.1, 0.0):
            np.testing.assert_allclose(standardised(exact_gaussian_flow(mix, self.sched, self.x1, 1.0, t), t),
                                       z1, rtol=1e-12, atol=1e-12)
