# -*- coding: utf-8 -*-
import numpy as np
from django.test import SimpleTestCase

from sampling.config import parse_config
from sampling.exceptions import DimensionMismatchError, EmptyBatchError, ShapeMismatchError
from sampling.metrics import (
    CONTROL_CONSTANT_SCALE,
    METRIC_RMSE,
    METRIC_SLICED_W2,
    convergence_study,
    fit_loglog_slope,
    normalisation_control,
    score_curves,
    sliced_wasserstein,
    terminal_rmse,
)
from sampling.oracle import GaussianMixture, MixtureComponent, MixtureScore
from sampling.samplers import SamplerSpec, run_sampler
from sampling.schedule import make_vp_linear_schedule
from sampling.seeding import standard_normal_batch

SWEEP_SECTIONS = """
[sweep]
samplers = deis3, deis3_sn, euler
nfe = 5, 8, 10
batch = 64
eval_seed = 0

[sampler:deis3]
kind = deis
order = 3
reparam = sigma

[sampler:deis3_sn]
kind = deis
order = 3
reparam = score-norm

[sampler:euler]
kind = euler

[profile]
nfe = 50
batch = 32
seed = 1
"""

GMM_CONFIG = """
[oracle]
kind = gmm
dim = 2
components =
    0.3333333333 | -1 0 | 0.2
    0.3333333333 |  1 0 | 0.2
    0.3333333334 |  0 1 | 0.2
""" + SWEEP_SECTIONS

GAUSSIAN_CONFIG = """
[oracle]
kind = gaussian
dim = 2
mean = 0.5 0
std = 0.5
""" + SWEEP_SECTIONS


class ErrorMetricsTestCase(SimpleTestCase):
    """Tests pour RMSE, Wasserstein tranché et pente log-log"""

    def setUp(self):
        self.x = np.random.default_rng(0).standard_normal((40, 3))

    def test_rmse(self):
        self.assertEqual(terminal_rmse(self.x, self.x), 0.0)
        self.assertAlmostEqual(terminal_rmse(self.x, self.x + 1.0), 1.0, places=12)
        with self.assertRaises(ShapeMismatchError):
            terminal_rmse(self.x, self.x[:10])

    def test_sliced_wasserstein_examples(self):
        self.assertEqual(sliced_wasserstein(self.x, self.x), 0.0)
        self.assertAlmostEqual(sliced_wasserstein(np.zeros((2, 1)), np.ones((2, 1))), 1.0, places=12)

    def test_sliced_wasserstein_is_permutation_invariant(self):
        shuffled = self.x[np.random.default_rng(1).permutation(40)]
        self.assertAlmostEqual(sliced_wasserstein(self.x, shuffled, seed=3), 0.0, places=12)
        shifted = sliced_wasserstein(self.x, self.x + 0.5, seed=3)
        self.assertGreater(shifted, 0.0)
        self.assertEqual(shifted, sliced_wasserstein(self.x, self.x + 0.5, seed=3))

    def test_sliced_wasserstein_errors(self):
        with self.assertRaises(EmptyBatchError):
            sliced_wasserstein(np.empty((0, 3)), np.empty((0, 3)))
        with self.assertRaises(DimensionMismatchError):
            sliced_wasserstein(self.x, self.x[:, :2])
        with self.assertRaises(ShapeMismatchError):
            sliced_wasserstein(self.x, self.x[:20])

    def test_rmse_triangle_inequality(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            a, b, c = rng.standard_normal((3, 16, 3))
            self.assertLessEqual(terminal_rmse(a, c), terminal_rmse(a, b) + terminal_rmse(b, c) + 1e-12)

    def test_sliced_wasserstein_is_symmetric(self):
        other = np.random.default_rng(2).standard_normal((40, 3)) * 0.7 + 0.3
        for seed in (0, 4):
            self.assertEqual(sliced_wasserstein(self.x, other, seed=seed), sliced_wasserstein(other, self.x, seed=seed))

    def test_loglog_slope(self):
        nfes = [10, 20, 40, 80]
        self.assertAlmostEqual(fit_loglog_slope(nfes, [1.0 / n ** 2 for n in nfes]), 2.0, places=10)
        self.assertIsNone(fit_loglog_slope([10], [0.1]))
        self.assertIsNone(fit_loglog_slope([10, 20], [0.1, float('nan')]))


class MixtureAccuracyTestCase(SimpleTestCase):
    """Tests pour le Wasserstein tranché sur un mélange sans flot exact"""

    def test_high_order_beats_few_euler_steps(self):
        sched = make_vp_linear_schedule(1e-4, 2e-2, 1000)
        mixture = GaussianMixture([
            MixtureComponent(0.25, (-1.5, 0.0), 0.1),
            MixtureComponent(0.25, (1.5, 0.0), 0.1),
            MixtureComponent(0.5, (0.0, 1.5), 0.1),
        ])
        score = MixtureScore(mixture, sched)
        x1 = standard_normal_batch(0, 2048, 2)
        reference = mixture.sample_stratified(2048, seed=0)
        other_reference = mixture.sample_stratified(2048, seed=1)

        deis = run_sampler(SamplerSpec('deis3', 'deis', 3), x1, 50, score, sched)
        euler = run_sampler(SamplerSpec('euler', 'euler'), x1, 5, score, sched)
        deis_distance = sliced_wasserstein(deis.samples, reference)
        euler_distance = sliced_wasserstein(euler.samples, reference)

        self.assertLess(deis_distance, euler_distance)
        self.assertLess(sliced_wasserstein(reference, other_reference), 0.25 * (euler_distance - deis_distance))

    def test_stratified_reference_counts(self):
        mixture = GaussianMixture([
            MixtureComponent(0.3333333333, (-1.0,), 0.2),
            MixtureComponent(0.3333333333, (1.0,), 0.2),
            MixtureComponent(0.3333333334, (3.0,), 0.2),
        ])
        np.testing.assert_array_equal(mixture.stratified_counts(100), [33, 33, 34])
        np.testing.assert_array_equal(mixture.stratified_counts(2), [1, 0, 1])
        draws = mixture.sample_stratified(100, seed=5)
        self.assertEqual(draws.shape, (100, 1))
        np.testing.assert_array_equal(draws, mixture.sample_stratified(100, seed=5))
        self.assertEqual(int(np.sum(draws[:, 0] > 2.0)), 34)


class ScoreCurvesTestCase(SimpleTestCase):
    """Tests pour la forme des courbes s̄·σ"""

    def test_product_shape(self):
        sched = make_vp_linear_schedule(1e-4, 2e-2, 1000)
        mixture = GaussianMixture([
            MixtureComponent(0.5, (-2.0, 0.0, 0.0, 0.0), 0.002),
            MixtureComponent(0.5, (2.0, 0.0, 0.0, 0.0), 0.002),
        ])
        rows = np.array(score_curves(MixtureScore(mixture, sched), sched, nfe=200, batch=2048, seed=1))
        t, s_bar, sigma, product = rows.T

        np.testing.assert_allclose(product, s_bar * sigma, rtol=1e-15)
        window = product[t >= 0.2 - 1e-12]
        self.assertLessEqual((window.max() - window.min()) / window.max(), 0.2)
        near_zero = product[np.isclose(t, 0.005)][0]
        middle = product[np.isclose(t, 0.5)][0]
        self.assertGreater(near_zero, middle)


class ConvergenceStudyTestCase(SimpleTestCase):
    """Tests pour le balayage NFE"""

    def test_single_gaussian_uses_rmse(self):
        reports = convergence_study(parse_config(GAUSSIAN_CONFIG))
        self.assertEqual([report.sampler for report in reports], ['deis3', 'deis3_sn', 'euler'])
        for report in reports:
            self.assertEqual(report.metric, METRIC_RMSE)
            self.assertEqual([n for n, _ in report.points], [5, 8, 10])
            self.assertIsNotNone(report.slope)
        self.assertEqual(reports[2].reparam, 'none')

    def test_mixture_uses_sliced_wasserstein(self):
        config = parse_config(GMM_CONFIG)
        reports = convergence_study(config)
        self.assertTrue(all(report.metric == METRIC_SLICED_W2 for report in reports))
        again = convergence_study(config)
        for first, second in zip(reports, again):
            self.assertEqual(first.points, second.points)

    def test_normalisation_control(self):
        control = normalisation_control(parse_config(GMM_CONFIG))
        self.assertEqual(control['kind'], CONTROL_CONSTANT_SCALE)
        self.assertEqual(sorted(control['max_abs_diff']), [5, 8, 10])
        for difference in control['max_abs_diff'].values():
            self.assertLessEqual(difference, 1e-10)
