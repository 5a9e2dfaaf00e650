# -*- coding: utf-8 -*-
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from sampling.artifacts import ArtifactWriter
from sampling.exceptions import InvalidParameterError
from sampling.oracle import GaussianMixture, MixtureScore
from sampling.schedule import make_vp_linear_schedule
from sampling.score_profile import (
    PROFILE_COLUMNS,
    ScoreMagnitudeProfile,
    collect_profile,
    constant_profile,
    profile_lookup,
    profile_metadata,
    profile_rows,
    read_profile_csv,
)


class ProfileLookupTestCase(SimpleTestCase):
    """Tests pour l'interpolation et la troncature de s̄(t)"""

    def setUp(self):
        self.profile = ScoreMagnitudeProfile(knots=[0.2, 0.4], values=[2.0, 4.0])

    def test_interpolation(self):
        self.assertAlmostEqual(profile_lookup(self.profile, 0.3), 3.0, places=12)
        self.assertEqual(profile_lookup(self.profile, 0.9), 4.0)

    def test_truncation(self):
        profile = ScoreMagnitudeProfile(knots=[0.001, 0.005, 0.5], values=[50.0, 10.0, 1.0])
        self.assertEqual(profile.lookup(0.001), profile.lookup(0.005))
        self.assertEqual(profile.lookup(0.0), 10.0)
        np.testing.assert_array_equal(profile.lookup(np.array([0.0, 0.002, 0.005])), [10.0, 10.0, 10.0])

    def test_invalid_profiles(self):
        with self.assertRaises(InvalidParameterError):
            ScoreMagnitudeProfile(knots=[0.4, 0.2], values=[1.0, 1.0])
        with self.assertRaises(InvalidParameterError):
            ScoreMagnitudeProfile(knots=[0.2, 0.4], values=[1.0, 0.0])
        with self.assertRaises(InvalidParameterError):
            ScoreMagnitudeProfile(knots=[0.2, 0.4], values=[1.0, 1.0], truncation_threshold=1.5)

    def test_constant(self):
        profile = constant_profile(2.0)
        for t in (0.0, 0.37, 1.0):
            self.assertEqual(profile.lookup(t), 2.0)


class CollectProfileTestCase(SimpleTestCase):
    """Tests pour la collecte du profil sur l'oracle gaussien"""

    def setUp(self):
        self.sched = make_vp_linear_schedule(1e-4, 2e-2, 1000)
        self.std = 0.5
        self.score = MixtureScore(GaussianMixture.single_gaussian([0.0] * 8, self.std), self.sched)

    def expected(self, knots):
        a, sigma = self.sched.alpha_sigma(knots)
        v = a * a * self.std ** 2 + sigma * sigma
        return np.sqrt(2.0 / (np.pi * v))

    def test_matches_gaussian_magnitude(self):
        profile = collect_profile(self.score, self.sched, nfe=200, batch=1024, seed=1)
        self.assertEqual(profile.knots.size, 200)
        self.assertAlmostEqual(profile.knots[-1], 1.0)
        self.assertAlmostEqual(profile.knots[0], 0.005)
        np.testing.assert_allclose(profile.values, self.expected(profile.knots), rtol=0.05)
        self.assertEqual((profile.batch_size, profile.nfe_used, profile.seed), (1024, 200, 1))

    def test_large_batch_fidelity(self):
        profile = collect_profile(self.score, self.sched, nfe=200, batch=10000, seed=1)
        np.testing.assert_allclose(profile.values, self.expected(profile.knots), rtol=0.01)

    def test_decreasing_for_narrow_data(self):
        profile = collect_profile(self.score, self.sched, nfe=200, batch=256, seed=1)
        head = profile.values[profile.knots <= 0.9]
        self.assertTrue(np.all(np.diff(head) < 0))

    def test_workers_do_not_change_result(self):
        single = collect_profile(self.score, self.sched, nfe=20, batch=30, seed=3, workers=1)
        split = collect_profile(self.score, self.sched, nfe=20, batch=30, seed=3, workers=4)
        np.testing.assert_array_equal(single.values, split.values)
        np.testing.assert_array_equal(single.knots, split.knots)

    def test_rejects_short_runs(self):
        with self.assertRaises(InvalidParameterError):
            collect_profile(self.score, self.sched, nfe=1, batch=8, seed=1)
        with self.assertRaises(InvalidParameterError):
            collect_profile(self.score, self.sched, nfe=10, batch=0, seed=1)


class ProfileCsvTestCase(SimpleTestCase):
    """Tests pour l'écriture / relecture du profil"""

    def test_read_back(self):
        sched = make_vp_linear_schedule(1e-4, 2e-2, 1000)
        score = MixtureScore(GaussianMixture.single_gaussian([0.0, 0.0], 0.5), sched)
        profile = collect_profile(score, sched, nfe=10, batch=8, seed=2, truncation_threshold=0.01)

        with tempfile.TemporaryDirectory() as directory:
            writer = ArtifactWriter(directory, 'abc123', 2)
            path = writer.write_csv('profile.csv', PROFILE_COLUMNS, profile_rows(profile), profile_metadata(profile))
            loaded = read_profile_csv(path)

            self.assertTrue(path.read_text(encoding='utf-8').startswith('# config_hash=abc123 seed=2 '))
            self.assertEqual(path.read_text(encoding='utf-8').splitlines()[1], 't,s_bar')

        np.testing.assert_array_equal(loaded.knots, profile.knots)
        np.testing.assert_array_equal(loaded.values, profile.values)
        self.assertEqual(loaded.truncation_threshold, 0.01)
        self.assertEqual((loaded.batch_size, loaded.nfe_used, loaded.seed), (8, 10, 2))

    def test_threshold_override(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / 'p.csv'
            path.write_text('t,s_bar\n0.1,3.0\n0.5,1.0\n', encoding='utf-8')
            loaded = read_profile_csv(path, truncation_threshold=0.2)
        self.assertEqual(loaded.truncation_threshold, 0.2)
        self.assertEqual(loaded.lookup(0.05), loaded.lookup(0.2))

    def test_bad_header(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / 'p.csv'
            path.write_text('time,value\n0.1,3.0\n', encoding='utf-8')
            with self.assertRaises(InvalidParameterError):
                read_profile_csv(path)

    def test_malformed_rows(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / 'p.csv'
            for body, line in (('t,s_bar\n0.1,3.0\n0.5,abc\n', 3), ('# nfe=4\nt,s_bar\n0.5\n', 3)):
                path.write_text(body, encoding='utf-8')
                with self.assertRaises(InvalidParameterError) as caught:
                    read_profile_csv(path)
                self.assertIn(f'ligne {line}', str(caught.exception))
