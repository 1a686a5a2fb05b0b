import unittest

import numpy as np

from qpredec.simulation import MechanismSampler, sample_shot
from tests.testing_utilities import TestCase
from tests.simulation.common import REPETITION_MERGED


class TestMechanismSampler(TestCase):
    def test_shapes(self):
        sampler = MechanismSampler.from_dem(REPETITION_MERGED)
        fired, syndromes, flips = sampler.sample(seed=0, start=0, num_shots=5)
        self.assertEqual(sampler.M, REPETITION_MERGED.num_mechanisms)
        self.assertEqual(fired.shape, (5, sampler.M))
        self.assertEqual(syndromes.shape, (5, REPETITION_MERGED.num_detectors))
        self.assertEqual(flips.shape, (5, REPETITION_MERGED.num_observables))

    def test_stamps_are_xor(self):
        sampler = MechanismSampler.from_dem(REPETITION_MERGED)
        fired, syndromes, flips = sampler.sample(seed=3, start=0, num_shots=200)
        H = REPETITION_MERGED.check_matrix().toarray()
        L = REPETITION_MERGED.observable_matrix().toarray()
        self.assertBitsEqual(syndromes, fired.astype(np.int64) @ H.T % 2)
        self.assertBitsEqual(flips, fired.astype(np.int64) @ L.T % 2)

    def test_shot_independent_of_batch(self):
        sampler = MechanismSampler.from_dem(REPETITION_MERGED)
        fired, syndromes, _ = sampler.sample(seed=11, start=0, num_shots=40)
        for i in (0, 7, 39):
            shot = sample_shot(sampler, seed=11, index=i)
            self.assertBitsEqual(shot.fired_mechanisms, fired[i])
            self.assertBitsEqual(shot.syndrome, syndromes[i])
        later_fired, _, _ = sampler.sample(seed=11, start=20, num_shots=20)
        self.assertBitsEqual(later_fired, fired[20:])

    def test_seeds_differ(self):
        sampler = MechanismSampler([0.5] * 32, np.eye(32), np.zeros((1, 32)))
        a, _, _ = sampler.sample(seed=0, start=0, num_shots=4)
        b, _, _ = sampler.sample(seed=1, start=0, num_shots=4)
        self.assertFalse(np.array_equal(a, b))

    def test_extreme_probabilities(self):
        sampler = MechanismSampler([0., 1.], np.eye(2), np.zeros((0, 2)))
        fired, syndromes, flips = sampler.sample(seed=5, start=0, num_shots=50)
        self.assertFalse(fired[:, 0].any())
        self.assertTrue(fired[:, 1].all())
        self.assertBitsEqual(syndromes, np.tile([0, 1], (50, 1)))
        self.assertEqual(flips.shape, (50, 0))

    def test_fire_rate(self):
        sampler = MechanismSampler([0.3], np.ones((1, 1)), np.zeros((0, 1)))
        fired, _, _ = sampler.sample(seed=2, start=0, num_shots=20000)
        # about 10 standard deviations
        self.assertAllClose(fired.mean(), 0.3, rtol=0., atol=0.035)

    def test_per_mechanism_rates(self):
        sampler = MechanismSampler.from_dem(REPETITION_MERGED)
        shots = 100_000
        fired, _, _ = sampler.sample(seed=4, start=0, num_shots=shots)
        sigma = np.sqrt(sampler.probabilities * (1. - sampler.probabilities) / shots)
        deviation = np.abs(fired.mean(axis=0) - sampler.probabilities)
        self.assertTrue((deviation <= 5. * sigma).all(), deviation / sigma)

    def test_invalid_input(self):
        with self.assertRaises(ValueError):
            MechanismSampler([1.5], np.ones((1, 1)), np.zeros((0, 1)))
        with self.assertRaises(ValueError):
            MechanismSampler([0.1, 0.1], np.ones((1, 1)), np.zeros((0, 1)))
        sampler = MechanismSampler([0.1], np.ones((1, 1)), np.zeros((0, 1)))
        with self.assertRaises(ValueError):
            sampler.sample(seed=-1, start=0, num_shots=1)


if __name__ == "__main__":
    unittest.main()
