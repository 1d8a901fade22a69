# tests/qstate/test_measurement.py
import unittest

import numpy as np

from src.qstate.measurement import (conditional_state, correlation, correlation_tensor, joint_probability,
                                    local_bloch_vectors, outcome_distribution)
from src.qstate.states import AXIS_X, AXIS_Y, AXIS_Z, BlochSetting, maximally_mixed, phi_plus, white_noise_mix


def random_setting(rng):
    return BlochSetting.from_vector(rng.normal(size=3))


class TestBornRule(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(3)

    def test_distribution_normalized(self):
        state = white_noise_mix(phi_plus(), 0.7)
        for _ in range(20):
            probs = outcome_distribution(state, random_setting(self.rng), random_setting(self.rng))
            self.assertAlmostEqual(probs.sum(), 1.0, places=12)
            self.assertTrue(np.all(probs >= 0.0))

    def test_phi_plus_correlation_tensor(self):
        np.testing.assert_allclose(correlation_tensor(phi_plus()).T, np.diag([1.0, -1.0, 1.0]), atol=1e-12)

    def test_werner_scales_correlations(self):
        V = 0.62
        T = correlation_tensor(white_noise_mix(phi_plus(), V)).T
        np.testing.assert_allclose(T, V * np.diag([1.0, -1.0, 1.0]), atol=1e-12)

    def test_correlation_matches_tensor_contraction(self):
        state = white_noise_mix(phi_plus(), 0.8).with_phases(0.4, 0.2)
        T = correlation_tensor(state).T
        for _ in range(10):
            a, b = random_setting(self.rng), random_setting(self.rng)
            self.assertAlmostEqual(correlation(state, a, b), a.vector @ T @ b.vector, places=12)

    def test_same_basis_outcomes_perfectly_correlated(self):
        self.assertAlmostEqual(joint_probability(phi_plus(), AXIS_Z, AXIS_Z, 1, -1), 0.0)
        self.assertAlmostEqual(joint_probability(phi_plus(), AXIS_Z, AXIS_Z, 1, 1), 0.5)
        self.assertAlmostEqual(correlation(phi_plus(), AXIS_Y, AXIS_Y), -1.0)

    def test_mixed_state_uncorrelated(self):
        self.assertAlmostEqual(correlation(maximally_mixed(), AXIS_X, AXIS_X), 0.0)

    def test_local_bloch_vectors_vanish(self):
        r_a, r_b = local_bloch_vectors(phi_plus())
        np.testing.assert_allclose(r_a, 0.0, atol=1e-15)
        np.testing.assert_allclose(r_b, 0.0, atol=1e-15)


class TestConditionalState(unittest.TestCase):

    def test_projecting_bob_on_late_leaves_alice_late(self):
        rho = conditional_state(phi_plus(), 'A', AXIS_Z.projector(-1))
        np.testing.assert_allclose(rho, np.diag([0.0, 1.0]), atol=1e-15)

    def test_zero_probability_returns_none(self):
        self.assertIsNone(conditional_state(phi_plus(), 'B', np.zeros((2, 2))))


if __name__ == '__main__':
    unittest.main()
