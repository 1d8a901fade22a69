# tests/experiments/test_configurations.py
import unittest

import numpy as np

from src.core.errors import DomainError
from src.experiments.configurations import (CONFIGURATION_IDS, GREAT_CIRCLES, alice_pair, check_configuration_id,
                                            config_settings)
from src.qstate.chsh import TSIRELSON_BOUND
from src.qstate.measurement import correlation_tensor
from src.qstate.states import phi_plus, white_noise_mix


class TestConfigurations(unittest.TestCase):

    def test_alice_bases_orthogonal(self):
        for c in CONFIGURATION_IDS:
            a1, a2 = alice_pair(c)
            self.assertAlmostEqual(float(a1.vector @ a2.vector), 0.0, places=12, msg=GREAT_CIRCLES[c])

    def test_optimal_bob_reaches_tsirelson(self):
        state = phi_plus()
        for c in CONFIGURATION_IDS:
            quad = config_settings(c, correlation_tensor(state))
            self.assertAlmostEqual(quad.analytic_S(state), TSIRELSON_BOUND, delta=1e-9, msg=GREAT_CIRCLES[c])

    def test_werner_scales_with_visibility(self):
        for V in (0.5, 0.91):
            state = white_noise_mix(phi_plus(), V)
            for c in CONFIGURATION_IDS:
                quad = config_settings(c, correlation_tensor(state))
                self.assertAlmostEqual(quad.analytic_S(state), TSIRELSON_BOUND * V, delta=1e-9)

    def test_pair_indexing(self):
        quad = config_settings(2, correlation_tensor(phi_plus()))
        self.assertIs(quad.pair(1, 2)[0], quad.a1)
        self.assertIs(quad.pair(1, 2)[1], quad.b2)
        self.assertIs(quad.pair(2, 1)[0], quad.a2)

    def test_rotated_configuration_leaves_the_principal_planes(self):
        a1, a2 = alice_pair(4)
        for v in (a1.vector, a2.vector):
            self.assertGreater(np.count_nonzero(np.abs(v) > 1e-9), 2)

    def test_unknown_configuration(self):
        for bad in (0, 5, '1'):
            with self.assertRaises(DomainError):
                check_configuration_id(bad)


if __name__ == '__main__':
    unittest.main()
