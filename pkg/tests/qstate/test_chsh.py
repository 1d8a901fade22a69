# tests/qstate/test_chsh.py
import unittest

import numpy as np

from src.core.errors import DegenerateSettingsError
from src.qstate.chsh import (LOCAL_BOUND, TSIRELSON_BOUND, chsh_from_tensor, chsh_value, horodecki_max,
                             optimal_chsh, optimal_partner_settings, violates_local_bound)
from src.qstate.measurement import correlation_tensor
from src.qstate.states import (AXIS_X, AXIS_Y, AXIS_Z, BlochSetting, TwoQubitState, maximally_mixed, phi_plus,
                               white_noise_mix)


class TestChsh(unittest.TestCase):

    def test_tsirelson_on_phi_plus(self):
        T = correlation_tensor(phi_plus())
        b1, b2 = optimal_partner_settings(T, AXIS_X, AXIS_Z)
        self.assertAlmostEqual(chsh_value(phi_plus(), AXIS_X, AXIS_Z, b1, b2), TSIRELSON_BOUND, places=12)
        self.assertAlmostEqual(optimal_chsh(T, AXIS_X, AXIS_Z), TSIRELSON_BOUND, places=12)

    def test_tensor_path_agrees(self):
        state = white_noise_mix(phi_plus(), 0.85)
        T = correlation_tensor(state)
        rng = np.random.default_rng(5)
        for _ in range(10):
            settings = [BlochSetting.from_vector(rng.normal(size=3)) for _ in range(4)]
            self.assertAlmostEqual(chsh_value(state, *settings), chsh_from_tensor(T, *settings), places=12)

    def test_werner_linear_in_visibility(self):
        for V in (0.0, 0.5, 0.91, 1.0):
            T = correlation_tensor(white_noise_mix(phi_plus(), V))
            self.assertAlmostEqual(horodecki_max(T), TSIRELSON_BOUND * V, places=12)

    def test_optimal_partners_reach_horodecki_for_orthogonal_alice(self):
        T = correlation_tensor(white_noise_mix(phi_plus(), 0.9))
        self.assertAlmostEqual(optimal_chsh(T, AXIS_X, AXIS_Y), horodecki_max(T), places=12)

    def test_never_above_horodecki_bound(self):
        rng = np.random.default_rng(31)
        for _ in range(250):
            g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            rho = g @ g.conj().T
            state = TwoQubitState(rho / np.trace(rho).real)
            bound = horodecki_max(correlation_tensor(state))
            for _ in range(4):
                settings = [BlochSetting.from_vector(rng.normal(size=3)) for _ in range(4)]
                self.assertLessEqual(chsh_value(state, *settings), bound + 1e-9)

    def test_optimal_partners_are_a_local_maximum(self):
        rng = np.random.default_rng(32)
        for V in (0.6, 0.9, 1.0):
            T = correlation_tensor(white_noise_mix(phi_plus(), V))
            for _ in range(20):
                a1, a2 = (BlochSetting.from_vector(rng.normal(size=3)) for _ in range(2))
                b1, b2 = optimal_partner_settings(T, a1, a2)
                best = chsh_from_tensor(T, a1, a2, b1, b2)
                self.assertAlmostEqual(best, optimal_chsh(T, a1, a2), places=12)
                for _ in range(10):
                    p1 = BlochSetting.from_vector(b1.vector + 1e-3 * rng.normal(size=3))
                    p2 = BlochSetting.from_vector(b2.vector + 1e-3 * rng.normal(size=3))
                    self.assertLessEqual(chsh_from_tensor(T, a1, a2, p1, p2), best + 1e-12)

    def test_degenerate_settings(self):
        with self.assertRaises(DegenerateSettingsError):
            optimal_partner_settings(correlation_tensor(maximally_mixed()), AXIS_X, AXIS_Y)
        with self.assertRaises(DegenerateSettingsError):
            optimal_partner_settings(correlation_tensor(phi_plus()), AXIS_X, AXIS_X)

    def test_local_bound(self):
        self.assertFalse(violates_local_bound(LOCAL_BOUND))
        self.assertTrue(violates_local_bound(2.01))
        self.assertFalse(violates_local_bound(TSIRELSON_BOUND * 0.5))


if __name__ == '__main__':
    unittest.main()
