# tests/qstate/test_states.py
import unittest

import numpy as np

from src.core.errors import DomainError
from src.qstate.states import (AXIS_X, AXIS_Y, AXIS_Z, BlochSetting, CorrelationTensor, TwoQubitState,
                               maximally_mixed, partial_trace, phi_plus, white_noise_mix)


class TestBlochSetting(unittest.TestCase):

    def test_rejects_non_unit_vector(self):
        with self.assertRaises(DomainError):
            BlochSetting((1.0, 1.0, 0.0))

    def test_from_vector_normalizes(self):
        s = BlochSetting.from_vector((2.0, 0.0, 2.0))
        np.testing.assert_allclose(s.vector, [1 / np.sqrt(2), 0.0, 1 / np.sqrt(2)], atol=1e-15)

    def test_zero_vector_is_domain_error(self):
        with self.assertRaises(DomainError):
            BlochSetting.from_vector((0.0, 0.0, 0.0))

    def test_projectors_are_complementary(self):
        s = BlochSetting.from_angles(0.3, 1.1)
        np.testing.assert_allclose(s.projector(1) + s.projector(-1), np.eye(2), atol=1e-15)
        np.testing.assert_allclose(s.projector(1) @ s.projector(1), s.projector(1), atol=1e-15)

    def test_bad_outcome(self):
        with self.assertRaises(DomainError):
            AXIS_Z.projector(0)

    def test_equatorial(self):
        np.testing.assert_allclose(BlochSetting.equatorial(np.pi / 2).vector, AXIS_Y.vector, atol=1e-15)
        self.assertAlmostEqual(BlochSetting.equatorial(0.4).azimuth, 0.4)


class TestTwoQubitState(unittest.TestCase):

    def test_phi_plus_is_pure_and_valid(self):
        rho = phi_plus().rho
        self.assertAlmostEqual(np.trace(rho).real, 1.0)
        self.assertAlmostEqual(phi_plus().purity, 1.0)
        self.assertGreaterEqual(np.min(np.linalg.eigvalsh(rho)), -1e-12)

    def test_rho_is_read_only(self):
        with self.assertRaises(ValueError):
            phi_plus().rho[0, 0] = 0.5

    def test_rejects_bad_trace(self):
        with self.assertRaises(DomainError):
            TwoQubitState(np.eye(4) / 2.0)

    def test_rejects_non_positive(self):
        with self.assertRaises(DomainError):
            TwoQubitState(np.diag([1.5, -0.5, 0.0, 0.0]))

    def test_rejects_non_hermitian(self):
        rho = np.eye(4, dtype=complex) / 4
        rho[0, 1] = 0.1
        with self.assertRaises(DomainError):
            TwoQubitState(rho)

    def test_white_noise_extremes(self):
        np.testing.assert_allclose(white_noise_mix(phi_plus(), 1.0).rho, phi_plus().rho, atol=1e-15)
        np.testing.assert_allclose(white_noise_mix(phi_plus(), 0.0).rho, maximally_mixed().rho, atol=1e-15)

    def test_white_noise_rejects_out_of_range(self):
        for V in (-0.1, 1.1, float('nan')):
            with self.assertRaises(DomainError):
                white_noise_mix(phi_plus(), V)

    def test_reduced_states_maximally_mixed(self):
        for qubit in ('A', 'B'):
            np.testing.assert_allclose(phi_plus().reduced(qubit), np.eye(2) / 2, atol=1e-15)
        with self.assertRaises(DomainError):
            partial_trace(phi_plus().rho, 'C')

    def test_with_phases_only_sum_matters(self):
        a = phi_plus().with_phases(0.3, 0.5).rho
        b = phi_plus().with_phases(0.8, 0.0).rho
        np.testing.assert_allclose(a, b, atol=1e-15)
        np.testing.assert_allclose(phi_plus().with_phases(0.4, -0.4).rho, phi_plus().rho, atol=1e-15)


class TestCorrelationTensor(unittest.TestCase):

    def test_rejects_singular_value_above_one(self):
        with self.assertRaises(DomainError):
            CorrelationTensor(np.diag([1.2, 0.0, 0.0]))

    def test_accepts_phi_plus_tensor(self):
        t = CorrelationTensor(np.diag([1.0, -1.0, 1.0]))
        np.testing.assert_allclose(t.singular_values, [1.0, 1.0, 1.0])


if __name__ == '__main__':
    unittest.main()
