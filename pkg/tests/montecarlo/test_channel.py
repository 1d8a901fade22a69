# tests/montecarlo/test_channel.py
import unittest

import numpy as np

from src.core.data_model import ChannelConfig
from src.core.errors import DomainError
from src.montecarlo.channel import (MisalignmentTrace, PhaseDriftTrace, db_to_transmittance, in_signal_period,
                                    stabilization_misalignment)
from src.montecarlo.rng import STREAM_MISALIGNMENT, batch_generator, generator_for


class TestLoss(unittest.TestCase):

    def test_link_loss(self):
        self.assertAlmostEqual(db_to_transmittance(7.3), 0.18621, delta=1e-5)
        self.assertEqual(db_to_transmittance(0.0), 1.0)

    def test_negative_loss(self):
        with self.assertRaises(DomainError):
            db_to_transmittance(-0.1)


class TestDutyCycle(unittest.TestCase):

    def test_reference_slice_at_cycle_end(self):
        chan = ChannelConfig(duty_cycle=0.96, cycle_s=10.0)
        mask = in_signal_period(np.array([0.0, 9.5, 9.61, 10.1, 19.7]), chan)
        np.testing.assert_array_equal(mask, [True, True, False, True, False])

    def test_full_duty(self):
        chan = ChannelConfig(duty_cycle=1.0)
        self.assertTrue(np.all(in_signal_period(np.linspace(0, 30, 101), chan)))


class TestMisalignment(unittest.TestCase):

    def setUp(self):
        self.chan = ChannelConfig(misalignment_drift_rad_per_s=0.005, cycle_s=10.0)

    def test_zero_at_reset_and_bounded(self):
        rng = generator_for(1, STREAM_MISALIGNMENT, 0)
        self.assertEqual(stabilization_misalignment(0.0, self.chan, rng), 0.0)
        for t in (0.35, 2.0, 7.77, 13.3):
            angle = stabilization_misalignment(t, self.chan, generator_for(1, STREAM_MISALIGNMENT, 0))
            self.assertLessEqual(abs(angle), 0.005 * (t % 10.0) + 1e-12)

    def test_negative_time(self):
        with self.assertRaises(DomainError):
            stabilization_misalignment(-1.0, self.chan, generator_for(1, STREAM_MISALIGNMENT, 0))

    def test_trace_reproducible_and_transmission_is_cos_squared(self):
        t = np.linspace(0.0, 35.0, 200)
        a = MisalignmentTrace(self.chan, seed=4).angle(t)
        b = MisalignmentTrace(self.chan, seed=4).angle(t)
        np.testing.assert_array_equal(a, b)
        np.testing.assert_allclose(MisalignmentTrace(self.chan, seed=4).transmission(t), np.cos(a) ** 2)

    def test_mean_transmission_over_a_cycle(self):
        rng = np.random.default_rng(61)
        for drift in (0.005, 0.05):
            chan = ChannelConfig(misalignment_drift_rad_per_s=drift, cycle_s=10.0)
            times = rng.uniform(0.0, 10.0, 400)
            angles = np.array([stabilization_misalignment(t, chan, generator_for(2, STREAM_MISALIGNMENT, k))
                               for k, t in enumerate(times)])
            self.assertGreaterEqual(np.mean(np.cos(angles) ** 2), 1.0 - (drift * 10.0) ** 2 / 2)
            self.assertTrue(np.all(np.abs(angles) <= drift * times + 1e-12))

    def test_no_drift_full_transmission(self):
        trace = MisalignmentTrace(ChannelConfig(), seed=4)
        np.testing.assert_array_equal(trace.transmission(np.array([0.5, 12.0])), [1.0, 1.0])


class TestPhaseDrift(unittest.TestCase):

    def test_bounded(self):
        trace = PhaseDriftTrace(np.pi / 10, 600.0, 3000.0, seed=9)
        phases = trace.phase(np.linspace(0.0, 3000.0, 5000))
        self.assertLessEqual(np.max(np.abs(phases)), np.pi / 10)
        self.assertGreater(np.max(np.abs(phases)), 0.0)

    def test_zero_bound(self):
        trace = PhaseDriftTrace(0.0, 600.0, 100.0, seed=9)
        np.testing.assert_array_equal(trace.phase(np.array([0.0, 50.0, 99.0])), 0.0)


class TestStreams(unittest.TestCase):

    def test_batch_streams_independent_of_call_order(self):
        first = batch_generator(5, 0, 3).random(4)
        batch_generator(5, 0, 2).random(100)
        np.testing.assert_array_equal(batch_generator(5, 0, 3).random(4), first)
        self.assertFalse(np.array_equal(batch_generator(5, 1, 3).random(4), first))


if __name__ == '__main__':
    unittest.main()
