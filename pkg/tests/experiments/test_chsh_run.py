# tests/experiments/test_chsh_run.py
import unittest

import numpy as np

from src.core.errors import DomainError
from src.experiments.chsh_run import SETTING_PAIRS, run_all_configurations, run_chsh
from src.experiments.context import SimulationContext
from src.qstate.chsh import TSIRELSON_BOUND
from tests.scenarios import ideal_experiment


class TestRunChsh(unittest.TestCase):

    def test_ideal_source_reaches_tsirelson(self):
        ctx = SimulationContext(ideal_experiment(seed=13))
        result = run_chsh(ctx, 1, duration_s=0.2, calibrate=False)
        self.assertAlmostEqual(result.analytic_S, TSIRELSON_BOUND, places=9)
        self.assertAlmostEqual(result.phase_S, TSIRELSON_BOUND, places=9)
        self.assertLess(abs(result.s.S - TSIRELSON_BOUND), 5 * result.s.sigma)
        self.assertTrue(result.s.violates)
        self.assertEqual(sorted(result.runs.values()), [0, 1, 2, 3])
        self.assertEqual(set(result.estimates), set(SETTING_PAIRS))

    def test_every_configuration_violates_after_calibration(self):
        ctx = SimulationContext(ideal_experiment(seed=13, alice_phase=0.9, local_duration_s=0.2))
        results = run_all_configurations(ctx)
        self.assertEqual([r.configuration for r in results], [1, 2, 3, 4])
        for r in results:
            self.assertGreater(r.s.S, 2.5, r.configuration)

    def test_uncalibrated_quarter_turn_loses_the_violation(self):
        ctx = SimulationContext(ideal_experiment(seed=13, alice_phase=np.pi / 2))
        result = run_chsh(ctx, 1, duration_s=0.2, calibrate=False)
        self.assertAlmostEqual(result.analytic_S, TSIRELSON_BOUND, places=9)
        self.assertLess(result.phase_S, 0.01)
        self.assertLess(abs(result.s.S - result.phase_S), 5 * result.s.sigma + 0.05)
        self.assertFalse(result.s.violates)

    def test_unknown_configuration(self):
        with self.assertRaises(DomainError):
            run_chsh(SimulationContext(ideal_experiment()), 7)


if __name__ == '__main__':
    unittest.main()
