# tests/cli/test_main_cli.py
import io
import os
import tempfile
import unittest
from contextlib import redirect_stdout
from unittest.mock import patch

from src.cli.main_cli import build_parser, main
from src.persistence.file_handler import MANIFEST_NAME, read_bytes, read_manifest, read_text
from src.persistence.serializer import parse_summary
from tests.scenarios import write_scenario


class TestMainCli(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = self.tmp.name
        self.scenario = write_scenario(self.dir)

    def tearDown(self):
        self.tmp.cleanup()

    def run_cli(self, *args, out='out'):
        out_dir = os.path.join(self.dir, out)
        stdout = io.StringIO()
        # main() would reconfigure the root logger and drop the capturing handler
        with redirect_stdout(stdout), patch('src.cli.main_cli.setup_logging'), \
                self.assertLogs('src', level='DEBUG') as logs:
            code = main([args[0], '--config', self.scenario, '--out', out_dir, *args[1:]])
        self.logs = logs.output
        return code, out_dir, stdout.getvalue()

    def test_parser(self):
        args = build_parser().parse_args(['events', '--pair', '12', '--set', 'a.b=1', '--set', 'c.d=2', '-vv'])
        self.assertEqual(args.command, 'events')
        self.assertEqual(args.overrides, ['a.b=1', 'c.d=2'])
        self.assertEqual(args.verbose, 2)
        self.assertEqual(args.configuration, 1)

    def test_analytic(self):
        code, out_dir, stdout = self.run_cli('analytic')
        self.assertEqual(code, 0)
        self.assertIn('Configuration 4 (rotated x-z): S = 2.8284', stdout)
        summary = parse_summary(read_text(os.path.join(out_dir, 'analytic_summary.txt')))
        self.assertEqual(summary['S_config1'], '2.82843')
        self.assertEqual(summary['violation'], 'true')
        manifest = read_manifest(os.path.join(out_dir, MANIFEST_NAME))
        self.assertEqual(manifest['command'], 'analytic')
        self.assertEqual(manifest['scenario'], 'fast')
        self.assertEqual(manifest['seed'], 11)
        self.assertAlmostEqual(manifest['results']['horodecki_max'], 2.8284271, places=6)

    def test_analytic_without_violation(self):
        code, out_dir, stdout = self.run_cli('analytic', '--set', 'source.visibility=0.5')
        self.assertEqual(code, 0)
        self.assertEqual(stdout.count('(no violation)'), 4)
        summary = parse_summary(read_text(os.path.join(out_dir, 'analytic_summary.txt')))
        self.assertEqual(summary['violation'], 'false')

    def test_configuration_errors_exit_2(self):
        code, out_dir, _ = self.run_cli('analytic', '--set', 'source.brightness=1')
        self.assertEqual(code, 2)
        self.assertTrue(any('[source] brightness: unknown key' in line for line in self.logs))
        self.assertFalse(os.path.exists(out_dir))

    def test_calibration_failure_exits_3(self):
        code, out_dir, _ = self.run_cli('calibrate', '--set', 'alice.phase_rad=2.0',
                                        '--set', 'experiment.calibration_max_iter=1')
        self.assertEqual(code, 3)
        self.assertFalse(os.path.exists(os.path.join(out_dir, MANIFEST_NAME)))

    def test_unwritable_output_exits_4(self):
        blocker = os.path.join(self.dir, 'blocker')
        with open(blocker, 'w') as f:
            f.write('')
        code, _, _ = self.run_cli('analytic', out=os.path.join('blocker', 'sub'))
        self.assertEqual(code, 4)

    def test_calibrate(self):
        code, out_dir, stdout = self.run_cli('calibrate', '--set', 'alice.phase_rad=0.5')
        self.assertEqual(code, 0)
        summary = parse_summary(read_text(os.path.join(out_dir, 'calibrate_summary.txt')))
        self.assertAlmostEqual(float(summary['bob_phase_rad']), -0.5, delta=0.2)
        self.assertIn('Bob phase calibrated', stdout)

    def test_visibility(self):
        code, out_dir, _ = self.run_cli('visibility', '--mode', 'xz')
        self.assertEqual(code, 0)
        self.assertTrue(os.path.exists(os.path.join(out_dir, 'visibility_xz.csv')))
        self.assertFalse(os.path.exists(os.path.join(out_dir, 'visibility_equatorial.csv')))
        summary = parse_summary(read_text(os.path.join(out_dir, 'visibility_summary.txt')))
        self.assertGreater(float(summary['V_xz']), 0.95)

    def test_events_without_light_are_header_only(self):
        code, out_dir, _ = self.run_cli('events', '--duration', '0.001', '--set', 'source.pair_prob_per_pulse=0')
        self.assertEqual(code, 0)
        base = os.path.join(out_dir, 'events-config1-11')
        self.assertEqual(read_text(base + '.csv'), 'channel,timestamp_ns\n')
        self.assertEqual(read_bytes(base + '.bin'), bytes(8))
        manifest = read_manifest(os.path.join(out_dir, MANIFEST_NAME))
        self.assertIn(base + '.bin', manifest['outputs'])

    def test_same_seed_same_bytes(self):
        runs = [self.run_cli('events', '--pair', '21', '--duration', '0.005', '--seed', '99', out=f"run{k}")
                for k in range(2)]
        self.assertEqual([code for code, _, _ in runs], [0, 0])
        for ext in ('.csv', '.bin'):
            first, second = (read_bytes(os.path.join(out_dir, 'events-config1-21' + ext)) for _, out_dir, _ in runs)
            self.assertEqual(first, second)
            self.assertGreater(len(first), 8)
        code, out_dir, _ = self.run_cli('events', '--pair', '21', '--duration', '0.005', '--seed', '98', out='run2')
        self.assertNotEqual(read_bytes(os.path.join(out_dir, 'events-config1-21.bin')),
                            read_bytes(os.path.join(runs[0][1], 'events-config1-21.bin')))


if __name__ == '__main__':
    unittest.main()
