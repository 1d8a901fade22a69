# tests/integration/test_pipeline.py
"""End to end: scenario file -> chsh command -> files on disk -> re-analysis."""
import os
import tempfile
import unittest

from src.cli.commands import cmd_chsh, cmd_events
from src.core.config_manager import load_config
from src.core.data_model import CoincidenceCounts
from src.montecarlo.coincidences import default_slot_offset, extract_coincidences
from src.persistence.file_handler import MANIFEST_NAME, read_bytes, read_csv, read_events, read_manifest, read_text
from src.persistence.serializer import CHSH_COLUMNS, parse_summary
from src.qstate.chsh import TSIRELSON_BOUND
from tests.scenarios import write_scenario


class TestChshPipeline(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = self.tmp.name
        self.scenario = write_scenario(self.dir)

    def tearDown(self):
        self.tmp.cleanup()

    def config(self, out, *overrides):
        return load_config(self.scenario, ['experiment.configurations=1', *overrides],
                           out_dir=os.path.join(self.dir, out))

    def test_dumped_events_reproduce_the_counts(self):
        config = self.config('dump', 'output.dump_events=true', 'alice.phase_rad=0.4')
        manifest = cmd_chsh(config)
        out_dir = config.output.out_dir

        for path in manifest.outputs:
            self.assertTrue(os.path.exists(path), path)
        self.assertEqual(read_manifest(os.path.join(out_dir, MANIFEST_NAME))['config_hash'], config.config_hash)

        counts = read_csv(os.path.join(out_dir, 'event_counts.csv'))
        labels = counts['label'].tolist()
        self.assertTrue(labels[0].startswith('calibration-1-'))
        self.assertEqual(labels[-4:], ['config1-11', 'config1-12', 'config1-21', 'config1-22'])

        offset = default_slot_offset(config.simulation.arrival_offset_ns, config.alice.tau_ns,
                                     config.simulation.trigger_latency_ns)
        for row in counts.itertuples(index=False):
            expected = CoincidenceCounts(row.n_pp, row.n_pm, row.n_mp, row.n_mm)
            for ext in ('.csv', '.bin'):
                stream = read_events(os.path.join(out_dir, 'events', row.label + ext))
                self.assertEqual(extract_coincidences(stream, config.coincidence.window_ns, offset), expected,
                                 row.label + ext)

        table = read_csv(os.path.join(out_dir, 'chsh.csv'))
        self.assertEqual(list(table.columns), CHSH_COLUMNS)
        self.assertEqual(len(table), 4)
        summary = parse_summary(read_text(os.path.join(out_dir, 'chsh_summary.txt')))
        S, sigma = float(summary['S_config1']), float(summary['sigma_S_config1'])
        self.assertLess(abs(S - TSIRELSON_BOUND), 5 * sigma + 0.1)
        self.assertIn('2.65 +- 0.09', summary['reference_S_config1'])

    def test_results_do_not_depend_on_worker_count(self):
        outputs = []
        for workers in (1, 3):
            config = self.config(f"w{workers}", f"simulation.workers={workers}", 'simulation.batch_pulses=100000')
            cmd_chsh(config)
            outputs.append(read_bytes(os.path.join(config.output.out_dir, 'chsh.csv')))
        self.assertEqual(outputs[0], outputs[1])

    def test_events_command_binary_only(self):
        config = self.config('events', 'output.events_format=binary')
        manifest = cmd_events(config, configuration=3, i=2, j=1, duration_s=0.01)
        base = os.path.join(config.output.out_dir, 'events-config3-21')
        self.assertFalse(os.path.exists(base + '.csv'))
        stream = read_events(base + '.bin')
        self.assertEqual(manifest.results['records'], len(stream))
        self.assertGreater(len(stream), 0)


if __name__ == '__main__':
    unittest.main()
