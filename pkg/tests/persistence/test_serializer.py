# tests/persistence/test_serializer.py
import json
import unittest

import numpy as np

from src.core.data_model import ChannelTag, CoincidenceCounts, RecordStream, RunManifest
from src.core.errors import OutputError
from src.experiments.scans import FringeScan
from src.persistence.serializer import (EVENT_COLUMNS, SCAN_COLUMNS, csv_to_frame, decode_events_binary,
                                        deserialize_manifest, encode_events_binary, events_to_frame,
                                        format_summary, frame_to_csv, frame_to_events, parse_summary,
                                        scan_to_frame, serialize_manifest)


def sample_stream() -> RecordStream:
    tags = [ChannelTag.TRIGGER, ChannelTag.READY, ChannelTag.S1, ChannelTag.I2]
    times = [50.0, 50.0, 53.412345678901234, 53.38]
    return RecordStream([int(t) for t in tags], times).sorted()


class TestManifest(unittest.TestCase):

    def setUp(self):
        self.manifest = RunManifest('chsh', 'lab', 'ab' * 32, np.uint64(2 ** 63 + 5), '1.0.0', 12.5,
                                    ['out/chsh.csv'], {'S_config1': np.float64(2.61)})

    def test_numpy_values_become_plain_json(self):
        data = deserialize_manifest(serialize_manifest(self.manifest))
        self.assertEqual(data['seed'], 2 ** 63 + 5)
        self.assertEqual(data['results'], {'S_config1': 2.61})
        self.assertEqual(data['outputs'], ['out/chsh.csv'])

    def test_missing_keys(self):
        with self.assertRaises(OutputError) as cm:
            deserialize_manifest(json.dumps({'command': 'chsh'}))
        self.assertIn('config_hash', str(cm.exception))
        with self.assertRaises(OutputError):
            deserialize_manifest('{"command": ')

    def test_unserializable_result(self):
        self.manifest.results['bad'] = object()
        with self.assertRaises(OutputError):
            serialize_manifest(self.manifest)


class TestEventCodecs(unittest.TestCase):

    def test_csv_round_trip_is_exact(self):
        stream = sample_stream()
        text = frame_to_csv(events_to_frame(stream))
        self.assertTrue(text.startswith('channel,timestamp_ns\n'))
        self.assertIn('trigger,50.0', text)
        back = frame_to_events(csv_to_frame(text))
        np.testing.assert_array_equal(back.tags, stream.tags)
        np.testing.assert_array_equal(back.times, stream.times)

    def test_binary_round_trip_is_exact(self):
        stream = sample_stream()
        data = encode_events_binary(stream)
        self.assertEqual(len(data), 8 + 9 * len(stream))
        self.assertEqual(int.from_bytes(data[:8], 'little'), 4)
        back = decode_events_binary(data)
        np.testing.assert_array_equal(back.tags, stream.tags)
        np.testing.assert_array_equal(back.times, stream.times)

    def test_empty_stream(self):
        self.assertEqual(frame_to_csv(events_to_frame(RecordStream())), 'channel,timestamp_ns\n')
        self.assertEqual(len(frame_to_events(csv_to_frame('channel,timestamp_ns\n'))), 0)
        self.assertEqual(encode_events_binary(RecordStream()), bytes(8))
        self.assertEqual(len(decode_events_binary(bytes(8))), 0)

    def test_corrupt_binary(self):
        data = encode_events_binary(sample_stream())
        with self.assertRaises(OutputError):
            decode_events_binary(data[:5])
        with self.assertRaises(OutputError):
            decode_events_binary(data[:-3])
        bad_tag = bytearray(data)
        bad_tag[8] = 9
        with self.assertRaises(OutputError):
            decode_events_binary(bytes(bad_tag))

    def test_bad_csv(self):
        with self.assertRaises(OutputError):
            frame_to_events(csv_to_frame('channel,time\nS1,1.0\n'))
        with self.assertRaises(OutputError):
            frame_to_events(csv_to_frame('channel,timestamp_ns\nX9,1.0\n'))
        self.assertEqual(list(csv_to_frame('channel,timestamp_ns\n').columns), EVENT_COLUMNS)


class TestTablesAndSummary(unittest.TestCase):

    def test_scan_table(self):
        scan = FringeScan('equatorial', [0.0, np.pi], [CoincidenceCounts(5, 1, 0, 4), CoincidenceCounts(0, 3, 2, 1)])
        frame = scan_to_frame(scan)
        self.assertEqual(list(frame.columns), SCAN_COLUMNS)
        self.assertEqual(frame['n_pp'].tolist(), [5, 0])

    def test_summary_round_trip(self):
        text = format_summary({'S_config1': 2.6123456789, 'records': 12, 'scenario': 'lab'}, title='chsh')
        self.assertEqual(text, "# chsh\nS_config1 = 2.61235\nrecords = 12\nscenario = lab\n")
        self.assertEqual(parse_summary(text), {'S_config1': '2.61235', 'records': '12', 'scenario': 'lab'})
        with self.assertRaises(OutputError):
            parse_summary("no separator here\n")


if __name__ == '__main__':
    unittest.main()
