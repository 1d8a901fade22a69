# src/persistence/serializer.py
"""
Codecs for every artifact a run writes: the JSON manifest, CSV tables,
the binary record stream and the key = value summary.

Binary record stream (little endian):
    uint64  record count
    count x { uint8 channel tag, float64 timestamp in ns }
Tags: S1=0, S2=1, I1=2, I2=3, ready=4, trigger=5.
"""
import dataclasses
import io
import json
import logging
from enum import Enum
from typing import Dict, Iterable, Optional

import numpy as np
import pandas as pd

from src.core.data_model import ChannelTag, RecordStream, RunManifest
from src.core.errors import OutputError

logger = logging.getLogger(__name__)

EVENT_COLUMNS = ['channel', 'timestamp_ns']
SCAN_COLUMNS = ['phase_rad', 'n_pp', 'n_pm', 'n_mp', 'n_mm']
CHSH_COLUMNS = ['config', 'i', 'j', 'E', 'sigma', 'S', 'sigma_S', 'significance']

_HEADER = np.dtype('<u8')
_RECORD = np.dtype([('tag', 'u1'), ('timestamp_ns', '<f8')])
_MANIFEST_KEYS = {'command', 'scenario', 'config_hash', 'seed', 'version', 'wall_clock_s', 'outputs'}


def default_serializer(obj):
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    if isinstance(obj, Enum):
        return obj.name
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"Object of type {obj.__class__.__name__} is not JSON serializable")


def serialize_manifest(manifest: RunManifest) -> str:
    try:
        return json.dumps(dataclasses.asdict(manifest), indent=4, default=default_serializer)
    except (TypeError, ValueError) as e:
        logger.error(f"Serialization error: {e}")
        raise OutputError(f"Could not serialize the run manifest: {e}") from e


def deserialize_manifest(json_string: str) -> dict:
    try:
        data = json.loads(json_string)
    except json.JSONDecodeError as e:
        raise OutputError(f"Invalid JSON in manifest: {e}") from e
    if not isinstance(data, dict) or not _MANIFEST_KEYS.issubset(data):
        missing = sorted(_MANIFEST_KEYS - set(data)) if isinstance(data, dict) else sorted(_MANIFEST_KEYS)
        raise OutputError(f"Manifest is missing keys: {', '.join(missing)}")
    return data


def events_to_frame(stream: RecordStream) -> pd.DataFrame:
    labels = [ChannelTag(int(t)).label for t in stream.tags]
    return pd.DataFrame({'channel': pd.Series(labels, dtype=object),
                         'timestamp_ns': pd.Series(stream.times, dtype=np.float64)}, columns=EVENT_COLUMNS)


def frame_to_events(frame: pd.DataFrame) -> RecordStream:
    if list(frame.columns) != EVENT_COLUMNS:
        raise OutputError(f"Event table columns must be {EVENT_COLUMNS}, got {list(frame.columns)}")
    try:
        tags = np.array([int(ChannelTag.from_label(str(c))) for c in frame['channel']], dtype=np.uint8)
    except ValueError as e:
        raise OutputError(str(e)) from e
    return RecordStream(tags, frame['timestamp_ns'].to_numpy(dtype=np.float64))


def encode_events_binary(stream: RecordStream) -> bytes:
    records = np.empty(len(stream), dtype=_RECORD)
    records['tag'] = stream.tags
    records['timestamp_ns'] = stream.times
    return np.array([len(stream)], dtype=_HEADER).tobytes() + records.tobytes()


def decode_events_binary(data: bytes) -> RecordStream:
    if len(data) < _HEADER.itemsize:
        raise OutputError("Binary event file is shorter than its header")
    count = int(np.frombuffer(data[:_HEADER.itemsize], dtype=_HEADER)[0])
    body = data[_HEADER.itemsize:]
    if len(body) != count * _RECORD.itemsize:
        raise OutputError(f"Binary event file declares {count} records but holds {len(body)} payload bytes")
    records = np.frombuffer(body, dtype=_RECORD)
    if count and records['tag'].max() > max(ChannelTag):
        raise OutputError("Binary event file contains an unknown channel tag")
    return RecordStream(records['tag'].copy(), records['timestamp_ns'].copy())


def scan_to_frame(scan) -> pd.DataFrame:
    rows = [[phase, c.n_pp, c.n_pm, c.n_mp, c.n_mm] for phase, c in zip(scan.phases, scan.counts)]
    return pd.DataFrame(rows, columns=SCAN_COLUMNS)


def chsh_to_frame(results: Iterable) -> pd.DataFrame:
    rows = []
    for result in results:
        for (i, j), e in result.estimates.items():
            rows.append([result.configuration, i, j, e.E, e.sigma, result.s.S, result.s.sigma, result.s.significance])
    return pd.DataFrame(rows, columns=CHSH_COLUMNS)


def frame_to_csv(frame: pd.DataFrame) -> str:
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator='\n')
    return buffer.getvalue()


def csv_to_frame(text: str) -> pd.DataFrame:
    return pd.read_csv(io.StringIO(text), float_precision='round_trip', keep_default_na=False)


def format_summary(values: Dict[str, object], title: Optional[str] = None) -> str:
    lines = [f"# {title}"] if title else []
    for key, value in values.items():
        if isinstance(value, float):
            value = f"{value:.6g}"
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def parse_summary(text: str) -> Dict[str, str]:
    values = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith('#'):
            continue
        key, sep, value = line.partition('=')
        if not sep:
            raise OutputError(f"Malformed summary line: {line!r}")
        values[key.strip()] = value.strip()
    return values
