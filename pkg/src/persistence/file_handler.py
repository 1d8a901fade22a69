# src/persistence/file_handler.py
import logging
import os
import tempfile
from typing import List

import pandas as pd

from src.core.data_model import RecordStream, RunManifest
from src.core.errors import OutputError
from src.persistence.serializer import (csv_to_frame, decode_events_binary, deserialize_manifest,
                                        encode_events_binary, events_to_frame, frame_to_csv,
                                        frame_to_events, serialize_manifest)

logger = logging.getLogger(__name__)

MANIFEST_NAME = 'manifest.json'
EVENT_FORMATS = ('csv', 'binary', 'both')


def ensure_dir(path: str) -> str:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise OutputError(f"Could not create output directory {path}: {e}") from e
    return path


def write_bytes_atomic(filepath: str, data: bytes) -> str:
    """
    Writes to a temporary file next to `filepath`, then renames it over the
    target. A reader never sees a partial file.
    """
    directory = ensure_dir(os.path.dirname(os.path.abspath(filepath)))
    fd, tmp_path = tempfile.mkstemp(prefix='.' + os.path.basename(filepath) + '.', suffix='.tmp', dir=directory)
    try:
        with os.fdopen(fd, 'wb') as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_path, filepath)
    except OSError as e:
        try:
            os.unlink(tmp_path)
        except OSError:
            pass
        raise OutputError(f"Could not write {filepath}: {e}") from e
    logger.debug(f"Wrote {filepath} ({len(data)} bytes)")
    return filepath


def write_text_atomic(filepath: str, text: str) -> str:
    return write_bytes_atomic(filepath, text.encode('utf-8'))


def read_bytes(filepath: str) -> bytes:
    try:
        with open(filepath, 'rb') as f:
            return f.read()
    except FileNotFoundError:
        raise OutputError(f"File not found: {filepath}") from None
    except OSError as e:
        raise OutputError(f"Could not read {filepath}: {e}") from e


def read_text(filepath: str) -> str:
    return read_bytes(filepath).decode('utf-8')


def write_csv(filepath: str, frame: pd.DataFrame) -> str:
    return write_text_atomic(filepath, frame_to_csv(frame))


def read_csv(filepath: str) -> pd.DataFrame:
    return csv_to_frame(read_text(filepath))


def write_events(base_path: str, stream: RecordStream, fmt: str = 'both') -> List[str]:
    """Writes `<base>.csv` and/or `<base>.bin`; returns the written paths."""
    if fmt not in EVENT_FORMATS:
        raise OutputError(f"Event format must be one of {EVENT_FORMATS}, got {fmt!r}")
    written = []
    if fmt in ('csv', 'both'):
        written.append(write_csv(base_path + '.csv', events_to_frame(stream)))
    if fmt in ('binary', 'both'):
        written.append(write_bytes_atomic(base_path + '.bin', encode_events_binary(stream)))
    return written


def read_events(filepath: str) -> RecordStream:
    """Reads either event format, chosen by extension."""
    if filepath.lower().endswith('.bin'):
        return decode_events_binary(read_bytes(filepath))
    return frame_to_events(read_csv(filepath))


def write_manifest(out_dir: str, manifest: RunManifest) -> str:
    """Must be called after every other output of the run has been written."""
    missing = [p for p in manifest.outputs if not os.path.exists(p)]
    if missing:
        raise OutputError(f"Refusing to write manifest, outputs missing: {', '.join(missing)}")
    path = write_text_atomic(os.path.join(out_dir, MANIFEST_NAME), serialize_manifest(manifest))
    logger.info(f"Manifest written to {path}")
    return path


def read_manifest(filepath: str) -> dict:
    return deserialize_manifest(read_text(filepath))
