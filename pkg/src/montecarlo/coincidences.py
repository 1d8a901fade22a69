# src/montecarlo/coincidences.py
"""
Coincidence extraction from a TDC record stream.

Each trigger record opens a frame. A click belongs to the middle slot of a
frame when |t - slot_offset - t_trigger| <= window/2. Per frame the first
middle-slot click on each side is kept, and frames holding one click on each
side count as a coincidence. Each record is used at most once.
"""
import logging
from typing import Dict, Optional

import numpy as np

from src.core.data_model import (ALICE_TAGS, BOB_TAGS, DEFAULT_OUTCOME_MAP, ChannelTag,
                                 CoincidenceCounts, RecordStream)
from src.core.errors import ConfigError
from src.optics.utba import DEFAULT_TAU_NS

logger = logging.getLogger(__name__)


def default_slot_offset(arrival_offset_ns: float, tau_ns: float, trigger_latency_ns: float) -> float:
    """Middle-slot arrival relative to the trigger record."""
    return arrival_offset_ns + tau_ns - trigger_latency_ns


def _first_click_per_frame(stream: RecordStream, tags, trig: np.ndarray, slot_offset_ns: float,
                           half_window: float):
    mask = np.isin(stream.tags, [int(t) for t in tags])
    times, click_tags = stream.times[mask], stream.tags[mask]
    x = times - slot_offset_ns
    idx = np.searchsorted(trig, x - half_window, side='left')
    valid = idx < trig.size
    valid[valid] &= trig[idx[valid]] <= x[valid] + half_window
    frames, click_tags = idx[valid], click_tags[valid]
    # stream is time sorted, so np.unique's first index is the earliest click
    frames, first = np.unique(frames, return_index=True)
    return frames, click_tags[first]


def extract_coincidences(records, window_ns: float, slot_offset_ns: float, tau_ns: float = DEFAULT_TAU_NS,
                         require_ready: bool = True,
                         outcome_map: Optional[Dict[ChannelTag, int]] = None) -> CoincidenceCounts:
    """
    Counts middle-slot coincidences by outcome pair. With `require_ready`
    (default) only frames carrying a ready record are used; the naive
    estimate without it is kept as a control.
    """
    if not 0.0 < window_ns < tau_ns:
        raise ConfigError(f"Coincidence window {window_ns} ns must lie in (0, tau = {tau_ns} ns); "
                          "adjacent time slots would overlap")
    stream = records if isinstance(records, RecordStream) else RecordStream.from_records(records)
    outcome_map = outcome_map or DEFAULT_OUTCOME_MAP
    if len(stream) == 0:
        return CoincidenceCounts()
    if np.any(np.diff(stream.times) < 0):
        stream = stream.sorted()

    trig = stream.times_of(ChannelTag.TRIGGER)
    half = 0.5 * window_ns
    a_frames, a_tags = _first_click_per_frame(stream, ALICE_TAGS, trig, slot_offset_ns, half)
    b_frames, b_tags = _first_click_per_frame(stream, BOB_TAGS, trig, slot_offset_ns, half)
    frames, ia, ib = np.intersect1d(a_frames, b_frames, assume_unique=True, return_indices=True)
    a_tags, b_tags = a_tags[ia], b_tags[ib]

    if require_ready:
        ready = np.isin(trig[frames], stream.times_of(ChannelTag.READY))
        a_tags, b_tags = a_tags[ready], b_tags[ready]

    out_a = np.array([outcome_map[ChannelTag(int(t))] for t in a_tags], dtype=int)
    out_b = np.array([outcome_map[ChannelTag(int(t))] for t in b_tags], dtype=int)
    counts = CoincidenceCounts(
        n_pp=int(np.sum((out_a == 1) & (out_b == 1))),
        n_pm=int(np.sum((out_a == 1) & (out_b == -1))),
        n_mp=int(np.sum((out_a == -1) & (out_b == 1))),
        n_mm=int(np.sum((out_a == -1) & (out_b == -1))),
    )
    logger.debug(f"{counts.total} coincidences from {trig.size} frames (window {window_ns} ns)")
    return counts
