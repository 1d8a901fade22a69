# src/montecarlo/simulator.py
"""
Event-level simulation of the two-station apparatus.

A run is split into fixed pulse batches. Each batch samples pairs, slots,
outcomes, losses and dark counts from its own random stream; the merge stage
then applies detector dead time, opens Bob's gates on Alice's clicks and
emits trigger/ready records, in time order, on one thread.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core.data_model import (ChannelConfig, ChannelTag, DetectorSet, RecordStream,
                                 SimulationOptions, SourceConfig)
from src.core.errors import ConfigError, DomainError
from src.montecarlo.channel import MisalignmentTrace, PhaseDriftTrace, in_signal_period
from src.montecarlo.rng import batch_generator
from src.montecarlo.workers import run_batches
from src.optics.utba import AnalyzerConfig, side_slot_plus_probability
from src.qstate.measurement import OUTCOME_PAIRS, conditional_state
from src.qstate.states import AXIS_Z, PAULIS, TwoQubitState
from src.utils.helpers import db_to_transmittance

logger = logging.getLogger(__name__)

DOUBLE_PAIR_WARNING = 0.1
EARLY, MIDDLE, LATE = 0, 1, 2


def _bloch(rho: Optional[np.ndarray]) -> np.ndarray:
    if rho is None:
        return np.zeros(3)
    return np.array([np.real(np.trace(rho @ p)) for p in PAULIS])


def _rotate_z(r: np.ndarray, phase: np.ndarray) -> np.ndarray:
    """Bloch vectors r (3,) rotated about z by each phase; returns (n, 3)."""
    c, s = np.cos(phase), np.sin(phase)
    return np.stack([r[0] * c - r[1] * s, r[0] * s + r[1] * c, np.full_like(c, r[2])], axis=-1)


def run_problems(src: SourceConfig, det: DetectorSet, chan: ChannelConfig,
                 options: SimulationOptions) -> List[Tuple[str, str, str]]:
    """Every precondition failure as (section, key, message)."""
    found = []
    for section, cfg in (('source', src), ('channel', chan), ('simulation', options)):
        found += [(section, key, msg) for key, msg in cfg.problems()]
    period = src.period_ns if src.rep_rate_hz > 0 else None
    for name, cfg in det.items():
        section = f"detector.{name}"
        found += [(section, key, msg) for key, msg in cfg.problems(period)]
        if name.startswith('S') and cfg.gated:
            found.append((section, 'kind', "Alice's detectors are free running"))
        if name.startswith('I') and not cfg.gated:
            found.append((section, 'kind', "Bob's detectors are gated by Alice's trigger"))
    return found


def validate_run(src: SourceConfig, det: DetectorSet, chan: ChannelConfig,
                 options: SimulationOptions) -> List[str]:
    return [f"[{section}] {key}: {msg}" for section, key, msg in run_problems(src, det, chan, options)]


@dataclass
class BatchResult:
    index: int
    n_pairs: int = 0
    alice_tags: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.uint8))
    alice_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    bob_pulses: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    bob_tags: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.uint8))
    bob_times: np.ndarray = field(default_factory=lambda: np.empty(0))


@dataclass
class SimulationStats:
    pulses: int = 0
    pairs: int = 0
    frames: int = 0
    ready_frames: int = 0
    alice_clicks: int = 0
    bob_clicks: int = 0


class SimulationPlan:
    """ Everything a batch needs, precomputed once per run and read-only afterwards. """

    def __init__(self, src: SourceConfig, state: TwoQubitState, alice: AnalyzerConfig, bob: AnalyzerConfig,
                 det: DetectorSet, chan: ChannelConfig, duration_s: float,
                 options: Optional[SimulationOptions] = None, run: int = 0):
        options = options or SimulationOptions()
        if not duration_s > 0:
            raise DomainError(f"Run duration must be > 0 s, got {duration_s}")
        messages = validate_run(src, det, chan, options)
        if messages:
            raise ConfigError(messages[0], messages)
        if src.pair_prob_per_pulse > DOUBLE_PAIR_WARNING:
            logger.warning(f"Pair probability {src.pair_prob_per_pulse} per pulse is above {DOUBLE_PAIR_WARNING}; "
                           "double pairs are not modeled")

        self.src, self.state, self.alice, self.bob = src, state, alice, bob
        self.det, self.chan, self.options, self.run = det, chan, options, run
        self.duration_s = float(duration_s)
        self.period_ns = src.period_ns
        self.n_pulses = int(np.floor(self.duration_s * src.rep_rate_hz))
        self.batch_pulses = int(options.batch_pulses)
        self.n_batches = max(1, -(-self.n_pulses // self.batch_pulses))

        self.eta_alice = db_to_transmittance(chan.alice_loss_db) * alice.transmittance
        self.eta_bob = db_to_transmittance(chan.loss_db) * bob.transmittance
        # indexed by channel tag S1, S2, I1, I2
        self.efficiency = np.array([cfg.efficiency for _, cfg in det.items()])
        self.stats = SimulationStats(pulses=self.n_pulses)
        self.misalignment = MisalignmentTrace(chan, src.seed, run)
        self.drift = PhaseDriftTrace(options.phase_drift_bound_rad, options.phase_drift_window_s,
                                     self.duration_s, src.seed, run)
        self._prepare_joint_tables()

    def _prepare_joint_tables(self):
        # both photons in the middle slot: P_j(delta) = C0_j + 2 Re(C1_j e^{i delta}),
        # delta being the extra phase on Alice's late component
        rho = self.state.with_phases(self.alice.phase, self.bob.phase).rho
        alice_late = np.arange(4) // 2
        one_to_zero = np.outer(alice_late == 1, alice_late == 0)
        same = np.equal.outer(alice_late, alice_late)
        self.c0 = np.empty(4)
        self.c1 = np.empty(4, dtype=complex)
        for j, (oa, ob) in enumerate(OUTCOME_PAIRS):
            m = np.kron(self.alice.projection.projector(oa), self.bob.projection.projector(ob))
            terms = rho * m.T
            self.c0[j] = np.real(np.sum(terms[same]))
            self.c1[j] = np.sum(terms[one_to_zero])

        # one photon in a side slot: its time bin is revealed, the partner is conditioned on it
        self.p_alice_late = float(np.real(self.state.reduced('A')[1, 1]))
        self.p_bob_late = float(np.real(self.state.reduced('B')[1, 1]))
        bins = (AXIS_Z.projector(1), AXIS_Z.projector(-1))
        self.alice_given_bob = [_bloch(conditional_state(self.state, 'A', p)) for p in bins]
        self.bob_given_alice = [_bloch(conditional_state(self.state, 'B', p)) for p in bins]
        self.p_bins = np.clip(np.real(np.diag(self.state.rho)), 0.0, None)
        self.p_bins /= self.p_bins.sum()

    # -- batch stage -------------------------------------------------------------------------

    def batch_bounds(self, index: int):
        first = index * self.batch_pulses
        return first, min(self.n_pulses, first + self.batch_pulses)

    def simulate_batch(self, index: int) -> BatchResult:
        rng = batch_generator(self.src.seed, self.run, index)
        first, stop = self.batch_bounds(index)
        n_batch = stop - first
        result = BatchResult(index)
        if n_batch <= 0:
            return result

        n_pairs = int(rng.binomial(n_batch, self.src.pair_prob_per_pulse)) if self.src.pair_prob_per_pulse > 0 else 0
        pulses = first + np.sort(rng.choice(n_batch, size=n_pairs, replace=False)).astype(np.int64)
        t_pulse_ns = pulses * self.period_ns
        pulses = pulses[in_signal_period(t_pulse_ns * 1e-9, self.chan)]
        result.n_pairs = int(pulses.size)

        a_tags, a_times, b_tags, b_times, b_pulses = self._sample_pairs(rng, pulses)
        dark_tags, dark_times = self._alice_darks(rng, first * self.period_ns, stop * self.period_ns)
        a_tags = np.concatenate([a_tags, dark_tags])
        a_times = np.concatenate([a_times, dark_times])

        # Bob's gate darks, one draw per detector for every frame Alice could open
        frames = np.unique(np.floor(a_times / self.period_ns).astype(np.int64))
        t_trig = frames * self.period_ns + self.options.trigger_latency_ns
        for tag in (ChannelTag.I1, ChannelTag.I2):
            cfg = self.det.i1 if tag == ChannelTag.I1 else self.det.i2
            fired = rng.random(frames.size) < cfg.dark_prob_per_gate
            offsets = rng.random(frames.size) * cfg.gate_width_ns
            b_pulses = np.concatenate([b_pulses, frames[fired]])
            b_times = np.concatenate([b_times, t_trig[fired] + offsets[fired]])
            b_tags = np.concatenate([b_tags, np.full(int(fired.sum()), int(tag), dtype=np.uint8)])

        result.alice_tags, result.alice_times = a_tags.astype(np.uint8), a_times
        result.bob_pulses, result.bob_tags, result.bob_times = b_pulses, b_tags.astype(np.uint8), b_times
        return result

    def _sample_pairs(self, rng: np.random.Generator, pulses: np.ndarray):
        n = pulses.size
        t_ns = pulses * self.period_ns
        t_s = t_ns * 1e-9
        delta = self.drift.phase(t_s)
        if self.options.phase_noise_rad > 0:
            delta = delta + rng.normal(0.0, self.options.phase_noise_rad, n)

        a_mid = rng.random(n) < 0.5
        b_mid = rng.random(n) < 0.5
        out_a = np.ones(n, dtype=np.int8)
        out_b = np.ones(n, dtype=np.int8)
        slot_a = np.full(n, MIDDLE, dtype=np.int8)
        slot_b = np.full(n, MIDDLE, dtype=np.int8)
        nA, nB = self.alice.projection.vector, self.bob.projection.vector

        mm = a_mid & b_mid
        if mm.any():
            probs = self.c0[None, :] + 2.0 * np.real(self.c1[None, :] * np.exp(1j * delta[mm])[:, None])
            probs = np.clip(probs, 0.0, None)
            probs /= probs.sum(axis=1, keepdims=True)
            choice = np.minimum((rng.random(int(mm.sum()))[:, None] > np.cumsum(probs, axis=1)).sum(axis=1), 3)
            pairs = np.array(OUTCOME_PAIRS, dtype=np.int8)[choice]
            out_a[mm], out_b[mm] = pairs[:, 0], pairs[:, 1]

        ms = a_mid & ~b_mid
        if ms.any():
            late = rng.random(int(ms.sum())) < self.p_bob_late
            slot_b[ms] = np.where(late, LATE, EARLY)
            out_b[ms] = self._side_outcomes(rng, late, nB)
            r = np.where(late[:, None],
                         _rotate_z(self.alice_given_bob[1], self.alice.phase + delta[ms]),
                         _rotate_z(self.alice_given_bob[0], self.alice.phase + delta[ms]))
            out_a[ms] = np.where(rng.random(late.size) < 0.5 * (1.0 + r @ nA), 1, -1)

        sm = ~a_mid & b_mid
        if sm.any():
            late = rng.random(int(sm.sum())) < self.p_alice_late
            slot_a[sm] = np.where(late, LATE, EARLY)
            out_a[sm] = self._side_outcomes(rng, late, nA)
            phase_b = np.full(late.size, self.bob.phase)
            r = np.where(late[:, None], _rotate_z(self.bob_given_alice[1], phase_b),
                         _rotate_z(self.bob_given_alice[0], phase_b))
            out_b[sm] = np.where(rng.random(late.size) < 0.5 * (1.0 + r @ nB), 1, -1)

        ss = ~a_mid & ~b_mid
        if ss.any():
            idx = rng.choice(4, size=int(ss.sum()), p=self.p_bins)
            late_a, late_b = idx // 2 == 1, idx % 2 == 1
            slot_a[ss] = np.where(late_a, LATE, EARLY)
            slot_b[ss] = np.where(late_b, LATE, EARLY)
            out_a[ss] = self._side_outcomes(rng, late_a, nA)
            out_b[ss] = self._side_outcomes(rng, late_b, nB)

        tag_a = np.where(out_a == 1, int(ChannelTag.S1), int(ChannelTag.S2)).astype(np.uint8)
        tag_b = np.where(out_b == 1, int(ChannelTag.I1), int(ChannelTag.I2)).astype(np.uint8)
        keep_a = rng.random(n) < self.eta_alice * self.efficiency[tag_a]
        keep_b = rng.random(n) < self.eta_bob * self.misalignment.transmission(t_s) * self.efficiency[tag_b]

        jitter = self.options.jitter_ns
        t_a = t_ns + self.options.arrival_offset_ns + slot_a * self.alice.tau_ns + rng.normal(0.0, jitter, n)
        t_b = t_ns + self.options.arrival_offset_ns + slot_b * self.bob.tau_ns + rng.normal(0.0, jitter, n)

        # a gated detector only sees light inside the gate its frame opens
        gate = np.where(tag_b == int(ChannelTag.I1), self.det.i1.gate_width_ns, self.det.i2.gate_width_ns)
        gate_open = t_ns + self.options.trigger_latency_ns
        keep_b &= (t_b >= gate_open) & (t_b < gate_open + gate)
        return tag_a[keep_a], t_a[keep_a], tag_b[keep_b], t_b[keep_b], pulses[keep_b]

    @staticmethod
    def _side_outcomes(rng: np.random.Generator, late: np.ndarray, n: np.ndarray) -> np.ndarray:
        p_plus = np.where(late, side_slot_plus_probability('late', n), side_slot_plus_probability('early', n))
        return np.where(rng.random(late.size) < p_plus, 1, -1).astype(np.int8)

    def _alice_darks(self, rng: np.random.Generator, start_ns: float, stop_ns: float):
        tags, times = [], []
        span_s = (stop_ns - start_ns) * 1e-9
        for tag, cfg in ((ChannelTag.S1, self.det.s1), (ChannelTag.S2, self.det.s2)):
            count = int(rng.poisson(cfg.dark_rate_hz * span_s)) if cfg.dark_rate_hz > 0 else 0
            times.append(start_ns + rng.random(count) * (stop_ns - start_ns))
            tags.append(np.full(count, int(tag), dtype=np.uint8))
        return np.concatenate(tags), np.concatenate(times)

    # -- merge stage -------------------------------------------------------------------------

    def merge(self, batches: Sequence[BatchResult]) -> RecordStream:
        batches = sorted(batches, key=lambda b: b.index)
        self.stats = SimulationStats(pulses=self.n_pulses, pairs=sum(b.n_pairs for b in batches))
        a_tags = np.concatenate([b.alice_tags for b in batches])
        a_times = np.concatenate([b.alice_times for b in batches])

        alice_tags, alice_times = [], []
        for tag, cfg in ((ChannelTag.S1, self.det.s1), (ChannelTag.S2, self.det.s2)):
            kept = apply_dead_time(np.sort(a_times[a_tags == int(tag)]), cfg.dead_time_ns)
            alice_times.append(kept)
            alice_tags.append(np.full(kept.size, int(tag), dtype=np.uint8))
        alice_times = np.concatenate(alice_times)
        alice_tags = np.concatenate(alice_tags)

        frames = np.unique(np.floor(alice_times / self.period_ns).astype(np.int64))
        t_trig = frames * self.period_ns + self.options.trigger_latency_ns

        b_pulses = np.concatenate([b.bob_pulses for b in batches])
        b_tags = np.concatenate([b.bob_tags for b in batches])
        b_times = np.concatenate([b.bob_times for b in batches])
        live = np.isin(b_pulses, frames)
        b_pulses, b_tags, b_times = b_pulses[live], b_tags[live], b_times[live]
        order = np.lexsort((b_tags, b_times))
        b_pulses, b_tags, b_times = b_pulses[order], b_tags[order], b_times[order]

        ready, bob_keep = gate_bob_clicks(frames, t_trig, b_pulses, b_tags, b_times,
                                          {ChannelTag.I1: self.det.i1.dead_time_ns,
                                           ChannelTag.I2: self.det.i2.dead_time_ns})

        tags = np.concatenate([alice_tags,
                               np.full(frames.size, int(ChannelTag.TRIGGER), dtype=np.uint8),
                               np.full(int(ready.sum()), int(ChannelTag.READY), dtype=np.uint8),
                               b_tags[bob_keep]])
        times = np.concatenate([alice_times, t_trig, t_trig[ready], b_times[bob_keep]])

        self.stats.frames = int(frames.size)
        self.stats.ready_frames = int(ready.sum())
        self.stats.alice_clicks = int(alice_times.size)
        self.stats.bob_clicks = int(bob_keep.sum())
        logger.debug(f"Run {self.run}: {self.stats}")
        return RecordStream(tags, times).sorted()


def apply_dead_time(times: np.ndarray, dead_time_ns: float) -> np.ndarray:
    """Non-paralyzable dead time on sorted click times of one detector."""
    if dead_time_ns <= 0 or times.size < 2:
        return times
    keep = np.zeros(times.size, dtype=bool)
    next_live = -np.inf
    for i, t in enumerate(times):
        if t >= next_live:
            keep[i] = True
            next_live = t + dead_time_ns
    return times[keep]


def gate_bob_clicks(frames: np.ndarray, t_trig: np.ndarray, b_pulses: np.ndarray, b_tags: np.ndarray,
                    b_times: np.ndarray, dead_time_ns: Dict[ChannelTag, float]):
    """
    Walks the frames in time order. A frame is ready when both of Bob's
    detectors are live at gate opening; a candidate click is accepted when its
    own detector is live at the click time. Candidates must be time sorted.
    """
    ready = np.zeros(frames.size, dtype=bool)
    keep = np.zeros(b_times.size, dtype=bool)
    next_live = {int(ChannelTag.I1): -np.inf, int(ChannelTag.I2): -np.inf}
    dead = {int(tag): value for tag, value in dead_time_ns.items()}
    j = 0
    for i, (frame, t_open) in enumerate(zip(frames, t_trig)):
        ready[i] = t_open >= next_live[int(ChannelTag.I1)] and t_open >= next_live[int(ChannelTag.I2)]
        while j < b_times.size and b_pulses[j] <= frame:
            if b_pulses[j] == frame:
                tag = int(b_tags[j])
                if b_times[j] >= next_live[tag]:
                    keep[j] = True
                    next_live[tag] = b_times[j] + dead[tag]
            j += 1
    return ready, keep


def simulate_run(src: SourceConfig, state_model: TwoQubitState, alice_cfg: AnalyzerConfig,
                 bob_cfg: AnalyzerConfig, det: DetectorSet, chan: ChannelConfig, duration_s: float,
                 options: Optional[SimulationOptions] = None, run: int = 0) -> RecordStream:
    """
    Time-ordered record stream of one run. `run` selects an independent random
    stream, so separate setting pairs of one experiment stay decorrelated.
    """
    plan = SimulationPlan(src, state_model, alice_cfg, bob_cfg, det, chan, duration_s, options, run)
    batches = run_batches(plan, plan.options.workers)
    return plan.merge(batches)
