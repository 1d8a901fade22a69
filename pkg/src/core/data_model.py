# src/core/data_model.py
"""
Plain dataclasses shared across packages: apparatus configuration, detection
records and coincidence counts, plus the run-level ExperimentConfig and
RunManifest used by the CLI.
"""
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.core.errors import DomainError
from src.optics.utba import AnalyzerConfig

# (key, message) pairs; the config layer turns them into line-anchored errors
Problems = List[Tuple[str, str]]


@dataclass
class SourceConfig:
    """ Pulsed pair source. One pair at most per pulse. """
    rep_rate_hz: float = 2.0e7
    pair_prob_per_pulse: float = 1.0e-3
    visibility: float = 1.0  # Werner visibility of the emitted state
    seed: int = 0

    @property
    def period_ns(self) -> float:
        return 1.0e9 / self.rep_rate_hz

    def problems(self) -> Problems:
        out = []
        if not self.rep_rate_hz > 0:
            out.append(('rep_rate_hz', "must be > 0"))
        if not 0.0 <= self.pair_prob_per_pulse < 1.0:
            out.append(('pair_prob_per_pulse', "must lie in [0, 1)"))
        if not 0.0 <= self.visibility <= 1.0:
            out.append(('visibility', "must lie in [0, 1]"))
        if not 0 <= self.seed < 2 ** 64:
            out.append(('seed', "must be a 64-bit unsigned integer"))
        return out


@dataclass
class ChannelConfig:
    """
    Transmission to both sides. `loss_db` is the fiber link to Bob; the link
    carries a polarization stabilizer that spends the last (1 - duty_cycle) of
    every cycle on its reference light.
    """
    loss_db: float = 0.0
    alice_loss_db: float = 0.0
    duty_cycle: float = 0.96
    misalignment_drift_rad_per_s: float = 0.0
    cycle_s: float = 10.0

    def problems(self) -> Problems:
        out = []
        if not self.loss_db >= 0:
            out.append(('loss_db', "must be >= 0"))
        if not self.alice_loss_db >= 0:
            out.append(('alice_loss_db', "must be >= 0"))
        if not 0.0 <= self.duty_cycle <= 1.0:
            out.append(('duty_cycle', "must lie in [0, 1]"))
        if not self.misalignment_drift_rad_per_s >= 0:
            out.append(('misalignment_drift_rad_per_s', "must be >= 0"))
        if not self.cycle_s > 0:
            out.append(('cycle_s', "must be > 0"))
        return out


FREE_RUNNING = 'free_running'
GATED = 'gated'


@dataclass
class DetectorConfig:
    kind: str = FREE_RUNNING
    efficiency: float = 0.5
    dark_rate_hz: float = 300.0
    dark_prob_per_gate: float = 0.0
    dead_time_ns: float = 50.0
    gate_width_ns: float = 7.0

    @classmethod
    def silicon(cls) -> 'DetectorConfig':
        return cls(FREE_RUNNING, 0.5, 300.0, 0.0, 50.0, 7.0)

    @classmethod
    def ingaas(cls) -> 'DetectorConfig':
        return cls(GATED, 0.15, 0.0, 1.0e-4, 10_000.0, 7.0)

    @property
    def gated(self) -> bool:
        return self.kind == GATED

    def problems(self, period_ns: Optional[float] = None) -> Problems:
        out = []
        if self.kind not in (FREE_RUNNING, GATED):
            out.append(('kind', f"must be '{FREE_RUNNING}' or '{GATED}'"))
        if not 0.0 <= self.efficiency <= 1.0:
            out.append(('efficiency', "must lie in [0, 1]"))
        if not self.dark_rate_hz >= 0:
            out.append(('dark_rate_hz', "must be >= 0"))
        if not 0.0 <= self.dark_prob_per_gate <= 1.0:
            out.append(('dark_prob_per_gate', "must lie in [0, 1]"))
        if not self.dead_time_ns >= 0:
            out.append(('dead_time_ns', "must be >= 0"))
        if not self.gate_width_ns > 0:
            out.append(('gate_width_ns', "must be > 0"))
        elif self.gated and period_ns is not None and self.gate_width_ns >= period_ns:
            out.append(('gate_width_ns', f"gate ({self.gate_width_ns} ns) must be shorter than the pulse period ({period_ns:g} ns)"))
        return out


@dataclass
class DetectorSet:
    """ Alice: S1 (+1), S2 (-1), free running. Bob: I1 (+1), I2 (-1), gated by Alice's trigger. """
    s1: DetectorConfig = field(default_factory=DetectorConfig.silicon)
    s2: DetectorConfig = field(default_factory=DetectorConfig.silicon)
    i1: DetectorConfig = field(default_factory=DetectorConfig.ingaas)
    i2: DetectorConfig = field(default_factory=DetectorConfig.ingaas)

    def items(self) -> List[Tuple[str, DetectorConfig]]:
        return [('S1', self.s1), ('S2', self.s2), ('I1', self.i1), ('I2', self.i2)]


@dataclass
class SimulationOptions:
    jitter_ns: float = 0.1
    trigger_latency_ns: float = 0.0
    arrival_offset_ns: float = 2.0  # pulse clock to early-slot arrival
    phase_noise_rad: float = 0.0
    phase_drift_bound_rad: float = 0.0
    phase_drift_window_s: float = 600.0
    batch_pulses: int = 20_000_000
    workers: int = 1

    def problems(self) -> Problems:
        out = []
        for key in ('jitter_ns', 'trigger_latency_ns', 'arrival_offset_ns', 'phase_noise_rad',
                    'phase_drift_bound_rad'):
            if not getattr(self, key) >= 0:
                out.append((key, "must be >= 0"))
        if not self.phase_drift_window_s > 0:
            out.append(('phase_drift_window_s', "must be > 0"))
        if not self.batch_pulses >= 1:
            out.append(('batch_pulses', "must be >= 1"))
        if not self.workers >= 1:
            out.append(('workers', "must be >= 1"))
        return out


class ChannelTag(IntEnum):
    """ Byte tags of the record stream (also the binary file format). """
    S1 = 0
    S2 = 1
    I1 = 2
    I2 = 3
    READY = 4
    TRIGGER = 5

    @property
    def label(self) -> str:
        return self.name.lower() if self >= ChannelTag.READY else self.name

    @classmethod
    def from_label(cls, label: str) -> 'ChannelTag':
        try:
            return cls[label.upper()]
        except KeyError:
            raise DomainError(f"Unknown channel label {label!r}") from None


ALICE_TAGS = (ChannelTag.S1, ChannelTag.S2)
BOB_TAGS = (ChannelTag.I1, ChannelTag.I2)
DEFAULT_OUTCOME_MAP = {ChannelTag.S1: 1, ChannelTag.S2: -1, ChannelTag.I1: 1, ChannelTag.I2: -1}


@dataclass(frozen=True)
class DetectionRecord:
    channel: ChannelTag
    timestamp_ns: float


@dataclass
class RecordStream:
    """ Column form of a TDC record stream, sorted by (timestamp, tag). """
    tags: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.uint8))
    times: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.float64))

    def __post_init__(self):
        self.tags = np.asarray(self.tags, dtype=np.uint8)
        self.times = np.asarray(self.times, dtype=np.float64)
        if self.tags.shape != self.times.shape:
            raise DomainError("Record stream tag and timestamp columns differ in length")

    def __len__(self):
        return int(self.tags.size)

    def __iter__(self):
        for tag, t in zip(self.tags, self.times):
            yield DetectionRecord(ChannelTag(int(tag)), float(t))

    @classmethod
    def from_records(cls, records) -> 'RecordStream':
        records = list(records)
        stream = cls(np.array([int(r.channel) for r in records], dtype=np.uint8),
                     np.array([r.timestamp_ns for r in records], dtype=np.float64))
        return stream.sorted()

    def sorted(self) -> 'RecordStream':
        order = np.lexsort((self.tags, self.times))
        return RecordStream(self.tags[order], self.times[order])

    def times_of(self, tag: ChannelTag) -> np.ndarray:
        return self.times[self.tags == int(tag)]

    def count(self, tag: ChannelTag) -> int:
        return int(np.count_nonzero(self.tags == int(tag)))


@dataclass(frozen=True)
class CoincidenceCounts:
    n_pp: int = 0
    n_pm: int = 0
    n_mp: int = 0
    n_mm: int = 0

    def __post_init__(self):
        for name in ('n_pp', 'n_pm', 'n_mp', 'n_mm'):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise DomainError(f"Coincidence count {name} must be a non-negative integer, got {value}")
            object.__setattr__(self, name, int(value))

    @property
    def total(self) -> int:
        return self.n_pp + self.n_pm + self.n_mp + self.n_mm

    def as_array(self) -> np.ndarray:
        return np.array([self.n_pp, self.n_pm, self.n_mp, self.n_mm], dtype=np.int64)

    def __add__(self, other: 'CoincidenceCounts') -> 'CoincidenceCounts':
        return CoincidenceCounts(*(self.as_array() + other.as_array()))


@dataclass
class CoincidenceOptions:
    window_ns: float = 0.6
    slot_offset_ns: Optional[float] = None  # None: arrival offset + tau - trigger latency
    require_ready: bool = True


@dataclass
class ExperimentOptions:
    local_duration_s: float = 160.0
    remote_duration_s: float = 480.0
    remote: bool = False
    configurations: Tuple[int, ...] = (1, 2, 3, 4)
    scan_points: int = 16
    scan_duration_s: float = 10.0
    scan_mode: str = 'both'
    target_visibility: float = 0.91
    calibration_tolerance: float = 0.05
    calibration_phase_tolerance: float = 0.05
    calibration_duration_s: float = 20.0
    calibration_max_iter: int = 8
    calibrate: bool = True
    weighted_fit: bool = False
    multinomial_sigma: bool = False

    @property
    def duration_per_configuration_s(self) -> float:
        return self.remote_duration_s if self.remote else self.local_duration_s


@dataclass
class OutputOptions:
    out_dir: str = 'results'
    dump_events: bool = False
    events_format: str = 'both'  # csv | binary | both


@dataclass
class ExperimentConfig:
    """ Fully resolved, validated run configuration. """
    scenario: str = 'default'
    description: str = ''
    source: SourceConfig = field(default_factory=SourceConfig)
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    alice: AnalyzerConfig = field(default_factory=AnalyzerConfig)
    bob: AnalyzerConfig = field(default_factory=AnalyzerConfig)
    detectors: DetectorSet = field(default_factory=DetectorSet)
    simulation: SimulationOptions = field(default_factory=SimulationOptions)
    coincidence: CoincidenceOptions = field(default_factory=CoincidenceOptions)
    experiment: ExperimentOptions = field(default_factory=ExperimentOptions)
    output: OutputOptions = field(default_factory=OutputOptions)
    config_hash: str = ''
    source_path: Optional[str] = None


@dataclass
class RunManifest:
    command: str
    scenario: str
    config_hash: str
    seed: int
    version: str
    wall_clock_s: float
    outputs: List[str] = field(default_factory=list)
    results: Dict[str, float] = field(default_factory=dict)
