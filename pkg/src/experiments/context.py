# src/experiments/context.py
import logging
from dataclasses import dataclass
from typing import Callable, Optional

from src.core.data_model import CoincidenceCounts, ExperimentConfig, RecordStream
from src.montecarlo.coincidences import default_slot_offset, extract_coincidences
from src.montecarlo.simulator import simulate_run
from src.qstate.measurement import correlation, correlation_tensor
from src.qstate.states import CorrelationTensor, TwoQubitState, phi_plus, white_noise_mix

logger = logging.getLogger(__name__)


@dataclass
class Measurement:
    label: str
    run: int
    counts: CoincidenceCounts
    stream: RecordStream


class SimulationContext:
    """
    Binds an ExperimentConfig to the simulator. Every measurement draws a fresh
    run stream in call order, so a procedure replays identically for a seed.
    """

    def __init__(self, config: ExperimentConfig, on_measurement: Optional[Callable[[Measurement], None]] = None):
        self.config = config
        self.state: TwoQubitState = white_noise_mix(phi_plus(), config.source.visibility)
        self.alice = config.alice
        self.bob = config.bob
        self.on_measurement = on_measurement
        self._next_run = 0

    @property
    def tensor(self) -> CorrelationTensor:
        return correlation_tensor(self.state)

    @property
    def slot_offset_ns(self) -> float:
        if self.config.coincidence.slot_offset_ns is not None:
            return self.config.coincidence.slot_offset_ns
        sim = self.config.simulation
        return default_slot_offset(sim.arrival_offset_ns, self.alice.tau_ns, sim.trigger_latency_ns)

    def set_bob_phase(self, phase: float):
        self.bob = self.bob.with_phase(phase)

    def oracle_correlation(self, a, b) -> float:
        """Born-rule E for the current interferometer phases, no detector effects."""
        state = self.state.with_phases(self.alice.phase, self.bob.phase)
        return correlation(state, a, b)

    def simulate(self, a, b, duration_s: float, alice_phase: Optional[float] = None,
                 bob_phase: Optional[float] = None) -> RecordStream:
        cfg = self.config
        alice = self.alice.with_projection(a)
        bob = self.bob.with_projection(b)
        if alice_phase is not None:
            alice = alice.with_phase(alice_phase)
        if bob_phase is not None:
            bob = bob.with_phase(bob_phase)
        run = self._next_run
        self._next_run += 1
        return simulate_run(cfg.source, self.state, alice, bob, cfg.detectors, cfg.channel, duration_s,
                            options=cfg.simulation, run=run)

    def count(self, stream: RecordStream, require_ready: Optional[bool] = None) -> CoincidenceCounts:
        coinc = self.config.coincidence
        if require_ready is None:
            require_ready = coinc.require_ready
        return extract_coincidences(stream, coinc.window_ns, self.slot_offset_ns, tau_ns=self.alice.tau_ns,
                                    require_ready=require_ready)

    def measure(self, a, b, duration_s: float, label: str = '', **phases) -> Measurement:
        run = self._next_run
        stream = self.simulate(a, b, duration_s, **phases)
        measurement = Measurement(label or f"run{run}", run, self.count(stream), stream)
        logger.debug(f"{measurement.label}: {measurement.counts} in {duration_s:g} s")
        if self.on_measurement is not None:
            self.on_measurement(measurement)
        return measurement

    @property
    def runs_used(self) -> int:
        return self._next_run
