# src/montecarlo/channel.py
"""
Fiber link effects: loss, the stabilizer duty cycle, polarization
misalignment between stabilizer resets, and slow interferometer phase drift.
"""
import logging
from typing import Dict

import numpy as np

from src.core.data_model import ChannelConfig
from src.core.errors import DomainError
from src.montecarlo.rng import STREAM_MISALIGNMENT, STREAM_PHASE_DRIFT, generator_for
from src.optics.utba import paddle_alignment_fraction
from src.utils.helpers import db_to_transmittance

logger = logging.getLogger(__name__)

__all__ = ['db_to_transmittance', 'in_signal_period', 'stabilization_misalignment',
           'MisalignmentTrace', 'PhaseDriftTrace', 'MISALIGNMENT_STEP_S', 'PHASE_DRIFT_STEP_S']

MISALIGNMENT_STEP_S = 0.1
PHASE_DRIFT_STEP_S = 1.0


def in_signal_period(t_s, chan: ChannelConfig) -> np.ndarray:
    """False during the reference slice at the end of every stabilization cycle."""
    phase = np.mod(np.asarray(t_s, dtype=float), chan.cycle_s)
    return phase < chan.duty_cycle * chan.cycle_s


def _cycle_walk(rng: np.random.Generator, chan: ChannelConfig) -> np.ndarray:
    """Angles on the step grid of one cycle, starting at 0 at the reset."""
    n_steps = int(np.ceil(chan.cycle_s / MISALIGNMENT_STEP_S))
    if chan.misalignment_drift_rad_per_s == 0.0:
        return np.zeros(n_steps + 1)
    step = chan.misalignment_drift_rad_per_s * MISALIGNMENT_STEP_S
    signs = rng.choice(np.array([-1.0, 1.0]), size=n_steps)
    return np.concatenate(([0.0], step * np.cumsum(signs)))


def stabilization_misalignment(t_s: float, chan: ChannelConfig, rng: np.random.Generator) -> float:
    """
    Misalignment angle at t_s for one random-walk realization drawn from rng.
    Zero at every cycle boundary; |angle| <= drift_rate * (time since reset).
    """
    if t_s < 0:
        raise DomainError(f"Time must be >= 0, got {t_s}")
    walk = _cycle_walk(rng, chan)
    index = int(np.floor(np.mod(t_s, chan.cycle_s) / MISALIGNMENT_STEP_S))
    return float(walk[min(index, walk.size - 1)])


class MisalignmentTrace:
    """ One walk per cycle, seeded by (seed, cycle) so any batch can query any time. """

    def __init__(self, chan: ChannelConfig, seed: int, run: int = 0):
        self.chan = chan
        self.seed = seed
        self.run = run
        self._walks: Dict[int, np.ndarray] = {}

    def _walk(self, cycle: int) -> np.ndarray:
        walk = self._walks.get(cycle)
        if walk is None:
            walk = _cycle_walk(generator_for(self.seed, STREAM_MISALIGNMENT, self.run, cycle), self.chan)
            self._walks[cycle] = walk
        return walk

    def angle(self, t_s) -> np.ndarray:
        t_s = np.atleast_1d(np.asarray(t_s, dtype=float))
        if self.chan.misalignment_drift_rad_per_s == 0.0:
            return np.zeros_like(t_s)
        cycles = np.floor(t_s / self.chan.cycle_s).astype(np.int64)
        steps = np.floor((t_s - cycles * self.chan.cycle_s) / MISALIGNMENT_STEP_S).astype(np.int64)
        out = np.empty_like(t_s)
        for cycle in np.unique(cycles):
            mask = cycles == cycle
            walk = self._walk(int(cycle))
            out[mask] = walk[np.minimum(steps[mask], walk.size - 1)]
        return out

    def transmission(self, t_s) -> np.ndarray:
        """cos^2 of the misalignment, the fraction surviving the polarizing analyzer."""
        return paddle_alignment_fraction(self.angle(t_s))


class PhaseDriftTrace:
    """
    Bounded random walk of the interferometer phase sum on a 1 s grid. The step
    size lets the walk reach `bound` over `window_s`; excursions are clipped.
    """

    def __init__(self, bound_rad: float, window_s: float, duration_s: float, seed: int, run: int = 0):
        self.bound_rad = float(bound_rad)
        n_points = int(np.ceil(duration_s / PHASE_DRIFT_STEP_S)) + 1
        if self.bound_rad == 0.0:
            self.grid = np.zeros(n_points)
            return
        rng = generator_for(seed, STREAM_PHASE_DRIFT, run)
        sigma = self.bound_rad / np.sqrt(window_s / PHASE_DRIFT_STEP_S)
        grid = np.zeros(n_points)
        for k in range(1, n_points):
            grid[k] = np.clip(grid[k - 1] + rng.normal(0.0, sigma), -self.bound_rad, self.bound_rad)
        self.grid = grid
        logger.debug(f"Phase drift trace: {n_points} points, max excursion {np.max(np.abs(grid)):.3f} rad")

    def phase(self, t_s) -> np.ndarray:
        t_s = np.atleast_1d(np.asarray(t_s, dtype=float))
        index = np.clip(np.floor(t_s / PHASE_DRIFT_STEP_S).astype(np.int64), 0, self.grid.size - 1)
        return self.grid[index]
