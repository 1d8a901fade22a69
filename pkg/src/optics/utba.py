# src/optics/utba.py
"""
Universal time-bin analyzer: a polarizing unbalanced interferometer that
spreads a time-bin qubit over three output slots (early, middle, late)
spaced by tau. In the middle slot |e> (long arm, V) and |l> (short arm, H)
overlap, so the time-bin qubit appears there as a polarization qubit that
wave plates and a PBS can project onto any basis.

Analyzer frame: projections are Bloch vectors of the middle-slot qubit with
|V> as +z. This keeps analyzer settings aligned with time-bin settings
(|e> -> |V>). Measuring n at interferometer phase phi is the same as
measuring R_z(-phi) n on the incoming time-bin qubit.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Tuple

import numpy as np

from src.core.errors import DomainError
from src.optics.jones import WavePlatePair, transmitted_probability, waveplate_angles_for
from src.qstate.states import AXIS_Z, EXACT_TOL, BlochSetting, TwoQubitState, as_setting
from src.utils.helpers import db_to_transmittance

DEFAULT_TAU_NS = 1.4
SLOTS = ('early', 'middle', 'late')
_INV_SQRT2 = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class TimeBinQubit:
    """amp_e|e> + amp_l|l>"""
    amp_e: complex
    amp_l: complex

    def __post_init__(self):
        amp_e, amp_l = complex(self.amp_e), complex(self.amp_l)
        if not (np.isfinite(amp_e) and np.isfinite(amp_l)):
            raise DomainError("Time-bin amplitudes must be finite")
        norm2 = abs(amp_e) ** 2 + abs(amp_l) ** 2
        if abs(norm2 - 1.0) > EXACT_TOL:
            raise DomainError(f"Time-bin qubit is not normalized (|a_e|^2 + |a_l|^2 = {norm2:.15g})")
        object.__setattr__(self, 'amp_e', amp_e)
        object.__setattr__(self, 'amp_l', amp_l)

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> 'TimeBinQubit':
        """cos(theta)|e> + e^{i phi} sin(theta)|l>"""
        return cls(np.cos(theta), np.exp(1j * phi) * np.sin(theta))

    @classmethod
    def from_bloch(cls, setting) -> 'TimeBinQubit':
        n = as_setting(setting).vector
        theta = np.arccos(np.clip(n[2], -1.0, 1.0)) / 2.0
        return cls.from_angles(theta, np.arctan2(n[1], n[0]))

    @property
    def ket(self) -> np.ndarray:
        return np.array([self.amp_e, self.amp_l], dtype=complex)


@dataclass(frozen=True)
class SlotAmplitudes:
    """Jones vectors (H, V) per output slot; slots are tau_ns apart."""
    early: np.ndarray = field(repr=False)
    middle: np.ndarray = field(repr=False)
    late: np.ndarray = field(repr=False)
    tau_ns: float = DEFAULT_TAU_NS

    def __post_init__(self):
        if not self.tau_ns > 0.0:
            raise DomainError(f"Slot spacing must be positive, got {self.tau_ns} ns")

    def slot(self, name: str) -> np.ndarray:
        if name not in SLOTS:
            raise DomainError(f"Unknown slot {name!r}")
        return getattr(self, name)

    def slot_probabilities(self) -> Dict[str, float]:
        return {name: float(np.vdot(self.slot(name), self.slot(name)).real) for name in SLOTS}

    @property
    def total_norm2(self) -> float:
        return sum(self.slot_probabilities().values())

    def slot_offsets_ns(self) -> Dict[str, float]:
        return {name: k * self.tau_ns for k, name in enumerate(SLOTS)}


def analyzer_to_polarization(n: np.ndarray) -> np.ndarray:
    """Analyzer frame (+z = V) to the Jones frame (+z = H): (x, -y, -z)."""
    n = np.asarray(n, dtype=float)
    return np.array([n[0], -n[1], -n[2]])


@lru_cache(maxsize=256)
def _plates_for(n_pol: Tuple[float, float, float]) -> WavePlatePair:
    return waveplate_angles_for(BlochSetting.from_vector(n_pol))


@dataclass(frozen=True)
class AnalyzerConfig:
    """One analyzer: interferometer phase, slot spacing, insertion loss and projection basis."""
    phase: float = 0.0
    tau_ns: float = DEFAULT_TAU_NS
    insertion_loss_db: float = 0.0
    projection: BlochSetting = AXIS_Z

    def __post_init__(self):
        if not np.isfinite(self.phase):
            raise DomainError("Analyzer phase must be finite")
        if not self.tau_ns > 0.0:
            raise DomainError(f"Analyzer delay tau must be positive, got {self.tau_ns} ns")
        if self.insertion_loss_db < 0.0:
            raise DomainError(f"Insertion loss must be >= 0 dB, got {self.insertion_loss_db}")
        object.__setattr__(self, 'projection', as_setting(self.projection))

    @property
    def transmittance(self) -> float:
        return db_to_transmittance(self.insertion_loss_db)

    def with_projection(self, projection) -> 'AnalyzerConfig':
        return AnalyzerConfig(self.phase, self.tau_ns, self.insertion_loss_db, as_setting(projection))

    def with_phase(self, phase: float) -> 'AnalyzerConfig':
        return AnalyzerConfig(float(phase), self.tau_ns, self.insertion_loss_db, self.projection)

    def waveplates(self) -> WavePlatePair:
        """QWP/HWP orientations realizing `projection` on the transmitted PBS port."""
        return _plates_for(tuple(analyzer_to_polarization(self.projection.vector)))

    def effective_setting(self) -> BlochSetting:
        """The time-bin basis this analyzer actually measures in its middle slot."""
        c, s = np.cos(self.phase), np.sin(self.phase)
        rz = np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
        return self.projection.rotated(rz)


def utba_convert(q: TimeBinQubit, cfg: AnalyzerConfig) -> SlotAmplitudes:
    if not isinstance(q, TimeBinQubit):
        q = TimeBinQubit(*q)
    scale = np.sqrt(cfg.transmittance) * _INV_SQRT2
    early = scale * np.array([q.amp_e, 0.0], dtype=complex)
    late = scale * np.array([0.0, q.amp_l], dtype=complex)
    middle = scale * np.array([np.exp(1j * cfg.phase) * q.amp_l, q.amp_e], dtype=complex)
    return SlotAmplitudes(early, middle, late, cfg.tau_ns)


def _port_probabilities(jones: np.ndarray, cfg: AnalyzerConfig) -> Tuple[float, float]:
    """(+1 port, -1 port) click probabilities for light in a slot."""
    total = float(np.vdot(jones, jones).real)
    p_plus = min(total, transmitted_probability(cfg.waveplates(), jones))
    return p_plus, max(0.0, total - p_plus)


def middle_slot_click_probability(q: TimeBinQubit, cfg: AnalyzerConfig, outcome: int) -> float:
    """(1/2) T |<outcome projector|psi_pol>|^2, evaluated through the wave-plate Jones pipeline."""
    if outcome not in (1, -1):
        raise DomainError(f"Measurement outcome must be +1 or -1, got {outcome!r}")
    p_plus, p_minus = _port_probabilities(utba_convert(q, cfg).middle, cfg)
    return p_plus if outcome == 1 else p_minus


def slot_click_probabilities(q: TimeBinQubit, cfg: AnalyzerConfig) -> Dict[str, Tuple[float, float]]:
    """Per slot (P(+1 port), P(-1 port)); sums to the analyzer transmittance."""
    slots = utba_convert(q, cfg)
    return {name: _port_probabilities(slots.slot(name), cfg) for name in SLOTS}


def side_slot_plus_probability(slot: str, projection) -> float:
    """
    P(+1 port) for a photon in a side slot. Early light is H (analyzer -z),
    late light is V (analyzer +z).
    """
    nz = as_setting(projection).n[2]
    if slot == 'early':
        return 0.5 * (1.0 - nz)
    if slot == 'late':
        return 0.5 * (1.0 + nz)
    raise DomainError(f"Side slot must be 'early' or 'late', got {slot!r}")


def paddle_alignment_fraction(theta: float) -> float:
    """Overlap area left after a paddle misalignment of theta: cos^2(theta)."""
    fraction = np.cos(theta) ** 2
    return float(fraction) if np.ndim(fraction) == 0 else fraction


def infer_paddle_angle(fraction: float) -> float:
    """Inverse of the cos^2 law, in [0, pi/2]."""
    fraction = float(fraction)
    if not 0.0 <= fraction <= 1.0:
        raise DomainError(f"Alignment fraction must lie in [0, 1], got {fraction}")
    return float(np.arccos(np.sqrt(fraction)))


def joint_middle_state(phase_a: float, phase_b: float) -> TwoQubitState:
    """
    (|HH> + e^{i(phase_a + phase_b)}|VV>)/sqrt(2) in the |HH>, |HV>, |VH>, |VV>
    ordering; with H relabeled as the first basis state, phase_b = -phase_a
    gives phi_plus.
    """
    if not (np.isfinite(phase_a) and np.isfinite(phase_b)):
        raise DomainError("Interferometer phases must be finite")
    return TwoQubitState.from_ket([1.0, 0.0, 0.0, np.exp(1j * (phase_a + phase_b))])
