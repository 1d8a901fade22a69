# src/optics/jones.py
"""
Jones matrices for the analyzer wave plates and the wave-plate setting solver.

Polarization Bloch frame used here: +z = |H>, -z = |V>, +x = (|H>+|V>)/sqrt(2),
+y = (|H>+i|V>)/sqrt(2). Jones vectors are (H, V). The analyzer applies
QWP then HWP; the PBS transmits |H>.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from src.core.errors import NumericError
from src.qstate.states import BlochSetting, PAULIS, as_setting

logger = logging.getLogger(__name__)

FIDELITY_TARGET = 1.0 - 1e-9
_SEED_ACCEPT = 1.0 - 1e-13
_MAX_REFINE_ITER = 4000

H_POL = np.array([1.0, 0.0], dtype=complex)
V_POL = np.array([0.0, 1.0], dtype=complex)


@dataclass(frozen=True)
class WavePlatePair:
    """Fast-axis orientations in degrees, each reduced to [0, 180)."""
    qwp_deg: float
    hwp_deg: float

    def __post_init__(self):
        object.__setattr__(self, 'qwp_deg', float(self.qwp_deg) % 180.0)
        object.__setattr__(self, 'hwp_deg', float(self.hwp_deg) % 180.0)

    def matrix(self) -> np.ndarray:
        """HWP . QWP"""
        return jones_hwp(self.hwp_deg) @ jones_qwp(self.qwp_deg)


def jones_hwp(angle_deg: float) -> np.ndarray:
    t = np.deg2rad(angle_deg)
    c2, s2 = np.cos(2 * t), np.sin(2 * t)
    return np.array([[c2, s2], [s2, -c2]], dtype=complex)


def jones_qwp(angle_deg: float) -> np.ndarray:
    t = np.deg2rad(angle_deg)
    c, s = np.cos(t), np.sin(t)
    return np.array([[c * c + 1j * s * s, (1 - 1j) * s * c],
                     [(1 - 1j) * s * c, s * s + 1j * c * c]], dtype=complex)


def polarization_ket(target) -> np.ndarray:
    """Jones vector whose Bloch vector (frame above) is `target`."""
    n = as_setting(target).vector
    theta = np.arccos(np.clip(n[2], -1.0, 1.0))
    phi = np.arctan2(n[1], n[0])
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], dtype=complex)


def bloch_of(ket: np.ndarray) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex)
    ket = ket / np.linalg.norm(ket)
    rho = np.outer(ket, ket.conj())
    return np.array([np.real(np.trace(rho @ p)) for p in PAULIS])


def transmitted_probability(plates: WavePlatePair, ket: np.ndarray) -> float:
    """|<H| HWP QWP |psi>|^2"""
    amp = H_POL.conj() @ plates.matrix() @ np.asarray(ket, dtype=complex)
    return float(abs(amp) ** 2)


def projection_fidelity(plates: WavePlatePair, target) -> float:
    return transmitted_probability(plates, polarization_ket(target))


def _closed_form_seed(n: np.ndarray) -> WavePlatePair:
    # ellipse azimuth psi and ellipticity chi of the target
    chi = 0.5 * np.arcsin(np.clip(n[1], -1.0, 1.0))
    psi = 0.5 * np.arctan2(n[0], n[2])
    return WavePlatePair(np.rad2deg(psi), np.rad2deg((psi - chi) / 2.0))


def _canonical(plates: WavePlatePair) -> WavePlatePair:
    # HWP(h + 90) = -HWP(h): same projection, keep the smaller angle
    return WavePlatePair(round(plates.qwp_deg, 12) % 180.0, round(plates.hwp_deg, 12) % 90.0)


def waveplate_angles_for(target) -> WavePlatePair:
    """QWP/HWP orientations whose transmitted port projects onto `target`."""
    setting = as_setting(target)
    seed = _closed_form_seed(setting.vector)
    fidelity = projection_fidelity(seed, setting)
    if fidelity >= _SEED_ACCEPT:
        return _canonical(seed)

    logger.debug(f"Wave-plate seed fidelity {fidelity:.15f}; refining numerically")
    ket = polarization_ket(setting)

    def infidelity(x):
        return 1.0 - transmitted_probability(WavePlatePair(x[0], x[1]), ket)

    result = minimize(infidelity, x0=[seed.qwp_deg, seed.hwp_deg], method='Nelder-Mead',
                      options={'xatol': 1e-11, 'fatol': 1e-16, 'maxiter': _MAX_REFINE_ITER})
    refined = WavePlatePair(result.x[0], result.x[1])
    fidelity = projection_fidelity(refined, setting)
    if fidelity < FIDELITY_TARGET:
        raise NumericError("Wave-plate solver did not reach the fidelity target",
                           {'target': setting.n, 'fidelity': fidelity, 'iterations': result.nit})
    return _canonical(refined)
