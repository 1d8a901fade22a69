# src/experiments/configurations.py
"""The four CHSH measurement configurations. Alice's pair is fixed per configuration, Bob's is optimized."""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.core.errors import DomainError
from src.qstate.chsh import chsh_value, optimal_partner_settings
from src.qstate.states import AXIS_X, AXIS_Y, BlochSetting, CorrelationTensor, TwoQubitState

CONFIGURATION_IDS = (1, 2, 3, 4)
GREAT_CIRCLES = {1: 'equator', 2: 'x-z', 3: 'y-z', 4: 'rotated x-z'}

_S45 = np.sin(np.pi / 4)


def rotation_x(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rotation_y(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotation_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


# configuration 4: configuration 2 turned by -pi/8 about y, then -pi/4 about x
CONFIG4_ROTATION = rotation_x(-np.pi / 4) @ rotation_y(-np.pi / 8)


def check_configuration_id(config_id) -> int:
    if config_id not in CONFIGURATION_IDS:
        raise DomainError(f"Configuration id must be one of {CONFIGURATION_IDS}, got {config_id!r}")
    return int(config_id)


@dataclass(frozen=True)
class SettingsQuad:
    a1: BlochSetting
    a2: BlochSetting
    b1: BlochSetting
    b2: BlochSetting

    def pair(self, i: int, j: int) -> Tuple[BlochSetting, BlochSetting]:
        """Alice's basis i and Bob's basis j, both 1-based."""
        return (self.a1, self.a2)[i - 1], (self.b1, self.b2)[j - 1]

    def analytic_S(self, state: TwoQubitState) -> float:
        return chsh_value(state, self.a1, self.a2, self.b1, self.b2)


def alice_pair(config_id: int) -> Tuple[BlochSetting, BlochSetting]:
    """Alice's two orthogonal bases, symmetric on the configuration's great circle."""
    config_id = check_configuration_id(config_id)
    if config_id == 1:
        return AXIS_X, AXIS_Y
    if config_id == 3:
        return BlochSetting.from_vector((0.0, _S45, _S45)), BlochSetting.from_vector((0.0, -_S45, _S45))
    a1 = BlochSetting.from_vector((_S45, 0.0, _S45))
    a2 = BlochSetting.from_vector((-_S45, 0.0, _S45))
    if config_id == 4:
        return a1.rotated(CONFIG4_ROTATION), a2.rotated(CONFIG4_ROTATION)
    return a1, a2


def config_settings(config_id: int, tensor: CorrelationTensor) -> SettingsQuad:
    a1, a2 = alice_pair(config_id)
    b1, b2 = optimal_partner_settings(tensor, a1, a2)
    return SettingsQuad(a1, a2, b1, b2)
