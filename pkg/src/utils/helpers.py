# src/utils/helpers.py
import os
import sys

import numpy as np

from src.core.errors import DomainError


def resource_path(relative_path):
    """ Get absolute path to a bundled resource, works for dev and for PyInstaller """
    try:
        # PyInstaller creates a temp folder and stores path in _MEIPASS
        base_path = sys._MEIPASS
    except AttributeError:
        # helpers.py lives in src/utils, project root is two levels up
        base_path = os.path.abspath(os.path.join(os.path.dirname(__file__), "..", ".."))
    return os.path.join(base_path, relative_path)


def db_to_transmittance(loss_db):
    """10^(-loss/10). Negative loss is a domain error."""
    loss_db = float(loss_db)
    if not np.isfinite(loss_db) or loss_db < 0.0:
        raise DomainError(f"Loss must be a finite value >= 0 dB, got {loss_db}")
    return float(10.0 ** (-loss_db / 10.0))


def wrap_phase(phase):
    """Wrap to (-pi, pi]."""
    wrapped = np.angle(np.exp(1j * np.asarray(phase, dtype=float)))
    return float(wrapped) if np.ndim(wrapped) == 0 else wrapped
