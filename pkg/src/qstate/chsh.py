# src/qstate/chsh.py
"""Analytic CHSH values, optimal partner bases and the Horodecki bound."""
from typing import Tuple

import numpy as np

from src.core.errors import DegenerateSettingsError
from src.qstate.measurement import correlation
from src.qstate.states import BlochSetting, CorrelationTensor, TwoQubitState, as_setting

LOCAL_BOUND = 2.0
TSIRELSON_BOUND = 2.0 * np.sqrt(2.0)
_DEGENERATE_NORM = 1e-12


def chsh_value(state: TwoQubitState, a1, a2, b1, b2) -> float:
    """S = |E(a1,b1) + E(a1,b2) + E(a2,b1) - E(a2,b2)|"""
    a1, a2, b1, b2 = (as_setting(s) for s in (a1, a2, b1, b2))
    return abs(correlation(state, a1, b1) + correlation(state, a1, b2)
               + correlation(state, a2, b1) - correlation(state, a2, b2))


def chsh_from_tensor(T: CorrelationTensor, a1, a2, b1, b2) -> float:
    """Same quantity via E(a,b) = a^T T b."""
    t = T.T
    a1, a2, b1, b2 = (as_setting(s).vector for s in (a1, a2, b1, b2))
    return float(abs(a1 @ t @ b1 + a1 @ t @ b2 + a2 @ t @ b1 - a2 @ t @ b2))


def optimal_partner_settings(T: CorrelationTensor, a1, a2) -> Tuple[BlochSetting, BlochSetting]:
    """
    Bob's pair maximizing S for Alice's (a1, a2):
    b1 ~ T^T(a1 + a2), b2 ~ T^T(a1 - a2).
    """
    a1, a2 = as_setting(a1).vector, as_setting(a2).vector
    t_transposed = T.T.T
    u = t_transposed @ (a1 + a2)
    v = t_transposed @ (a1 - a2)
    for name, vec in (('b1', u), ('b2', v)):
        if np.linalg.norm(vec) < _DEGENERATE_NORM:
            raise DegenerateSettingsError(
                f"Degenerate settings: direction for {name} vanishes (|T^T(a1{'+' if name == 'b1' else '-'}a2)| = 0)")
    return BlochSetting.from_vector(u), BlochSetting.from_vector(v)


def optimal_chsh(T: CorrelationTensor, a1, a2) -> float:
    """|T^T(a1+a2)| + |T^T(a1-a2)|"""
    a1, a2 = as_setting(a1).vector, as_setting(a2).vector
    t_transposed = T.T.T
    return float(np.linalg.norm(t_transposed @ (a1 + a2)) + np.linalg.norm(t_transposed @ (a1 - a2)))


def horodecki_max(T: CorrelationTensor) -> float:
    """2*sqrt(s1^2 + s2^2) over the two largest singular values."""
    s = np.sort(T.singular_values)[::-1]
    return float(2.0 * np.sqrt(s[0] ** 2 + s[1] ** 2))


def violates_local_bound(S: float) -> bool:
    return S > LOCAL_BOUND
