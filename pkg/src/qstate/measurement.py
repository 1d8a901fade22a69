# src/qstate/measurement.py
"""Born-rule probabilities and correlations for two-qubit states."""
from typing import Optional, Tuple

import numpy as np

from src.qstate.states import (AXES, PAULIS, CorrelationTensor, TwoQubitState,
                               _check_outcome, as_setting, partial_trace)

OUTCOME_PAIRS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def joint_probability(state: TwoQubitState, a, b, outcome_a: int, outcome_b: int) -> float:
    """P(outcome_a, outcome_b) for Alice measuring a and Bob measuring b."""
    a, b = as_setting(a), as_setting(b)
    _check_outcome(outcome_a)
    _check_outcome(outcome_b)
    projector = np.kron(a.projector(outcome_a), b.projector(outcome_b))
    p = float(np.real(np.trace(state.rho @ projector)))
    return min(1.0, max(0.0, p))


def outcome_distribution(state: TwoQubitState, a, b) -> np.ndarray:
    """Probabilities in OUTCOME_PAIRS order: ++, +-, -+, --."""
    return np.array([joint_probability(state, a, b, oa, ob) for oa, ob in OUTCOME_PAIRS])


def correlation(state: TwoQubitState, a, b) -> float:
    probs = outcome_distribution(state, a, b)
    return float(sum(oa * ob * p for (oa, ob), p in zip(OUTCOME_PAIRS, probs)))


def correlation_tensor(state: TwoQubitState) -> CorrelationTensor:
    T = np.array([[correlation(state, ei, ej) for ej in AXES] for ei in AXES])
    return CorrelationTensor(T)


def local_bloch_vectors(state: TwoQubitState) -> Tuple[np.ndarray, np.ndarray]:
    rho_a, rho_b = state.reduced('A'), state.reduced('B')
    r_a = np.array([np.real(np.trace(rho_a @ p)) for p in PAULIS])
    r_b = np.array([np.real(np.trace(rho_b @ p)) for p in PAULIS])
    return r_a, r_b


def conditional_state(state: TwoQubitState, keep: str, other_projector: np.ndarray) -> Optional[np.ndarray]:
    """
    Normalized 2x2 state of qubit `keep` after the other qubit was projected
    with `other_projector`; None when that projection has zero probability.
    """
    if keep == 'A':
        op = np.kron(np.eye(2), other_projector)
    else:
        op = np.kron(other_projector, np.eye(2))
    post = op @ state.rho @ op
    p = float(np.real(np.trace(post)))
    if p <= 0.0:
        return None
    return partial_trace(post / p, keep)
