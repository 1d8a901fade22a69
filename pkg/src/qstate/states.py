# src/qstate/states.py
"""
Two-qubit states in the fixed time-bin basis |ee>, |el>, |le>, |ll> (Alice first),
Bloch measurement settings and the correlation tensor.

Basis convention: |e> is Bloch +z, |l> is -z, and the equatorial basis
(|e> +- e^{i phi}|l>)/sqrt(2) sits at azimuth phi measured from +x.
"""
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Tuple

import numpy as np

from src.core.errors import DomainError

EXACT_TOL = 1e-12
DERIVED_TOL = 1e-10

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)
IDENTITY_2 = np.eye(2, dtype=complex)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class BlochSetting:
    """
    Projective measurement basis named by a unit Bloch vector.
    Outcome +1 projects onto the state at +n, outcome -1 onto -n.
    """
    n: Tuple[float, float, float]

    def __post_init__(self):
        vec = np.asarray(self.n, dtype=float).reshape(-1)
        if vec.shape != (3,) or not np.all(np.isfinite(vec)):
            raise DomainError(f"Bloch setting needs three finite components, got {self.n!r}")
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > EXACT_TOL:
            raise DomainError(f"Bloch vector must be unit length (|n| = {norm:.15g})")
        object.__setattr__(self, 'n', tuple(float(x) for x in vec))

    @classmethod
    def from_vector(cls, vector: Iterable[float]) -> 'BlochSetting':
        """Normalizes first; a zero vector is a domain error."""
        vec = np.asarray(list(vector), dtype=float)
        norm = float(np.linalg.norm(vec))
        if norm < EXACT_TOL:
            raise DomainError("Cannot build a Bloch setting from a zero vector")
        return cls(tuple(vec / norm))

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> 'BlochSetting':
        """Polar angle theta from +z, azimuth phi from +x."""
        return cls((np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)))

    @classmethod
    def equatorial(cls, phi: float) -> 'BlochSetting':
        return cls((np.cos(phi), np.sin(phi), 0.0))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.n, dtype=float)

    @property
    def azimuth(self) -> float:
        return float(np.arctan2(self.n[1], self.n[0]))

    def operator(self) -> np.ndarray:
        """n . sigma"""
        return sum(c * p for c, p in zip(self.n, PAULIS))

    def projector(self, outcome: int) -> np.ndarray:
        _check_outcome(outcome)
        return 0.5 * (IDENTITY_2 + outcome * self.operator())

    def rotated(self, rotation: np.ndarray) -> 'BlochSetting':
        return BlochSetting.from_vector(np.asarray(rotation, dtype=float) @ self.vector)

    def __neg__(self) -> 'BlochSetting':
        return BlochSetting(tuple(-x for x in self.n))


AXIS_X = BlochSetting((1.0, 0.0, 0.0))
AXIS_Y = BlochSetting((0.0, 1.0, 0.0))
AXIS_Z = BlochSetting((0.0, 0.0, 1.0))
AXES = (AXIS_X, AXIS_Y, AXIS_Z)


def as_setting(value) -> BlochSetting:
    """Accepts a BlochSetting or a raw 3-vector (which must already be unit length)."""
    if isinstance(value, BlochSetting):
        return value
    return BlochSetting(tuple(np.asarray(value, dtype=float).reshape(-1)))


def _check_outcome(outcome: int):
    if outcome not in (1, -1):
        raise DomainError(f"Measurement outcome must be +1 or -1, got {outcome!r}")


def partial_trace(rho: np.ndarray, keep: str) -> np.ndarray:
    """Reduced 2x2 matrix of qubit 'A' or 'B' from a 4x4 operator."""
    r = np.asarray(rho).reshape(2, 2, 2, 2)
    if keep == 'A':
        return np.einsum('ijkj->ik', r)
    if keep == 'B':
        return np.einsum('ijil->jl', r)
    raise DomainError(f"Unknown qubit label {keep!r}, expected 'A' or 'B'")


@dataclass(frozen=True)
class TwoQubitState:
    """Density matrix in the |ee>, |el>, |le>, |ll> basis. Validated and read-only."""
    rho: np.ndarray = field(repr=False)

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if rho.shape != (4, 4):
            raise DomainError(f"Two-qubit density matrix must be 4x4, got shape {rho.shape}")
        if not np.all(np.isfinite(rho)):
            raise DomainError("Density matrix has non-finite entries")
        if np.max(np.abs(rho - rho.conj().T)) > EXACT_TOL:
            raise DomainError("Density matrix is not Hermitian")
        trace = np.trace(rho)
        if abs(trace - 1.0) > EXACT_TOL:
            raise DomainError(f"Density matrix trace is {trace.real:.15g}, expected 1")
        min_eig = float(np.min(np.linalg.eigvalsh(rho)))
        if min_eig < -DERIVED_TOL:
            raise DomainError(f"Density matrix is not positive semidefinite (min eigenvalue {min_eig:.3g})")
        object.__setattr__(self, 'rho', _frozen(rho))

    @classmethod
    def from_ket(cls, ket: Sequence[complex]) -> 'TwoQubitState':
        psi = np.asarray(ket, dtype=complex).reshape(4)
        norm = np.linalg.norm(psi)
        if norm < EXACT_TOL:
            raise DomainError("Cannot build a state from a zero ket")
        psi = psi / norm
        return cls(np.outer(psi, psi.conj()))

    def reduced(self, qubit: str) -> np.ndarray:
        return partial_trace(self.rho, qubit)

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))

    def with_phases(self, phase_a: float, phase_b: float) -> 'TwoQubitState':
        """Apply e^{i phase} to the late component of each qubit."""
        u = np.diag([1.0, np.exp(1j * phase_b), np.exp(1j * phase_a), np.exp(1j * (phase_a + phase_b))])
        return TwoQubitState(u @ self.rho @ u.conj().T)


@dataclass(frozen=True)
class CorrelationTensor:
    """T[i][j] = <sigma_i (x) sigma_j>."""
    T: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.asarray(self.T, dtype=float)
        if t.shape != (3, 3) or not np.all(np.isfinite(t)):
            raise DomainError("Correlation tensor must be a finite 3x3 matrix")
        s_max = float(np.max(np.linalg.svd(t, compute_uv=False)))
        if s_max > 1.0 + DERIVED_TOL:
            raise DomainError(f"Correlation tensor singular value {s_max:.12g} exceeds 1")
        object.__setattr__(self, 'T', _frozen(t))

    @property
    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.T, compute_uv=False)


def check_visibility(V: float) -> float:
    V = float(V)
    if not np.isfinite(V) or V < 0.0 or V > 1.0:
        raise DomainError(f"Visibility must lie in [0, 1], got {V}")
    return V


def phi_plus() -> TwoQubitState:
    """(|ee> + |ll>)/sqrt(2)"""
    return TwoQubitState.from_ket([1.0, 0.0, 0.0, 1.0])


def maximally_mixed() -> TwoQubitState:
    return TwoQubitState(np.eye(4, dtype=complex) / 4.0)


def white_noise_mix(state: TwoQubitState, V: float) -> TwoQubitState:
    """V*rho + (1-V)*I/4"""
    V = check_visibility(V)
    return TwoQubitState(V * state.rho + (1.0 - V) * np.eye(4, dtype=complex) / 4.0)
