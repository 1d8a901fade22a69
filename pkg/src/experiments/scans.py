# src/experiments/scans.py
"""
Entanglement visibility scans.

'equatorial': both analyzers project on x and Bob's interferometer phase is
swept. 'xz': Bob projects on |e>/|l> and Alice's basis is swept along the x-z
great circle. The same-outcome coincidences N++ + N-- are fitted with
A(1 + V cos(phi + phi0)).
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import curve_fit

from src.core.data_model import CoincidenceCounts
from src.core.errors import DomainError, NumericError
from src.qstate.states import AXIS_X, AXIS_Z, BlochSetting

logger = logging.getLogger(__name__)

SCAN_MODES = ('equatorial', 'xz')
MIN_SCAN_POINTS = 5
_SPAN_TOL = 1e-9


@dataclass
class FringeFit:
    visibility: float
    phase_offset: float
    amplitude: float
    residual: float


@dataclass
class FringeScan:
    mode: str
    phases: List[float] = field(default_factory=list)
    counts: List[CoincidenceCounts] = field(default_factory=list)
    integration_s: float = 0.0
    visibility: float = float('nan')
    phase_offset: float = float('nan')
    residual: float = float('nan')

    def same_outcome_counts(self) -> np.ndarray:
        return np.array([c.n_pp + c.n_mm for c in self.counts], dtype=float)


def scan_phases(points: int) -> np.ndarray:
    """`points` phases covering [0, 2 pi] inclusive."""
    return np.linspace(0.0, 2.0 * np.pi, int(points))


def check_scan_phases(phases: Sequence[float]) -> np.ndarray:
    phases = np.asarray(phases, dtype=float)
    if phases.size < MIN_SCAN_POINTS:
        raise DomainError(f"A visibility scan needs at least {MIN_SCAN_POINTS} points, got {phases.size}")
    if np.ptp(phases) < 2.0 * np.pi - _SPAN_TOL:
        raise DomainError(f"Scan phases must span 2 pi, got {np.ptp(phases):.4f} rad")
    return phases


def _fringe(phi, amplitude, visibility, offset):
    return amplitude * (1.0 + visibility * np.cos(phi + offset))


def fit_fringe(phases: Sequence[float], counts: Sequence[float], weighted: bool = False) -> FringeFit:
    """
    Linear least squares on A + B cos(phi) + C sin(phi); falls back to a
    bounded nonlinear fit when the linear solution leaves V outside [0, 1].
    Poisson weights 1/max(N, 1) when `weighted`.
    """
    phi = check_scan_phases(phases)
    y = np.asarray(counts, dtype=float)
    if y.shape != phi.shape:
        raise DomainError("Scan phases and counts differ in length")
    sigma = np.sqrt(np.maximum(y, 1.0)) if weighted else np.ones_like(y)

    design = np.column_stack([np.ones_like(phi), np.cos(phi), np.sin(phi)])
    coef, *_ = np.linalg.lstsq(design / sigma[:, None], y / sigma, rcond=None)
    a, b, c = coef
    visibility = float(np.hypot(b, c) / a) if a > 0 else np.inf
    offset = float(np.arctan2(-c, b))
    amplitude = float(a)

    if not 0.0 <= visibility <= 1.0:
        logger.debug(f"Linear fringe fit gave V = {visibility}; refining with bounds")
        p0 = [max(float(np.mean(y)), 1e-9), min(max(visibility, 0.0), 1.0) if np.isfinite(visibility) else 0.5, offset]
        try:
            popt, _ = curve_fit(_fringe, phi, y, p0=p0, sigma=sigma, absolute_sigma=weighted,
                                bounds=([0.0, 0.0, -2 * np.pi], [np.inf, 1.0, 2 * np.pi]), maxfev=10_000)
        except (RuntimeError, ValueError) as e:
            raise NumericError(f"Fringe fit did not converge: {e}",
                               {'phases': phi.tolist(), 'counts': y.tolist(), 'linear_coefficients': coef.tolist()})
        amplitude, visibility, offset = (float(v) for v in popt)

    residual = float(np.sqrt(np.mean((y - _fringe(phi, amplitude, visibility, offset)) ** 2)))
    if not np.isfinite(residual):
        raise NumericError("Fringe fit produced a non-finite residual", {'counts': y.tolist()})
    offset = float(np.angle(np.exp(1j * offset)))
    return FringeFit(visibility, offset, amplitude, residual)


def run_visibility_scan(ctx, phases: Sequence[float], mode: str = 'equatorial',
                        fixed_setting: Optional[BlochSetting] = None, integration_s: Optional[float] = None,
                        weighted: Optional[bool] = None) -> FringeScan:
    """Simulated counts at every scan phase, then the fringe fit."""
    if mode not in SCAN_MODES:
        raise DomainError(f"Scan mode must be one of {SCAN_MODES}, got {mode!r}")
    phi = check_scan_phases(phases)
    opts = ctx.config.experiment
    integration_s = opts.scan_duration_s if integration_s is None else integration_s
    weighted = opts.weighted_fit if weighted is None else weighted
    scan = FringeScan(mode, phi.tolist(), [], integration_s)

    for k, p in enumerate(phi):
        if mode == 'equatorial':
            fixed = fixed_setting or AXIS_X
            m = ctx.measure(fixed, fixed, integration_s, label=f"scan-{mode}-{k}", bob_phase=ctx.bob.phase + p)
        else:
            fixed = fixed_setting or AXIS_Z
            a = BlochSetting.from_vector((np.sin(p), 0.0, np.cos(p)))
            m = ctx.measure(a, fixed, integration_s, label=f"scan-{mode}-{k}")
        scan.counts.append(m.counts)

    fit = fit_fringe(phi, scan.same_outcome_counts(), weighted=weighted)
    scan.visibility, scan.phase_offset, scan.residual = fit.visibility, fit.phase_offset, fit.residual
    logger.info(f"{mode} scan: V = {fit.visibility:.4f}, phi0 = {fit.phase_offset:.3f} rad")
    return scan
