# src/experiments/calibration.py
"""
Sets Bob's interferometer phase from coincidence data alone.

With the configuration-1 bases a1 = x, b1 and b2, a residual phase sum
Phi = phi_A + phi_B gives E11 = V cos(Phi + pi/4) and E12 = V cos(Phi - pi/4),
so Phi = atan2(E12 - E11, E11 + E12). E11 alone is ambiguous (Phi = -pi/2
also gives V/sqrt(2)), so every step measures both correlations. Bob's phase
is corrected by -Phi until the residual is within the phase tolerance and E11
is consistent with the visibility measured beforehand (V/sqrt(2)).
"""
import logging
from typing import Optional

import numpy as np

from src.core.errors import CalibrationError
from src.experiments.configurations import config_settings
from src.experiments.estimators import estimate_E
from src.utils.helpers import wrap_phase

logger = logging.getLogger(__name__)


def calibrate_phase(ctx, target_V: float, tolerance: float, max_iter: Optional[int] = None,
                    duration_s: Optional[float] = None, phase_tolerance: Optional[float] = None) -> float:
    """
    Adjusts ctx's Bob phase in place and returns it. Raises CalibrationError
    when E11 does not come within `tolerance` of target_V/sqrt(2) with a
    residual phase sum below `phase_tolerance` (radians).
    """
    opts = ctx.config.experiment
    max_iter = opts.calibration_max_iter if max_iter is None else max_iter
    duration_s = opts.calibration_duration_s if duration_s is None else duration_s
    phase_tolerance = opts.calibration_phase_tolerance if phase_tolerance is None else phase_tolerance
    target = target_V / np.sqrt(2.0)
    quad = config_settings(1, ctx.tensor)

    e11 = residual = float('nan')
    for iteration in range(1, max_iter + 1):
        e11 = estimate_E(ctx.measure(quad.a1, quad.b1, duration_s, label=f"calibration-{iteration}-11").counts).E
        e12 = estimate_E(ctx.measure(quad.a1, quad.b2, duration_s, label=f"calibration-{iteration}-12").counts).E
        residual = float(np.arctan2(e12 - e11, e11 + e12))
        if abs(residual) <= phase_tolerance and abs(e11 - target) <= tolerance:
            logger.info(f"Phase calibrated after {iteration} step(s): phi_B = {ctx.bob.phase:.4f} rad, "
                        f"E11 = {e11:.4f} (target {target:.4f}), residual {residual:+.4f} rad")
            return ctx.bob.phase
        ctx.set_bob_phase(wrap_phase(ctx.bob.phase - residual))
        logger.debug(f"Calibration step {iteration}: E11 = {e11:.4f}, E12 = {e12:.4f}, "
                     f"residual phase {residual:.4f} rad, phi_B -> {ctx.bob.phase:.4f}")

    raise CalibrationError(
        f"Phase calibration did not converge in {max_iter} iterations (E11 = {e11:.4f}, target {target:.4f}, "
        f"residual {residual:+.4f} rad)",
        {'target_E11': target, 'last_E11': e11, 'last_residual_rad': residual, 'bob_phase': ctx.bob.phase,
         'iterations': max_iter})
