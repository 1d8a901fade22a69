# src/experiments/chsh_run.py
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from src.experiments.calibration import calibrate_phase
from src.experiments.configurations import SettingsQuad, check_configuration_id, config_settings
from src.experiments.estimators import CorrEstimate, SEstimate, estimate_E, estimate_S

logger = logging.getLogger(__name__)

SETTING_PAIRS = ((1, 1), (1, 2), (2, 1), (2, 2))
CHSH_SIGNS = (1, 1, 1, -1)


@dataclass
class ChshResult:
    configuration: int
    settings: SettingsQuad
    estimates: Dict[Tuple[int, int], CorrEstimate]
    s: SEstimate
    analytic_S: float
    # Born-rule S at the interferometer phases in use, without detector effects
    phase_S: float
    bob_phase: float
    runs: Dict[Tuple[int, int], int] = field(default_factory=dict)


def run_chsh(ctx, configuration: int, duration_s: Optional[float] = None,
             calibrate: Optional[bool] = None) -> ChshResult:
    """
    One CHSH measurement: (re)calibrate Bob's phase, then split `duration_s`
    evenly over the four setting pairs.
    """
    configuration = check_configuration_id(configuration)
    opts = ctx.config.experiment
    duration_s = opts.duration_per_configuration_s if duration_s is None else duration_s
    calibrate = opts.calibrate if calibrate is None else calibrate
    if calibrate:
        calibrate_phase(ctx, opts.target_visibility, opts.calibration_tolerance)

    quad = config_settings(configuration, ctx.tensor)
    per_pair = duration_s / len(SETTING_PAIRS)
    estimates, runs = {}, {}
    for i, j in SETTING_PAIRS:
        a, b = quad.pair(i, j)
        m = ctx.measure(a, b, per_pair, label=f"config{configuration}-{i}{j}")
        estimates[(i, j)] = estimate_E(m.counts, multinomial=opts.multinomial_sigma)
        runs[(i, j)] = m.run

    s = estimate_S(*(estimates[p] for p in SETTING_PAIRS), duration_s=duration_s)
    analytic = quad.analytic_S(ctx.state)
    phase_S = abs(sum(sign * ctx.oracle_correlation(*quad.pair(i, j))
                      for sign, (i, j) in zip(CHSH_SIGNS, SETTING_PAIRS)))
    logger.info(f"Configuration {configuration}: S = {s.S:.3f} +- {s.sigma:.3f} "
                f"({s.significance:.1f} sigma), analytic {analytic:.4f}, at current phases {phase_S:.4f}")
    return ChshResult(configuration, quad, estimates, s, analytic, phase_S, ctx.bob.phase, runs)


def run_all_configurations(ctx, configurations=None, duration_s: Optional[float] = None) -> List[ChshResult]:
    configurations = configurations or ctx.config.experiment.configurations
    return [run_chsh(ctx, c, duration_s) for c in configurations]
