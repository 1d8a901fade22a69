# src/experiments/__init__.py
from src.experiments.calibration import calibrate_phase
from src.experiments.chsh_run import ChshResult, run_all_configurations, run_chsh
from src.experiments.configurations import SettingsQuad, config_settings
from src.experiments.context import SimulationContext
from src.experiments.estimators import (REFERENCE_RESULTS, CorrEstimate, SEstimate, estimate_E, estimate_S,
                                        predicted_S_range)
from src.experiments.scans import FringeScan, fit_fringe, run_visibility_scan
