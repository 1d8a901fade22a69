# src/cli/commands.py
"""
The five batch commands. Each takes a resolved ExperimentConfig, writes its
artifacts under config.output.out_dir and finishes by writing the manifest.
"""
import logging
import os
import time
from typing import Dict, List, Optional

import pandas as pd

from src import __version__
from src.core.data_model import ExperimentConfig, RunManifest
from src.experiments.calibration import calibrate_phase
from src.experiments.chsh_run import run_all_configurations
from src.experiments.configurations import GREAT_CIRCLES, config_settings
from src.experiments.context import Measurement, SimulationContext
from src.experiments.estimators import estimate_E, reference_for
from src.experiments.scans import run_visibility_scan, scan_phases
from src.persistence.file_handler import ensure_dir, write_csv, write_events, write_manifest, write_text_atomic
from src.persistence.serializer import chsh_to_frame, format_summary, scan_to_frame
from src.qstate.chsh import LOCAL_BOUND, horodecki_max, violates_local_bound
from src.qstate.measurement import correlation_tensor
from src.qstate.states import phi_plus, white_noise_mix

logger = logging.getLogger(__name__)

COUNT_COLUMNS = ['label', 'n_pp', 'n_pm', 'n_mp', 'n_mm']


class _Run:
    """ Collects a command's outputs and writes the manifest once all of them exist. """

    def __init__(self, command: str, config: ExperimentConfig):
        self.command = command
        self.config = config
        self.out_dir = ensure_dir(config.output.out_dir)
        self.outputs: List[str] = []
        self.results: Dict[str, float] = {}
        self.started = time.perf_counter()

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def add(self, *paths: str):
        self.outputs.extend(paths)

    def finish(self, summary: Dict[str, object]) -> RunManifest:
        self.add(write_text_atomic(self.path(f"{self.command}_summary.txt"),
                                   format_summary(summary, f"{self.command} / {self.config.scenario}")))
        manifest = RunManifest(self.command, self.config.scenario, self.config.config_hash,
                               self.config.source.seed, __version__,
                               round(time.perf_counter() - self.started, 3), list(self.outputs),
                               {k: v for k, v in summary.items() if isinstance(v, (int, float))})
        write_manifest(self.out_dir, manifest)
        return manifest


def _vector(setting) -> str:
    return "(" + ", ".join(f"{c:+.4f}" for c in setting.vector) + ")"


def cmd_analytic(config: ExperimentConfig) -> RunManifest:
    """Born-rule S for each configuration on the configured Werner state. No simulation."""
    run = _Run('analytic', config)
    V = config.source.visibility
    state = white_noise_mix(phi_plus(), V)
    tensor = correlation_tensor(state)
    summary: Dict[str, object] = {'visibility': V}

    print(f"Werner state, V = {V:g}")
    for configuration in config.experiment.configurations:
        quad = config_settings(configuration, tensor)
        S = quad.analytic_S(state)
        summary[f"S_config{configuration}"] = S
        print(f"Configuration {configuration} ({GREAT_CIRCLES[configuration]}): S = {S:.4f}"
              f"{'' if violates_local_bound(S) else '  (no violation)'}")
        print(f"    a1 = {_vector(quad.a1)}  a2 = {_vector(quad.a2)}")
        print(f"    b1 = {_vector(quad.b1)}  b2 = {_vector(quad.b2)}")
    bound = horodecki_max(tensor)
    summary['horodecki_max'] = bound
    summary['violation'] = str(violates_local_bound(bound)).lower()
    print(f"Horodecki maximum: {bound:.4f} (local bound {LOCAL_BOUND:g})")
    return run.finish(summary)


def _event_dumper(run: _Run, rows: list):
    events_dir = ensure_dir(run.path('events'))

    def dump(measurement: Measurement):
        run.add(*write_events(os.path.join(events_dir, measurement.label), measurement.stream,
                              run.config.output.events_format))
        c = measurement.counts
        rows.append([measurement.label, c.n_pp, c.n_pm, c.n_mp, c.n_mm])
    return dump


def cmd_chsh(config: ExperimentConfig) -> RunManifest:
    """Monte Carlo CHSH test for every configured configuration."""
    run = _Run('chsh', config)
    dumped: list = []
    ctx = SimulationContext(config, _event_dumper(run, dumped) if config.output.dump_events else None)
    results = run_all_configurations(ctx)

    run.add(write_csv(run.path('chsh.csv'), chsh_to_frame(results)))
    if dumped:
        run.add(write_csv(run.path('event_counts.csv'), pd.DataFrame(dumped, columns=COUNT_COLUMNS)))

    reference = reference_for(config.experiment.remote)
    summary: Dict[str, object] = {'duration_per_configuration_s': config.experiment.duration_per_configuration_s,
                                  'reference': reference.label,
                                  'expected_S_low': reference.expected_range[0],
                                  'expected_S_high': reference.expected_range[1]}
    for result in results:
        c = result.configuration
        summary[f"S_config{c}"] = result.s.S
        summary[f"sigma_S_config{c}"] = result.s.sigma
        summary[f"significance_config{c}"] = result.s.significance
        summary[f"analytic_S_config{c}"] = result.analytic_S
        summary[f"phase_S_config{c}"] = result.phase_S
        summary[f"bob_phase_config{c}"] = result.bob_phase
        row = reference.row(c)
        summary[f"reference_S_config{c}"] = f"{row.S:.2f} +- {row.sigma:.2f} ({row.significance:g} sigma)"
        print(f"Configuration {c}: S = {result.s.S:.3f} +- {result.s.sigma:.3f} "
              f"({result.s.significance:.1f} sigma); reference {row.S:.2f} +- {row.sigma:.2f}")
    return run.finish(summary)


def cmd_visibility(config: ExperimentConfig, mode: Optional[str] = None) -> RunManifest:
    """Fringe scans with fitted visibility; one CSV per scan mode."""
    run = _Run('visibility', config)
    mode = mode or config.experiment.scan_mode
    modes = ('equatorial', 'xz') if mode == 'both' else (mode,)
    ctx = SimulationContext(config)
    phases = scan_phases(config.experiment.scan_points)
    reference = reference_for(config.experiment.remote)

    summary: Dict[str, object] = {'scan_points': len(phases), 'integration_s': config.experiment.scan_duration_s}
    for scan_mode in modes:
        scan = run_visibility_scan(ctx, phases, scan_mode)
        run.add(write_csv(run.path(f"visibility_{scan_mode}.csv"), scan_to_frame(scan)))
        ref_V, ref_sigma = reference.visibilities[scan_mode]
        summary[f"V_{scan_mode}"] = scan.visibility
        summary[f"phi0_{scan_mode}"] = scan.phase_offset
        summary[f"residual_{scan_mode}"] = scan.residual
        summary[f"reference_V_{scan_mode}"] = f"{ref_V:.3f} +- {ref_sigma:.3f}"
        print(f"{scan_mode} scan: V = {scan.visibility:.4f}, phi0 = {scan.phase_offset:+.3f} rad "
              f"(reference {ref_V:.3f} +- {ref_sigma:.3f})")
    return run.finish(summary)


def cmd_calibrate(config: ExperimentConfig) -> RunManifest:
    """Bob's interferometer phase from coincidence data alone."""
    run = _Run('calibrate', config)
    ctx = SimulationContext(config)
    opts = config.experiment
    initial = ctx.bob.phase
    phase = calibrate_phase(ctx, opts.target_visibility, opts.calibration_tolerance)
    summary = {'initial_bob_phase_rad': initial, 'bob_phase_rad': phase,
               'target_visibility': opts.target_visibility, 'measurements': ctx.runs_used}
    print(f"Bob phase calibrated: {phase:+.4f} rad (started at {initial:+.4f} rad)")
    return run.finish(summary)


def cmd_events(config: ExperimentConfig, configuration: int = 1, i: int = 1, j: int = 1,
               duration_s: Optional[float] = None) -> RunManifest:
    """
    Raw record stream of one setting pair, at the configured interferometer
    phases, for external analysis. The summary holds the in-process counts.
    """
    run = _Run('events', config)
    ctx = SimulationContext(config)
    duration_s = config.experiment.scan_duration_s if duration_s is None else duration_s
    a, b = config_settings(configuration, ctx.tensor).pair(i, j)
    m = ctx.measure(a, b, duration_s, label=f"events-config{configuration}-{i}{j}")
    run.add(*write_events(run.path(m.label), m.stream, config.output.events_format))

    c = m.counts
    summary: Dict[str, object] = {'records': len(m.stream), 'duration_s': duration_s,
                                  'n_pp': c.n_pp, 'n_pm': c.n_pm, 'n_mp': c.n_mp, 'n_mm': c.n_mm}
    if c.total:
        summary['E'] = estimate_E(c).E
    print(f"{len(m.stream)} records written, {c.total} coincidences")
    return run.finish(summary)
