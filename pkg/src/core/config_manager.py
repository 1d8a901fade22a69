# src/core/config_manager.py
import configparser
import hashlib
import logging
import math
import os
import re
import sys
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from src.core.data_model import (ChannelConfig, CoincidenceOptions, DetectorConfig, DetectorSet,
                                 ExperimentConfig, ExperimentOptions, OutputOptions, SimulationOptions,
                                 SourceConfig)
from src.core.errors import ConfigError, DomainError
from src.montecarlo.simulator import run_problems
from src.optics.utba import AnalyzerConfig
from src.utils.helpers import resource_path

logger = logging.getLogger(__name__)

DETECTOR_SECTIONS = ('detector.S1', 'detector.S2', 'detector.I1', 'detector.I2')
SCAN_MODE_CHOICES = ('equatorial', 'xz', 'both')
EVENT_FORMAT_CHOICES = ('csv', 'binary', 'both')
AUTO = 'auto'
DEFAULT_CONFIG_FILENAME = 'settings.ini'

_SILICON = {
    'kind': 'free_running',
    'efficiency': '0.5',
    'dark_rate_hz': '300',
    'dark_prob_per_gate': '0',
    'dead_time_ns': '50',
    'gate_width_ns': '7',
}
_INGAAS = {
    'kind': 'gated',
    'efficiency': '0.15',
    'dark_rate_hz': '0',
    'dark_prob_per_gate': '1e-4',
    'dead_time_ns': '10000',
    'gate_width_ns': '7',
}

# Default configuration values. Every key a scenario file may set appears here.
DEFAULT_CONFIG = {
    'scenario': {
        'name': 'default',
        'description': '',
    },
    'source': {
        'rep_rate_hz': '2e7',
        'pair_prob_per_pulse': '1e-3',
        'visibility': '1.0',
        'seed': '0',
    },
    'channel': {
        'loss_db': '0',
        'alice_loss_db': '0',
        'duty_cycle': '0.96',
        'misalignment_drift_rad_per_s': '0',
        'cycle_s': '10',
    },
    'alice': {
        'phase_rad': '0',
        'tau_ns': '1.4',
        'insertion_loss_db': '0',
    },
    'bob': {
        'phase_rad': '0',
        'tau_ns': '1.4',
        'insertion_loss_db': '0',
    },
    'detector.S1': dict(_SILICON),
    'detector.S2': dict(_SILICON),
    'detector.I1': dict(_INGAAS),
    'detector.I2': dict(_INGAAS),
    'simulation': {
        'jitter_ns': '0.1',
        'trigger_latency_ns': '0',
        'arrival_offset_ns': '2.0',
        'phase_noise_rad': '0',
        'phase_drift_bound_rad': '0',
        'phase_drift_window_s': '600',
        'batch_pulses': '20000000',
        'workers': '1',
    },
    'coincidence': {
        'window_ns': '0.6',
        'slot_offset_ns': AUTO,
        'require_ready': 'true',
    },
    'experiment': {
        'local_duration_s': '160',
        'remote_duration_s': '480',
        'remote': 'false',
        'configurations': '1, 2, 3, 4',
        'scan_points': '16',
        'scan_duration_s': '10',
        'scan_mode': 'both',
        'target_visibility': '0.91',
        'calibration_tolerance': '0.05',
        'calibration_phase_tolerance': '0.05',
        'calibration_duration_s': '20',
        'calibration_max_iter': '8',
        'calibrate': 'true',
        'weighted_fit': 'false',
        'multinomial_sigma': 'false',
    },
    'output': {
        'out_dir': 'results',
        'dump_events': 'false',
        'events_format': 'both',
    },
}


def get_base_path():
    """ Get base path for bundled executable or running script """
    if getattr(sys, 'frozen', False) and hasattr(sys, '_MEIPASS'):
        return os.path.dirname(sys.executable)
    # this file is in src/core, the project root is two levels up
    return os.path.abspath(os.path.join(os.path.dirname(__file__), "..", ".."))


def resolve_config_path(path: str) -> str:
    """
    A path as given if it exists, otherwise the file of that name under the
    project's config/ directory (so `--config lab.cfg` finds the bundled one).
    """
    if os.path.exists(path):
        return path
    candidates = [os.path.join(get_base_path(), 'config', path), resource_path(os.path.join('config', path))]
    for candidate in candidates:
        if os.path.exists(candidate):
            return candidate
    raise ConfigError(f"{path}: configuration file not found")


class _Origins:
    """ Remembers where each (section, key) got its value so errors can point at it. """

    def __init__(self):
        self._where: Dict[Tuple[str, str], str] = {}
        self._lines: Dict[str, List[str]] = {}

    def record_file(self, path: str, text: str, parser: configparser.ConfigParser):
        self._lines[path] = text.splitlines()
        for section in parser.sections():
            for key in parser[section]:
                self._where[(section, key)] = path

    def record_override(self, section: str, key: str, flag: str):
        self._where[(section, key)] = f"<{flag}>"

    def locate(self, section: str, key: Optional[str] = None) -> str:
        origin = self._where.get((section, key)) if key else None
        if origin is None:
            # fall back to the section header in whichever file defined it
            for path in self._lines:
                line = _find_line(self._lines[path], section, None)
                if line:
                    return f"{path}:{line}"
            return "<defaults>:0"
        if origin not in self._lines:
            return f"{origin}:0"
        return f"{origin}:{_find_line(self._lines[origin], section, key)}"


def _find_line(lines: Sequence[str], section: str, key: Optional[str]) -> int:
    """1-based line of `key` inside `[section]` (or of the header itself); 0 if absent."""
    current, header_line = None, 0
    key_pattern = re.compile(rf"^\s*{re.escape(key)}\s*[=:]", re.IGNORECASE) if key else None
    for number, line in enumerate(lines, start=1):
        header = re.match(r"^\s*\[([^\]]+)\]", line)
        if header:
            current = header.group(1).strip()
            if current == section:
                header_line = number
                if key is None:
                    return number
            continue
        if current == section and key_pattern and key_pattern.match(line):
            return number
    return header_line


def _format(origins: _Origins, section: str, key: Optional[str], message: str) -> str:
    where = origins.locate(section, key)
    return f"{where}: [{section}] {key}: {message}" if key else f"{where}: [{section}] {message}"


def _check_known(parser: configparser.ConfigParser, origins: _Origins, problems: List[str]):
    for section in parser.sections():
        if section not in DEFAULT_CONFIG:
            problems.append(_format(origins, section, None, "unknown section"))
            continue
        for key in parser[section]:
            if key not in DEFAULT_CONFIG[section]:
                problems.append(_format(origins, section, key, "unknown key"))


def _parse_override(item: str) -> Tuple[str, str, str]:
    target, sep, value = item.partition('=')
    section, dot, key = target.strip().rpartition('.')
    if not sep or not dot or not section or not key:
        raise ConfigError(f"--set expects section.key=value, got {item!r}")
    return section, key.lower(), value.strip()


def _to_int(text: str) -> int:
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        value = float(text)  # accepts '2e7'
        if not value.is_integer():
            raise
        return int(value)


def load_config(config_path: Optional[str] = None, overrides: Sequence[str] = (),
                seed: Optional[int] = None, out_dir: Optional[str] = None) -> ExperimentConfig:
    """
    Layers hard-coded defaults, the scenario file and command-line overrides,
    then validates everything at once. Raises ConfigError listing every
    problem as 'path:line: [section] key: message'.
    """
    config = configparser.ConfigParser(interpolation=None)
    config.read_dict(DEFAULT_CONFIG)
    origins = _Origins()
    problems: List[str] = []

    source_path = None
    if config_path is None:
        try:
            config_path = resolve_config_path(DEFAULT_CONFIG_FILENAME)
        except ConfigError:
            logger.warning(f"Config file {DEFAULT_CONFIG_FILENAME!r} not found in expected locations. Using defaults.")
    if config_path:
        source_path = resolve_config_path(config_path)
        try:
            with open(source_path, 'r', encoding='utf-8') as f:
                text = f.read()
        except OSError as e:
            raise ConfigError(f"{source_path}: could not read configuration: {e}") from e
        layer = configparser.ConfigParser(interpolation=None)
        try:
            layer.read_string(text, source=source_path)
        except configparser.Error as e:
            line = getattr(e, 'lineno', None) or (e.errors[0][0] if getattr(e, 'errors', None) else 0)
            raise ConfigError(f"{source_path}:{line}: {e.message.splitlines()[0]}") from e
        origins.record_file(source_path, text, layer)
        _check_known(layer, origins, problems)
        for section in layer.sections():
            if section in DEFAULT_CONFIG:
                for key, value in layer[section].items():
                    if key in DEFAULT_CONFIG[section]:
                        config.set(section, key, value)
        logger.info(f"Loading scenario from: {source_path}")

    for index, item in enumerate(overrides, start=1):
        section, key, value = _parse_override(item)
        origins.record_override(section, key, f"--set #{index}")
        if section not in DEFAULT_CONFIG:
            problems.append(_format(origins, section, None, "unknown section"))
        elif key not in DEFAULT_CONFIG[section]:
            problems.append(_format(origins, section, key, "unknown key"))
        else:
            config.set(section, key, value)
    if seed is not None:
        config.set('source', 'seed', str(seed))
        origins.record_override("source", "seed", "--seed")
    if out_dir is not None:
        config.set('output', 'out_dir', out_dir)
        origins.record_override("output", "out_dir", "--out")

    if problems:
        raise ConfigError(problems[0], problems)
    experiment = _build(config, origins, source_path)
    logger.debug(f"Configuration {experiment.scenario!r} resolved, hash {experiment.config_hash[:12]}")
    return experiment


class _Reader:
    """ Typed access to the merged parser; conversion failures become problems. """

    def __init__(self, config: configparser.ConfigParser, origins: _Origins):
        self.config = config
        self.origins = origins
        self.problems: List[str] = []
        self.resolved: Dict[str, Dict[str, object]] = {}

    def problem(self, section: str, key: str, message: str):
        self.problems.append(_format(self.origins, section, key, message))

    def _get(self, section: str, key: str, convert: Callable[[str], object], expected: str, default):
        raw = self.config.get(section, key)
        try:
            value = convert(raw)
        except ValueError:
            self.problem(section, key, f"expected {expected}, got {raw!r}")
            value = default
        self.resolved.setdefault(section, {})[key] = value
        return value

    def get_float(self, section: str, key: str) -> float:
        return self._get(section, key, float, 'a number', float(DEFAULT_CONFIG[section][key]))

    def get_int(self, section: str, key: str) -> int:
        return self._get(section, key, _to_int, "an integer", _to_int(DEFAULT_CONFIG[section][key]))

    def get_bool(self, section: str, key: str) -> bool:
        def convert(s):
            state = configparser.ConfigParser.BOOLEAN_STATES.get(s.strip().lower())
            if state is None:
                raise ValueError(s)
            return state
        return self._get(section, key, convert, 'true or false', False)

    def get_str(self, section: str, key: str, choices: Optional[Sequence[str]] = None) -> str:
        value = self._get(section, key, lambda s: s.strip(), 'text', '')
        if choices and value not in choices:
            self.problem(section, key, f"must be one of {', '.join(choices)}, got {value!r}")
        return value

    def get_optional_float(self, section: str, key: str) -> Optional[float]:
        return self._get(section, key, lambda s: None if s.strip().lower() == AUTO else float(s),
                         f"a number or '{AUTO}'", None)

    def get_int_list(self, section: str, key: str) -> Tuple[int, ...]:
        return self._get(section, key, lambda s: tuple(int(p) for p in s.replace(',', ' ').split()),
                         'a list of integers', (1, 2, 3, 4))


def _analyzer(reader: _Reader, section: str):
    phase = reader.get_float(section, 'phase_rad')
    tau = reader.get_float(section, 'tau_ns')
    loss = reader.get_float(section, 'insertion_loss_db')
    if not tau > 0:
        reader.problem(section, 'tau_ns', "must be > 0")
        tau = float(DEFAULT_CONFIG[section]['tau_ns'])
    if not loss >= 0:
        reader.problem(section, 'insertion_loss_db', "must be >= 0")
        loss = 0.0
    try:
        return AnalyzerConfig(phase, tau, loss)
    except DomainError as e:
        reader.problem(section, 'phase_rad', str(e))
        return AnalyzerConfig()


def _build(config: configparser.ConfigParser, origins: _Origins, source_path: Optional[str]) -> ExperimentConfig:
    r = _Reader(config, origins)
    source = SourceConfig(r.get_float('source', 'rep_rate_hz'), r.get_float('source', 'pair_prob_per_pulse'),
                          r.get_float('source', 'visibility'), r.get_int('source', 'seed'))
    channel = ChannelConfig(**{key: r.get_float('channel', key) for key in DEFAULT_CONFIG['channel']})
    alice, bob = _analyzer(r, 'alice'), _analyzer(r, 'bob')
    detectors = []
    for section in DETECTOR_SECTIONS:
        detectors.append(DetectorConfig(
            r.get_str(section, 'kind'), *(r.get_float(section, key) for key in
                                      ('efficiency', 'dark_rate_hz', 'dark_prob_per_gate', 'dead_time_ns',
                                       'gate_width_ns'))))
    detector_set = DetectorSet(*detectors)
    sim_floats = ('jitter_ns', 'trigger_latency_ns', 'arrival_offset_ns', 'phase_noise_rad',
                  'phase_drift_bound_rad', 'phase_drift_window_s')
    simulation = SimulationOptions(*(r.get_float('simulation', key) for key in sim_floats),
                                   r.get_int('simulation', 'batch_pulses'), r.get_int('simulation', 'workers'))
    coincidence = CoincidenceOptions(r.get_float('coincidence', 'window_ns'),
                                     r.get_optional_float('coincidence', 'slot_offset_ns'),
                                     r.get_bool('coincidence', 'require_ready'))
    experiment = ExperimentOptions(
        local_duration_s=r.get_float('experiment', 'local_duration_s'),
        remote_duration_s=r.get_float('experiment', 'remote_duration_s'),
        remote=r.get_bool('experiment', 'remote'),
        configurations=r.get_int_list('experiment', 'configurations'),
        scan_points=r.get_int('experiment', 'scan_points'),
        scan_duration_s=r.get_float('experiment', 'scan_duration_s'),
        scan_mode=r.get_str('experiment', 'scan_mode', SCAN_MODE_CHOICES),
        target_visibility=r.get_float('experiment', 'target_visibility'),
        calibration_tolerance=r.get_float('experiment', 'calibration_tolerance'),
        calibration_phase_tolerance=r.get_float('experiment', 'calibration_phase_tolerance'),
        calibration_duration_s=r.get_float('experiment', 'calibration_duration_s'),
        calibration_max_iter=r.get_int('experiment', 'calibration_max_iter'),
        calibrate=r.get_bool('experiment', 'calibrate'),
        weighted_fit=r.get_bool('experiment', 'weighted_fit'),
        multinomial_sigma=r.get_bool('experiment', 'multinomial_sigma'),
    )
    output = OutputOptions(r.get_str('output', 'out_dir'), r.get_bool('output', 'dump_events'),
                           r.get_str('output', 'events_format', EVENT_FORMAT_CHOICES))
    scenario = r.get_str('scenario', 'name')
    description = r.get_str('scenario', 'description')

    # values that failed to parse fell back to defaults; report those first
    if r.problems:
        raise ConfigError(r.problems[0], r.problems)

    for section, key, message in run_problems(source, detector_set, channel, simulation):
        r.problem(section, key, message)
    _check_cross_section(r, alice, bob, coincidence, experiment)
    if r.problems:
        raise ConfigError(r.problems[0], r.problems)

    return ExperimentConfig(scenario, description, source, channel, alice, bob, detector_set, simulation,
                            coincidence, experiment, output, config_hash(r.resolved), source_path)


def _check_cross_section(r: _Reader, alice, bob, coincidence: CoincidenceOptions, experiment: ExperimentOptions):
    if abs(alice.tau_ns - bob.tau_ns) > 1e-12:
        r.problem('bob', 'tau_ns', f"must equal Alice's delay ({alice.tau_ns} ns) for the middle slots to interfere")
    if not 0.0 < coincidence.window_ns < alice.tau_ns:
        r.problem('coincidence', 'window_ns', f"must lie in (0, tau = {alice.tau_ns} ns)")
    for key in ('local_duration_s', 'remote_duration_s', 'scan_duration_s', 'calibration_duration_s'):
        if not getattr(experiment, key) > 0:
            r.problem('experiment', key, "must be > 0")
    bad = [c for c in experiment.configurations if c not in (1, 2, 3, 4)]
    if bad or not experiment.configurations:
        r.problem('experiment', 'configurations', "must list configuration ids from 1 to 4")
    if experiment.scan_points < 5:
        r.problem('experiment', 'scan_points', "a fringe fit needs at least 5 points")
    if not 0.0 <= experiment.target_visibility <= 1.0:
        r.problem('experiment', 'target_visibility', "must lie in [0, 1]")
    if not experiment.calibration_tolerance > 0:
        r.problem('experiment', 'calibration_tolerance', "must be > 0")
    if not 0.0 < experiment.calibration_phase_tolerance < math.pi:
        r.problem('experiment', 'calibration_phase_tolerance', "must lie in (0, pi) radians")
    if experiment.calibration_max_iter < 1:
        r.problem('experiment', 'calibration_max_iter', "must be >= 1")


def config_hash(resolved: Dict[str, Dict[str, object]]) -> str:
    """SHA-256 of the sorted 'section.key=value' lines of the typed configuration."""
    lines = sorted(f"{section}.{key}={value!r}" for section, values in resolved.items()
                   for key, value in values.items())
    return hashlib.sha256("\n".join(lines).encode('utf-8')).hexdigest()
