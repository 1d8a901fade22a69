# src/cli/main_cli.py
import argparse
import logging
import sys
from typing import Optional, Sequence

from src import __version__
from src.cli.commands import cmd_analytic, cmd_calibrate, cmd_chsh, cmd_events, cmd_visibility
from src.core.config_manager import load_config
from src.core.errors import ConfigError, SimulatorError

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', metavar='PATH', help="scenario file (a bare name is looked up in config/)")
    common.add_argument('--seed', type=int, help="override [source] seed")
    common.add_argument('--out', metavar='DIR', help="override [output] out_dir")
    common.add_argument('--set', dest='overrides', action='append', default=[], metavar='SECTION.KEY=VALUE',
                        help="override one configuration value (repeatable)")
    common.add_argument('-v', '--verbose', action='count', default=0, help="-v for info, -vv for debug")

    parser = argparse.ArgumentParser(prog='timebin-chsh',
                                     description="Time-bin entanglement CHSH experiment simulator")
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest='command', required=True)

    sub.add_parser('analytic', parents=[common], help="Born-rule S for every configuration")
    sub.add_parser('chsh', parents=[common], help="Monte Carlo CHSH test")
    visibility = sub.add_parser('visibility', parents=[common], help="fringe scans and fitted visibility")
    visibility.add_argument('--mode', choices=('equatorial', 'xz', 'both'),
                            help="override [experiment] scan_mode")
    sub.add_parser('calibrate', parents=[common], help="calibrate Bob's interferometer phase")
    events = sub.add_parser('events', parents=[common], help="write a raw detection record stream")
    events.add_argument('--configuration', type=int, choices=(1, 2, 3, 4), default=1)
    events.add_argument('--pair', default='11', choices=('11', '12', '21', '22'),
                        help="Alice and Bob basis indices")
    events.add_argument('--duration', type=float, help="seconds; default [experiment] scan_duration_s")
    return parser


def setup_logging(verbosity: int):
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format='%(levelname)s: %(message)s', force=True)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    try:
        config = load_config(args.config, args.overrides, seed=args.seed, out_dir=args.out)
        if args.command == 'analytic':
            cmd_analytic(config)
        elif args.command == 'chsh':
            cmd_chsh(config)
        elif args.command == 'visibility':
            cmd_visibility(config, args.mode)
        elif args.command == 'calibrate':
            cmd_calibrate(config)
        elif args.command == 'events':
            cmd_events(config, args.configuration, int(args.pair[0]), int(args.pair[1]), args.duration)
    except ConfigError as e:
        for message in e.messages:
            logger.error(message)
        return e.exit_code
    except SimulatorError as e:
        logger.error(str(e))
        for key, value in getattr(e, 'diagnostics', {}).items():
            logger.info(f"  {key} = {value}")
        return e.exit_code
    return 0


if __name__ == '__main__':
    sys.exit(main())
