import argparse
import asyncio
import signal
import sys
from typing import Optional, Sequence

from .config import Config
from .errors import ConfigError, NumericalError, ToolkitError
from .harness import ExperimentService, ScenarioConfig, run_scenario
from .reporting import ProgressReporter
from .utils.logger import setup_logger

COMMANDS = {
    "estimate": "estimation_sweep",
    "regret": "regret",
    "lower-bound": "lower_bound",
    "actuator": "actuator_demo",
    "bode": "bode",
}


class GracefulExit(SystemExit):
    code = 130


def raise_graceful_exit(signum, frame):
    raise GracefulExit()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m src",
        description="Spectral-line excitation, system identification and LQR exploration experiments",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    for command, scenario in COMMANDS.items():
        sub = subparsers.add_parser(command, help=f"run the {scenario} scenario")
        sub.add_argument("--config", required=True, help="path to the YAML scenario file")
        sub.add_argument("--seed", type=int, default=None, help="master seed (overrides the file)")
        sub.add_argument("--out", default=None, help="output CSV path (overrides the file)")
        sub.add_argument("--workers", type=int, default=None, help="concurrent replications (overrides the file)")
        sub.add_argument("--verbose", action="store_true", help="log every epoch at INFO")

    return parser


def load_scenario(args: argparse.Namespace) -> ScenarioConfig:
    config = Config(args.config)
    scenario = ScenarioConfig.from_config(config, seed=args.seed, output=args.out, workers=args.workers)

    expected = COMMANDS[args.command]
    if scenario.scenario != expected:
        raise ConfigError(
            f"Command '{args.command}' runs scenario '{expected}', but the config declares '{scenario.scenario}'",
            field="scenario",
        )
    return scenario


async def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    try:
        scenario = load_scenario(args)
    except ConfigError as e:
        logger = setup_logger(name="spectral-lines")
        logger.error(f"Invalid configuration: {e}")
        return ConfigError.exit_code

    logger = setup_logger(name="spectral-lines", level=scenario.logging.level, log_file=scenario.logging.file)
    logger.info(f"Running '{args.command}' (seed={scenario.seed}, workers={scenario.workers})")

    reporter = ProgressReporter(verbose=args.verbose)
    service = ExperimentService(workers=scenario.workers, reporter=reporter)

    try:
        outputs = await run_scenario(scenario, service)
    except ConfigError as e:
        logger.error(f"Invalid configuration: {e}")
        return ConfigError.exit_code
    except NumericalError as e:
        logger.error(f"Numerical failure: {e}", exc_info=True)
        return NumericalError.exit_code
    except (GracefulExit, KeyboardInterrupt):
        logger.info("Interrupted, partial results discarded")
        return GracefulExit.code
    except ToolkitError as e:
        logger.error(f"Run failed: {e}", exc_info=True)
        return e.exit_code
    except Exception as e:
        logger.error(f"Fatal error: {e}", exc_info=True)
        return 1

    logger.info(f"Wrote {', '.join(str(path) for path in outputs)}")
    return 0


def cli(argv: Optional[Sequence[str]] = None) -> int:
    signal.signal(signal.SIGTERM, raise_graceful_exit)
    return asyncio.run(main(argv))


if __name__ == "__main__":
    sys.exit(cli())
