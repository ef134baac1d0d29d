import argparse
import logging
import os
import sys
from measuretherm import utils
from measuretherm.exceptions import ConfigurationError
from measuretherm.runner import run_scenario, selftest
from measuretherm.scenario import Scenario
from measuretherm.scenario_config import DEFAULT_SEED, read_config

EXIT_CONFIGURATION_ERROR = 2


def build_parser():
    parser = argparse.ArgumentParser(prog="measuretherm",
                                     description="A tool for running reproducible measurement-thermodynamics "
                                                 "experiments: selective measurement, superselection decoherence, "
                                                 "the one-time Poisson ensemble, entropy transfer and the quantum "
                                                 "Jarzynski equality with event readings")
    parser.add_argument("-v", "--verbose", required=False, default=False, action="store_true",
                        help="Log at DEBUG level (same as MEASURETHERM_LOG_LEVEL=DEBUG)")
    parser.add_argument("-p", "--progress", required=False, default=False, action="store_true",
                        help="Show progress bars for long sweeps")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run the scenario described by a configuration file")
    run.add_argument("config", type=str,
                     help="Path of an INI configuration document whose [scenario] section names one of: " +
                          str(Scenario.list()))
    run.add_argument("--seed", required=False, type=int, default=None,
                     help="Master seed overriding the one in the configuration (unsigned 64-bit integer)")
    run.add_argument("--out", required=False, type=str, default=None,
                     help="Output directory overriding the one in the configuration "
                          "(default=measuretherm-<scenario>)")

    commands.add_parser("list-scenarios", help="List the scenarios that can be run")

    selftest = commands.add_parser("selftest", help="Run the full pipeline repeatedly and check that every run "
                                                    "passes and produces byte-identical outputs")
    selftest.add_argument("--seed", required=False, type=int, default=DEFAULT_SEED,
                          help=f"Master seed (default={DEFAULT_SEED})")
    selftest.add_argument("--repeat", required=False, type=int, default=2,
                          help="Number of full-pipeline runs to compare (default=2)")
    selftest.add_argument("--out", required=False, type=str, default=None,
                          help="Keep the run directories under this path instead of a temporary directory")
    return parser


def main(argv=None):
    parser = build_parser()
    arguments = parser.parse_args(argv)
    if arguments.verbose:
        utils.set_log_level(logging.DEBUG)
    if arguments.command == "list-scenarios":
        for scenario in Scenario.list():
            print(scenario)
        return 0
    try:
        if arguments.command == "selftest":
            return selftest(arguments.seed, arguments.repeat, arguments.out, progress=arguments.progress)
        if not os.path.exists(arguments.config):
            parser.error("The file '{}' does not exist".format(arguments.config))
        config = read_config(arguments.config).with_overrides(seed=arguments.seed, output_path=arguments.out)
    except ConfigurationError as error:
        print(f"{parser.prog}: configuration error: {error}", file=sys.stderr)
        return EXIT_CONFIGURATION_ERROR
    try:
        return run_scenario(config, progress=arguments.progress)
    except ConfigurationError as error:
        print(f"{parser.prog}: configuration error: {error}", file=sys.stderr)
        return EXIT_CONFIGURATION_ERROR


if __name__ == "__main__":
    sys.exit(main())
