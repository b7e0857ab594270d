import timing_logger
from timing_logger import log as tlog

import argparse
from dataclasses import dataclass
from typing import Optional, List, Dict, Any
from common.imports import os, sys, logging, Path, time, yaml, traceback, threadpool_limits
from common.project_imports import (
    configure_logging, ResultsStore, read_row, run_experiment, EXPERIMENTS, list_experiments, resolve_n_jobs,
)
from constants import EXIT_OK, EXIT_CONTRACT_VIOLATION, EXIT_USAGE, ENV_THREADS
from exceptions import ConfigError, ReplayError


@dataclass
class RunOutcome:
    """
    Result of one `run` invocation, decoupled from printing so tests and callers can inspect it.
    """
    experiment: str
    seed: int
    exit_code: int
    results_path: Optional[Path] = None
    report_path: Optional[Path] = None
    violation: Optional[str] = None
    rows: Optional[List[Dict[str, Any]]] = None


@dataclass
class ReplayOutcome:
    experiment: str
    row: str
    original_seed: int
    seed: int
    original_hex: str
    replayed_hex: Optional[str]

    @property
    def same_seed(self):
        return self.seed == self.original_seed

    @property
    def equal(self):
        return self.replayed_hex is not None and self.replayed_hex == self.original_hex


sys.path.append(str(Path(__file__).parent))

# Logs are written under the working directory
base_directory = os.getcwd()

# Load logger configuration
configure_logging(base_directory)

# Log the start of the program
logging.debug("MAIN. Transversality Lab Started")
_startup_elapsed = time.perf_counter() - timing_logger.PROGRAM_START
logging.debug(f"[TIMING] program_startup | duration={_startup_elapsed:.3f}s | elapsed={_startup_elapsed:.3f}s")

DEFAULT_CONFIG = Path(__file__).parent / "config.yaml"


def load_config(path):
    """
    Read the YAML configuration.

    Args:
        path: Path to config.yaml

    Returns:
        Dict with the settings, calibration and experiments sections (missing ones empty)
    """
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as handle:
            config = yaml.safe_load(handle) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path} does not parse: {exc}") from None
    if not isinstance(config, dict):
        raise ConfigError(f"config file {path} must hold a mapping")
    for section in ("settings", "calibration", "experiments"):
        config.setdefault(section, {})
    return config


def parse_overrides(tokens):
    """
    Turn `--key value` / `--key=value` tokens into a parameter table.

    Values are parsed as YAML scalars or lists, dashes in keys become underscores.
    """
    overrides = {}
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if not token.startswith("--") or len(token) == 2:
            raise ConfigError(f"unexpected argument {token!r}; overrides look like --key value")
        key, sep, raw = token[2:].partition("=")
        if not sep:
            if i + 1 >= len(tokens) or tokens[i + 1].startswith("--"):
                raise ConfigError(f"override --{key} has no value")
            raw = tokens[i + 1]
            i += 1
        try:
            overrides[key.replace("-", "_")] = yaml.safe_load(raw)
        except yaml.YAMLError:
            raise ConfigError(f"override --{key} value {raw!r} does not parse") from None
        i += 1
    return overrides


def build_params(config, experiment, overrides):
    """
    Merge the experiment's config section with command-line overrides.

    Returns:
        Tuple of (params, seed); seed is None when neither source gives one
    """
    section = config["experiments"].get(experiment) or {}
    if not isinstance(section, dict):
        raise ConfigError(f"config section for {experiment!r} must be a mapping")
    params = {**section, **overrides}
    seed = params.pop("seed", None)
    if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
        raise ConfigError(f"seed must be an integer, got {seed!r}")
    if EXPERIMENTS[experiment].uses_calibration and "calibration" not in params:
        if not config["calibration"]:
            raise ConfigError(f"experiment {experiment!r} needs a calibration section")
        params["calibration"] = dict(config["calibration"])
    return params, seed


def _store_for(config, output_dir=None):
    settings = config["settings"]
    return ResultsStore(output_dir or settings.get("output_dir", "results"),
                        settings.get("results_file", "results.csv"))


def run(experiment, params, seed, store):
    """
    Run one experiment and persist its rows and report.

    Args:
        experiment: Registered experiment name
        params: Parameter table
        seed: Integer seed
        store: ResultsStore receiving the CSV rows and JSON report

    Returns:
        RunOutcome with exit code 0 on contract satisfaction, 1 on violation
    """
    n_jobs = resolve_n_jobs()
    logging.info(f"MAIN. run {experiment} seed={seed} with {n_jobs} worker(s)")
    with threadpool_limits(limits=n_jobs), tlog(f"main.run {experiment}"):
        result = run_experiment(experiment, params, seed)

    results_path = store.append_rows(experiment, result.rows, seed, result.contract_ok)
    report_path = store.write_report(experiment, seed, {"experiment": experiment, "seed": seed, "params": params,
                                                        "contract_ok": result.contract_ok,
                                                        "violation": result.violation, **result.report})
    exit_code = EXIT_OK if result.contract_ok else EXIT_CONTRACT_VIOLATION
    if not result.contract_ok:
        logging.error(f"MAIN. {experiment} violated its contract: {result.violation}")
    return RunOutcome(experiment, seed, exit_code, results_path if result.rows else None, report_path,
                      result.violation, result.rows)


def replay(csv_path, index, seed=None):
    """
    Re-run one stored row and compare the estimate bit for bit.

    Args:
        csv_path: Results CSV
        index: Zero-based row index
        seed: Optional seed replacing the stored one (a different run)

    Returns:
        ReplayOutcome; `equal` is the bit-for-bit verdict
    """
    record = read_row(csv_path, index)
    params = dict(record["params"])
    label = params.pop("row", None)
    if label is None:
        raise ReplayError(f"row {index} params carry no row label")
    if record["experiment"] not in EXPERIMENTS:
        raise ReplayError(f"row {index} names unknown experiment {record['experiment']!r}")
    run_seed = record["seed"] if seed is None else int(seed)

    with threadpool_limits(limits=resolve_n_jobs()), tlog(f"main.replay {record['experiment']}"):
        result = run_experiment(record["experiment"], params, run_seed)
    matches = [row for row in result.rows if row["params"].get("row") == label]
    replayed_hex = float(matches[0]["estimate"]).hex() if matches else None
    outcome = ReplayOutcome(record["experiment"], label, record["seed"], run_seed, record["estimate_hex"],
                            replayed_hex)
    logging.debug(f"MAIN. replay {outcome.experiment}/{label}: {outcome.original_hex} vs {replayed_hex}")
    return outcome


def _build_parser():
    parser = argparse.ArgumentParser(prog="translab", description="Transversality Lab experiment runner",
                                     allow_abbrev=False)
    sub = parser.add_subparsers(dest="command")

    run_parser = sub.add_parser("run", allow_abbrev=False,
                                help="run a registered experiment; extra --key value pairs override config")
    run_parser.add_argument("experiment")
    run_parser.add_argument("--config", default=str(DEFAULT_CONFIG))
    run_parser.add_argument("--output-dir", default=None)

    replay_parser = sub.add_parser("replay", help="re-run a results row and compare bit for bit")
    replay_parser.add_argument("results_csv")
    replay_parser.add_argument("index", type=int)
    replay_parser.add_argument("--seed", type=int, default=None)

    sub.add_parser("list", help="list registered experiments")
    return parser


def _print_registry():
    for name in list_experiments():
        print(f"{name:<14} {EXPERIMENTS[name].description}")


def _run_command(args, extra):
    config = load_config(args.config)
    if args.experiment not in EXPERIMENTS:
        print(f"unknown experiment {args.experiment!r}; registered experiments:", file=sys.stderr)
        for name in list_experiments():
            print(f"  {name}", file=sys.stderr)
        return EXIT_USAGE
    params, seed = build_params(config, args.experiment, parse_overrides(extra))
    if seed is None:
        raise ConfigError(f"no seed for {args.experiment!r}; set it in the config or pass --seed")
    outcome = run(args.experiment, params, seed, _store_for(config, args.output_dir))

    for row in outcome.rows or []:
        print(f"{args.experiment} {row['params']['row']}: {row['estimate']:.10g} ± {row['stderr']:.3g}")
    if outcome.results_path is not None:
        print(f"results: {outcome.results_path}")
    if outcome.report_path is not None:
        print(f"report: {outcome.report_path}")
    if outcome.violation:
        print(f"contract violated: {outcome.violation}", file=sys.stderr)
    return outcome.exit_code


def _replay_command(args):
    outcome = replay(args.results_csv, args.index, args.seed)
    if not outcome.same_seed:
        print(f"different run: seed {outcome.seed} instead of {outcome.original_seed}, "
              f"estimate {outcome.replayed_hex} vs stored {outcome.original_hex}")
        return EXIT_OK
    if outcome.equal:
        print(f"replay identical: {outcome.experiment} {outcome.row} = {outcome.original_hex}")
        return EXIT_OK
    print(f"replay differs: {outcome.experiment} {outcome.row} stored {outcome.original_hex}, "
          f"got {outcome.replayed_hex}", file=sys.stderr)
    return EXIT_CONTRACT_VIOLATION


def main(argv=None):
    """
    Main entry point for the Transversality Lab command line.

    Args:
        argv: Argument list (default: sys.argv[1:])

    Returns:
        Process exit code: 0 success, 1 contract violation, 2 usage error
    """
    parser = _build_parser()
    args, extra = parser.parse_known_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_USAGE
    if extra and args.command != "run":
        print(f"unexpected arguments: {' '.join(extra)}", file=sys.stderr)
        return EXIT_USAGE
    if os.environ.get(ENV_THREADS):
        logging.debug(f"MAIN. {ENV_THREADS}={os.environ[ENV_THREADS]}")

    try:
        if args.command == "list":
            _print_registry()
            return EXIT_OK
        if args.command == "run":
            return _run_command(args, extra)
        return _replay_command(args)
    except ValueError as exc:
        # ConfigError, ReplayError and rejected inputs
        logging.error(f"MAIN. {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:
        logging.error(f"MAIN. {args.command} failed: {exc}\n{traceback.format_exc()}")
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_CONTRACT_VIOLATION
    finally:
        logging.debug("MAIN. Finished")


if __name__ == "__main__":
    sys.exit(main())
