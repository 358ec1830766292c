"""
Antenna array diagnosis from sounding measurements.

Sub-commands:
    diagnose     diagnose a fixture file and print the report as JSON
    sweep        run a Monte Carlo NMSE sweep from a JSON config
    gen-fixture  write a self-contained, seeded fixture file
    plot-data    turn results (or a report's trace) into gnuplot data / PNG

Exit codes: 0 success, 2 usage or input error, 3 solver or runtime error.
"""

import os
import sys
import json
import argparse
import dataclasses
import logging

import numpy as np

import config
from diagnosis.ce import CEConfig
from diagnosis.errors import AADError, ChannelNull, ZeroTruth
from diagnosis.metrics import exact_support
from processing import postprocessing
from processing.experiment import (
    ExperimentConfig,
    diagnose,
    run_sweep,
    simulate,
    trial_data,
)
from processing.fixtures import load_fixture, write_fixture
from processing.utils import create_dir, derive_rng, resolve_master_seed

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_RUNTIME = 3

SOLVER_FLAGS = {
    "candidates": "n_candidates",
    "elites": "n_elites",
    "iterations": "n_iterations",
    "epsilon": "epsilon",
    "block_rows": "block_rows",
    "block_cols": "block_cols",
    "alpha": "smoothing_alpha",
    "mode": "mode",
}


def solver_from_args(args, base=None):
    """Solver flags override `base` (config file values or defaults)."""
    base = base if base is not None else CEConfig()
    changes = {
        field: getattr(args, flag)
        for flag, field in SOLVER_FLAGS.items()
        if getattr(args, flag, None) is not None
    }
    return dataclasses.replace(base, **changes)


def write_json(d, path):
    create_dir(os.path.dirname(path))
    try:
        with open(path, "w") as json_file:
            json.dump(d, json_file, indent=4, sort_keys=False)
            json_file.write("\n")
    except OSError as e:
        raise OSError("cannot write {}: {}".format(path, e)) from e
    logger.info("report written to {}".format(path))


def cmd_diagnose(args):
    fixture = load_fixture(args.fixture, args.channel)
    base = ExperimentConfig.from_json(args.config).solver if args.config else None
    if base is None:
        base = CEConfig(mode=fixture.mode)
    solver = solver_from_args(args, base)
    seed = resolve_master_seed(args.seed, fixture.seed)
    rng = derive_rng(seed, 0, "solver:" + args.method)

    data = trial_data(fixture)
    report = diagnose(args.method, data, solver, rng, args.omp_atoms)
    result = postprocessing.report_to_dict(report, truth=data.truth)
    result["fixture"] = args.fixture
    if data.true_support is not None:
        result["exact_support"] = exact_support(report.support, data.true_support)
    logger.info(
        "{}: {} antennas flagged{}".format(
            args.method,
            len(report.support),
            ", NMSE = {:.3e}".format(result["nmse"]) if "nmse" in result else "",
        )
    )
    if args.out:
        write_json(result, args.out)
    print(json.dumps(result, indent=4))
    return EXIT_OK


def cmd_sweep(args):
    cfg = ExperimentConfig.from_json(args.config).with_overrides(
        seed=args.seed, trials=args.trials
    )
    table = run_sweep(
        cfg, n_jobs=args.threads, progress=not args.quiet and args.threads == 1
    )
    postprocessing.emit(table, args.format, args.out)
    if args.trial_log:
        postprocessing.write_trial_log(table, args.trial_log)
    if args.plot:
        postprocessing.plot_nmse(table, args.plot)
    return EXIT_OK


def fixture_config(args):
    base = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    changes = {
        "scenario": args.scenario,
        "n_x": args.nx,
        "n_y": args.ny,
        "n_tx": args.ntx,
        "n_rx": args.nrx,
        "n_paths": args.paths,
        "p_b": args.p_b,
        "mode": args.mode,
        "measurements": args.measurements,
        "snr_db": args.snr,
    }
    changes = {k: v for k, v in changes.items() if v is not None}
    if args.noiseless:
        changes["snr_db"] = None
    if args.aligned:
        changes["aligned"] = True
    changes["solver"] = solver_from_args(args, base.solver)
    changes["master_seed"] = resolve_master_seed(args.seed, base.master_seed)
    if "mode" in changes:
        changes["solver"] = dataclasses.replace(changes["solver"], mode=changes["mode"])
    return dataclasses.replace(base, **changes)


def cmd_gen_fixture(args):
    cfg = fixture_config(args)
    fixture = simulate(cfg, args.trial)
    write_fixture(fixture, args.out)
    return EXIT_OK


def cmd_plot_data(args):
    if args.trace:
        try:
            with open(args.input, "r") as read_file:
                report = json.load(read_file)
        except OSError as e:
            raise OSError("cannot read {}: {}".format(args.input, e)) from e
        text = postprocessing.trace_block(report["trace"])
        if args.png:
            postprocessing.plot_trace(report["trace"], args.png)
    else:
        table = postprocessing.read_table(args.input)
        text = postprocessing.gnuplot_blocks(table)
        if args.png:
            postprocessing.plot_nmse(table, args.png)
    if args.out:
        try:
            with open(args.out, "w") as dat_file:
                dat_file.write(text)
        except OSError as e:
            raise OSError("cannot write {}: {}".format(args.out, e)) from e
        logger.info("plot data written to {}".format(args.out))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def add_solver_arguments(parser):
    parser.add_argument("--candidates", type=int, metavar="N", help="candidates per iteration N_c")
    parser.add_argument("--elites", type=int, metavar="N", help="elite count N_e")
    parser.add_argument("--iterations", type=int, metavar="N", help="iteration count")
    parser.add_argument("--epsilon", type=float, metavar="X", help="sparsity weight")
    parser.add_argument("--block-rows", type=int, metavar="N", help="block height")
    parser.add_argument("--block-cols", type=int, metavar="N", help="block width")
    parser.add_argument("--alpha", type=float, metavar="X", help="probability smoothing in (0, 1]")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="aad.py",
        description="Diagnose blocked antennas in mmWave arrays with cross-entropy search.",
        epilog="Example usage: python3 aad.py sweep -c configs/fig3a.json -o fig3a.csv",
    )
    parser.add_argument("--seed", type=int, metavar="N", help="master seed (overrides ${})".format(config.SEED_ENV_VAR))
    parser.add_argument("--threads", type=int, default=1, metavar="N", help="parallel trials for sweeps")
    parser.add_argument("--quiet", action="store_true", help="only log warnings and errors")
    subparsers = parser.add_subparsers(dest="command", required=True)

    p = subparsers.add_parser("diagnose", help="diagnose a fixture file")
    p.add_argument("-f", "--fixture", type=str, required=True, metavar="PATH", help="measurement fixture")
    p.add_argument("--channel", type=str, metavar="PATH", help="fixture supplying geometry and channel")
    p.add_argument("-m", "--method", type=str, default="ce-aad", choices=config.METHODS, metavar="METHOD", help="one of {}".format(", ".join(config.METHODS)))
    p.add_argument("--mode", type=str, choices=config.BLOCKAGE_MODES, metavar="MODE", help="partial or complete (default: the fixture's)")
    p.add_argument("-c", "--config", type=str, metavar="PATH", help="experiment config whose solver section is used")
    p.add_argument("--omp-atoms", type=int, metavar="N", help="OMP sparsity level")
    p.add_argument("-o", "--out", type=str, metavar="PATH", help="also write the report here")
    add_solver_arguments(p)
    p.set_defaults(func=cmd_diagnose)

    p = subparsers.add_parser("sweep", help="run an NMSE sweep from a config file")
    p.add_argument("-c", "--config", type=str, required=True, metavar="PATH", help="experiment config (JSON)")
    p.add_argument("-o", "--out", type=str, required=True, metavar="PATH", help="result file")
    p.add_argument("--format", type=str, default="csv", choices=config.RESULT_FORMATS, metavar="FORMAT", help="csv, json or gnuplot-dat")
    p.add_argument("--trials", type=int, metavar="N", help="override the trial count")
    p.add_argument("--trial-log", type=str, metavar="PATH", help="write the per-trial log (CSV)")
    p.add_argument("--plot", type=str, metavar="PATH", help="save an NMSE plot (PNG)")
    p.set_defaults(func=cmd_sweep)

    p = subparsers.add_parser("gen-fixture", help="write a seeded fixture")
    p.add_argument("-o", "--out", type=str, required=True, metavar="PATH", help="fixture file")
    p.add_argument("-c", "--config", type=str, metavar="PATH", help="experiment config providing defaults")
    p.add_argument("--scenario", type=str, choices=config.SCENARIOS, metavar="SCENARIO", help="tx or joint")
    p.add_argument("--nx", type=int, metavar="N", help="UPA rows")
    p.add_argument("--ny", type=int, metavar="N", help="UPA columns")
    p.add_argument("--ntx", type=int, metavar="N", help="transmit ULA size (joint)")
    p.add_argument("--nrx", type=int, metavar="N", help="receive ULA size (joint)")
    p.add_argument("--paths", type=int, metavar="N", help="number of paths L")
    p.add_argument("--p-b", type=float, metavar="X", help="blockage probability")
    p.add_argument("--mode", type=str, choices=config.BLOCKAGE_MODES, metavar="MODE", help="partial or complete")
    p.add_argument("-k", "--measurements", type=int, metavar="K", help="number of measurements K")
    p.add_argument("--snr", type=float, metavar="DB", help="SNR in dB")
    p.add_argument("--noiseless", action="store_true", help="no measurement noise")
    p.add_argument("--aligned", action="store_true", help="cluster starts on the block grid")
    p.add_argument("--trial", type=int, default=0, metavar="N", help="trial index of the random streams")
    add_solver_arguments(p)
    p.set_defaults(func=cmd_gen_fixture)

    p = subparsers.add_parser("plot-data", help="gnuplot data and plots from results")
    p.add_argument("-i", "--input", type=str, required=True, metavar="PATH", help="results CSV/JSON, or a report with --trace")
    p.add_argument("-o", "--out", type=str, metavar="PATH", help="gnuplot data file (default: stdout)")
    p.add_argument("--png", type=str, metavar="PATH", help="also save a matplotlib plot")
    p.add_argument("--trace", action="store_true", help="input is a diagnose report; plot its convergence trace")
    p.set_defaults(func=cmd_plot_data)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO)
    if args.threads < 1:
        logger.error("--threads must be >= 1")
        return EXIT_INPUT

    try:
        return args.func(args)
    except (ChannelNull, ZeroTruth, np.linalg.LinAlgError) as e:
        logger.error("{}: {}".format(type(e).__name__, e))
        return EXIT_RUNTIME
    except (ValueError, KeyError, TypeError, OSError) as e:
        # input documents and flags: ConfigError, FixtureError, DimensionMismatch, ...
        logger.error("{}: {}".format(type(e).__name__, e))
        return EXIT_INPUT
    except AADError as e:
        logger.error("{}: {}".format(type(e).__name__, e))
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

# Examples of commands
# python3 aad.py gen-fixture -o golden.json --p-b 0.04 --mode complete -k 60 --noiseless --aligned
# python3 aad.py diagnose -f golden.json
# python3 aad.py --threads 4 sweep -c configs/fig3a.json -o fig3a.csv --trial-log fig3a_trials.csv
# python3 aad.py plot-data -i fig3a.csv -o fig3a.dat --png fig3a.png
