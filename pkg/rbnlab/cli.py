import argparse
import logging
import os
import sys
from typing import List, Optional

import pandas as pd

from rbnlab.enumerating import (
    build_frequency_distribution,
    ctm_from_frequency,
    derive_square_table,
    square_table,
)
from rbnlab.exceptions import (
    DegenerateSeries,
    IncompatibleSpecs,
    MalformedFile,
    ShapeMismatch,
    StateSpaceTooLarge,
)
from rbnlab.graphing import (
    build_transition_diagram,
    find_attractors,
    prestige_centrality,
)
from rbnlab.measuring import CtmTable, randomness_report
from rbnlab.perturbing import perturbation_series
from rbnlab.simulating import BooleanNetwork, evolve, random_initial_state, seeded_network
from rbnlab.speccing import Boundary, RunConfig, parse_config
from rbnlab.sweeping import criticality_frame, detect_critical_p, sweep_frame, sweep_per_k
from rbnlab.utils.file_utils import (
    emit_diagram_image,
    prestige_frame,
    read_ctm_table,
    read_network_fixture,
    successor_frame,
    write_attractor_report,
    write_csv,
    write_ctm_table,
    write_network_fixture,
    write_run_manifest,
)
from rbnlab.utils.rng_utils import derive_stream

"""
The `rbnlab` command. Every subcommand resolves its configuration (defaults < --config file
< options < --set overrides), logs it, and writes its results plus a run-manifest to --out.

Exit codes: 0 on success, 1 on invalid input, 2 on any other failure.
"""

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_FAILURE = 2
VALIDATION_ERRORS = (
    IncompatibleSpecs,
    MalformedFile,
    ShapeMismatch,
    StateSpaceTooLarge,
    DegenerateSeries,
)

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Flat key=value configuration file.")
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override one configuration value (repeatable).",
    )
    common.add_argument("--seed", type=int, help="Master seed (same as --set master_seed=...).")
    common.add_argument("-v", "--verbose", action="store_true", help="Log debug messages.")
    common.add_argument("-q", "--quiet", action="store_true", help="Log warnings only.")

    parser = argparse.ArgumentParser(
        prog="rbnlab",
        description="Random Boolean networks, their randomness and their transition diagrams.",
    )
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    evolve_cmd = commands.add_parser(
        "evolve", parents=[common], help="Evolve one network and measure its diagram."
    )
    evolve_cmd.add_argument("--network", help="Network fixture file (else generated).")
    evolve_cmd.add_argument("--out", required=True, help="Output directory.")

    sweep_cmd = commands.add_parser(
        "sweep", parents=[common], help="Sweep the bias p and detect critical values."
    )
    sweep_cmd.add_argument("--out", required=True, help="Output directory.")

    graph_cmd = commands.add_parser(
        "transition-graph",
        parents=[common],
        help="Transition diagram, attractors and prestige of one network.",
    )
    graph_cmd.add_argument("--network", help="Network fixture file (else generated).")
    graph_cmd.add_argument("--out", required=True, help="Output directory.")

    perturb_cmd = commands.add_parser(
        "perturb", parents=[common], help="Perturb the most or least prestigious states."
    )
    perturb_cmd.add_argument("--network", help="Network fixture file (else generated).")
    perturb_cmd.add_argument("--mode", choices=["most", "least"])
    perturb_cmd.add_argument("--count", type=int)
    perturb_cmd.add_argument("--out", required=True, help="Output directory.")

    ctm_cmd = commands.add_parser(
        "ctm-gen", parents=[common], help="Enumerate Turing machines into a CTM table file."
    )
    ctm_cmd.add_argument("--states", type=int, choices=[1, 2, 3])
    ctm_cmd.add_argument("--step-cap", type=int)
    ctm_cmd.add_argument(
        "--square",
        action="store_true",
        help="Write the derived Square(block_side) table instead of the String table.",
    )
    ctm_cmd.add_argument("--out", required=True, help="Path of the table file.")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    text = ""
    if args.config:
        with open(args.config) as f:
            text = f.read()
    overrides = []
    for option, key in (
        ("seed", "master_seed"),
        ("mode", "mode"),
        ("count", "count"),
        ("states", "ctm_states"),
        ("step_cap", "ctm_step_cap"),
    ):
        value = getattr(args, option, None)
        if value is not None:
            overrides.append("%s=%s" % (key, value))
    # as config keys they go into the run-manifest
    if getattr(args, "network", None):
        overrides.append("network=%s" % os.path.abspath(args.network))
    if getattr(args, "square", False):
        overrides.append("ctm_square=true")
    return parse_config(text, overrides + args.overrides)


def load_table(config: RunConfig) -> CtmTable:
    if config.ctm_table:
        return read_ctm_table(config.ctm_table)
    return square_table(
        config.ctm_states, config.ctm_step_cap, config.block_side, derived=config.ctm_derived
    )


def load_network(config: RunConfig) -> BooleanNetwork:
    if config.network:
        return read_network_fixture(config.network)
    net, _ = seeded_network(config.rbn_params(), config.master_seed)
    return net


def run_evolve(args: argparse.Namespace, config: RunConfig):
    if config.network:
        net = read_network_fixture(config.network)
        initial = random_initial_state(net.n_nodes, derive_stream(config.master_seed, 1))
    else:
        net, initial = seeded_network(config.rbn_params(), config.master_seed)
    diagram = evolve(net, initial, config.steps)
    table = load_table(config)
    # truth tables of small k are narrower than a block
    tt_boundary = (
        config.boundary_kind()
        if net.truth_tables.shape[1] >= config.block_side
        else Boundary.PAD_ZERO
    )
    tt = randomness_report(net.truth_tables, table, config.block_side, tt_boundary)
    diag = randomness_report(diagram, table, config.block_side, config.boundary_kind())
    write_network_fixture(net, os.path.join(args.out, "network.txt"))
    emit_diagram_image(diagram, os.path.join(args.out, "evolution.pbm"))
    write_csv(
        pd.DataFrame(
            [dict(object="truth_tables", **tt.as_dict()), dict(object="diagram", **diag.as_dict())]
        ),
        os.path.join(args.out, "randomness.csv"),
    )


def run_sweep(args: argparse.Namespace, config: RunConfig):
    series = sweep_per_k(
        config.sweep_config(),
        table=load_table(config),
        block_side=config.block_side,
        boundary=config.boundary_kind(),
        workers=config.workers,
    )
    write_csv(sweep_frame(series), os.path.join(args.out, "sweep.csv"))
    results = []
    for k in sorted(series):
        try:
            results.append(detect_critical_p(series[k]))
        except DegenerateSeries as e:
            logger.warning("No critical p for k=%d: %s" % (k, e))
    write_csv(criticality_frame(results), os.path.join(args.out, "criticality.csv"))


def run_transition_graph(args: argparse.Namespace, config: RunConfig):
    net = load_network(config)
    diagram = build_transition_diagram(net, config.max_nodes, config.workers)
    attractors = find_attractors(diagram)
    prestige = prestige_centrality(
        diagram,
        config.prestige_tol,
        config.prestige_max_iter,
        config.prestige_averaging,
    )
    logger.info("%s, %s" % (attractors, prestige))
    write_csv(successor_frame(diagram), os.path.join(args.out, "successors.csv"))
    write_attractor_report(attractors, os.path.join(args.out, "attractors.json"))
    write_csv(prestige_frame(prestige), os.path.join(args.out, "prestige.csv"))


def run_perturb(args: argparse.Namespace, config: RunConfig):
    net = load_network(config)
    diagram = build_transition_diagram(net, config.max_nodes, config.workers)
    prestige = prestige_centrality(
        diagram,
        config.prestige_tol,
        config.prestige_max_iter,
        config.prestige_averaging,
    )
    series = perturbation_series(
        diagram,
        load_table(config),
        mode=config.mode,
        count=config.count,
        block_side=config.block_side,
        boundary=config.boundary_kind(),
        band_tolerance=config.band_tolerance,
        prestige=prestige,
    )
    write_csv(series.as_frame(), os.path.join(args.out, "perturbation.csv"))


def run_ctm_gen(args: argparse.Namespace, config: RunConfig):
    dist = build_frequency_distribution(
        config.ctm_states, config.ctm_step_cap, workers=config.workers
    )
    table = ctm_from_frequency(dist)
    if config.ctm_square:
        table = derive_square_table(table, config.block_side)
    write_ctm_table(table, args.out)


COMMANDS = {
    "evolve": run_evolve,
    "sweep": run_sweep,
    "transition-graph": run_transition_graph,
    "perturb": run_perturb,
    "ctm-gen": run_ctm_gen,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_INVALID

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        config = resolve_config(args)
        logger.info("Running %s with %s" % (args.command, config))
        if args.command == "ctm-gen":
            out_dir = os.path.dirname(os.path.abspath(args.out))
        else:
            out_dir = args.out
        os.makedirs(out_dir, exist_ok=True)
        COMMANDS[args.command](args, config)
        write_run_manifest(out_dir, config, args.command)
    except VALIDATION_ERRORS as e:
        logger.error("%s: %s" % (type(e).__name__, e))
        return EXIT_INVALID
    except OSError as e:
        logger.error("Cannot read or write files: %s" % e)
        return EXIT_FAILURE
    except Exception:
        logger.exception("%s failed." % args.command)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
