## Copyright (c) 2023-2026, the ponsim developers
# All rights reserved.
#
# Redistribution and use in source and binary forms, with or without
# modification, are permitted provided that the following conditions are met:
#
# 1. Redistributions of source code must retain the above copyright notice, this
#    list of conditions and the following disclaimer.
#
# 2. Redistributions in binary form must reproduce the above copyright notice,
#    this list of conditions and the following disclaimer in the documentation
#    and/or other materials provided with the distribution.
#
# 3. Neither the name of the copyright holder nor the names of its
#    contributors may be used to endorse or promote products derived from
#   this software without specific prior written permission.
#
# THIS SOFTWARE IS PROVIDED BY THE COPYRIGHT HOLDERS AND CONTRIBUTORS "AS IS"
# AND ANY EXPRESS OR IMPLIED WARRANTIES, INCLUDING, BUT NOT LIMITED TO, THE
# IMPLIED WARRANTIES OF MERCHANTABILITY AND FITNESS FOR A PARTICULAR PURPOSE ARE
# DISCLAIMED. IN NO EVENT SHALL THE COPYRIGHT HOLDER OR CONTRIBUTORS BE LIABLE
# FOR ANY DIRECT, INDIRECT, INCIDENTAL, SPECIAL, EXEMPLARY, OR CONSEQUENTIAL
# DAMAGES (INCLUDING, BUT NOT LIMITED TO, PROCUREMENT OF SUBSTITUTE GOODS OR
# SERVICES; LOSS OF USE, DATA, OR PROFITS; OR BUSINESS INTERRUPTION) HOWEVER
# CAUSED AND ON ANY THEORY OF LIABILITY, WHETHER IN CONTRACT, STRICT LIABILITY,
# OR TORT (INCLUDING NEGLIGENCE OR OTHERWISE) ARISING IN ANY WAY OUT OF THE USE
# OF THIS SOFTWARE, EVEN IF ADVISED OF THE POSSIBILITY OF SUCH DAMAGE.

"""Command-line front end.

::

    ponsim validate <scenario>
    ponsim run <scenario> [--out DIR] [--seed N]
    ponsim export <scenario> --nodes SELECTOR [--out DIR]

``<scenario>`` is a YAML file or the name of a shipped preset. Exit status is
0 on success, 1 for validation or experiment failures and 2 for documents that
cannot be parsed and for usage errors.
"""
import argparse
import datetime
import fnmatch
import functools
import logging
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor

from .ponsim_exceptions import *
from .addressing import assign_addresses, export_node_config, validate_plan
from .experiments import run_experiment
from .routing import compute_tables
from .scenario import PRESETS, apply_failures, build_testbed, build_topology, load_scenario
from .simcore import plot_trace, write_trace
from .topology import NodeKind, validate
from .utils import ValidationReport, natural_key

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

SELECTOR_KINDS = {
    "servers": (NodeKind.SERVER,),
    "gateways": (NodeKind.GATEWAY_SERVER,),
    "core": (NodeKind.WDM_CORE_NODE,),
}


def validate_scenario(config):
    '''Builds a scenario and runs every validation pass over it.

    Build errors are reported under the ``build`` check instead of being raised.

    Returns
    -------
    report: :class:`~ponsim.utils.ValidationReport`
    '''
    report = ValidationReport("scenario " + config.name, ["build"])
    try:
        config.check()
        intact = build_topology(config)
        t = apply_failures(config, intact)
    except PonSimException as e:
        report.fail("build", str(e))
        return report
    topo_report = validate(intact)
    report = report.merge(topo_report)
    try:
        plan = assign_addresses(intact, config.addressing["base_prefix"], config.addressing["pinned"])
    except PonSimException as e:
        report.fail("build", str(e))
        return report
    plan_report = validate_plan(plan, intact)
    report = report.merge(plan_report)
    if topo_report.passed and plan_report.passed:
        routing = ValidationReport("routing", ["unreachable-subnet"])
        tables = compute_tables(t, plan, config.routing["olt_transit"], config.routing["alternatives"],
                                strict=False)
        for node, prefixes in tables.unreachable.items():
            for prefix in prefixes:
                routing.fail("unreachable-subnet", "{}:{}".format(node, prefix))
        report = report.merge(routing)
    report.subject = "scenario " + config.name
    return report


def cmd_validate(path, stream=None):
    '''Validates a scenario and writes the report to ``stream``.

    Returns
    -------
    status: int
        0 when every check passed, 1 otherwise

    Raises
    ------
    PonSimParseException
        The document is not valid YAML
    '''
    stream = stream or sys.stdout
    config = load_scenario(path)
    report = validate_scenario(config)
    stream.write(str(report))
    return EXIT_OK if report.passed else EXIT_FAILED


def _report_header(config, seed):
    full_str = "ponsim run summary\n"
    full_str += "Generated:\n" + str(datetime.datetime.now()) + "\n"
    full_str += "Scenario:\n{} ({})\n".format(config.name, config.source)
    full_str += "Seed:\n{}\n".format(seed)
    return full_str


def _traces(result):
    if isinstance(result, list):
        return [event for r in result for event in getattr(r, "trace", [])]
    return getattr(result, "trace", None)


def cmd_run(path, out_dir=None, seed=None, stream=None):
    '''Runs every experiment of a scenario in document order.

    Writes ``NN-<name>.csv`` per experiment and ``summary.txt`` to ``out_dir``
    (the scenario's ``output.dir`` by default); traces and plots are written
    when the scenario asks for them.
    A scenario failing :func:`validate_scenario` runs nothing; its report is
    written to ``stream`` and 1 is returned.

    Parameters
    ----------
    path: str
        Scenario file or preset name
    out_dir: str, optional
    seed: int, optional
        Replaces the scenario's delay seed
    stream: file, optional
        Where the summary is echoed

    Returns
    -------
    status: int

    Raises
    ------
    PonSimExperimentException
        An experiment failed; ``index`` names it
    '''
    stream = stream or sys.stdout
    config = load_scenario(path)
    if seed is not None:
        config = config.with_seed(seed)
    report = validate_scenario(config)
    if not report.passed:
        stream.write(str(report))
        return EXIT_FAILED
    bed = build_testbed(config)
    out_dir = out_dir or config.output["dir"]
    os.makedirs(out_dir, exist_ok=True)
    base_seed = config.delays["seed"]
    runner = functools.partial(run_experiment, bed, base_seed=base_seed)
    if config.parallel and len(config.experiments) > 1:
        bed.topology.l3_neighbors(up_only=True)
        with ThreadPoolExecutor() as pool:
            outcomes = list(pool.map(runner, config.experiments))
    else:
        outcomes = [runner(spec) for spec in config.experiments]

    output = _report_header(config, base_seed) + "Experiments:\n"
    for outcome in outcomes:
        stem = "{:02d}-{}".format(outcome.index, outcome.name)
        outcome.table.to_csv(os.path.join(out_dir, stem + ".csv"), index=False, float_format="%.3f")
        output += "[{}] {} -> {}.csv\n{}\n".format(outcome.index, outcome.kind, stem, outcome.summary)
        trace = _traces(outcome.result)
        if config.output["trace"] and trace is not None:
            write_trace(trace, os.path.join(out_dir, stem + ".trace"))
        if config.output["plot"] and outcome.kind == "traceroute":
            plot_trace(outcome.result, os.path.join(out_dir, stem + ".png"))
    if not outcomes:
        output += "none\n"
    with open(os.path.join(out_dir, "summary.txt"), "w") as fi:
        fi.write(output)
    stream.write(output)
    logger.info("Wrote %d result tables to %s", len(outcomes), out_dir)
    return EXIT_OK


def select_nodes(t, plan, selector):
    '''Node ids matched by an export selector.

    ``all``, ``servers``, ``gateways``, ``core`` and ``kind=<node kind>`` select
    by kind; ``routers`` selects every forwarding node, relay servers included.
    Anything else is a node id or a glob.
    Only addressed nodes are returned.

    Raises
    ------
    PonSimUnknownKindException
        ``kind=`` names no node kind
    '''
    addressed = [n for n in t.nodes if plan.interfaces.get(n)]
    if selector == "all":
        chosen = addressed
    elif selector == "routers":
        chosen = [n for n in addressed if t.is_router(n)]
    elif selector in SELECTOR_KINDS:
        kinds = SELECTOR_KINDS[selector]
        chosen = [n for n in addressed if t.nodes[n].kind in kinds]
    elif selector.startswith("kind="):
        try:
            kind = NodeKind(selector[len("kind="):])
        except ValueError as e:
            raise PonSimUnknownKindException("Unknown node kind in selector {!r}.".format(selector)) from e
        chosen = [n for n in addressed if t.nodes[n].kind == kind]
    else:
        chosen = [n for n in addressed if fnmatch.fnmatchcase(n, selector)]
    return sorted(chosen, key=natural_key)


def cmd_export(path, selector, out_dir=None, stream=None):
    '''Writes ``<node>.cfg`` for every node matched by ``selector``.

    A selector matching nothing warns and writes nothing.
    A scenario failing :func:`validate_scenario` writes its report to
    ``stream`` instead and returns 1.

    Returns
    -------
    status: int
    '''
    stream = stream or sys.stdout
    config = load_scenario(path)
    report = validate_scenario(config)
    if not report.passed:
        stream.write(str(report))
        return EXIT_FAILED
    bed = build_testbed(config)
    nodes = select_nodes(bed.topology, bed.plan, selector)
    if not nodes:
        warnings.warn("Selector {!r} matches no addressed node.".format(selector), stacklevel=2)
        return EXIT_OK
    out_dir = out_dir or os.path.join(config.output["dir"], "configs")
    os.makedirs(out_dir, exist_ok=True)
    for node in nodes:
        dest = os.path.join(out_dir, node + ".cfg")
        with open(dest, "w") as fi:
            fi.write(export_node_config(bed.plan, bed.topology, node, bed.tables))
        stream.write(dest + "\n")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="ponsim",
                                     description="Simulate a server-centric PON data centre and its core chain.")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="log progress")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="log errors only")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario")
    p.add_argument("scenario", help="scenario file or preset ({})".format(", ".join(PRESETS)))

    p = sub.add_parser("run", help="run the experiments of a scenario")
    p.add_argument("scenario")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")

    p = sub.add_parser("export", help="write per-node address and route documents")
    p.add_argument("scenario")
    p.add_argument("--nodes", required=True,
                   help="all, servers, gateways, core, routers, kind=<kind>, a node id or a glob")
    p.add_argument("--out", default=None, help="output directory")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    level = logging.INFO if args.verbose else logging.ERROR if args.quiet else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "validate":
            return cmd_validate(args.scenario)
        if args.command == "run":
            return cmd_run(args.scenario, args.out, args.seed)
        return cmd_export(args.scenario, args.nodes, args.out)
    except (PonSimParseException, PonSimParameterException, PonSimUnknownKindException) as e:
        print("ponsim: error: {}".format(e), file=sys.stderr)
        return EXIT_USAGE
    except PonSimException as e:
        print("ponsim: error: {}".format(e), file=sys.stderr)
        return EXIT_FAILED
