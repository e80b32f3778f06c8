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

"""Runs the experiment entries of a scenario against a testbed."""
import logging
from collections import namedtuple

import pandas as pd

from .ponsim_exceptions import *
from .linkmodel import assign_wavelengths, tdm_schedule
from .simcore import (all_pairs_ping, run_ping, run_stream, run_traceroute, summarize, trace_digest,
                      traceroute_table)
from .topology import NodeKind, SPLITTER_KINDS

logger = logging.getLogger(__name__)

Outcome = namedtuple("Outcome", ["index", "name", "kind", "table", "summary", "result"])
Outcome.__doc__ = "CSV rows, report text and raw result of one experiment."


def _seed(spec, base_seed):
    return base_seed if spec.get("seed") is None else spec["seed"]


def _ping(bed, spec, base_seed):
    seed = _seed(spec, base_seed)
    if spec["pairs"] == "all-servers":
        results = all_pairs_ping(bed, None, spec["count"], spec["interval_us"], seed)
    else:
        results = [run_ping(bed, spec["src"], spec["dst"], spec["count"], spec["interval_us"], spec["size"],
                            spec["timeout_us"], seed)]
    lossy = sum(1 for r in results if r.lost)
    lines = [str(r) for r in results]
    lines.append("{} pairs, {} with loss".format(len(results), lossy))
    return summarize(results), "\n".join(lines), results


def _traceroute(bed, spec, base_seed):
    result = run_traceroute(bed, spec["src"], spec["dst"], spec["iterations"], spec["probes_per_hop"],
                            spec["timeout_us"], _seed(spec, base_seed))
    hops = summarize(result)
    lines = ["{} -> {}: {} samples ({} iterations x {} hops x {} probes)".format(
        spec["src"], spec["dst"], result.sample_count, result.iterations, result.hops, result.probes)]
    lines.append(hops.to_string(index=False, float_format=lambda v: "{:.3f}".format(v)))
    if result.sample_count:
        lines.append("overall min/max RTT: {:.3f}/{:.3f} us".format(hops["min-us"].min(), hops["max-us"].max()))
    lines.append("trace digest: {}".format(trace_digest(result.trace)))
    return traceroute_table(result), "\n".join(lines), result


def _stream(bed, spec, base_seed):
    stats = run_stream(bed, spec["src"], spec["dst"], spec["rate_bps"], spec["packet_bytes"], spec["duration_us"],
                       spec["drain_us"], _seed(spec, base_seed))
    return summarize(stats), "{}\ntrace digest: {}".format(stats, trace_digest(stats.trace)), stats


def _wavelengths(bed, spec, base_seed):
    t = bed.topology
    hosts = t.nodes_of_kind(NodeKind.ENDPOINT_HOST)
    dst = hosts[0] if hosts else t.olt
    if dst is None:
        raise PonSimParameterException("Wavelength assignment needs an OLT.")
    flows, capacities = [], {}
    for rack in t.racks():
        path = bed.path(t.gateway(rack), dst)
        segments = [l for l in path.links if t.links[l].wavelengths is not None]
        for l in segments:
            capacities[l] = t.links[l].wavelengths
        for j in range(1, spec["flows_per_onu"] + 1):
            flows.append(("{}-f{}".format(rack, j), segments))
    if not capacities:
        raise PonSimParameterException("No wavelength-capable segment between the racks and {}.".format(dst))
    assignment = assign_wavelengths(flows, capacities)
    table = pd.DataFrame([(f, w, ";".join(p)) for f, (w, p) in assignment.assignments.items()],
                         columns=["flow", "wavelength", "segments"])
    summary = "{} flows over {} segments, highest wavelength index {}".format(
        len(assignment), len(capacities), int(table["wavelength"].max()))
    return table, summary, assignment


def _tdm(bed, spec, base_seed):
    t = bed.topology
    onus = t.nodes_of_kind(NodeKind.ONU)
    if not onus:
        raise PonSimParameterException("TDM scheduling needs at least one ONU.")
    demands = spec["demands"] or {onu: spec["demand_bits"] for onu in onus}
    line_rate = spec["line_rate_bps"]
    if line_rate is None:
        feeder = [l for l in t.links.values() if t.olt in l.endpoints
                  and t.nodes[l.other(t.olt)].kind in SPLITTER_KINDS]
        line_rate = feeder[0].rate_bps if feeder else t.links[next(iter(t.links))].rate_bps
    schedule = tdm_schedule(demands, line_rate, spec["frame_us"])
    table = pd.DataFrame([tuple(g) for g in schedule.grants], columns=["onu", "start-us", "duration-us"])
    return table, str(schedule), schedule


_RUNNERS = {
    "ping": _ping,
    "traceroute": _traceroute,
    "stream": _stream,
    "wavelengths": _wavelengths,
    "tdm": _tdm,
}


def run_experiment(bed, spec, base_seed=None):
    '''Runs one filled-in experiment entry.

    Parameters
    ----------
    bed: :class:`~ponsim.simcore.Testbed`
    spec: dict
        Experiment section with defaults applied
    base_seed: int, optional
        Used when the entry carries no seed of its own

    Returns
    -------
    outcome: :class:`Outcome`

    Raises
    ------
    PonSimExperimentException
        Any failure, tagged with the experiment index
    '''
    index = spec.get("index", 0)
    logger.info("Running experiment %d (%s)", index, spec["kind"])
    try:
        table, summary, result = _RUNNERS[spec["kind"]](bed, spec, base_seed)
    except PonSimException as e:
        raise PonSimExperimentException("Experiment {} ({}) failed: {}".format(index, spec["kind"], e),
                                        index=index) from e
    return Outcome(index, spec["name"], spec["kind"], table, summary, result)
