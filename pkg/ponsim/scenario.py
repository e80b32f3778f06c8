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

"""Scenario documents: loading, defaults, presets and the build pipeline.

A scenario is a YAML mapping. Every section is optional except ``topology``;
missing keys are filled from the ``*_DEFAULTS`` dicts below and unknown keys are
rejected. See ``docs/schema.rst`` for the full layout.
"""
import copy
import logging
import os
import pkgutil

import yaml

from .ponsim_exceptions import *
from .addressing import DEFAULT_BASE_PREFIX, assign_addresses
from .linkmodel import PROPAGATION_US_PER_KM, DelayProfile
from .routing import DEFAULT_ALTERNATIVES, compute_tables
from .simcore import DEFAULT_DRAIN_US, DEFAULT_PROBE_BYTES, DEFAULT_QUEUE_CAPACITY, DEFAULT_TIMEOUT_US, Testbed
from .topology import (DEFAULT_INTER_RACK_KM, DEFAULT_PON_DROP_KM, DEFAULT_RATE_BPS, DEFAULT_WAVELENGTHS,
                       DISPLAY_HOST, attach_core_chain, build_cell, fail_link, topology_from_dict, yaml_error_message)
from .utils import set_defaults

logger = logging.getLogger(__name__)

PRESETS = ("paper-3x3", "paper-e2e", "awgr-cell", "core-100km")

SCENARIO_KEYS = ("name", "topology", "core_chain", "failures", "addressing", "delays", "routing", "simulation",
                 "experiments", "output", "parallel")

BUILDER_DEFAULTS = {
    "racks": 3,
    "groups_per_rack": 1,
    "servers_per_group": 3,
    "provisioning": "coupler-tdm",
    "wiring": "mesh",
    "media_converters": True,
    "inter_rack_km": DEFAULT_INTER_RACK_KM,
    "pon_drop_km": DEFAULT_PON_DROP_KM,
    "rate_bps": DEFAULT_RATE_BPS,
    "wavelengths": DEFAULT_WAVELENGTHS,
}
CORE_CHAIN_DEFAULTS = {"spans_km": [], "wavelengths": DEFAULT_WAVELENGTHS, "rate_bps": DEFAULT_RATE_BPS,
                       "host": DISPLAY_HOST}
FAILURE_DEFAULTS = {"links": []}
ADDRESSING_DEFAULTS = {"base_prefix": DEFAULT_BASE_PREFIX, "pinned": {}}
DELAY_DEFAULTS = {"propagation_us_per_km": PROPAGATION_US_PER_KM, "forward_us": {}, "jitter_fraction": 0.0,
                  "seed": None}
ROUTING_DEFAULTS = {"olt_transit": True, "alternatives": DEFAULT_ALTERNATIVES}
SIMULATION_DEFAULTS = {"queue_capacity": DEFAULT_QUEUE_CAPACITY, "probe_bytes": DEFAULT_PROBE_BYTES}
OUTPUT_DEFAULTS = {"dir": "results", "trace": False, "plot": False}

EXPERIMENT_DEFAULTS = {
    "ping": {"kind": "ping", "name": None, "src": None, "dst": None, "pairs": None, "count": 10,
             "interval_us": 1000.0, "size": None, "timeout_us": DEFAULT_TIMEOUT_US, "seed": None},
    "traceroute": {"kind": "traceroute", "name": None, "src": None, "dst": None, "iterations": 10,
                   "probes_per_hop": 3, "timeout_us": DEFAULT_TIMEOUT_US, "seed": None},
    "stream": {"kind": "stream", "name": None, "src": None, "dst": None, "rate_bps": None, "packet_bytes": 1200,
               "duration_us": 1e6, "drain_us": DEFAULT_DRAIN_US, "seed": None},
    "wavelengths": {"kind": "wavelengths", "name": None, "flows_per_onu": 1},
    "tdm": {"kind": "tdm", "name": None, "demands": None, "demand_bits": 100000, "frame_us": 125.0,
            "line_rate_bps": None},
}


class ScenarioConfig(object):
    """A scenario document with every default filled in.

    Attributes
    ----------
    name: str
    topology: dict
        Either ``{"builder": {...}}`` or ``{"explicit": {...}}``
    core_chain, failures, addressing, delays, routing, simulation, output: dict
    experiments: list of dict
    parallel: bool
        Experiments may run concurrently; results keep document order
    source: str
        File or preset the document came from
    """

    def __init__(self, doc, source="<string>"):
        if not isinstance(doc, dict):
            raise PonSimParseException("Scenario document must be a mapping, got {}.".format(type(doc).__name__))
        unknown = sorted(set(doc) - set(SCENARIO_KEYS))
        if unknown:
            raise PonSimParameterException("Unknown scenario section(s): {}".format(", ".join(map(str, unknown))))
        self.source = source
        self.name = str(doc.get("name") or os.path.splitext(os.path.basename(source))[0])
        self.topology = _topology_section(doc.get("topology"))
        self.core_chain = set_defaults(doc.get("core_chain"), CORE_CHAIN_DEFAULTS, "core_chain")
        self.failures = set_defaults(doc.get("failures"), FAILURE_DEFAULTS, "failures")
        self.addressing = set_defaults(doc.get("addressing"), ADDRESSING_DEFAULTS, "addressing")
        self.delays = set_defaults(doc.get("delays"), DELAY_DEFAULTS, "delays")
        self.routing = set_defaults(doc.get("routing"), ROUTING_DEFAULTS, "routing")
        self.simulation = set_defaults(doc.get("simulation"), SIMULATION_DEFAULTS, "simulation")
        self.output = set_defaults(doc.get("output"), OUTPUT_DEFAULTS, "output")
        self.parallel = bool(doc.get("parallel", False))
        experiments = doc.get("experiments") or []
        if not isinstance(experiments, list):
            raise PonSimParameterException("'experiments' must be a list.")
        self.experiments = [_experiment_section(e, i) for i, e in enumerate(experiments, 1)]
        self._doc = copy.deepcopy(doc)

    def with_seed(self, seed):
        """Copy whose delay seed is replaced by ``seed``."""
        doc = copy.deepcopy(self._doc)
        doc.setdefault("delays", {})
        doc["delays"] = dict(doc["delays"] or {}, seed=seed)
        return ScenarioConfig(doc, self.source)

    def check(self):
        '''Enforces the cross-section rules.

        Raises
        ------
        PonSimParameterException
            Jitter without a seed
        '''
        if self.delays["jitter_fraction"] and self.delays["seed"] is None:
            raise PonSimParameterException("Scenario {} sets jitter_fraction > 0 without a seed.".format(self.name))
        for spec in self.experiments:
            kind = spec["kind"]
            if kind == "ping" and spec["pairs"] not in (None, "all-servers"):
                raise PonSimParameterException("Experiment {}: 'pairs' must be 'all-servers'.".format(spec["index"]))
            if kind in ("traceroute", "stream") or (kind == "ping" and spec["pairs"] is None):
                for key in ("src", "dst"):
                    if spec[key] is None:
                        raise PonSimParameterException("Experiment {} ({}) needs '{}'.".format(
                            spec["index"], kind, key))
            if kind == "stream" and spec["rate_bps"] is None:
                raise PonSimParameterException("Experiment {} (stream) needs 'rate_bps'.".format(spec["index"]))

    def delay_profile(self):
        d = self.delays
        return DelayProfile(d["propagation_us_per_km"], d["forward_us"], d["jitter_fraction"], d["seed"])

    def __repr__(self):
        return "ScenarioConfig({}, {} experiments)".format(self.name, len(self.experiments))


def _topology_section(section):
    if not isinstance(section, dict):
        raise PonSimParameterException("Scenario needs a 'topology' mapping.")
    unknown = sorted(set(section) - {"builder", "explicit"})
    if unknown:
        raise PonSimParameterException("Unknown key(s) in 'topology': {}".format(", ".join(map(str, unknown))))
    if ("builder" in section) == ("explicit" in section):
        raise PonSimParameterException("'topology' needs exactly one of 'builder' or 'explicit'.")
    if "builder" in section:
        return {"builder": set_defaults(section["builder"], BUILDER_DEFAULTS, "topology.builder")}
    if not isinstance(section["explicit"], dict):
        raise PonSimParameterException("'topology.explicit' must be a mapping.")
    return {"explicit": copy.deepcopy(section["explicit"])}


def _experiment_section(spec, index):
    if not isinstance(spec, dict) or "kind" not in spec:
        raise PonSimParameterException("Experiment {} must be a mapping with a 'kind'.".format(index))
    kind = spec["kind"]
    if kind not in EXPERIMENT_DEFAULTS:
        raise PonSimParameterException("Experiment {} has unknown kind {!r}; expected one of {}.".format(
            index, kind, ", ".join(EXPERIMENT_DEFAULTS)))
    filled = set_defaults(spec, EXPERIMENT_DEFAULTS[kind], "experiments[{}]".format(index))
    filled["index"] = index
    if filled["name"] is None:
        filled["name"] = kind
    return filled


def parse_scenario(text, source="<string>"):
    '''Parses a scenario from YAML text.

    Raises
    ------
    PonSimParseException
        YAML syntax error; the message carries line and column
    PonSimParameterException
        Unknown or malformed sections
    '''
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise PonSimParseException("{}: {}".format(source, yaml_error_message(e))) from e
    return ScenarioConfig(doc, source)


def preset_text(name):
    if name not in PRESETS:
        raise PonSimParameterException("No preset named {!r}; presets are {}.".format(name, ", ".join(PRESETS)))
    return pkgutil.get_data(__name__.rsplit(".", 1)[0], "presets/{}.yaml".format(name)).decode("utf-8")


def load_scenario(path_or_preset):
    '''Loads a scenario file, or a shipped preset when no such file exists.

    Parameters
    ----------
    path_or_preset: str

    Returns
    -------
    config: :class:`ScenarioConfig`
    '''
    if os.path.isfile(path_or_preset):
        with open(path_or_preset) as fi:
            return parse_scenario(fi.read(), path_or_preset)
    if path_or_preset in PRESETS:
        return parse_scenario(preset_text(path_or_preset), path_or_preset)
    raise PonSimParameterException("{} is neither a file nor a preset ({}).".format(path_or_preset,
                                                                                   ", ".join(PRESETS)))


def build_topology(config):
    '''Topology of a scenario: built or imported, core chain attached, failures applied.'''
    section = config.topology
    if "builder" in section:
        t = build_cell(**section["builder"])
    else:
        t = topology_from_dict(section["explicit"])
    chain = config.core_chain
    if chain["spans_km"]:
        t = attach_core_chain(t, chain["spans_km"], chain["wavelengths"], chain["rate_bps"], chain["host"])
    return t


def apply_failures(config, t):
    for link in config.failures["links"]:
        t = fail_link(t, link)
    return t


def build_testbed(config):
    '''Runs the whole pipeline: topology, failures, addresses, tables.

    Addresses are carved on the intact topology so a failure never renumbers
    the network; routes are computed over the surviving links.

    Returns
    -------
    bed: :class:`~ponsim.simcore.Testbed`
    '''
    config.check()
    intact = build_topology(config)
    t = apply_failures(config, intact)
    plan = assign_addresses(intact, config.addressing["base_prefix"], config.addressing["pinned"])
    routing = config.routing
    tables = compute_tables(t, plan, routing["olt_transit"], routing["alternatives"], strict=not t.down)
    sim = config.simulation
    logger.info("Built testbed for scenario %s", config.name)
    return Testbed(t, plan, tables, config.delay_profile(), sim["queue_capacity"], sim["probe_bytes"])
