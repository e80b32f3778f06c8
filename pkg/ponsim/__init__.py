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

'''ponsim: a deterministic packet-level simulator of a server-centric PON data centre and its IP over WDM core.'''

from .topology import (Topology, NodeSpec, LinkSpec, NodeKind, Medium, Provisioning, build_cell, attach_core_chain,
                       fail_link, restore_link, validate, topology_from_yaml, topology_to_yaml, draw_topology)
from .addressing import AddressPlan, assign_addresses, validate_plan, export_node_config
from .linkmodel import (DelayProfile, propagation_delay, serialization_delay, node_forward_delay, assign_wavelengths,
                        tdm_schedule)
from .routing import Path, RoutingTables, compute_tables, reroute_on_failure, resolve_path, alternative_paths
from .simcore import (Testbed, Injection, run, run_ping, run_traceroute, run_stream, all_pairs_ping, summarize,
                      trace_digest)
from .scenario import ScenarioConfig, load_scenario, parse_scenario, build_testbed
from .ponsim_exceptions import *
