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

"""Builds and validates PON-cell data-centre topologies and the IP/WDM core chain.

A cell is a set of racks. Every rack holds an electronic switch joining its
servers to one gateway-server. The gateway reaches the OLT through the rack's
ONU and a shared passive coupler (TDM) or AWGR (WDM). Racks reach each other
over optical inter-rack links framed by media converters. Those links end on
relay servers, the first server of each relay group, or on the gateway when a
rack has a single group carrying both roles. The core chain hangs off the OLT
as a line of DWDM nodes ending in a display host.

Topology values never change after construction: :func:`fail_link`,
:func:`restore_link` and :func:`attach_core_chain` return new values.
"""
import logging
import numbers
import warnings
from collections import OrderedDict, deque, namedtuple
from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType

import networkx as nx
import yaml

from .ponsim_exceptions import *
from .utils import ValidationReport, draw_mpl_graph, natural_key, validate_count

logger = logging.getLogger(__name__)

DEFAULT_RATE_BPS = 10e9
DEFAULT_WAVELENGTHS = 80
DEFAULT_INTER_RACK_KM = 0.02
DEFAULT_PON_DROP_KM = 0.005
DISPLAY_HOST = "display"


class NodeKind(str, Enum):
    SERVER = "server"
    GATEWAY_SERVER = "gateway-server"
    ELECTRONIC_SWITCH = "electronic-switch"
    MEDIA_CONVERTER = "media-converter"
    ONU = "onu"
    OLT = "olt"
    COUPLER = "coupler"
    AWGR = "awgr"
    WDM_CORE_NODE = "wdm-core-node"
    ENDPOINT_HOST = "endpoint-host"


class Medium(str, Enum):
    ELECTRICAL = "electrical"
    OPTICAL_FIBER = "optical-fiber"
    OPTICAL_BACKPLANE = "optical-backplane"


class Provisioning(str, Enum):
    COUPLER_TDM = "coupler-tdm"
    AWGR_WDM = "awgr-wdm"


RACK_KINDS = frozenset([NodeKind.SERVER, NodeKind.GATEWAY_SERVER])
ROUTER_KINDS = frozenset([NodeKind.GATEWAY_SERVER, NodeKind.OLT, NodeKind.WDM_CORE_NODE])
HOST_KINDS = frozenset([NodeKind.SERVER, NodeKind.ENDPOINT_HOST])
L3_KINDS = ROUTER_KINDS | HOST_KINDS
SPLITTER_KINDS = frozenset([NodeKind.COUPLER, NodeKind.AWGR])

TOPOLOGY_CHECKS = ("duplicate-id", "node-fields", "link-fields", "dangling-reference", "connectivity",
                   "gateway-uniqueness", "olt-facing", "inter-rack", "parallel-link")

Segment = namedtuple("Segment", ["nodes", "links", "length_km"])
Segment.__doc__ = "Physical walk between two L3 nodes through transparent devices."


def _as_enum(enum_cls, value, what):
    try:
        return enum_cls(value)
    except ValueError as e:
        raise PonSimUnknownKindException("Unknown {}: {!r}".format(what, value)) from e


@dataclass(frozen=True)
class NodeSpec:
    """A device in the topology.

    Attributes
    ----------
    id: str
        Unique identifier
    kind: NodeKind
        Device kind
    rack: str or None
        Rack identifier, set only for servers and gateway-servers
    group: int or None
        Server group index within the rack, set only for servers and gateway-servers
    delay_override: float or None
        Forwarding delay in microseconds replacing the per-kind default
    """
    id: str
    kind: NodeKind
    rack: str = None
    group: int = None
    delay_override: float = None

    def __post_init__(self):
        object.__setattr__(self, 'kind', _as_enum(NodeKind, self.kind, "node kind"))

    @property
    def is_l3(self):
        return self.kind in L3_KINDS


@dataclass(frozen=True)
class LinkSpec:
    """A bidirectional link.

    Attributes
    ----------
    id: str
        Unique identifier
    endpoints: tuple of str
        The two node ids joined by the link
    medium: Medium
        Transmission medium
    length_km: float
        Length in kilometers, 0 for in-rack cabling
    rate_bps: float
        Line rate in bits/second
    wavelengths: int or None
        Wavelength channel count on WDM segments
    """
    id: str
    endpoints: tuple
    medium: Medium = Medium.ELECTRICAL
    length_km: float = 0.0
    rate_bps: float = DEFAULT_RATE_BPS
    wavelengths: int = None

    def __post_init__(self):
        object.__setattr__(self, 'endpoints', tuple(self.endpoints))
        object.__setattr__(self, 'medium', _as_enum(Medium, self.medium, "link medium"))

    def other(self, node):
        a, b = self.endpoints
        return b if node == a else a


class Topology(object):
    """Typed graph of nodes and links.

    Links listed in ``down`` stay in :attr:`links` for reporting but are left out
    of :attr:`up_graph` and :attr:`adjacency`.

    Attributes
    ----------
    nodes: mapping of str to :class:`NodeSpec`
    links: mapping of str to :class:`LinkSpec`
    provisioning: Provisioning
        How the ONUs share the OLT
    down: frozenset of str
        Ids of links currently marked down
    """

    def __init__(self, nodes, links, provisioning=Provisioning.COUPLER_TDM, down=()):
        self._node_list = tuple(nodes)
        self._link_list = tuple(links)
        self._nodes = OrderedDict()
        for node in self._node_list:
            self._nodes.setdefault(node.id, node)
        self._links = OrderedDict()
        for link in self._link_list:
            self._links.setdefault(link.id, link)
        self.provisioning = _as_enum(Provisioning, provisioning, "provisioning")
        self.down = frozenset(down)
        self._cache = {}

    @property
    def nodes(self):
        return MappingProxyType(self._nodes)

    @property
    def links(self):
        return MappingProxyType(self._links)

    def _replace(self, **changes):
        fields = dict(nodes=self._node_list, links=self._link_list, provisioning=self.provisioning, down=self.down)
        fields.update(changes)
        return Topology(**fields)

    def __eq__(self, other):
        if not isinstance(other, Topology):
            return NotImplemented
        return (self._node_list == other._node_list and self._link_list == other._link_list
                and self.provisioning == other.provisioning and self.down == other.down)

    def __hash__(self):
        return hash((self._node_list, self._link_list, self.provisioning, self.down))

    def __repr__(self):
        return "Topology({} nodes, {} links, {} down, {})".format(len(self._nodes), len(self._links), len(self.down),
                                                                  self.provisioning.value)

    @property
    def graph(self):
        '''networkx graph of every well-formed link; edges carry ``link`` and ``down``.

        Only the first link between two nodes becomes an edge. The rest are
        listed by :attr:`parallel_links` and fail :func:`validate`.
        '''
        if 'graph' not in self._cache:
            G = nx.Graph()
            parallel = []
            for node in self._nodes.values():
                G.add_node(node.id, kind=node.kind.value)
            for link in self._links.values():
                a, b = link.endpoints
                if a == b or a not in self._nodes or b not in self._nodes:
                    continue
                if G.has_edge(a, b):
                    parallel.append(link.id)
                    continue
                G.add_edge(a, b, link=link.id, length_km=link.length_km, down=link.id in self.down)
            self._cache['graph'] = G
            G.graph['parallel'] = tuple(parallel)
        return self._cache['graph']

    @property
    def parallel_links(self):
        """Ids of links duplicating the endpoints of an earlier link."""
        return self.graph.graph['parallel']

    @property
    def up_graph(self):
        if 'up_graph' not in self._cache:
            G = self.graph
            self._cache['up_graph'] = nx.restricted_view(G, [], [(u, v) for u, v, d in G.edges(data=True) if d['down']])
        return self._cache['up_graph']

    @property
    def adjacency(self):
        """Neighbor ids per node over up links, naturally sorted."""
        if 'adjacency' not in self._cache:
            G = self.up_graph
            self._cache['adjacency'] = {n: sorted(G.neighbors(n), key=natural_key) for n in G.nodes()}
        return self._cache['adjacency']

    def link_between(self, a, b):
        data = self.graph.get_edge_data(a, b)
        return None if data is None else self._links[data['link']]

    def nodes_of_kind(self, *kinds):
        kinds = {NodeKind(k) for k in kinds}
        return sorted((n.id for n in self._nodes.values() if n.kind in kinds), key=natural_key)

    def racks(self):
        return sorted({n.rack for n in self._nodes.values() if n.kind in RACK_KINDS and n.rack is not None},
                      key=natural_key)

    def rack_members(self, rack):
        return sorted((n.id for n in self._nodes.values() if n.kind in RACK_KINDS and n.rack == rack),
                      key=natural_key)

    def gateway(self, rack):
        gateways = [n.id for n in self._nodes.values() if n.kind == NodeKind.GATEWAY_SERVER and n.rack == rack]
        if not gateways:
            raise PonSimUnknownNodeException("Rack {} has no gateway-server.".format(rack))
        return sorted(gateways, key=natural_key)[0]

    @property
    def olt(self):
        olts = self.nodes_of_kind(NodeKind.OLT)
        return olts[0] if olts else None

    @property
    def routers(self):
        """Ids of every forwarding node: gateway-servers, the OLT, core nodes and relay servers."""
        if 'routers' not in self._cache:
            found = {n for n, spec in self._nodes.items() if spec.kind in ROUTER_KINDS}
            for rack in self.racks():
                found.update(self.relays(rack))
            self._cache['routers'] = frozenset(found)
        return self._cache['routers']

    def is_router(self, node):
        return node in self.routers

    def relays(self, rack):
        '''Plain servers of ``rack`` holding an inter-rack attachment.

        Link state is ignored, so a relay keeps its role while its link is down.
        '''
        found = []
        for m in self.rack_members(rack):
            if self._nodes[m].kind != NodeKind.SERVER:
                continue
            peers = self.l3_neighbors(up_only=False)[m]
            if any(self._nodes[p].kind in RACK_KINDS and self._nodes[p].rack != rack for p in peers):
                found.append(m)
        return found

    def l3_neighbors(self, up_only=True):
        """Routing-layer adjacency.

        Two L3 nodes are neighbors when a walk through transparent devices
        (switches, media converters, ONUs, couplers, AWGRs) joins them. Through a
        coupler or AWGR an ONU only reaches the OLT side and the OLT side reaches
        every ONU.

        Parameters
        ----------
        up_only: bool, optional
            Ignore links marked down

        Returns
        -------
        neighbors: dict
            L3 node id -> OrderedDict of neighbor id -> :class:`Segment`
        """
        key = ('l3', up_only)
        if key not in self._cache:
            self._cache[key] = {n: self._transparent_walks(n, up_only) for n, spec in self._nodes.items() if spec.is_l3}
        return self._cache[key]

    def _transparent_walks(self, start, up_only):
        G = self.up_graph if up_only else self.graph
        found = OrderedDict()
        visited = {start}
        queue = deque([(start, None, (start,), ())])
        while queue:
            node, prev, walk, links = queue.popleft()
            for nbr in self._allowed_next(G, node, prev):
                if nbr in visited:
                    continue
                link_id = G.edges[node, nbr]['link']
                step_walk, step_links = walk + (nbr,), links + (link_id,)
                if self._nodes[nbr].is_l3:
                    if nbr not in found:
                        length = sum(self._links[l].length_km for l in step_links)
                        found[nbr] = Segment(step_walk, step_links, length)
                    continue
                visited.add(nbr)
                queue.append((nbr, node, step_walk, step_links))
        return found

    def _allowed_next(self, G, node, prev):
        nbrs = sorted(G.neighbors(node), key=natural_key)
        if prev is None or self._nodes[node].kind not in SPLITTER_KINDS:
            return nbrs
        if self._nodes[prev].kind == NodeKind.ONU:
            return [n for n in nbrs if self._nodes[n].kind != NodeKind.ONU]
        return [n for n in nbrs if self._nodes[n].kind == NodeKind.ONU]


def _link(a, b, medium=Medium.ELECTRICAL, length_km=0.0, rate_bps=DEFAULT_RATE_BPS, wavelengths=None):
    return LinkSpec("{}--{}".format(a, b), (a, b), medium, length_km, rate_bps, wavelengths)


def _inter_rack_pairs(racks, wiring):
    n = len(racks)
    if wiring == "mesh":
        return [(racks[i], racks[j]) for i in range(n) for j in range(i + 1, n)]
    if n < 2:
        return []
    if n == 2:
        return [(racks[0], racks[1])]
    return [(racks[i], racks[(i + 1) % n]) for i in range(n)]


def _relay_ends(racks, pairs, groups_per_rack):
    """(rack, peer) -> node id terminating the link from ``rack`` to ``peer``."""
    peers = {rack: [] for rack in racks}
    for a, b in pairs:
        peers[a].append(b)
        peers[b].append(a)
    ends = {}
    for rack, others in peers.items():
        for k, peer in enumerate(sorted(others, key=natural_key)):
            if groups_per_rack == 1:
                ends[rack, peer] = rack + "-gw"
            else:
                ends[rack, peer] = "{}-g{}-s1".format(rack, 2 + k % (groups_per_rack - 1))
    return ends


def build_cell(racks, groups_per_rack, servers_per_group, provisioning=Provisioning.COUPLER_TDM, wiring="mesh",
               media_converters=True, inter_rack_km=DEFAULT_INTER_RACK_KM, pon_drop_km=DEFAULT_PON_DROP_KM,
               rate_bps=DEFAULT_RATE_BPS, wavelengths=DEFAULT_WAVELENGTHS):
    '''Builds one PON cell.

    Every rack gets a switch, a gateway-server and ``groups_per_rack`` groups of
    ``servers_per_group`` servers. Group 1 of every rack is the OLT-facing group:
    its gateway-server connects to the rack's ONU, and the ONUs share a coupler
    or an AWGR towards the single OLT. The remaining groups are relay groups, one
    per peer rack, so a full inter-rack mesh needs ``groups_per_rack - 1 >= racks - 1``.
    The first server of a relay group is its relay: peer racks are handed to
    relay groups in rack order, wrapping round when a ring has more peers than
    relay groups. A rack with a single group carries both roles on its gateway.
    Inter-rack links join two relays over optical fiber, with a media converter
    at each end when ``media_converters`` is set.

    Parameters
    ----------
    racks: int
        Number of racks
    groups_per_rack: int
        Server groups per rack
    servers_per_group: int
        Servers per group
    provisioning: str or Provisioning, optional
        ``coupler-tdm`` or ``awgr-wdm``
    wiring: str, optional
        ``mesh`` or ``ring``
    media_converters: bool, optional
        Insert a media converter at each end of every inter-rack link
    inter_rack_km: float, optional
        Fiber length of each inter-rack link
    pon_drop_km: float, optional
        Fiber length of each ONU drop and of the splitter-OLT feeder
    rate_bps: float, optional
        Line rate of every link
    wavelengths: int, optional
        Channel count on AWGR segments

    Returns
    -------
    topology: :class:`Topology`

    Raises
    ------
    PonSimParameterException
        A count is zero or a knob is out of range

    Warns
    -----
    InfeasibleWiringWarning
        A mesh was requested without enough relay groups; a ring is built instead

    Examples
    --------
    >>> t = build_cell(3, 1, 3, "coupler-tdm", wiring="ring")
    >>> len(t.nodes_of_kind("server"))
    9
    '''
    racks = validate_count("racks", racks)
    groups_per_rack = validate_count("groups_per_rack", groups_per_rack)
    servers_per_group = validate_count("servers_per_group", servers_per_group)
    provisioning = _as_enum(Provisioning, provisioning, "provisioning")
    if wiring not in ("mesh", "ring"):
        raise PonSimParameterException("wiring must be 'mesh' or 'ring', got {!r}.".format(wiring))
    if inter_rack_km < 0 or pon_drop_km < 0:
        raise PonSimParameterException("Link lengths must be >= 0.")
    if rate_bps <= 0:
        raise PonSimParameterException("rate_bps must be > 0.")
    wavelengths = validate_count("wavelengths", wavelengths)
    if wiring == "mesh" and racks > 1 and groups_per_rack - 1 < racks - 1:
        warnings.warn(
            "A full mesh of {} racks needs {} relay groups per rack but only {} exist; wiring a ring instead.".format(
                racks, racks - 1, groups_per_rack - 1), InfeasibleWiringWarning, stacklevel=2)
        wiring = "ring"

    nodes, links = [], []
    rack_ids = ["r{}".format(i) for i in range(1, racks + 1)]
    splitter_kind = NodeKind.COUPLER if provisioning == Provisioning.COUPLER_TDM else NodeKind.AWGR
    splitter = splitter_kind.value
    channels = wavelengths if provisioning == Provisioning.AWGR_WDM else None
    for rack in rack_ids:
        switch, gw, onu = rack + "-sw", rack + "-gw", rack + "-onu"
        nodes.append(NodeSpec(switch, NodeKind.ELECTRONIC_SWITCH))
        nodes.append(NodeSpec(gw, NodeKind.GATEWAY_SERVER, rack=rack, group=1))
        links.append(_link(gw, switch, rate_bps=rate_bps))
        for g in range(1, groups_per_rack + 1):
            for s in range(1, servers_per_group + 1):
                server = "{}-g{}-s{}".format(rack, g, s)
                nodes.append(NodeSpec(server, NodeKind.SERVER, rack=rack, group=g))
                links.append(_link(server, switch, rate_bps=rate_bps))
        nodes.append(NodeSpec(onu, NodeKind.ONU))
        links.append(_link(gw, onu, rate_bps=rate_bps))
        links.append(_link(onu, splitter, Medium.OPTICAL_FIBER, pon_drop_km, rate_bps, channels))
    nodes.append(NodeSpec(splitter, splitter_kind))
    nodes.append(NodeSpec("olt", NodeKind.OLT))
    links.append(_link(splitter, "olt", Medium.OPTICAL_FIBER, pon_drop_km, rate_bps, channels))

    pairs = _inter_rack_pairs(rack_ids, wiring)
    relay = _relay_ends(rack_ids, pairs, groups_per_rack)
    for a, b in pairs:
        end_a, end_b = relay[a, b], relay[b, a]
        if media_converters:
            mc_a, mc_b = "mc-{}-{}".format(a, b), "mc-{}-{}".format(b, a)
            nodes.append(NodeSpec(mc_a, NodeKind.MEDIA_CONVERTER))
            nodes.append(NodeSpec(mc_b, NodeKind.MEDIA_CONVERTER))
            links.append(_link(end_a, mc_a, rate_bps=rate_bps))
            links.append(_link(mc_a, mc_b, Medium.OPTICAL_FIBER, inter_rack_km, rate_bps))
            links.append(_link(mc_b, end_b, rate_bps=rate_bps))
        else:
            links.append(_link(end_a, end_b, Medium.OPTICAL_FIBER, inter_rack_km, rate_bps))

    topology = Topology(nodes, links, provisioning)
    logger.info("Built %s cell: %d racks x %d groups x %d servers, %s wiring", provisioning.value, racks,
                groups_per_rack, servers_per_group, wiring)
    return topology


def attach_core_chain(t, spans, wavelengths=DEFAULT_WAVELENGTHS, rate_bps=DEFAULT_RATE_BPS, host=DISPLAY_HOST):
    '''Appends a line of WDM core nodes to the OLT.

    Span ``i`` is the fiber between the previous node (the OLT for the first span)
    and ``core<i+1>``. The last core node carries the endpoint host over a
    zero-length electrical link.

    Parameters
    ----------
    t: :class:`Topology`
        Topology holding exactly one OLT
    spans: list of float
        Fiber lengths in kilometers, each > 0
    wavelengths: int, optional
        Channel count of every core fiber
    rate_bps: float, optional
        Line rate of the chain
    host: str, optional
        Id of the endpoint host

    Returns
    -------
    topology: :class:`Topology`

    Raises
    ------
    PonSimSpanException
        ``spans`` is empty or holds a non-positive length
    PonSimParameterException
        The topology has no OLT or already carries a chain
    '''
    spans = list(spans) if spans is not None else []
    if not spans:
        raise PonSimSpanException("At least one span is required.")
    for i, span in enumerate(spans):
        if isinstance(span, bool) or not isinstance(span, numbers.Real) or not span > 0:
            raise PonSimSpanException("Span {} must be a length > 0 km, got {!r}.".format(i, span))
    olt = t.olt
    if olt is None:
        raise PonSimParameterException("The core chain must be rooted at an OLT.")
    if "core1" in t.nodes or host in t.nodes:
        raise PonSimParameterException("Topology already carries a core chain.")
    nodes, links = [], []
    prev = olt
    for i, span in enumerate(spans, 1):
        core = "core{}".format(i)
        nodes.append(NodeSpec(core, NodeKind.WDM_CORE_NODE))
        links.append(_link(prev, core, Medium.OPTICAL_FIBER, float(span), rate_bps, wavelengths))
        prev = core
    nodes.append(NodeSpec(host, NodeKind.ENDPOINT_HOST))
    links.append(_link(prev, host, rate_bps=rate_bps))
    logger.info("Attached core chain of %d spans, %.3f km", len(spans), sum(spans))
    return t._replace(nodes=t._node_list + tuple(nodes), links=t._link_list + tuple(links))


def core_chain(t):
    """Ids of the core nodes from the OLT outwards."""
    return sorted(t.nodes_of_kind(NodeKind.WDM_CORE_NODE), key=natural_key)


def fail_link(t, link):
    '''Returns a copy of ``t`` with ``link`` marked down.

    Raises
    ------
    PonSimUnknownLinkException
        No link with that id
    '''
    if link not in t.links:
        raise PonSimUnknownLinkException("No link named {!r}.".format(link))
    return t._replace(down=t.down | {link})


def restore_link(t, link):
    """Inverse of :func:`fail_link`."""
    if link not in t.links:
        raise PonSimUnknownLinkException("No link named {!r}.".format(link))
    return t._replace(down=t.down - {link})


def links_of(t, node_ids):
    """Ids of every link touching one of ``node_ids``."""
    node_ids = set(node_ids)
    return [l.id for l in t.links.values() if node_ids & set(l.endpoints)]


def _walk_converters(t, G, node, prev):
    steps = 0
    while node in t.nodes and t.nodes[node].kind == NodeKind.MEDIA_CONVERTER:
        onward = [n for n in G.neighbors(node) if n != prev]
        if len(onward) != 1 or steps > len(t.nodes):
            return None
        prev, node = node, onward[0]
        steps += 1
    return node


def validate(t):
    '''Checks every topology invariant.

    Parameters
    ----------
    t: :class:`Topology`

    Returns
    -------
    report: :class:`~ponsim.utils.ValidationReport`
        One entry per check listing offending node, link or rack ids
    '''
    report = ValidationReport("topology", TOPOLOGY_CHECKS)
    seen = set()
    for node in t._node_list:
        if node.id in seen:
            report.fail("duplicate-id", node.id)
        seen.add(node.id)
    seen = set()
    for link in t._link_list:
        if link.id in seen:
            report.fail("duplicate-id", link.id)
        seen.add(link.id)

    for node in t.nodes.values():
        rack_bound = node.kind in RACK_KINDS
        if rack_bound != (node.rack is not None) or rack_bound != (node.group is not None):
            report.fail("node-fields", node.id)
        if node.delay_override is not None and node.delay_override < 0:
            report.fail("node-fields", node.id)

    for link in t.links.values():
        a, b = link.endpoints
        if a == b or link.length_km < 0 or not link.rate_bps > 0:
            report.fail("link-fields", link.id)
        if link.wavelengths is not None and link.wavelengths < 1:
            report.fail("link-fields", link.id)
        if link.length_km > 0 and link.medium != Medium.OPTICAL_FIBER:
            report.fail("link-fields", link.id)
        for end in (a, b):
            if end not in t.nodes:
                report.fail("dangling-reference", "{}:{}".format(link.id, end))
    for d in sorted(t.down):
        if d not in t.links:
            report.fail("dangling-reference", d)
    for link in t.parallel_links:
        report.fail("parallel-link", link)

    G = t.up_graph
    if G.number_of_nodes() == 0:
        report.fail("connectivity", "<empty>")
    elif not nx.is_connected(G):
        root = sorted(G.nodes(), key=natural_key)[0]
        reached = nx.node_connected_component(G, root)
        for n in sorted(set(G.nodes()) - reached, key=natural_key):
            report.fail("connectivity", n)

    for rack in t.racks():
        gateways = [n for n in t.rack_members(rack) if t.nodes[n].kind == NodeKind.GATEWAY_SERVER]
        if len(gateways) != 1:
            report.fail("gateway-uniqueness", rack)
        if t.olt is not None:
            onus = {nbr for m in t.rack_members(rack) for nbr in t.graph.neighbors(m)
                    if t.nodes[nbr].kind == NodeKind.ONU}
            if len(onus) != 1:
                report.fail("olt-facing", rack)

    full = t.graph
    for switch in t.nodes_of_kind(NodeKind.ELECTRONIC_SWITCH):
        racks = {t.nodes[n].rack for n in full.neighbors(switch) if t.nodes[n].kind in RACK_KINDS}
        if len(racks) > 1:
            report.fail("inter-rack", switch)
    for u, v, data in full.edges(data=True):
        link = t.links[data['link']]
        ends = (u, v)
        if all(t.nodes[n].kind == NodeKind.MEDIA_CONVERTER for n in ends):
            ends = (_walk_converters(t, full, u, v), _walk_converters(t, full, v, u))
            if None in ends or not all(t.nodes[n].kind in RACK_KINDS for n in ends):
                report.fail("inter-rack", link.id)
                continue
            if t.nodes[ends[0]].rack == t.nodes[ends[1]].rack:
                report.fail("inter-rack", link.id)
        elif all(t.nodes[n].kind in RACK_KINDS for n in ends):
            if t.nodes[u].rack != t.nodes[v].rack and link.medium == Medium.ELECTRICAL:
                report.fail("inter-rack", link.id)
    return report


def topology_to_dict(t):
    """Canonical plain-data form of ``t`` (see docs/schema.rst)."""
    nodes = []
    for n in t._node_list:
        entry = OrderedDict([("id", n.id), ("kind", n.kind.value)])
        if n.rack is not None:
            entry["rack"] = n.rack
        if n.group is not None:
            entry["group"] = n.group
        if n.delay_override is not None:
            entry["delay_override_us"] = n.delay_override
        nodes.append(dict(entry))
    links = []
    for l in t._link_list:
        entry = OrderedDict([("id", l.id), ("endpoints", list(l.endpoints)), ("medium", l.medium.value),
                             ("length_km", float(l.length_km)), ("rate_bps", float(l.rate_bps))])
        if l.wavelengths is not None:
            entry["wavelengths"] = l.wavelengths
        links.append(dict(entry))
    return {"provisioning": t.provisioning.value, "nodes": nodes, "links": links,
            "down": sorted(t.down, key=natural_key)}


def topology_from_dict(doc):
    '''Builds a :class:`Topology` from its plain-data form.

    Raises
    ------
    PonSimParseException
        A required key is missing or a section has the wrong shape
    PonSimUnknownKindException
        Unknown node kind, medium or provisioning
    '''
    if not isinstance(doc, dict):
        raise PonSimParseException("Topology document must be a mapping.")
    try:
        nodes = [NodeSpec(n["id"], n["kind"], n.get("rack"), n.get("group"), n.get("delay_override_us"))
                 for n in doc.get("nodes", [])]
        links = [LinkSpec(l["id"], tuple(l["endpoints"]), l.get("medium", Medium.ELECTRICAL.value),
                          float(l.get("length_km", 0.0)), float(l.get("rate_bps", DEFAULT_RATE_BPS)),
                          l.get("wavelengths")) for l in doc.get("links", [])]
    except (KeyError, TypeError, ValueError) as e:
        raise PonSimParseException("Malformed topology document: {}".format(e)) from e
    pairs = {}
    for l in links:
        if len(l.endpoints) != 2:
            raise PonSimParseException("Link {} must list exactly two endpoints.".format(l.id))
        key = frozenset(l.endpoints)
        if key in pairs:
            raise PonSimParseException("Links {} and {} join the same two nodes; parallel links are not modelled."
                                       .format(pairs[key], l.id))
        pairs[key] = l.id
    return Topology(nodes, links, doc.get("provisioning", Provisioning.COUPLER_TDM.value), doc.get("down") or ())


def topology_to_yaml(t, dest=""):
    '''Returns the YAML document for ``t``. Writes to file if destination is specified.'''
    text = yaml.safe_dump(topology_to_dict(t), sort_keys=False, default_flow_style=None)
    if dest:
        with open(dest, "w") as fi:
            fi.write(text)
    return text


def topology_from_yaml(text):
    """Parses a YAML topology document, raising PonSimParseException with the location on syntax errors."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise PonSimParseException(yaml_error_message(e)) from e
    return topology_from_dict(doc)


def yaml_error_message(e):
    mark = getattr(e, 'problem_mark', None)
    problem = getattr(e, 'problem', None) or str(e)
    if mark is None:
        return "Could not parse document: {}".format(problem)
    return "Could not parse document at line {}, column {}: {}".format(mark.line + 1, mark.column + 1, problem)


def draw_topology(t, dest):
    '''Draws ``t`` to an image file with matplotlib; down links are dashed red.'''
    if not t.nodes:
        raise RuntimeError("Nothing to draw.")
    draw_mpl_graph(t.graph, dest, title=repr(t))
