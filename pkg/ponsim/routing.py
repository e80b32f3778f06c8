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

"""Static routing over the routing layer of a topology.

Gateway-servers, relay servers, the OLT and WDM core nodes forward packets;
every other server and the display host are end points. Routes minimise the
L3 hop count first and the fiber length second, and equal-cost choices go to
the lowest next-hop id, so tables are deterministic. Switches, media
converters, ONUs and splitters never appear as hops, although resolved paths
list them.
"""
import itertools
import logging
from collections import OrderedDict, namedtuple
from functools import total_ordering

import networkx as nx

from .ponsim_exceptions import *
from .addressing import SubnetRole
from .topology import RACK_KINDS, NodeKind
from .utils import natural_key

logger = logging.getLogger(__name__)

HOP_WEIGHT = 10 ** 12
MAX_CANDIDATE_PATHS = 32
DEFAULT_ALTERNATIVES = 3

RouteEntry = namedtuple("RouteEntry", ["prefix", "next_hop", "interface", "via"])
RouteEntry.__doc__ = "One table row; ``next_hop`` and ``via`` are None for connected subnets."


def _weight(length_km):
    return HOP_WEIGHT + int(round(length_km * 1e6))


@total_ordering
class Path(object):
    """Resolved path between two nodes.

    Paths order by L3 hop count, then by fiber length.

    Attributes
    ----------
    nodes: list of str
        Every device from source to destination
    links: list of str
        Link ids between consecutive nodes
    l3_hops: list of str
        Routing-layer nodes after the source, ending with the destination
    length_km: float
        Total fiber length
    """

    def __init__(self, nodes, links, l3_hops, length_km=0.0):
        self.nodes = list(nodes)
        self.links = list(links)
        self.l3_hops = list(l3_hops)
        self.length_km = length_km

    @property
    def hop_count(self):
        return len(self.l3_hops)

    @property
    def source(self):
        return self.nodes[0]

    @property
    def destination(self):
        return self.nodes[-1]

    def __eq__(self, other):
        if not isinstance(other, Path):
            return NotImplemented
        return self.nodes == other.nodes and self.links == other.links

    def __lt__(self, other):
        return (self.hop_count, self.length_km, [natural_key(n) for n in self.nodes]) < \
            (other.hop_count, other.length_km, [natural_key(n) for n in other.nodes])

    def __hash__(self):
        return hash((tuple(self.nodes), tuple(self.links)))

    def __repr__(self):
        return "Path({})".format(" -> ".join(self.nodes))

    def __str__(self):
        return "{} ({} hops, {:.3f} km)".format(" -> ".join([self.source] + self.l3_hops), self.hop_count,
                                               self.length_km)


class RoutingTables(object):
    """Per-node routing tables plus ranked rack-to-rack alternatives.

    Attributes
    ----------
    entries: OrderedDict
        node id -> list of :class:`RouteEntry`, most specific prefix first
    alternatives: OrderedDict
        (source rack, destination rack) -> list of :class:`Path`
    unreachable: OrderedDict
        node id -> list of prefixes with no usable route
    plan: :class:`~ponsim.addressing.AddressPlan`
    olt_transit: bool
        Whether rack-to-rack traffic may cross the OLT
    """

    def __init__(self, entries, alternatives, unreachable, plan, olt_transit=True, k=DEFAULT_ALTERNATIVES):
        self.entries = entries
        self.alternatives = alternatives
        self.unreachable = unreachable
        self.plan = plan
        self.olt_transit = olt_transit
        self.k = k

    def lookup(self, node, address):
        '''Longest-prefix match of ``address`` in the table of ``node``; None when nothing matches.'''
        for entry in self.entries.get(node, []):
            if address in entry.prefix:
                return entry
        return None

    def unreachable_prefixes(self):
        return sorted({p for prefixes in self.unreachable.values() for p in prefixes},
                      key=lambda p: (int(p.network_address), p.prefixlen))

    def __eq__(self, other):
        if not isinstance(other, RoutingTables):
            return NotImplemented
        return (self.entries == other.entries and self.alternatives == other.alternatives
                and self.unreachable == other.unreachable)

    def report(self):
        lines = []
        for node, entries in self.entries.items():
            lines.append("{}:".format(node))
            for e in entries:
                target = "connected" if e.next_hop is None else "via {} ({})".format(e.via, e.next_hop)
                lines.append("    {} {} dev {}".format(e.prefix, target, e.interface))
        for node, prefixes in self.unreachable.items():
            if prefixes:
                lines.append("{} cannot reach: {}".format(node, ", ".join(str(p) for p in prefixes)))
        return "\n".join(lines) + "\n"


def _l3_graph(t):
    W = nx.Graph()
    for u, peers in t.l3_neighbors(up_only=True).items():
        W.add_node(u)
        for v, seg in peers.items():
            W.add_edge(u, v, weight=_weight(seg.length_km))
    return W


def _attached(t, p):
    attached = OrderedDict((s.prefix, set()) for s in p.subnets)
    for node, ifaces in p.interfaces.items():
        if node not in t.nodes:
            continue
        for iface in ifaces:
            if iface.link is None or iface.link not in t.down:
                attached.setdefault(iface.subnet, set()).add(node)
    return attached


def _build_tables(t, p, olt_transit, k, strict):
    neighbors = t.l3_neighbors(up_only=True)
    W = _l3_graph(t)
    routers = {n for n in W.nodes() if t.is_router(n)}
    addressed = sorted((n for n in p.interfaces if n in neighbors), key=natural_key)
    olt = t.olt
    attached = _attached(t, p)
    entries = OrderedDict((n, []) for n in addressed)
    unreachable = OrderedDict((n, []) for n in addressed)

    for subnet in p.subnets:
        sources = attached.get(subnet.prefix, set())
        allowed = routers | sources
        dist = nx.multi_source_dijkstra_path_length(W.subgraph(allowed), sources) if sources else {}
        rack_dist = None
        if not olt_transit and olt in allowed and olt not in sources and \
                subnet.role in (SubnetRole.INTRA_RACK, SubnetRole.INTER_RACK):
            rack_dist = nx.multi_source_dijkstra_path_length(W.subgraph(allowed - {olt}), sources) if sources else {}
        for n in addressed:
            if n in sources:
                iface = p.interface_on(n, subnet.prefix)
                entries[n].append(RouteEntry(subnet.prefix, None, iface.name, None))
                continue
            use = rack_dist if rack_dist is not None and t.nodes[n].kind in RACK_KINDS else dist
            candidates = [(W[n][m]['weight'] + use[m], natural_key(m), m) for m in neighbors[n] if m in use]
            shared = None
            for _, _, m in sorted(candidates):
                shared = p.shared_interface(n, m, neighbors[n][m].links)
                if shared is not None:
                    break
            if shared is None:
                unreachable[n].append(subnet.prefix)
                continue
            entries[n].append(RouteEntry(subnet.prefix, m, shared[0].name, shared[1].address.ip))

    for n in addressed:
        entries[n].sort(key=lambda e: (-e.prefix.prefixlen, int(e.prefix.network_address)))
    if strict:
        for n, prefixes in unreachable.items():
            if prefixes:
                raise PonSimUnreachableSubnetException("{} has no route to {}.".format(n, prefixes[0]))

    alternatives = OrderedDict()
    for a, b in itertools.permutations(t.racks(), 2):
        alternatives[(a, b)] = alternative_paths(t, p, a, b, k)
    tables = RoutingTables(entries, alternatives, unreachable, p, olt_transit, k)
    logger.info("Computed tables for %d nodes over %d subnets", len(addressed), len(p.subnets))
    return tables


def compute_tables(t, p, olt_transit=True, k=DEFAULT_ALTERNATIVES, strict=True):
    '''Static routing tables for every addressed node.

    Parameters
    ----------
    t: :class:`~ponsim.topology.Topology`
        Links marked down are avoided
    p: :class:`~ponsim.addressing.AddressPlan`
    olt_transit: bool, optional
        Let rack-to-rack traffic cross the OLT when it is the better route
    k: int, optional
        Number of ranked alternatives kept per rack pair
    strict: bool, optional
        Raise on the first unreachable subnet instead of listing it in
        ``unreachable``

    Returns
    -------
    tables: :class:`RoutingTables`

    Raises
    ------
    PonSimUnreachableSubnetException
        Some node cannot reach some subnet
    '''
    return _build_tables(t, p, olt_transit, k, strict)


def reroute_on_failure(tables, t, p):
    '''Recomputes ``tables`` for a topology with links down.

    Never raises for lost subnets; they are listed in ``unreachable`` of the
    result instead.
    '''
    return _build_tables(t, p, tables.olt_transit, tables.k, strict=False)


def resolve_path(tables, t, src, dst):
    '''Follows next hops from ``src`` until ``dst``.

    Parameters
    ----------
    tables: :class:`RoutingTables`
    t: :class:`~ponsim.topology.Topology`
    src: str
    dst: str

    Returns
    -------
    path: :class:`Path`

    Raises
    ------
    PonSimUnknownNodeException
    PonSimUnaddressedNodeException
    PonSimNoRouteException
        A node has no matching route or no usable link to its next hop
    PonSimLoopDetectedException
        The walk did not end within the node count
    '''
    for node in (src, dst):
        if node not in t.nodes:
            raise PonSimUnknownNodeException("No node named {!r}.".format(node))
    plan = tables.plan
    plan.primary_address(src)
    address = plan.primary_address(dst)
    if src == dst:
        return Path([src], [], [])
    neighbors = t.l3_neighbors(up_only=True)
    nodes, links, hops = [src], [], []
    length = 0.0
    current = src
    for _ in range(len(t.nodes)):
        entry = tables.lookup(current, address)
        if entry is None:
            raise PonSimNoRouteException("{} has no route to {} ({}).".format(current, dst, address))
        nxt = dst if entry.next_hop is None else entry.next_hop
        segment = neighbors.get(current, {}).get(nxt)
        if segment is None:
            raise PonSimNoRouteException("{} has no usable link towards {}.".format(current, nxt))
        nodes.extend(segment.nodes[1:])
        links.extend(segment.links)
        length += segment.length_km
        hops.append(nxt)
        current = nxt
        if current == dst:
            return Path(nodes, links, hops, length)
    raise PonSimLoopDetectedException("Routing loop between {} and {}: {}".format(src, dst, hops))


def _router_path(t, router_nodes):
    neighbors = t.l3_neighbors(up_only=True)
    nodes, links, length = [router_nodes[0]], [], 0.0
    for u, v in zip(router_nodes, router_nodes[1:]):
        seg = neighbors[u][v]
        nodes.extend(seg.nodes[1:])
        links.extend(seg.links)
        length += seg.length_km
    return Path(nodes, links, router_nodes[1:], length)


def alternative_paths(t, p, src_rack, dst_rack, k=DEFAULT_ALTERNATIVES):
    '''Link-disjoint rack-to-rack routes between two racks.

    A route leaves the source rack from any of its routers (the gateway or a
    relay) and ends at the first router of the destination rack it reaches.
    Candidates come from Yen's k-shortest simple paths over the router graph,
    ranked by hop count then fiber length, and are kept greedily when they share
    no link with an already kept route. When ``k >= 2`` a route through the OLT
    is always part of the answer if one survives the disjointness filter.

    Parameters
    ----------
    t: :class:`~ponsim.topology.Topology`
    p: :class:`~ponsim.addressing.AddressPlan`
        Unused; kept so callers pass the same triple everywhere
    src_rack: str
    dst_rack: str
    k: int, optional

    Returns
    -------
    paths: list of :class:`Path`
        At most ``k``, best first

    Raises
    ------
    PonSimUnknownNodeException
        Unknown rack
    PonSimParameterException
        ``k < 1``
    '''
    racks = t.racks()
    for rack in (src_rack, dst_rack):
        if rack not in racks:
            raise PonSimUnknownNodeException("No rack named {!r}.".format(rack))
    if k < 1:
        raise PonSimParameterException("k must be >= 1.")
    if src_rack == dst_rack:
        return []
    W = _l3_graph(t)
    ends = {rack: [n for n in t.rack_members(rack) if t.is_router(n) and n in W] for rack in (src_rack, dst_rack)}
    if not ends[src_rack] or not ends[dst_rack]:
        return []
    R = nx.Graph(W.subgraph([n for n in W.nodes() if t.is_router(n)]))
    for rack in (src_rack, dst_rack):
        R.remove_edges_from(itertools.combinations(ends[rack], 2))
    source, sink = (src_rack, "source"), (dst_rack, "sink")
    R.add_edges_from(((source, n) for n in ends[src_rack]), weight=0)
    R.add_edges_from(((n, sink) for n in ends[dst_rack]), weight=0)
    try:
        walks = [rp[1:-1] for rp in
                 itertools.islice(nx.shortest_simple_paths(R, source, sink, weight='weight'), MAX_CANDIDATE_PATHS)]
    except nx.NetworkXNoPath:
        return []
    # a rack is left once and entered once
    candidates = [_router_path(t, w) for w in walks
                  if not set(w[1:]) & set(ends[src_rack]) and not set(w[:-1]) & set(ends[dst_rack])]
    chosen, used = [], set()
    for path in sorted(candidates):
        if used & set(path.links):
            continue
        chosen.append(path)
        used |= set(path.links)
    ranked = chosen[:k]
    olt = t.olt
    if k >= 2 and olt is not None and not any(olt in path.l3_hops for path in ranked):
        via_olt = [path for path in chosen if olt in path.l3_hops]
        if via_olt:
            ranked = ranked[:k - 1] + via_olt[:1]
    return ranked


def route_lines(tables, node):
    """``route <prefix> via <next-hop>`` lines of ``node``, connected subnets omitted."""
    return ["route {} via {}".format(e.prefix, e.via) for e in tables.entries.get(node, []) if e.next_hop is not None]


def export_tables(tables, node=None):
    '''Route lines of one node, or of every node separated by ``# <node>`` headers.'''
    if node is not None:
        return "\n".join(route_lines(tables, node)) + "\n"
    chunks = []
    for n in tables.entries:
        chunks.append("# {}\n".format(n) + "".join(line + "\n" for line in route_lines(tables, n)))
    return "".join(chunks)
