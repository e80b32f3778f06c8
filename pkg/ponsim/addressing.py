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

"""IPv4 addressing plan of a cell.

Each rack owns one intra-rack subnet shared by its servers and its
gateway-server. The OLT and every OLT-facing gateway share one PON subnet.
Every inter-rack link and every core-chain link gets its own point-to-point
subnet. A rack-side router (the gateway or a relay server) holds one
intra-rack address plus one address per router it reaches outside the rack.
Where relay groups carry the inter-rack links that is exactly two: the
gateway pairs its intra-rack address with the PON one, a relay with its link.

Subnets are carved from the base prefix in a fixed order (racks by id, the PON
subnet, inter-rack links by id, core links outwards from the OLT) so a plan is
a pure function of the topology and the base prefix.
"""
import ipaddress
import logging
import math
from collections import OrderedDict, namedtuple
from enum import Enum

import networkx as nx

from .ponsim_exceptions import *
from .topology import HOST_KINDS, RACK_KINDS, NodeKind, SPLITTER_KINDS
from .utils import ValidationReport, natural_key

logger = logging.getLogger(__name__)

DEFAULT_BASE_PREFIX = "10.0.0.0/16"
SHARED_PREFIXLEN = 24
POINT_TO_POINT_PREFIXLEN = 30
DEFAULT_ROUTE = ipaddress.IPv4Network("0.0.0.0/0")

PLAN_CHECKS = ("overlap", "duplicate-address", "missing-gateway", "address-off-link", "address-count")


class SubnetRole(str, Enum):
    INTRA_RACK = "intra-rack"
    INTER_RACK = "inter-rack"
    PON = "pon"
    CORE = "core"


_ROLE_ORDER = [SubnetRole.INTRA_RACK, SubnetRole.PON, SubnetRole.INTER_RACK, SubnetRole.CORE]

InterfaceAddress = namedtuple("InterfaceAddress", ["name", "address", "subnet", "link"])


class Subnet(object):
    """One carved prefix.

    Attributes
    ----------
    prefix: ipaddress.IPv4Network
    role: SubnetRole
    name: str
        Rack id, splitter id or link id the subnet was carved for
    members: tuple of str
        Node ids holding an address in it, in address order
    """

    def __init__(self, prefix, role, name, members=()):
        self.prefix = ipaddress.IPv4Network(prefix)
        self.role = SubnetRole(role)
        self.name = name
        self.members = tuple(members)

    def __eq__(self, other):
        if not isinstance(other, Subnet):
            return NotImplemented
        return (self.prefix, self.role, self.name, self.members) == (other.prefix, other.role, other.name,
                                                                     other.members)

    def __hash__(self):
        return hash(self.prefix)

    def __repr__(self):
        return "Subnet({}, {}, {})".format(self.prefix, self.role.value, self.name)


class AddressPlan(object):
    """Subnets, interface addresses and default gateways of a topology.

    Attributes
    ----------
    subnets: list of :class:`Subnet`
    interfaces: OrderedDict
        node id -> list of :class:`InterfaceAddress`
    default_gateways: OrderedDict
        host node id -> ipaddress.IPv4Address
    """

    def __init__(self, subnets, interfaces, default_gateways=None):
        self.subnets = list(subnets)
        self.interfaces = OrderedDict((n, list(ifaces)) for n, ifaces in interfaces.items())
        self.default_gateways = OrderedDict(default_gateways or {})
        self._owners = {}
        for node, ifaces in self.interfaces.items():
            for iface in ifaces:
                self._owners.setdefault(iface.address.ip, node)

    def __eq__(self, other):
        if not isinstance(other, AddressPlan):
            return NotImplemented
        return (self.subnets == other.subnets and self.interfaces == other.interfaces
                and self.default_gateways == other.default_gateways)

    def addresses(self, node):
        return [iface.address.ip for iface in self.interfaces.get(node, [])]

    def primary_address(self, node):
        '''First address of ``node``.

        Raises
        ------
        PonSimUnaddressedNodeException
            The node holds no address
        '''
        ifaces = self.interfaces.get(node)
        if not ifaces:
            raise PonSimUnaddressedNodeException("Node {} has no address.".format(node))
        return ifaces[0].address.ip

    def owner(self, address):
        """Node holding ``address``, or None."""
        return self._owners.get(ipaddress.IPv4Address(address))

    def subnet(self, prefix):
        prefix = ipaddress.IPv4Network(prefix)
        for s in self.subnets:
            if s.prefix == prefix:
                return s
        raise KeyError("No subnet {}".format(prefix))

    def interface_on(self, node, prefix):
        for iface in self.interfaces.get(node, []):
            if iface.subnet == prefix:
                return iface
        return None

    def shared_interface(self, node, peer, links=None):
        '''Returns (interface of ``node``, interface of ``peer``) on a common subnet, or None.

        With ``links``, the physical walk from ``node`` to ``peer``, the pair
        attached to the first and last link of that walk wins; otherwise the
        first common subnet in interface order is used.
        '''
        if links:
            ours = next((i for i in self.interfaces.get(node, []) if i.link == links[0]), None)
            theirs = next((i for i in self.interfaces.get(peer, []) if i.link == links[-1]), None)
            if ours is not None and theirs is not None and ours.subnet == theirs.subnet:
                return ours, theirs
        peer_ifaces = {iface.subnet: iface for iface in self.interfaces.get(peer, [])}
        for iface in self.interfaces.get(node, []):
            if iface.subnet in peer_ifaces:
                return iface, peer_ifaces[iface.subnet]
        return None

    def __str__(self):
        lines = []
        for s in self.subnets:
            lines.append("{} {} ({})".format(s.prefix, s.role.value, s.name))
            for node in s.members:
                iface = self.interface_on(node, s.prefix)
                lines.append("    {} {} {}".format(node, iface.name, iface.address))
        return "\n".join(lines) + "\n"


def _prefixlen_for(count, shared):
    bits = max(2, math.ceil(math.log2(count + 2)))
    if shared:
        return min(SHARED_PREFIXLEN, 32 - bits)
    return min(POINT_TO_POINT_PREFIXLEN, 32 - bits)


def _segments(t):
    """Broadcast domains of ``t`` as (role, name, [(node, link id)]) in carving order."""
    G = t.graph
    nodes = t.nodes
    found = {role: [] for role in _ROLE_ORDER}

    for rack in t.racks():
        members = t.rack_members(rack)
        members.sort(key=lambda n: (nodes[n].kind != NodeKind.GATEWAY_SERVER, natural_key(n)))
        attached = []
        for m in members:
            links = [G.edges[m, nbr]['link'] for nbr in sorted(G.neighbors(m), key=natural_key)
                     if nodes[nbr].kind == NodeKind.ELECTRONIC_SWITCH
                     or (nodes[nbr].kind in RACK_KINDS and nodes[nbr].rack == rack)]
            attached.append((m, links[0] if links else None))
        found[SubnetRole.INTRA_RACK].append((rack, attached))

    transparent = [n for n, spec in nodes.items()
                   if not spec.is_l3 and spec.kind != NodeKind.ELECTRONIC_SWITCH]
    components = sorted((sorted(c, key=natural_key) for c in nx.connected_components(G.subgraph(transparent))),
                        key=lambda c: natural_key(c[0]))
    for comp in components:
        attached = []
        for dev in comp:
            for nbr in sorted(G.neighbors(dev), key=natural_key):
                if nodes[nbr].is_l3 and nbr not in [a for a, _ in attached]:
                    attached.append((nbr, G.edges[dev, nbr]['link']))
        if len(attached) < 2:
            continue
        kinds = {nodes[d].kind for d in comp}
        if kinds & (SPLITTER_KINDS | {NodeKind.ONU}):
            attached.sort(key=lambda a: (nodes[a[0]].kind != NodeKind.OLT, natural_key(a[0])))
            name = next((d for d in comp if nodes[d].kind in SPLITTER_KINDS), comp[0])
            found[SubnetRole.PON].append((name, attached))
            continue
        inner = [G.edges[u, v]['link'] for u, v in G.subgraph(comp).edges()]
        name = sorted(inner, key=natural_key)[0] if inner else comp[0]
        attached.sort(key=lambda a: natural_key(a[0]))
        racks = {nodes[a].rack for a, _ in attached if nodes[a].kind in RACK_KINDS}
        rack_only = all(nodes[a].kind in RACK_KINDS for a, _ in attached)
        role = SubnetRole.INTER_RACK if rack_only and len(racks) > 1 else SubnetRole.CORE
        found[role].append((name, attached))

    olt = t.olt
    depth = nx.single_source_shortest_path_length(G, olt) if olt is not None else {}
    for link in t.links.values():
        a, b = link.endpoints
        if a not in nodes or b not in nodes or a == b or not (nodes[a].is_l3 and nodes[b].is_l3):
            continue
        if G.edges[a, b]['link'] != link.id:
            continue
        both_racked = nodes[a].kind in RACK_KINDS and nodes[b].kind in RACK_KINDS
        if both_racked and nodes[a].rack == nodes[b].rack:
            continue
        role = SubnetRole.INTER_RACK if both_racked else SubnetRole.CORE
        found[role].append((link.id, [(a, link.id), (b, link.id)]))

    found[SubnetRole.INTER_RACK].sort(key=lambda s: natural_key(s[0]))
    far = len(nodes) + 1
    found[SubnetRole.CORE].sort(key=lambda s: (min(depth.get(n, far) for n, _ in s[1]), natural_key(s[0])))
    return [(role, name, attached) for role in _ROLE_ORDER for name, attached in found[role]]


def assign_addresses(t, base_prefix=DEFAULT_BASE_PREFIX, pinned=None):
    '''Carves subnets from ``base_prefix`` and numbers every interface.

    Shared subnets (racks and the PON) are /24 unless a segment needs more
    room; point-to-point subnets are /30. Within a subnet the gateway-server,
    the OLT or the upstream end of a core link takes the first host address.

    Parameters
    ----------
    t: :class:`~ponsim.topology.Topology`
    base_prefix: str, optional
        IPv4 prefix to carve from
    pinned: dict, optional
        Subnet name (rack id, splitter id or link id) -> prefix used as is
        instead of carving. Pinned prefixes are not checked here; run
        :func:`validate_plan` on the result.

    Returns
    -------
    plan: :class:`AddressPlan`

    Raises
    ------
    PonSimParameterException
        ``base_prefix`` is not an IPv4 network
    PonSimPrefixExhaustedException
        The base prefix cannot hold every required subnet
    '''
    try:
        base = ipaddress.ip_network(str(base_prefix), strict=True)
    except ValueError as e:
        raise PonSimParameterException("Invalid base prefix {!r}.".format(base_prefix)) from e
    if base.version != 4:
        raise PonSimParameterException("Only IPv4 base prefixes are supported.")
    fixed = {}
    for name, value in (pinned or {}).items():
        try:
            fixed[name] = ipaddress.IPv4Network(str(value), strict=True)
        except ValueError as e:
            raise PonSimParameterException("Invalid pinned prefix {!r} for {}.".format(value, name)) from e

    subnets = []
    interfaces = OrderedDict()
    cursor = int(base.network_address)
    last = int(base.broadcast_address)
    segments = _segments(t)
    unknown = sorted(set(fixed) - {name for _, name, _ in segments}, key=natural_key)
    if unknown:
        raise PonSimParameterException("No subnet named {}.".format(", ".join(unknown)))
    for role, name, attached in segments:
        if name in fixed:
            prefix = fixed[name]
            plen = prefix.prefixlen
        else:
            plen = _prefixlen_for(len(attached), role in (SubnetRole.INTRA_RACK, SubnetRole.PON))
            size = 2 ** (32 - plen)
            cursor = -(-cursor // size) * size
            if plen < base.prefixlen or cursor + size - 1 > last:
                raise PonSimPrefixExhaustedException(
                    "{} cannot hold the {} subnets this topology needs (ran out at {} {}).".format(
                        base, len(segments), role.value, name))
            prefix = ipaddress.IPv4Network((cursor, plen))
            cursor += size
        if len(attached) > prefix.num_addresses - 2:
            raise PonSimPrefixExhaustedException("{} is too small for the {} members of {}.".format(
                prefix, len(attached), name))
        subnets.append(Subnet(prefix, role, name, [n for n, _ in attached]))
        for i, (node, link) in enumerate(attached, 1):
            ifaces = interfaces.setdefault(node, [])
            address = ipaddress.IPv4Interface((int(prefix.network_address) + i, plen))
            ifaces.append(InterfaceAddress("eth{}".format(len(ifaces)), address, prefix, link))

    default_gateways = OrderedDict()
    for node, ifaces in interfaces.items():
        if t.nodes[node].kind not in HOST_KINDS or t.is_router(node):
            continue
        subnet = next(s for s in subnets if s.prefix == ifaces[0].subnet)
        routers = [m for m in subnet.members if t.is_router(m)]
        if routers:
            default_gateways[node] = next(i.address.ip for i in interfaces[routers[0]] if i.subnet == subnet.prefix)
    logger.info("Carved %d subnets from %s", len(subnets), base)
    return AddressPlan(subnets, interfaces, default_gateways)


def validate_plan(p, t):
    '''Checks an address plan against its topology.

    Parameters
    ----------
    p: :class:`AddressPlan`
    t: :class:`~ponsim.topology.Topology`

    Returns
    -------
    report: :class:`~ponsim.utils.ValidationReport`
        Failures name prefixes, addresses or node ids
    '''
    report = ValidationReport("address plan", PLAN_CHECKS)
    for i, a in enumerate(p.subnets):
        for b in p.subnets[i + 1:]:
            if a.prefix.overlaps(b.prefix):
                report.fail("overlap", "{}~{}".format(a.prefix, b.prefix))

    seen = {}
    for node, ifaces in p.interfaces.items():
        for iface in ifaces:
            ip = iface.address.ip
            if ip in seen and seen[ip] != (node, iface.name):
                report.fail("duplicate-address", str(ip))
            seen.setdefault(ip, (node, iface.name))
            net = iface.subnet
            if ip not in net or ip in (net.network_address, net.broadcast_address) or iface.address.network != net:
                report.fail("address-off-link", "{}:{}".format(node, iface.name))
        if node not in t.nodes:
            report.fail("address-off-link", node)

    reach = t.l3_neighbors(up_only=False)
    for node in t.nodes.values():
        ifaces = p.interfaces.get(node.id, [])
        if node.kind in RACK_KINDS and t.is_router(node.id):
            roles = [_role_of(p, iface.subnet) for iface in ifaces]
            outside = [v for v in reach.get(node.id, {}) if t.nodes[v].rack != node.rack]
            if roles.count(SubnetRole.INTRA_RACK) != 1 or len(roles) < 2:
                report.fail("missing-gateway", node.id)
            elif len(roles) != 1 + len(outside):
                report.fail("address-count", node.id)
        elif node.kind == NodeKind.SERVER:
            if len(ifaces) != 1:
                report.fail("address-count", node.id)
            gw = p.default_gateways.get(node.id)
            if gw is None:
                report.fail("missing-gateway", node.id)
            elif ifaces and gw not in ifaces[0].subnet:
                report.fail("address-off-link", "{}:gateway".format(node.id))
            elif gw is not None and p.owner(gw) is None:
                report.fail("missing-gateway", node.id)

    for u, peers in t.l3_neighbors(up_only=False).items():
        for v in peers:
            if natural_key(u) < natural_key(v) and p.interfaces.get(u) and p.interfaces.get(v):
                if p.shared_interface(u, v) is None:
                    report.fail("address-off-link", "{}~{}".format(u, v))
    return report


def _role_of(p, prefix):
    for s in p.subnets:
        if s.prefix == prefix:
            return s.role
    return None


def _check_exportable(p, t, node):
    if node not in t.nodes:
        raise PonSimUnknownNodeException("No node named {!r}.".format(node))
    if not t.nodes[node].is_l3:
        raise PonSimUnaddressedNodeException("{} is a transparent {} and holds no address.".format(
            node, t.nodes[node].kind.value))
    if not p.interfaces.get(node):
        raise PonSimUnaddressedNodeException("Node {} has no address.".format(node))


def export_node_config(p, t, node, tables=None):
    '''Line-oriented configuration document of one node.

    Grammar::

        iface <name> addr <address>/<mask>
        route <prefix> via <next-hop>

    Hosts get one default route through their gateway; routers get one static
    route per non-connected subnet in longest-prefix order.

    Parameters
    ----------
    p: :class:`AddressPlan`
    t: :class:`~ponsim.topology.Topology`
    node: str
    tables: :class:`~ponsim.routing.RoutingTables`, optional
        Reuse precomputed tables instead of computing them

    Returns
    -------
    text: str

    Raises
    ------
    PonSimUnknownNodeException
    PonSimUnaddressedNodeException
    '''
    _check_exportable(p, t, node)
    lines = ["iface {} addr {}".format(iface.name, iface.address.with_prefixlen) for iface in p.interfaces[node]]
    from .routing import compute_tables, route_lines
    if t.nodes[node].kind in HOST_KINDS and not t.is_router(node):
        gw = p.default_gateways.get(node)
        if gw is not None:
            if tables is None:
                tables = compute_tables(t, p, strict=False)
            lines.extend("route {} via {}".format(e.prefix, e.via) for e in tables.entries.get(node, [])
                         if e.next_hop is not None and e.via != gw)
            lines.append("route {} via {}".format(DEFAULT_ROUTE, gw))
    else:
        if tables is None:
            tables = compute_tables(t, p)
        lines.extend(route_lines(tables, node))
    return "\n".join(lines) + "\n"
