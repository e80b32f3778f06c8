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

"""Discrete-event packet engine and the ping, traceroute and stream drivers.

The engine runs on a simpy environment whose clock counts integer
nanoseconds. A packet pays the forwarding delay of every node that handles it:
the node that emits it, every transit device and the node that receives it.
Each link direction is an output port with a drop-tail FIFO; leaving a port
costs the serialization time and crossing the link the propagation time.

Every run appends :class:`Event` records to a trace. With the same inputs and
seed the trace, and therefore :func:`trace_digest`, is identical.
"""
import hashlib
import itertools
import logging
import warnings
from collections import namedtuple
from enum import Enum

import numpy as np
import pandas as pd
import simpy

from .ponsim_exceptions import *
from .addressing import assign_addresses, DEFAULT_BASE_PREFIX
from .linkmodel import DelayProfile, node_forward_delay, propagation_delay, serialization_delay
from .routing import compute_tables, resolve_path
from .topology import NodeKind
from .utils import validate_count

logger = logging.getLogger(__name__)

DEFAULT_QUEUE_CAPACITY = 1000
DEFAULT_PROBE_BYTES = 64
DEFAULT_TTL = 64
DEFAULT_TIMEOUT_US = 1e6
DEFAULT_DRAIN_US = 1e6


def us_to_ns(us):
    return int(round(us * 1000))


def ns_to_us(ns):
    return ns / 1000.0


class EventKind(str, Enum):
    PACKET_EMIT = "packet-emit"
    PACKET_ARRIVAL = "packet-arrival"
    PACKET_DEPARTURE = "packet-departure"
    PACKET_DELIVERED = "packet-delivered"
    PACKET_DROP = "packet-drop"
    PROBE_TIMEOUT = "probe-timeout"
    FLOW_TICK = "flow-tick"


class PacketKind(str, Enum):
    ICMP_ECHO = "icmp-echo"
    ICMP_ECHO_REPLY = "icmp-echo-reply"
    PROBE = "probe"
    PROBE_TTL_EXPIRED_REPLY = "probe-ttl-expired-reply"
    DATA = "data"


_ANSWERED = (PacketKind.ICMP_ECHO, PacketKind.PROBE)
_REPLIES = (PacketKind.ICMP_ECHO_REPLY, PacketKind.PROBE_TTL_EXPIRED_REPLY)


class Event(namedtuple("Event", ["time_ns", "sequence", "kind", "node", "packet_id"])):
    """One trace record. ``sequence`` orders records sharing a timestamp."""
    __slots__ = ()

    @property
    def time_us(self):
        return ns_to_us(self.time_ns)

    def to_line(self):
        return "{}.{:03d} {} {} {}".format(self.time_ns // 1000, self.time_ns % 1000, self.node, self.kind,
                                           "-" if self.packet_id is None else self.packet_id)


class PacketRecord(object):
    """A packet in flight.

    Attributes
    ----------
    id: int
    kind: PacketKind
    size: int
        Bytes
    ttl: int
        Remaining L3 hop budget
    src, dst: str
    sent_at: int
        Emission time in nanoseconds
    flow_id: str or None
    in_reply_to: int or None
        Id of the packet this one answers
    """
    __slots__ = ("id", "kind", "size", "ttl", "src", "dst", "sent_at", "flow_id", "in_reply_to", "segment")

    def __init__(self, id, kind, size, ttl, src, dst, sent_at=0, flow_id=None, in_reply_to=None):
        if ttl < 0:
            raise PonSimParameterException("ttl must be >= 0.")
        self.id = id
        self.kind = PacketKind(kind)
        self.size = size
        self.ttl = ttl
        self.src = src
        self.dst = dst
        self.sent_at = sent_at
        self.flow_id = flow_id
        self.in_reply_to = in_reply_to
        self.segment = []

    def __repr__(self):
        return "PacketRecord({}, {}, {}->{}, ttl={})".format(self.id, self.kind.value, self.src, self.dst, self.ttl)


Injection = namedtuple("Injection", ["time_us", "kind", "src", "dst", "size", "ttl"],
                       defaults=(DEFAULT_PROBE_BYTES, DEFAULT_TTL))

RunResult = namedtuple("RunResult", ["trace", "emitted", "delivered", "dropped", "in_flight", "truncated", "end_ns"])


class _Port(object):

    def __init__(self, network, node, peer, link):
        self.node = node
        self.peer = peer
        self.link = link
        self.store = simpy.Store(network.env)
        network.env.process(network._transmit(self))


class Network(object):
    """One simulation run over a topology and its routing tables.

    Parameters
    ----------
    topology: :class:`~ponsim.topology.Topology`
    tables: :class:`~ponsim.routing.RoutingTables`
    profile: :class:`~ponsim.linkmodel.DelayProfile`
    queue_capacity: int, optional
        Packets that may wait at one output port; more are dropped
    seed: int or sequence of int, optional
        Jitter seed, defaults to the profile seed
    """

    def __init__(self, topology, tables, profile, queue_capacity=DEFAULT_QUEUE_CAPACITY, seed=None):
        if queue_capacity < 1:
            raise PonSimParameterException("queue_capacity must be >= 1.")
        self.topology = topology
        self.tables = tables
        self.plan = tables.plan
        self.profile = profile
        self.queue_capacity = queue_capacity
        self.env = simpy.Environment()
        self.rng = profile.rng(seed)
        self.trace = []
        self.emitted = 0
        self.delivered = 0
        self.dropped = 0
        self.fates = {}
        self.replies = {}
        self._sequence = itertools.count()
        self._packet_ids = itertools.count(1)
        self._ports = {}
        self._neighbors = topology.l3_neighbors(up_only=True)
        self._addresses = {}
        self._waiters = {}
        self._sinks = []

    @property
    def now_ns(self):
        return int(self.env.now)

    def record(self, kind, node, packet=None):
        self.trace.append(Event(self.now_ns, next(self._sequence), EventKind(kind).value, node,
                                None if packet is None else packet.id))

    def new_packet(self, kind, src, dst, size=DEFAULT_PROBE_BYTES, ttl=DEFAULT_TTL, flow_id=None, in_reply_to=None):
        return PacketRecord(next(self._packet_ids), kind, size, ttl, src, dst, flow_id=flow_id,
                            in_reply_to=in_reply_to)

    def expect_reply(self, packet_id, callback):
        """Calls ``callback(reply, now_ns)`` when the reply to ``packet_id`` reaches its source."""
        self._waiters[packet_id] = callback

    def add_sink(self, callback):
        """Calls ``callback(packet, now_ns)`` for every delivered data packet."""
        self._sinks.append(callback)

    def emit(self, packet):
        packet.sent_at = self.now_ns
        self.emitted += 1
        self.record(EventKind.PACKET_EMIT, packet.src, packet)
        self.env.process(self._originate(packet))

    def _forward_ns(self, node):
        spec = self.topology.nodes[node]
        return us_to_ns(node_forward_delay(spec.kind, self.profile, self.rng, base=spec.delay_override))

    def _address(self, node):
        if node not in self._addresses:
            self._addresses[node] = self.plan.primary_address(node)
        return self._addresses[node]

    def _originate(self, packet):
        yield self.env.timeout(self._forward_ns(packet.src))
        self._route(packet, packet.src)

    def _route(self, packet, node):
        if node == packet.dst:
            self._deliver(packet, node)
            return
        entry = self.tables.lookup(node, self._address(packet.dst))
        if entry is None:
            self._drop(packet, node)
            return
        nxt = packet.dst if entry.next_hop is None else entry.next_hop
        segment = self._neighbors.get(node, {}).get(nxt)
        if segment is None:
            self._drop(packet, node)
            return
        packet.segment = list(segment.nodes[1:])
        self._enqueue(packet, node, packet.segment[0])

    def _port(self, node, peer):
        key = (node, peer)
        if key not in self._ports:
            self._ports[key] = _Port(self, node, peer, self.topology.link_between(node, peer))
        return self._ports[key]

    def _enqueue(self, packet, node, peer):
        port = self._port(node, peer)
        if len(port.store.items) >= self.queue_capacity:
            self._drop(packet, node)
            return
        port.store.put(packet)

    def _transmit(self, port):
        while True:
            packet = yield port.store.get()
            yield self.env.timeout(us_to_ns(serialization_delay(packet.size, port.link.rate_bps)))
            self.record(EventKind.PACKET_DEPARTURE, port.node, packet)
            self.env.process(self._propagate(packet, port))

    def _propagate(self, packet, port):
        yield self.env.timeout(us_to_ns(propagation_delay(port.link, self.profile)))
        self.record(EventKind.PACKET_ARRIVAL, port.peer, packet)
        self.env.process(self._handle(packet, port.peer))

    def _handle(self, packet, node):
        yield self.env.timeout(self._forward_ns(node))
        if not self.topology.nodes[node].is_l3:
            packet.segment.pop(0)
            self._enqueue(packet, node, packet.segment[0])
        elif node == packet.dst:
            self._deliver(packet, node)
        else:
            packet.ttl -= 1
            if packet.ttl <= 0 and packet.kind == PacketKind.PROBE:
                self._deliver(packet, node, expired=True)
            elif packet.ttl <= 0:
                self._drop(packet, node)
            else:
                self._route(packet, node)

    def _deliver(self, packet, node, expired=False):
        self.delivered += 1
        self.fates[packet.id] = "delivered"
        self.record(EventKind.PACKET_DELIVERED, node, packet)
        if packet.kind in _ANSWERED:
            kind = PacketKind.PROBE_TTL_EXPIRED_REPLY if expired else PacketKind.ICMP_ECHO_REPLY
            reply = self.new_packet(kind, node, packet.src, packet.size, in_reply_to=packet.id)
            self.replies[packet.id] = reply.id
            self.emit(reply)
        elif packet.kind in _REPLIES:
            callback = self._waiters.pop(packet.in_reply_to, None)
            if callback is not None:
                callback(packet, self.now_ns)
        else:
            for sink in self._sinks:
                sink(packet, self.now_ns)

    def _drop(self, packet, node):
        self.dropped += 1
        self.fates[packet.id] = "dropped"
        self.record(EventKind.PACKET_DROP, node, packet)

    def exchange_fate(self, request_id):
        """``received``, ``lost`` or ``in-flight`` for a request and its reply."""
        reply = self.replies.get(request_id)
        if reply is not None and self.fates.get(reply) == "delivered":
            return "received"
        if self.fates.get(request_id) == "dropped" or (reply is not None and self.fates.get(reply) == "dropped"):
            return "lost"
        return "in-flight"

    def run(self, until_ns):
        self.env.run(until=until_ns)
        in_flight = self.emitted - self.delivered - self.dropped
        return RunResult(list(self.trace), self.emitted, self.delivered, self.dropped, in_flight, in_flight > 0,
                         self.now_ns)


def run(events, topology, tables, profile, horizon, queue_capacity=DEFAULT_QUEUE_CAPACITY, seed=None):
    '''Runs a set of packet injections until ``horizon``.

    Parameters
    ----------
    events: iterable of :class:`Injection`
        Packets to emit, with emission times in microseconds
    topology: :class:`~ponsim.topology.Topology`
    tables: :class:`~ponsim.routing.RoutingTables`
    profile: :class:`~ponsim.linkmodel.DelayProfile`
    horizon: float
        Simulation end in microseconds, > 0
    queue_capacity: int, optional
    seed: int, optional

    Returns
    -------
    result: RunResult
        Trace plus emitted, delivered, dropped and in-flight counts
    '''
    if not horizon > 0:
        raise PonSimParameterException("horizon must be > 0.")
    net = Network(topology, tables, profile, queue_capacity, seed)
    for inj in sorted(events, key=lambda e: e.time_us):
        net.env.process(_emit_at(net, inj))
    result = net.run(us_to_ns(horizon))
    if result.truncated:
        warnings.warn("{} packets still in flight at the {} us horizon.".format(result.in_flight, horizon),
                      RuntimeWarning, stacklevel=2)
    return result


def _emit_at(net, inj):
    yield net.env.timeout(max(0, us_to_ns(inj.time_us) - net.now_ns))
    net.emit(net.new_packet(inj.kind, inj.src, inj.dst, inj.size, inj.ttl))


def trace_lines(trace):
    return "".join(event.to_line() + "\n" for event in trace)


def trace_digest(trace):
    """SHA-256 of the line-delimited trace."""
    return hashlib.sha256(trace_lines(trace).encode("utf-8")).hexdigest()


def write_trace(trace, dest):
    with open(dest, "w") as fi:
        fi.write(trace_lines(trace))


class Testbed(object):
    """Everything an experiment driver needs, shared read-only between runs.

    Attributes
    ----------
    topology: :class:`~ponsim.topology.Topology`
    plan: :class:`~ponsim.addressing.AddressPlan`
    tables: :class:`~ponsim.routing.RoutingTables`
    profile: :class:`~ponsim.linkmodel.DelayProfile`
    queue_capacity: int
    probe_bytes: int
    """
    __test__ = False

    def __init__(self, topology, plan, tables, profile, queue_capacity=DEFAULT_QUEUE_CAPACITY,
                 probe_bytes=DEFAULT_PROBE_BYTES):
        self.topology = topology
        self.plan = plan
        self.tables = tables
        self.profile = profile
        self.queue_capacity = queue_capacity
        self.probe_bytes = probe_bytes

    @classmethod
    def build(cls, topology, base_prefix=DEFAULT_BASE_PREFIX, profile=None, olt_transit=True, **kwargs):
        plan = assign_addresses(topology, base_prefix)
        tables = compute_tables(topology, plan, olt_transit=olt_transit)
        return cls(topology, plan, tables, profile or DelayProfile(), **kwargs)

    def network(self, seed=None):
        return Network(self.topology, self.tables, self.profile, self.queue_capacity, seed)

    def path(self, src, dst):
        return resolve_path(self.tables, self.topology, src, dst)


class PingStats(object):
    """Outcome of a ping run; ``sent == received + lost + in_flight``."""

    def __init__(self, src, dst, sent, received, lost, in_flight, rtts_us, trace=None):
        self.src = src
        self.dst = dst
        self.sent = sent
        self.received = received
        self.lost = lost
        self.in_flight = in_flight
        self.rtts_us = list(rtts_us)
        self.trace = list(trace or [])

    @property
    def loss_rate(self):
        return self.lost / self.sent if self.sent else 0.0

    def __str__(self):
        line = "{} -> {}: {} sent, {} received, {:.1%} loss".format(self.src, self.dst, self.sent, self.received,
                                                                    self.loss_rate)
        if self.rtts_us:
            line += ", rtt min/avg/max {:.3f}/{:.3f}/{:.3f} us".format(min(self.rtts_us), np.mean(self.rtts_us),
                                                                       max(self.rtts_us))
        return line


class StreamStats(object):
    """Outcome of a constant-bit-rate stream; ``sent == received + lost + in_flight``."""

    def __init__(self, src, dst, offered_bps, sent, received, lost, in_flight, throughput_bps, max_jitter_us,
                 mean_latency_us, trace=None):
        self.src = src
        self.dst = dst
        self.offered_bps = offered_bps
        self.sent = sent
        self.received = received
        self.lost = lost
        self.in_flight = in_flight
        self.throughput_bps = throughput_bps
        self.max_jitter_us = max_jitter_us
        self.mean_latency_us = mean_latency_us
        self.trace = list(trace or [])

    @property
    def loss_rate(self):
        return self.lost / self.sent if self.sent else 0.0

    def __str__(self):
        return "{} -> {}: {} sent, {} received, {:.1%} loss, {:.0f} b/s delivered, jitter {:.3f} us".format(
            self.src, self.dst, self.sent, self.received, self.loss_rate, self.throughput_bps, self.max_jitter_us)


class TraceResult(object):
    """RTT samples of a traceroute run.

    Attributes
    ----------
    samples: numpy.ndarray
        Shape (iterations, hops, probes) in microseconds; NaN marks a timeout
    hop_nodes: list of str
        Node that answered each hop index
    """

    def __init__(self, samples, hop_nodes, src=None, dst=None, trace=None):
        self.samples = np.asarray(samples, dtype=float)
        if self.samples.ndim != 3:
            raise PonSimParameterException("samples must be a 3-dimensional array.")
        self.hop_nodes = list(hop_nodes)
        self.src = src
        self.dst = dst
        self.trace = list(trace or [])

    @property
    def iterations(self):
        return self.samples.shape[0]

    @property
    def hops(self):
        return self.samples.shape[1]

    @property
    def probes(self):
        return self.samples.shape[2]

    @property
    def sample_count(self):
        return int(self.samples.size)

    def hop_stats(self):
        """Per-hop (min, mean, max) arrays over iterations and probes."""
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", category=RuntimeWarning)
            return (np.nanmin(self.samples, axis=(0, 2)), np.nanmean(self.samples, axis=(0, 2)),
                    np.nanmax(self.samples, axis=(0, 2)))


def _check_positive(name, value):
    if isinstance(value, bool) or not value > 0:
        raise PonSimParameterException("{} must be > 0, got {!r}.".format(name, value))


def run_ping(bed, src, dst, count=10, interval_us=1000.0, size=None, timeout_us=DEFAULT_TIMEOUT_US, seed=None):
    '''Sends ``count`` echo requests from ``src`` to ``dst``.

    Parameters
    ----------
    bed: :class:`Testbed`
    src, dst: str
    count: int, optional
    interval_us: float, optional
        Gap between requests
    size: int, optional
        Bytes per echo, defaults to the testbed probe size
    timeout_us: float, optional
        Time after the last request before unanswered ones count as in flight
    seed: int, optional

    Returns
    -------
    stats: :class:`PingStats`

    Raises
    ------
    PonSimNoRouteException
    '''
    count = validate_count("count", count)
    _check_positive("interval_us", interval_us)
    bed.path(src, dst)
    size = bed.probe_bytes if size is None else size
    net = bed.network(seed)
    rtts, ids = {}, []

    def driver():
        for i in range(count):
            echo = net.new_packet(PacketKind.ICMP_ECHO, src, dst, size)
            ids.append(echo.id)
            net.expect_reply(echo.id, lambda reply, now, echo=echo: rtts.__setitem__(echo.id, now - echo.sent_at))
            net.emit(echo)
            if i < count - 1:
                yield net.env.timeout(us_to_ns(interval_us))

    net.env.process(driver())
    net.run(us_to_ns((count - 1) * interval_us + timeout_us))
    fates = [net.exchange_fate(i) for i in ids]
    return PingStats(src, dst, count, fates.count("received"), fates.count("lost"), fates.count("in-flight"),
                     [ns_to_us(rtts[i]) for i in ids if i in rtts], net.trace)


def all_pairs_ping(bed, nodes=None, count=10, interval_us=1000.0, seed=None):
    '''Pings every ordered pair of ``nodes`` (all servers by default), one run per pair.'''
    if nodes is None:
        nodes = bed.topology.nodes_of_kind(NodeKind.SERVER)
    base = bed.profile.seed if seed is None else seed
    results = []
    for i, (a, b) in enumerate(itertools.permutations(nodes, 2)):
        pair_seed = None if base is None else [base, i]
        results.append(run_ping(bed, a, b, count, interval_us, seed=pair_seed))
    return results


def run_traceroute(bed, src, dst, iterations=10, probes_per_hop=3, timeout_us=DEFAULT_TIMEOUT_US, seed=None):
    '''Per-hop RTT measurement.

    For hop index ``h`` a probe leaves with ``ttl = h``; the ``h``-th routing
    node on the path answers. Probes go one at a time, the next leaving when the
    previous one is answered or times out.

    Parameters
    ----------
    bed: :class:`Testbed`
    src, dst: str
    iterations: int, optional
    probes_per_hop: int, optional
    timeout_us: float, optional
    seed: int, optional

    Returns
    -------
    result: :class:`TraceResult`
        Sample tensor of shape (iterations, hops, probes_per_hop)

    Raises
    ------
    PonSimNoRouteException
    '''
    iterations = validate_count("iterations", iterations)
    probes_per_hop = validate_count("probes_per_hop", probes_per_hop)
    path = bed.path(src, dst)
    hops = list(path.l3_hops)
    samples = np.full((iterations, len(hops), probes_per_hop), np.nan)
    answered = list(hops)
    net = bed.network(seed)
    timeout_ns = us_to_ns(timeout_us)

    def driver():
        for it in range(iterations):
            for h in range(len(hops)):
                for pr in range(probes_per_hop):
                    probe = net.new_packet(PacketKind.PROBE, src, dst, bed.probe_bytes, ttl=h + 1)
                    reply = net.env.event()
                    net.expect_reply(probe.id, lambda pkt, now, ev=reply: ev.succeed((pkt, now)))
                    net.emit(probe)
                    outcome = yield reply | net.env.timeout(timeout_ns)
                    if reply in outcome:
                        pkt, now = outcome[reply]
                        samples[it, h, pr] = ns_to_us(now - probe.sent_at)
                        answered[h] = pkt.src
                    else:
                        net.record(EventKind.PROBE_TIMEOUT, src, probe)

    proc = net.env.process(driver())
    net.env.run(until=proc)
    logger.info("Traceroute %s -> %s: %d samples over %d hops", src, dst, samples.size, len(hops))
    return TraceResult(samples, answered, src, dst, net.trace)


def run_stream(bed, src, dst, rate, packet_size=1200, duration=1e6, drain_us=DEFAULT_DRAIN_US, seed=None):
    '''Constant-bit-rate packet train from ``src`` to ``dst``.

    Packets leave every ``8 * packet_size / rate`` seconds while the clock is
    below ``duration``; the run then drains for ``drain_us``.

    Parameters
    ----------
    bed: :class:`Testbed`
    src, dst: str
    rate: float
        Offered load in bits/second
    packet_size: int, optional
        Bytes
    duration: float, optional
        Emission window in microseconds
    drain_us: float, optional
    seed: int, optional

    Returns
    -------
    stats: :class:`StreamStats`
        Throughput is measured between the first and the last arrival.
    '''
    _check_positive("rate", rate)
    _check_positive("duration", duration)
    _check_positive("packet_size", packet_size)
    bed.path(src, dst)
    net = bed.network(seed)
    interval_ns = max(1, int(round(packet_size * 8.0 / rate * 1e9)))
    duration_ns = us_to_ns(duration)
    flow = "{}>{}".format(src, dst)
    arrivals, latencies = [], []

    def sink(packet, now):
        if packet.flow_id == flow:
            arrivals.append(now)
            latencies.append(now - packet.sent_at)

    net.add_sink(sink)

    def driver():
        while net.now_ns < duration_ns:
            pkt = net.new_packet(PacketKind.DATA, src, dst, packet_size, flow_id=flow)
            net.record(EventKind.FLOW_TICK, src, pkt)
            net.emit(pkt)
            yield net.env.timeout(interval_ns)

    net.env.process(driver())
    result = net.run(duration_ns + us_to_ns(drain_us))
    received = len(arrivals)
    sent = result.emitted
    lost = result.dropped
    bits = packet_size * 8.0
    if received >= 2 and arrivals[-1] > arrivals[0]:
        throughput = (received - 1) * bits / ((arrivals[-1] - arrivals[0]) / 1e9)
    else:
        throughput = received * bits / (duration_ns / 1e9)
    gaps = np.diff(np.asarray(arrivals, dtype=np.int64))
    jitter = float(np.max(np.abs(gaps - interval_ns))) / 1000.0 if gaps.size else 0.0
    mean_latency = float(np.mean(latencies)) / 1000.0 if latencies else float("nan")
    return StreamStats(src, dst, rate, sent, received, lost, sent - received - lost, throughput, jitter,
                       mean_latency, result.trace)


def summarize(results):
    '''Report rows for one result or a list of results.

    Traceroute results give one row per hop with min, mean and max RTT; ping
    and stream results give one row each.

    Returns
    -------
    rows: pandas.DataFrame
    '''
    if isinstance(results, (list, tuple)):
        frames = [summarize(r) for r in results]
        return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()
    if isinstance(results, TraceResult):
        lo, mean, hi = results.hop_stats()
        return pd.DataFrame({
            "hop-index": np.arange(1, results.hops + 1),
            "hop-node": results.hop_nodes,
            "min-us": lo,
            "mean-us": mean,
            "max-us": hi,
            "samples": [int(np.count_nonzero(~np.isnan(results.samples[:, h, :]))) for h in range(results.hops)],
        })
    if isinstance(results, PingStats):
        rtts = results.rtts_us
        return pd.DataFrame([{
            "src": results.src, "dst": results.dst, "sent": results.sent, "received": results.received,
            "lost": results.lost, "in-flight": results.in_flight, "loss-rate": results.loss_rate,
            "min-us": min(rtts) if rtts else np.nan, "mean-us": float(np.mean(rtts)) if rtts else np.nan,
            "max-us": max(rtts) if rtts else np.nan
        }])
    if isinstance(results, StreamStats):
        return pd.DataFrame([{
            "src": results.src, "dst": results.dst, "offered-bps": results.offered_bps, "sent": results.sent,
            "received": results.received, "lost": results.lost, "in-flight": results.in_flight,
            "throughput-bps": results.throughput_bps, "max-jitter-us": results.max_jitter_us,
            "mean-latency-us": results.mean_latency_us
        }])
    raise PonSimParameterException("Cannot summarize {!r}.".format(type(results).__name__))


def iteration_series(result):
    """Mean RTT per (iteration, hop): the series behind a per-iteration RTT plot."""
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", category=RuntimeWarning)
        means = np.nanmean(result.samples, axis=2)
    for it in range(result.iterations):
        for h in range(result.hops):
            rows.append({"iteration": it + 1, "hop-index": h + 1, "hop-node": result.hop_nodes[h],
                         "mean-us": means[it, h]})
    return pd.DataFrame(rows, columns=["iteration", "hop-index", "hop-node", "mean-us"])


def traceroute_table(result):
    """One row per sample: iteration, hop-index, hop-node, probe-index, rtt-us."""
    rows = []
    for it in range(result.iterations):
        for h in range(result.hops):
            for pr in range(result.probes):
                rows.append((it + 1, h + 1, result.hop_nodes[h], pr + 1, result.samples[it, h, pr]))
    return pd.DataFrame(rows, columns=["iteration", "hop-index", "hop-node", "probe-index", "rtt-us"])


def plot_trace(result, dest):
    '''Draws per-iteration RTT against hop index to an image file.'''
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    series = iteration_series(result)
    fig, ax = plt.subplots(figsize=(8, 5))
    for it, rows in series.groupby("iteration"):
        ax.plot(rows["hop-index"], rows["mean-us"] / 1000.0, marker="o", label="iteration {}".format(it))
    ax.set_xticks(range(1, result.hops + 1))
    ax.set_xticklabels(result.hop_nodes, rotation=30, ha="right")
    ax.set_ylabel("RTT (ms)")
    ax.set_xlabel("hop")
    ax.legend(fontsize=6, ncol=2)
    fig.savefig(dest, dpi=150, bbox_inches="tight")
    plt.close(fig)
