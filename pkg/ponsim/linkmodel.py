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

"""Delay and capacity arithmetic.

Propagation, serialization and per-node forwarding delays are in microseconds.
The forwarding-delay defaults are calibration values chosen so the end-to-end
reference scenario lands in a sub-millisecond per-hop RTT band; they are not
measurements and every one of them can be overridden from a scenario.
"""
import logging
import math
import numbers
from collections import OrderedDict, namedtuple
from types import MappingProxyType

import numpy as np

from .ponsim_exceptions import *
from .topology import NodeKind
from .utils import natural_key

logger = logging.getLogger(__name__)

PROPAGATION_US_PER_KM = 4.9

DEFAULT_FORWARD_US = OrderedDict([
    (NodeKind.SERVER.value, 20.0),
    (NodeKind.GATEWAY_SERVER.value, 60.0),
    (NodeKind.ELECTRONIC_SWITCH.value, 5.0),
    (NodeKind.MEDIA_CONVERTER.value, 2.0),
    (NodeKind.ONU.value, 10.0),
    (NodeKind.OLT.value, 10.0),
    (NodeKind.COUPLER.value, 0.0),
    (NodeKind.AWGR.value, 0.0),
    (NodeKind.WDM_CORE_NODE.value, 20.0),
    (NodeKind.ENDPOINT_HOST.value, 20.0),
])


def _kind_key(kind):
    return kind.value if isinstance(kind, NodeKind) else str(kind)


class DelayProfile(object):
    """Latency constants of one scenario.

    Attributes
    ----------
    propagation_us_per_km: float
        Fiber propagation constant, > 0
    forward_us: mapping of str to float
        Base forwarding delay per node kind, each >= 0
    jitter_fraction: float
        Half-width of the multiplicative uniform jitter on forwarding delays, in [0, 1)
    seed: int or None
        Seed for the jitter generator
    """

    def __init__(self, propagation_us_per_km=PROPAGATION_US_PER_KM, forward_us=None, jitter_fraction=0.0, seed=None):
        table = OrderedDict(DEFAULT_FORWARD_US)
        for kind, value in (forward_us or {}).items():
            table[_kind_key(kind)] = value
        if not isinstance(propagation_us_per_km, numbers.Real) or not propagation_us_per_km > 0:
            raise PonSimParameterException("propagation_us_per_km must be > 0.")
        for kind, value in table.items():
            if not isinstance(value, numbers.Real) or value < 0:
                raise PonSimParameterException("Forwarding delay of {} must be >= 0.".format(kind))
        if not isinstance(jitter_fraction, numbers.Real) or not 0 <= jitter_fraction < 1:
            raise PonSimParameterException("jitter_fraction must lie in [0, 1).")
        self.propagation_us_per_km = float(propagation_us_per_km)
        self.forward_us = MappingProxyType({k: float(v) for k, v in table.items()})
        self.jitter_fraction = float(jitter_fraction)
        self.seed = seed

    @classmethod
    def zero(cls, propagation_us_per_km=PROPAGATION_US_PER_KM):
        """Profile with every forwarding delay and the jitter set to zero."""
        return cls(propagation_us_per_km, {k: 0.0 for k in DEFAULT_FORWARD_US})

    def rng(self, seed=None):
        """Fresh generator for one simulation run."""
        return np.random.default_rng(self.seed if seed is None else seed)

    def __eq__(self, other):
        if not isinstance(other, DelayProfile):
            return NotImplemented
        return (self.propagation_us_per_km, dict(self.forward_us), self.jitter_fraction, self.seed) == \
            (other.propagation_us_per_km, dict(other.forward_us), other.jitter_fraction, other.seed)

    def __repr__(self):
        return "DelayProfile({} us/km, jitter {}, seed {})".format(self.propagation_us_per_km, self.jitter_fraction,
                                                                   self.seed)


def propagation_delay(link, profile):
    '''One-way propagation delay of ``link`` in microseconds.

    Examples
    --------
    A 100 km span at the default 4.9 us/km takes 490 us.
    '''
    return link.length_km * profile.propagation_us_per_km


def serialization_delay(size_bytes, rate_bps):
    '''Time to clock ``size_bytes`` onto a line of ``rate_bps``, in microseconds.

    Raises
    ------
    PonSimParameterException
        rate is not positive
    '''
    if not rate_bps > 0:
        raise PonSimParameterException("Line rate must be > 0, got {}.".format(rate_bps))
    return 8.0 * size_bytes / rate_bps * 1e6


def link_delay(link, size_bytes, profile):
    """Serialization plus propagation for one traversal of ``link``."""
    return serialization_delay(size_bytes, link.rate_bps) + propagation_delay(link, profile)


def path_propagation(topology, link_ids, profile):
    return sum(propagation_delay(topology.links[l], profile) for l in link_ids)


def node_forward_delay(kind, profile, draw=None, base=None):
    '''Forwarding delay of one packet through a node of ``kind``.

    The base delay is scaled by ``1 + u`` with ``u`` uniform on
    ``[-jitter_fraction, +jitter_fraction]`` drawn from ``draw``. No number is
    drawn when the jitter is zero.

    Parameters
    ----------
    kind: str or NodeKind
        Node kind
    profile: :class:`DelayProfile`
    draw: numpy.random.Generator, optional
        Seeded generator owned by the calling run
    base: float, optional
        Per-node override of the kind's base delay

    Returns
    -------
    delay: float
        Microseconds

    Raises
    ------
    PonSimUnknownKindException
        ``kind`` has no entry in the profile
    '''
    key = _kind_key(kind)
    if key not in profile.forward_us:
        raise PonSimUnknownKindException("No forwarding delay for node kind {!r}.".format(key))
    delay = profile.forward_us[key] if base is None else float(base)
    if profile.jitter_fraction == 0 or delay == 0:
        return delay
    if draw is None:
        raise PonSimParameterException("A seeded generator is required when jitter_fraction > 0.")
    return delay * (1.0 + draw.uniform(-profile.jitter_fraction, profile.jitter_fraction))


class WavelengthAssignment(object):
    """Wavelength index and fiber segments per flow.

    Attributes
    ----------
    assignments: OrderedDict
        flow id -> (wavelength index, tuple of segment ids)
    capacities: dict
        segment id -> wavelength count
    """

    def __init__(self, assignments, capacities):
        self.assignments = OrderedDict(assignments)
        self.capacities = dict(capacities)

    def wavelength(self, flow):
        return self.assignments[flow][0]

    def usage(self, segment):
        """wavelength index -> flow id on ``segment``."""
        return {w: flow for flow, (w, path) in self.assignments.items() if segment in path}

    def conflicts(self):
        """Pairs of flows sharing a segment and a wavelength; empty for a valid assignment."""
        bad = []
        items = list(self.assignments.items())
        for i, (f1, (w1, p1)) in enumerate(items):
            for f2, (w2, p2) in items[i + 1:]:
                if w1 == w2 and set(p1) & set(p2):
                    bad.append((f1, f2))
        return bad

    def __len__(self):
        return len(self.assignments)

    def __str__(self):
        return "\n".join("{}: lambda {} over {}".format(f, w, ",".join(p)) for f, (w, p) in self.assignments.items())


def assign_wavelengths(flows, capacities):
    '''First-fit wavelength assignment without conversion.

    Flows are served in ascending flow-id order. Each flow takes the lowest
    wavelength index free on every segment of its path and below every
    segment's capacity.

    Parameters
    ----------
    flows: list of (flow id, list of segment ids)
    capacities: dict
        Segment id -> wavelength count

    Returns
    -------
    assignment: :class:`WavelengthAssignment`

    Raises
    ------
    PonSimParameterException
        A path is empty, names a segment without a capacity, or a flow id repeats
    PonSimCapacityExceededException
        No common free wavelength is left; ``segment`` names the saturated segment
    '''
    occupancy = {}
    for seg, cap in capacities.items():
        if isinstance(cap, bool) or not isinstance(cap, numbers.Integral) or cap < 1:
            raise PonSimParameterException("Capacity of segment {} must be an integer >= 1.".format(seg))
        occupancy[seg] = np.zeros(int(cap), dtype=bool)
    ordered = sorted(flows, key=lambda f: natural_key(f[0]))
    ids = [f[0] for f in ordered]
    if len(set(ids)) != len(ids):
        raise PonSimParameterException("Flow ids must be unique.")
    assignments = OrderedDict()
    for flow, path in ordered:
        path = tuple(OrderedDict.fromkeys(path))
        if not path:
            raise PonSimParameterException("Flow {} has an empty path.".format(flow))
        for seg in path:
            if seg not in occupancy:
                raise PonSimParameterException("Flow {} uses unknown segment {}.".format(flow, seg))
        limit = min(occupancy[seg].size for seg in path)
        used = np.zeros(limit, dtype=bool)
        for seg in path:
            used |= occupancy[seg][:limit]
        free = np.flatnonzero(~used)
        if free.size == 0:
            saturated = next((seg for seg in path if occupancy[seg].all()),
                             min(path, key=lambda s: occupancy[s].size))
            raise PonSimCapacityExceededException(
                "No free wavelength for flow {}: segment {} is saturated.".format(flow, saturated), segment=saturated)
        w = int(free[0])
        for seg in path:
            occupancy[seg][w] = True
        assignments[flow] = (w, path)
    logger.info("Assigned %d flows over %d segments", len(assignments), len(occupancy))
    return WavelengthAssignment(assignments, capacities)


Grant = namedtuple("Grant", ["onu", "start_us", "duration_us"])


class TdmGrantSchedule(object):
    """Upstream grants of one coupler frame.

    Attributes
    ----------
    frame_length_us: float
    grants: list of :class:`Grant`
        Back-to-back from offset 0 in ascending ONU order
    """

    def __init__(self, frame_length_us, grants):
        self.frame_length_us = frame_length_us
        self.grants = list(grants)

    @property
    def busy_us(self):
        return sum(g.duration_us for g in self.grants)

    def overlaps(self):
        spans = sorted((g.start_us, g.start_us + g.duration_us, g.onu) for g in self.grants if g.duration_us > 0)
        return [(a[2], b[2]) for a, b in zip(spans, spans[1:]) if b[0] < a[1]]

    def __str__(self):
        lines = ["frame {} us".format(self.frame_length_us)]
        lines += ["{}: +{} us for {} us".format(g.onu, g.start_us, g.duration_us) for g in self.grants]
        return "\n".join(lines)


def tdm_schedule(demands, line_rate, frame_length):
    '''Proportional grant schedule for ONUs sharing a coupler.

    Each ONU gets the airtime its demand needs at ``line_rate``; an overloaded
    frame is scaled down proportionally. Durations are whole microseconds
    obtained by largest-remainder rounding, ties going to the lower ONU id.

    Parameters
    ----------
    demands: dict
        ONU id -> bits per frame, each >= 0
    line_rate: float
        Bits per second
    frame_length: float
        Frame length in microseconds, > 0

    Returns
    -------
    schedule: :class:`TdmGrantSchedule`

    Raises
    ------
    PonSimParameterException
        Non-positive frame length or line rate, or a negative demand
    '''
    if not frame_length > 0:
        raise PonSimParameterException("frame_length must be > 0.")
    if not line_rate > 0:
        raise PonSimParameterException("line_rate must be > 0.")
    onus = sorted(demands, key=natural_key)
    bits = np.array([demands[o] for o in onus], dtype=float)
    if np.any(bits < 0):
        raise PonSimParameterException("Demands must be >= 0.")
    exact = bits / line_rate * 1e6
    total = exact.sum()
    if total > frame_length:
        exact = exact * (frame_length / total)
    floors = np.floor(exact + 1e-9)
    target = min(int(round(exact.sum())), int(math.floor(frame_length + 1e-9)))
    extra = max(0, target - int(floors.sum()))
    remainders = exact - floors
    order = sorted(range(len(onus)), key=lambda i: (-remainders[i], natural_key(onus[i])))
    durations = floors.astype(int)
    for i in order[:extra]:
        durations[i] += 1
    grants, offset = [], 0
    for onu, duration in zip(onus, durations):
        grants.append(Grant(onu, offset, int(duration)))
        offset += int(duration)
    return TdmGrantSchedule(frame_length, grants)
