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

import unittest

import numpy as np
import pytest

from ponsim.ponsim_exceptions import *
from ponsim.linkmodel import DelayProfile, path_propagation
from ponsim.scenario import build_testbed, load_scenario
from ponsim.simcore import (Injection, PingStats, Testbed, TraceResult, all_pairs_ping, iteration_series, run,
                            run_ping, run_stream, run_traceroute, summarize, trace_digest, trace_lines,
                            traceroute_table)
from ponsim.topology import LinkSpec, Medium, NodeSpec, Topology, attach_core_chain, build_cell


def two_routers(length_km=0.0, rate_bps=1e9):
    return Topology([NodeSpec("olt", "olt"), NodeSpec("core1", "wdm-core-node")],
                    [LinkSpec("olt--core1", ("olt", "core1"), Medium.OPTICAL_FIBER, length_km, rate_bps)])


def e2e_topology():
    return attach_core_chain(build_cell(3, 1, 3, wiring="ring"), [20, 20])


class Engine(unittest.TestCase):
    def setUp(self):
        self.bed = Testbed.build(two_routers(), profile=DelayProfile.zero())

    def test_empty_run(self):
        result = run([], self.bed.topology, self.bed.tables, self.bed.profile, 1000)
        assert result.trace == []
        assert (result.emitted, result.delivered, result.dropped, result.in_flight) == (0, 0, 0, 0)
        assert trace_lines(result.trace) == ""

    def test_zero_delay_link_costs_serialization_only(self):
        stats = run_ping(self.bed, "olt", "core1", count=1)
        assert stats.rtts_us == [pytest.approx(2 * 0.512)]

    def test_propagation_both_ways(self):
        bed = Testbed.build(two_routers(10.0), profile=DelayProfile.zero())
        stats = run_ping(bed, "olt", "core1", count=3)
        assert stats.rtts_us == [pytest.approx(2 * (0.512 + 49.0))] * 3

    def test_injected_echo_is_answered(self):
        injections = [Injection(0.0, "icmp-echo", "olt", "core1"), Injection(5.0, "icmp-echo", "core1", "olt")]
        result = run(injections, self.bed.topology, self.bed.tables, self.bed.profile, 1000)
        assert (result.emitted, result.delivered, result.in_flight) == (4, 4, 0)
        kinds = [e.kind for e in result.trace]
        assert kinds[0] == "packet-emit"
        assert kinds.count("packet-delivered") == 4
        assert [e.time_ns for e in result.trace] == sorted(e.time_ns for e in result.trace)

    def test_trace_line_format(self):
        result = run([Injection(1.5, "icmp-echo", "olt", "core1")], self.bed.topology, self.bed.tables,
                     self.bed.profile, 1000)
        assert trace_lines(result.trace).splitlines()[0] == "1.500 olt packet-emit 1"

    def test_horizon_truncation_warns(self):
        bed = Testbed.build(two_routers(10.0), profile=DelayProfile.zero())
        with pytest.warns(RuntimeWarning):
            result = run([Injection(0.0, "icmp-echo", "olt", "core1")], bed.topology, bed.tables, bed.profile, 1.0)
        assert result.truncated
        assert result.in_flight == 1

    def test_bad_arguments(self):
        with pytest.raises(PonSimParameterException):
            run([], self.bed.topology, self.bed.tables, self.bed.profile, 0)
        with pytest.raises(PonSimParameterException):
            run_ping(self.bed, "olt", "core1", count=0)
        with pytest.raises(PonSimParameterException, match="count must be an integer"):
            run_ping(self.bed, "olt", "core1", count=10.0)
        with pytest.raises(PonSimParameterException):
            run_ping(self.bed, "olt", "core1", count="3")
        with pytest.raises(PonSimParameterException):
            run_traceroute(self.bed, "olt", "core1", iterations=0)
        with pytest.raises(PonSimParameterException):
            run_traceroute(self.bed, "olt", "core1", iterations=2.0)
        with pytest.raises(PonSimParameterException):
            run_traceroute(self.bed, "olt", "core1", probes_per_hop=1.5)
        with pytest.raises(PonSimUnknownNodeException):
            run_ping(self.bed, "olt", "core9")


def test_ping_self_pays_the_host_twice():
    bed = Testbed.build(build_cell(1, 1, 1))
    stats = run_ping(bed, "r1-g1-s1", "r1-g1-s1", count=2)
    assert stats.rtts_us == [pytest.approx(40.0), pytest.approx(40.0)]


def test_all_pairs_without_loss():
    bed = Testbed.build(build_cell(3, 1, 3, wiring="ring"))
    results = all_pairs_ping(bed, count=2)
    assert len(results) == 9 * 8
    assert all(r.lost == 0 and r.received == 2 for r in results)
    table = summarize(results)
    assert len(table) == 72
    assert (table["loss-rate"] == 0).all()


def test_flooded_port_drops_and_conserves():
    bed = Testbed.build(build_cell(2, 1, 1, wiring="ring"), queue_capacity=1)
    stats = run_ping(bed, "r1-g1-s1", "r2-g1-s1", count=50, interval_us=0.01, size=1500)
    assert stats.lost > 0
    assert stats.received > 0
    assert stats.sent == stats.received + stats.lost + stats.in_flight
    assert "packet-drop" in {e.kind for e in stats.trace}


class EndToEnd(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.bed = build_testbed(load_scenario("paper-e2e"))
        cls.result = run_traceroute(cls.bed, "r1-g1-s1", "display", iterations=10, probes_per_hop=3, seed=1)

    def test_sample_count(self):
        assert self.result.samples.shape == (10, 5, 3)
        assert self.result.sample_count == 150
        assert self.result.hop_nodes == ["r1-gw", "olt", "core1", "core2", "display"]
        assert len(traceroute_table(self.result)) == 150

    def test_rtt_band(self):
        samples = self.result.samples
        assert not np.isnan(samples).any()
        assert samples.min() >= 144.0
        assert samples.max() <= 857.0
        assert samples.max() < 1000.0

    def test_hop_means_increase(self):
        _, mean, _ = self.result.hop_stats()
        assert np.all(np.diff(mean) > 0)
        table = summarize(self.result)
        assert list(table["hop-node"]) == self.result.hop_nodes
        assert list(table["samples"]) == [30] * 5

    def test_same_seed_same_trace(self):
        again = run_traceroute(self.bed, "r1-g1-s1", "display", iterations=10, probes_per_hop=3, seed=1)
        assert trace_digest(again.trace) == trace_digest(self.result.trace)
        np.testing.assert_array_equal(again.samples, self.result.samples)
        other = run_traceroute(self.bed, "r1-g1-s1", "display", iterations=10, probes_per_hop=3, seed=2)
        assert not np.array_equal(other.samples, self.result.samples)

    def test_iteration_series(self):
        series = iteration_series(self.result)
        assert len(series) == 50
        assert list(series.columns) == ["iteration", "hop-index", "hop-node", "mean-us"]


class WithoutJitter(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.t = e2e_topology()
        cls.bed = Testbed.build(cls.t)

    def test_iterations_are_identical(self):
        result = run_traceroute(self.bed, "r1-g1-s1", "display", iterations=4, probes_per_hop=2)
        for it in range(1, 4):
            np.testing.assert_allclose(result.samples[it], result.samples[0])
        per_hop = result.samples[0, :, 0]
        assert np.all(np.diff(per_hop) > 0)

    def test_rtt_covers_propagation(self):
        result = run_traceroute(self.bed, "r1-g1-s1", "display", iterations=1, probes_per_hop=1)
        links = self.bed.path("r1-g1-s1", "display").links
        assert result.samples[0, -1, 0] >= 2 * path_propagation(self.t, links, self.bed.profile)

    def test_ping_matches_last_hop(self):
        ping = run_ping(self.bed, "r1-g1-s1", "display", count=3)
        trace = run_traceroute(self.bed, "r1-g1-s1", "display", iterations=1, probes_per_hop=3)
        np.testing.assert_allclose(ping.rtts_us, trace.samples[0, -1, :])


def test_stream_below_capacity():
    bed = Testbed.build(attach_core_chain(build_cell(3, 1, 3, wiring="ring"), [50, 50]))
    stats = run_stream(bed, "r1-g1-s1", "display", 5e6, packet_size=1200, duration=200000)
    assert stats.lost == 0
    assert stats.received == stats.sent
    assert stats.throughput_bps == pytest.approx(5e6, rel=0.01)
    assert stats.max_jitter_us == pytest.approx(0.0, abs=0.01)
    assert stats.mean_latency_us > 490.0


def test_stream_through_bottleneck():
    bed = Testbed.build(two_routers(1.0, rate_bps=1e6), queue_capacity=10)
    stats = run_stream(bed, "olt", "core1", 2e6, packet_size=1200, duration=200000)
    assert stats.lost > 0
    assert stats.throughput_bps <= 1e6 * 1.001
    assert stats.sent == stats.received + stats.lost + stats.in_flight


def test_summarize_zero_tensor():
    result = TraceResult(np.zeros((2, 2, 1)), ["a", "b"])
    table = summarize(result)
    assert list(table["min-us"]) == [0.0, 0.0]
    assert list(table["max-us"]) == [0.0, 0.0]
    assert list(table["samples"]) == [2, 2]


def test_summarize_timeouts():
    samples = np.full((1, 2, 2), np.nan)
    samples[0, 0, :] = [10.0, 20.0]
    table = summarize(TraceResult(samples, ["a", "b"]))
    assert table["mean-us"][0] == pytest.approx(15.0)
    assert np.isnan(table["mean-us"][1])
    assert list(table["samples"]) == [2, 0]


def test_summarize_rejects_other_types():
    with pytest.raises(PonSimParameterException):
        summarize("ping")
    with pytest.raises(PonSimParameterException):
        TraceResult(np.zeros((2, 2)), ["a", "b"])


def test_ping_stats_text():
    stats = PingStats("a", "b", 4, 3, 1, 0, [1.0, 2.0, 3.0])
    assert stats.loss_rate == 0.25
    assert str(stats) == "a -> b: 4 sent, 3 received, 25.0% loss, rtt min/avg/max 1.000/2.000/3.000 us"


def test_stream_shorter_than_one_packet():
    bed = Testbed.build(two_routers(1.0, rate_bps=1e6))
    stats = run_stream(bed, "olt", "core1", 1e6, packet_size=1200, duration=1.0)
    assert stats.sent == 1
    assert stats.sent == stats.received + stats.lost + stats.in_flight


def test_single_probe_equals_ping():
    bed = Testbed.build(two_routers(5.0))
    trace = run_traceroute(bed, "olt", "core1", iterations=1, probes_per_hop=1)
    ping = run_ping(bed, "olt", "core1", count=1)
    assert trace.sample_count == 1
    assert trace.samples[0, 0, 0] == pytest.approx(ping.rtts_us[0])
