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
from ponsim.linkmodel import (DelayProfile, assign_wavelengths, link_delay, node_forward_delay, path_propagation,
                              propagation_delay, serialization_delay, tdm_schedule)
from ponsim.topology import LinkSpec, Medium, NodeKind, attach_core_chain, build_cell


def fiber(length_km, rate_bps=10e9):
    return LinkSpec("a--b", ("a", "b"), Medium.OPTICAL_FIBER, length_km, rate_bps)


class Delays(unittest.TestCase):
    def setUp(self):
        self.profile = DelayProfile()

    def test_propagation(self):
        assert propagation_delay(fiber(100.0), self.profile) == pytest.approx(490.0)
        assert propagation_delay(fiber(0.0), self.profile) == 0.0

    def test_propagation_adds_up_along_a_chain(self):
        split = attach_core_chain(build_cell(1, 1, 1), [30, 70])
        whole = attach_core_chain(build_cell(1, 1, 1), [100])
        a = path_propagation(split, ["olt--core1", "core1--core2"], self.profile)
        b = path_propagation(whole, ["olt--core1"], self.profile)
        assert a == pytest.approx(b)
        assert a == pytest.approx(490.0)

    def test_serialization(self):
        assert serialization_delay(1500, 10e9) == pytest.approx(1.2)
        assert serialization_delay(64, 10e9) == pytest.approx(0.0512)
        assert serialization_delay(0, 10e9) == 0.0
        with pytest.raises(PonSimParameterException):
            serialization_delay(64, 0)

    def test_link_delay(self):
        assert link_delay(fiber(10.0), 1500, self.profile) == pytest.approx(49.0 + 1.2)

    def test_forwarding_without_jitter(self):
        assert node_forward_delay(NodeKind.GATEWAY_SERVER, self.profile) == 60.0
        assert node_forward_delay("coupler", self.profile) == 0.0
        assert node_forward_delay("server", self.profile, base=7.5) == 7.5

    def test_unknown_kind(self):
        with pytest.raises(PonSimUnknownKindException):
            node_forward_delay("router", self.profile)


@pytest.mark.parametrize("kwargs", [
    {"propagation_us_per_km": 0},
    {"jitter_fraction": 1.0},
    {"jitter_fraction": -0.1},
    {"forward_us": {"server": -1.0}},
])
def test_bad_profile(kwargs):
    with pytest.raises(PonSimParameterException):
        DelayProfile(**kwargs)


def test_override_keeps_other_defaults():
    profile = DelayProfile(forward_us={NodeKind.OLT: 25.0})
    assert profile.forward_us["olt"] == 25.0
    assert profile.forward_us["gateway-server"] == 60.0
    assert DelayProfile.zero().forward_us["gateway-server"] == 0.0


def test_jitter_needs_a_generator():
    with pytest.raises(PonSimParameterException):
        node_forward_delay("server", DelayProfile(jitter_fraction=0.2, seed=1))


def test_jitter_is_reproducible():
    profile = DelayProfile(jitter_fraction=0.2, seed=11)
    a = [node_forward_delay("server", profile, profile.rng()) for _ in range(3)]
    draw_a, draw_b = profile.rng(), profile.rng()
    b = [node_forward_delay("server", profile, draw_a) for _ in range(50)]
    c = [node_forward_delay("server", profile, draw_b) for _ in range(50)]
    assert b == c
    assert len(set(a)) == 1


def test_jitter_mean_and_bounds():
    profile = DelayProfile(jitter_fraction=0.3, seed=5)
    draw = profile.rng()
    samples = np.array([node_forward_delay(NodeKind.GATEWAY_SERVER, profile, draw) for _ in range(20000)])
    assert abs(samples.mean() - 60.0) / 60.0 < 0.01
    assert samples.min() >= 42.0
    assert samples.max() <= 78.0


class Wavelengths(unittest.TestCase):
    def test_disjoint_flows_share_the_first_wavelength(self):
        result = assign_wavelengths([("f1", ["a"]), ("f2", ["b"])], {"a": 1, "b": 1})
        assert result.wavelength("f1") == 0
        assert result.wavelength("f2") == 0
        assert result.conflicts() == []

    def test_shared_segment_gets_distinct_wavelengths(self):
        result = assign_wavelengths([("f2", ["a", "b"]), ("f1", ["a"])], {"a": 4, "b": 4})
        assert list(result.assignments) == ["f1", "f2"]
        assert (result.wavelength("f1"), result.wavelength("f2")) == (0, 1)
        assert result.usage("b") == {1: "f2"}

    def test_capacity_exceeded_names_segment(self):
        flows = [("f1", ["drop", "trunk"]), ("f2", ["trunk"]), ("f3", ["trunk"])]
        with pytest.raises(PonSimCapacityExceededException) as info:
            assign_wavelengths(flows, {"drop": 4, "trunk": 2})
        assert info.value.segment == "trunk"

    def test_eighty_channels(self):
        flows = [("f{}".format(i), ["trunk"]) for i in range(80)]
        result = assign_wavelengths(flows, {"trunk": 80})
        assert sorted(w for w, _ in result.assignments.values()) == list(range(80))
        with pytest.raises(PonSimCapacityExceededException):
            assign_wavelengths(flows + [("f80", ["trunk"])], {"trunk": 80})

    def test_bad_inputs(self):
        with pytest.raises(PonSimParameterException):
            assign_wavelengths([("f1", [])], {"a": 1})
        with pytest.raises(PonSimParameterException):
            assign_wavelengths([("f1", ["z"])], {"a": 1})
        with pytest.raises(PonSimParameterException):
            assign_wavelengths([("f1", ["a"]), ("f1", ["a"])], {"a": 2})
        with pytest.raises(PonSimParameterException):
            assign_wavelengths([("f1", ["a"])], {"a": 0})


class Tdm(unittest.TestCase):
    def test_single_onu_takes_the_frame(self):
        schedule = tdm_schedule({"r1-onu": 125000}, 1e9, 125)
        assert [tuple(g) for g in schedule.grants] == [("r1-onu", 0, 125)]

    def test_equal_split(self):
        demands = {"r{}-onu".format(i): 1e6 for i in range(1, 5)}
        schedule = tdm_schedule(demands, 1e9, 100)
        assert [g.duration_us for g in schedule.grants] == [25, 25, 25, 25]
        assert [g.start_us for g in schedule.grants] == [0, 25, 50, 75]
        assert schedule.overlaps() == []

    def test_overloaded_frame_is_proportional(self):
        schedule = tdm_schedule({"r1-onu": 2000, "r2-onu": 1000, "r3-onu": 1000}, 1e6, 100)
        assert [g.duration_us for g in schedule.grants] == [50, 25, 25]
        assert schedule.busy_us == 100

    def test_remainder_goes_to_lowest_onu(self):
        demands = {"r{}-onu".format(i): 1e6 for i in range(1, 5)}
        schedule = tdm_schedule(demands, 1e9, 125)
        assert [g.duration_us for g in schedule.grants] == [32, 31, 31, 31]

    def test_light_load_leaves_idle_time(self):
        schedule = tdm_schedule({"r2-onu": 10000, "r10-onu": 0}, 1e9, 125)
        assert [g.onu for g in schedule.grants] == ["r2-onu", "r10-onu"]
        assert schedule.busy_us == 10

    def test_bad_arguments(self):
        with pytest.raises(PonSimParameterException):
            tdm_schedule({"r1-onu": 1}, 1e9, 0)
        with pytest.raises(PonSimParameterException):
            tdm_schedule({"r1-onu": -1}, 1e9, 125)


@pytest.mark.slow
def test_random_demands_fit_the_frame():
    rng = np.random.default_rng(125)
    for _ in range(1000):
        n = int(rng.integers(1, 33))
        scale = float(rng.choice([1e3, 1e5, 1e7]))
        demands = {"r{}-onu".format(i): float(d) for i, d in enumerate(rng.uniform(0, scale, n), 1)}
        if rng.random() < 0.2:
            demands["r1-onu"] = 0.0
        line_rate = float(rng.choice([1e8, 1e9, 1e10]))
        frame = float(rng.choice([125, 250, 1000, 62.5]))
        schedule = tdm_schedule(demands, line_rate, frame)
        assert schedule.overlaps() == []
        assert [g.onu for g in schedule.grants] == ["r{}-onu".format(i) for i in range(1, n + 1)]
        offset = 0
        for g in schedule.grants:
            assert g.duration_us >= 0
            assert g.start_us == offset
            offset += g.duration_us
        assert schedule.busy_us <= frame
        wanted = sum(demands.values()) / line_rate * 1e6
        if wanted > frame + 1:
            assert schedule.busy_us == int(frame)


@pytest.mark.slow
def test_propagation_is_linear():
    rng = np.random.default_rng(490)
    profile = DelayProfile()
    for a, b in rng.uniform(0, 500, (1000, 2)):
        a, b = float(a), float(b)
        assert propagation_delay(fiber(a + b), profile) == pytest.approx(
            propagation_delay(fiber(a), profile) + propagation_delay(fiber(b), profile))
        assert propagation_delay(fiber(3 * a), profile) == pytest.approx(3 * propagation_delay(fiber(a), profile))
        assert propagation_delay(fiber(a), profile) >= 0
