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
import warnings

import pytest

import ponsim
from ponsim.ponsim_exceptions import *
from ponsim.topology import (LinkSpec, Medium, NodeKind, NodeSpec, Topology, attach_core_chain, build_cell,
                             core_chain, draw_topology, fail_link, restore_link, topology_from_dict, topology_from_yaml,
                             topology_to_dict, topology_to_yaml, validate)


def expected_counts(racks, groups, servers, pairs, converters=True):
    nodes = racks * (3 + groups * servers) + 2 + (2 * pairs if converters else 0)
    links = racks * (3 + groups * servers) + 1 + (3 * pairs if converters else pairs)
    return nodes, links


class ReferenceCell(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.t = build_cell(3, 1, 3, "coupler-tdm", wiring="ring")

    def test_kind_counts(self):
        t = self.t
        assert len(t.nodes_of_kind("server")) == 9
        assert len(t.nodes_of_kind("gateway-server")) == 3
        assert len(t.nodes_of_kind("onu")) == 3
        assert len(t.nodes_of_kind("coupler")) == 1
        assert len(t.nodes_of_kind("olt")) == 1
        assert t.olt == "olt"

    def test_all_checks_pass(self):
        report = validate(self.t)
        assert report.passed
        assert report.failed_checks() == []

    def test_gateway_is_olt_facing(self):
        for rack in self.t.racks():
            gw = self.t.gateway(rack)
            assert self.t.link_between(gw, rack + "-onu") is not None

    def test_inter_rack_links_use_converters(self):
        link = self.t.links["mc-r1-r2--mc-r2-r1"]
        assert link.medium == Medium.OPTICAL_FIBER
        assert link.length_km == pytest.approx(0.02)
        assert self.t.link_between("r1-gw", "mc-r1-r2") is not None

    def test_onus_do_not_see_each_other(self):
        neighbors = self.t.l3_neighbors()
        assert "olt" in neighbors["r1-gw"]
        assert "r2-gw" in neighbors["r1-gw"]
        via_olt = neighbors["olt"]
        assert set(via_olt) == {"r1-gw", "r2-gw", "r3-gw"}
        assert via_olt["r2-gw"].nodes == ("olt", "coupler", "r2-onu", "r2-gw")

    def test_yaml_document(self):
        text = topology_to_yaml(self.t)
        assert topology_from_yaml(text) == self.t
        assert topology_to_yaml(topology_from_yaml(text)) == text


def test_reference_cell_counts():
    t = build_cell(3, 2, 3, "coupler-tdm", wiring="ring")
    assert len(t.nodes_of_kind(NodeKind.SERVER)) == 18
    assert len(t.nodes_of_kind(NodeKind.GATEWAY_SERVER)) == 3


def test_minimal_cell():
    t = build_cell(1, 1, 1)
    assert len(t.nodes) == 6
    assert len(t.nodes_of_kind("server")) == 1
    assert len(t.nodes_of_kind("electronic-switch")) == 1
    assert validate(t).passed


def test_counts_follow_wiring_rules():
    with pytest.warns(InfeasibleWiringWarning):
        t = build_cell(4, 3, 2, "awgr-wdm")
    nodes, links = expected_counts(4, 3, 2, pairs=4)
    assert (len(t.nodes), len(t.links)) == (nodes, links)
    assert (len(t.nodes), len(t.links)) == (46, 49)
    assert t.links["awgr--olt"].wavelengths == 80


@pytest.mark.parametrize("racks,groups,servers,converters", [
    (3, 3, 3, True),
    (5, 5, 1, True),
    (4, 4, 2, False),
    (2, 2, 2, True),
])
def test_mesh_counts(racks, groups, servers, converters):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        t = build_cell(racks, groups, servers, wiring="mesh", media_converters=converters)
    pairs = racks * (racks - 1) // 2
    assert (len(t.nodes), len(t.links)) == expected_counts(racks, groups, servers, pairs, converters)
    assert validate(t).passed


def test_two_rack_ring_is_one_link():
    t = build_cell(2, 1, 1, wiring="ring")
    assert [l for l in t.links if l.startswith("mc-") and "--mc-" in l] == ["mc-r1-r2--mc-r2-r1"]


@pytest.mark.parametrize("args", [(0, 1, 1), (1, 0, 1), (1, 1, 0), (1.5, 1, 1)])
def test_bad_counts(args):
    with pytest.raises(PonSimParameterException):
        build_cell(*args)


def test_unknown_provisioning():
    with pytest.raises(PonSimUnknownKindException):
        build_cell(1, 1, 1, "fdm")


def test_core_chain_lengths():
    t = attach_core_chain(build_cell(3, 1, 3, wiring="ring"), [50, 50])
    assert core_chain(t) == ["core1", "core2"]
    assert t.links["olt--core1"].length_km == 50
    assert t.links["core1--core2"].length_km == 50
    assert t.links["core2--display"].medium == Medium.ELECTRICAL
    assert sum(l.length_km for l in t.links.values() if l.id.startswith(("olt--core", "core"))) == 100
    assert validate(t).passed


def test_core_chain_four_spans():
    t = attach_core_chain(build_cell(1, 1, 1), [25, 25, 25, 25])
    chain = [l for l in t.links.values() if t.nodes[l.endpoints[1]].kind == NodeKind.WDM_CORE_NODE]
    assert len(chain) == 4
    assert sum(l.length_km for l in chain) == 100
    assert all(l.wavelengths == 80 for l in chain)


def test_core_chain_near_zero():
    t = attach_core_chain(build_cell(1, 1, 1), [0.001])
    assert t.links["olt--core1"].length_km == pytest.approx(0.001)


@pytest.mark.parametrize("spans", [[], [0], [10, -5]])
def test_invalid_spans(spans):
    with pytest.raises(PonSimSpanException):
        attach_core_chain(build_cell(1, 1, 1), spans)


def test_core_chain_needs_olt():
    t = Topology([NodeSpec("r1-g1-s1", "server", "r1", 1)], [])
    with pytest.raises(PonSimParameterException):
        attach_core_chain(t, [10])


def test_dangling_reference():
    t = build_cell(1, 1, 1)
    broken = t._replace(links=t._link_list + (LinkSpec("olt--ghost", ("olt", "ghost"), Medium.OPTICAL_FIBER, 1.0,
                                                         10e9),))
    report = validate(broken)
    assert "olt--ghost:ghost" in report.checks["dangling-reference"]


def test_two_gateways_in_one_rack():
    t = build_cell(2, 1, 2, wiring="ring")
    extra = NodeSpec("r1-gw2", NodeKind.GATEWAY_SERVER, "r1", 1)
    broken = t._replace(nodes=t._node_list + (extra,),
                        links=t._link_list + (LinkSpec("r1-gw2--r1-sw", ("r1-gw2", "r1-sw")),))
    report = validate(broken)
    assert report.checks["gateway-uniqueness"] == ["r1"]
    assert not report.passed


def test_fail_inter_rack_link_keeps_cell_connected():
    t = build_cell(3, 3, 3)
    assert "r2-g2-s1" in t.l3_neighbors()["r1-g2-s1"]
    failed = fail_link(t, "mc-r1-r2--mc-r2-r1")
    assert "mc-r1-r2--mc-r2-r1" in failed.down
    assert validate(failed).passed
    neighbors = failed.l3_neighbors()
    assert "r2-g2-s1" not in neighbors["r1-g2-s1"]
    assert "olt" in neighbors["r1-gw"]
    assert failed.relays("r1") == t.relays("r1")


class RelayCell(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.t = build_cell(3, 3, 1, "awgr-wdm", wiring="mesh")

    def test_relays_terminate_inter_rack_links(self):
        t = self.t
        assert t.link_between("r1-g2-s1", "mc-r1-r2") is not None
        assert t.link_between("r1-g3-s1", "mc-r1-r3") is not None
        assert t.link_between("r3-g3-s1", "mc-r3-r2") is not None
        assert t.link_between("r1-gw", "mc-r1-r2") is None
        assert validate(t).passed

    def test_gateway_only_faces_the_olt(self):
        assert set(self.t.l3_neighbors()["r2-gw"]) == {"olt", "r2-g1-s1", "r2-g2-s1", "r2-g3-s1"}

    def test_relays_are_routers(self):
        t = self.t
        assert t.relays("r1") == ["r1-g2-s1", "r1-g3-s1"]
        assert t.relays("r2") == ["r2-g2-s1", "r2-g3-s1"]
        assert t.is_router("r2-g3-s1")
        assert not t.is_router("r2-g1-s1")
        assert len(t.routers) == 1 + 3 + 6


def test_ring_relays_wrap_round():
    t = build_cell(4, 2, 1, wiring="ring")
    assert t.relays("r1") == ["r1-g2-s1"]
    assert set(t.l3_neighbors()["r1-g2-s1"]) == {"r1-gw", "r1-g1-s1", "r2-g2-s1", "r4-g2-s1"}


def test_single_group_gateway_keeps_both_roles():
    t = build_cell(3, 1, 3, wiring="ring")
    assert t.relays("r1") == []
    assert t.routers == frozenset(["olt", "r1-gw", "r2-gw", "r3-gw"])


def test_parallel_links_are_reported():
    t = build_cell(1, 1, 1)
    doubled = t._replace(links=t._link_list + (LinkSpec("r1-sw--r1-g1-s1", ("r1-sw", "r1-g1-s1")),))
    assert doubled.parallel_links == ("r1-sw--r1-g1-s1",)
    report = validate(doubled)
    assert report.checks["parallel-link"] == ["r1-sw--r1-g1-s1"]
    assert not report.passed
    assert validate(t).checks["parallel-link"] == []


def test_parallel_links_are_rejected_on_load():
    doc = topology_to_dict(build_cell(1, 1, 1))
    doc["links"].append({"id": "again", "endpoints": ["r1-sw", "r1-g1-s1"]})
    with pytest.raises(PonSimParseException, match="same two nodes"):
        topology_from_dict(doc)


def test_fail_only_link_disconnects():
    t = Topology([NodeSpec("a", "olt"), NodeSpec("b", "wdm-core-node")],
                 [LinkSpec("a--b", ("a", "b"), Medium.OPTICAL_FIBER, 1.0, 10e9)])
    assert validate(t).passed
    report = validate(fail_link(t, "a--b"))
    assert report.checks["connectivity"] == ["b"]


def test_fail_then_restore():
    t = build_cell(3, 3, 1)
    link = "mc-r2-r3--mc-r3-r2"
    again = restore_link(fail_link(t, link), link)
    assert again == t
    assert again.adjacency == t.adjacency
    assert fail_link(fail_link(t, link), link).down == frozenset([link])


def test_unknown_link():
    with pytest.raises(PonSimUnknownLinkException):
        fail_link(build_cell(1, 1, 1), "nope")
    with pytest.raises(PonSimUnknownLinkException):
        restore_link(build_cell(1, 1, 1), "nope")


def test_malformed_yaml_reports_location():
    with pytest.raises(PonSimParseException, match=r"line \d+, column \d+"):
        topology_from_yaml("nodes:\n  - id: [unclosed\n")


def test_package_exports():
    assert ponsim.build_cell is build_cell


def test_draw_topology(tmp_path):
    dest = tmp_path / "cell.png"
    t = fail_link(build_cell(3, 1, 3, wiring="ring"), "r1-g1-s1--r1-sw")
    draw_topology(t, str(dest))
    assert dest.stat().st_size > 0
    with pytest.raises(RuntimeError):
        draw_topology(Topology([], []), str(tmp_path / "empty.png"))
