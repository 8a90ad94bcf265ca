import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nethelpers import random_net
from riskbn.errors import CycleError, NetworkValidationError, ParseError
from riskbn.network import (
    BayesNet,
    Cpt,
    Distribution,
    NodeDef,
    Provenance,
    RenormalizationWarning,
    load_network,
    save_network,
    topological_order,
    validate_network,
)


def make_net(nodes, parents, cpts, **kw):
    return BayesNet(nodes=tuple(nodes), parents=parents, cpts=cpts, **kw)


class TestNodeDef:
    def test_rejects_single_state(self):
        with pytest.raises(ValueError, match="at least 2"):
            NodeDef("x", "X", ("only",), "ttp")

    def test_rejects_duplicate_states(self):
        with pytest.raises(ValueError, match="duplicate"):
            NodeDef("x", "X", ("a", "a"), "ttp")

    def test_rejects_empty_state_name(self):
        with pytest.raises(ValueError, match="empty state"):
            NodeDef("x", "X", ("a", ""), "ttp")

    def test_rejects_bad_provenance_tag(self):
        with pytest.raises(ValueError, match="provenance tag"):
            Provenance("text", "GUESSED")


class TestValidation:
    def test_valid_chain_is_clean(self, two_node_net):
        assert validate_network(two_node_net).ok

    def test_cycle_reported(self):
        nodes = (
            NodeDef("A", "A", ("a0", "a1"), "ttp"),
            NodeDef("B", "B", ("b0", "b1"), "ttp"),
        )
        net = make_net(
            nodes,
            {"A": ("B",), "B": ("A",)},
            {
                "A": Cpt(("B",), ((0.5, 0.5), (0.5, 0.5))),
                "B": Cpt(("A",), ((0.5, 0.5), (0.5, 0.5))),
            },
        )
        report = validate_network(net)
        cycles = [v for v in report.violations if v.kind == "cycle"]
        assert len(cycles) == 1
        assert "A" in cycles[0].detail and "B" in cycles[0].detail

    def test_non_normalized_row_with_deviation(self):
        nodes = (NodeDef("A", "A", ("a0", "a1"), "ttp"),)
        net = make_net(nodes, {"A": ()}, {"A": Cpt((), ((0.5, 0.6),))})
        report = validate_network(net)
        bad = [v for v in report.violations if v.kind == "non-normalized"]
        assert len(bad) == 1
        assert "+0.1" in bad[0].detail

    def test_dangling_parent(self):
        nodes = (NodeDef("A", "A", ("a0", "a1"), "ttp"),)
        net = make_net(nodes, {"A": ("ghost",)}, {"A": Cpt(("ghost",), ((0.5, 0.5),))})
        kinds = {v.kind for v in validate_network(net).violations}
        assert "dangling-parent" in kinds

    def test_bad_row_count(self):
        nodes = (
            NodeDef("A", "A", ("a0", "a1"), "ttp"),
            NodeDef("B", "B", ("b0", "b1"), "ttp"),
        )
        net = make_net(
            nodes,
            {"A": (), "B": ("A",)},
            {"A": Cpt((), ((0.5, 0.5),)), "B": Cpt(("A",), ((0.5, 0.5),))},
        )
        kinds = {v.kind for v in validate_network(net).violations}
        assert kinds == {"bad-row-count"}

    def test_bad_threshold_states(self):
        nodes = (NodeDef("T", "T", ("lo", "hi"), "threshold"),)
        net = make_net(
            nodes, {"T": ()}, {"T": Cpt((), ((0.5, 0.5),))}, threshold_nodes=("T",)
        )
        kinds = {v.kind for v in validate_network(net).violations}
        assert kinds == {"bad-threshold-states"}

    def test_duplicate_node_id_rejected_at_construction(self):
        nodes = (
            NodeDef("A", "A", ("a0", "a1"), "ttp"),
            NodeDef("A", "A2", ("a0", "a1"), "ttp"),
        )
        with pytest.raises(ValueError, match="duplicate node id"):
            make_net(nodes, {"A": ()}, {"A": Cpt((), ((0.5, 0.5),))})

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 10_000), surgery=st.integers(0, 10_000))
    def test_random_valid_nets_clean_and_mutation_detected(self, seed, surgery):
        rng = np.random.default_rng(seed)
        net = random_net(rng)
        assert validate_network(net).ok
        mutate = np.random.default_rng(surgery)
        nid = net.nodes[int(mutate.integers(len(net.nodes)))].id
        rows = [list(r) for r in net.cpts[nid].rows]
        r = int(mutate.integers(len(rows)))
        c = int(mutate.integers(len(rows[0])))
        rows[r][c] += 0.1
        broken_cpts = dict(net.cpts)
        broken_cpts[nid] = Cpt(net.cpts[nid].parent_order, tuple(tuple(x) for x in rows))
        broken = make_net(net.nodes, net.parents, broken_cpts)
        assert not validate_network(broken).ok


class TestTopologicalOrder:
    def test_chain(self):
        nodes = tuple(NodeDef(x, x, ("s0", "s1"), "ttp") for x in "ABC")
        net = make_net(
            nodes,
            {"A": (), "B": ("A",), "C": ("B",)},
            {
                "A": Cpt((), ((0.5, 0.5),)),
                "B": Cpt(("A",), ((0.5, 0.5), (0.5, 0.5))),
                "C": Cpt(("B",), ((0.5, 0.5), (0.5, 0.5))),
            },
        )
        assert topological_order(net) == ["A", "B", "C"]

    def test_declaration_order_tie_break(self):
        nodes = (
            NodeDef("X", "X", ("s0", "s1"), "ttp"),
            NodeDef("Y", "Y", ("s0", "s1"), "ttp"),
        )
        net = make_net(
            nodes,
            {"X": (), "Y": ()},
            {"X": Cpt((), ((0.5, 0.5),)), "Y": Cpt((), ((0.5, 0.5),))},
        )
        assert topological_order(net) == ["X", "Y"]

    def test_diamond_tie_break(self):
        nodes = tuple(NodeDef(x, x, ("s0", "s1"), "ttp") for x in "ABCD")
        uniform2 = ((0.5, 0.5), (0.5, 0.5))
        net = make_net(
            nodes,
            {"A": (), "B": ("A",), "C": ("A",), "D": ("B", "C")},
            {
                "A": Cpt((), ((0.5, 0.5),)),
                "B": Cpt(("A",), uniform2),
                "C": Cpt(("A",), uniform2),
                "D": Cpt(("B", "C"), ((0.5, 0.5),) * 4),
            },
        )
        assert topological_order(net) == ["A", "B", "C", "D"]

    def test_cycle_raises_naming_member(self):
        nodes = (
            NodeDef("A", "A", ("a0", "a1"), "ttp"),
            NodeDef("B", "B", ("b0", "b1"), "ttp"),
        )
        net = make_net(
            nodes,
            {"A": ("B",), "B": ("A",)},
            {
                "A": Cpt(("B",), ((0.5, 0.5), (0.5, 0.5))),
                "B": Cpt(("A",), ((0.5, 0.5), (0.5, 0.5))),
            },
        )
        with pytest.raises(CycleError) as exc:
            topological_order(net)
        assert exc.value.node_id in ("A", "B")

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_order_respects_every_edge(self, seed):
        net = random_net(np.random.default_rng(seed))
        order = topological_order(net)
        assert len(order) == len(net.nodes)
        position = {nid: i for i, nid in enumerate(order)}
        for parent, child in net.edges():
            assert position[parent] < position[child]


class TestSerialization:
    def test_round_trip_value_identity(self, two_node_net):
        data = save_network(two_node_net)
        assert load_network(data) == two_node_net

    def test_save_load_save_byte_identity(self, two_node_net):
        once = save_network(two_node_net)
        again = save_network(load_network(once))
        assert once == again

    def test_unknown_field_rejected(self, two_node_net):
        obj = json.loads(save_network(two_node_net))
        obj["surprise"] = 1
        with pytest.raises(ParseError, match="surprise"):
            load_network(json.dumps(obj))

    def test_unknown_node_field_rejected(self, two_node_net):
        obj = json.loads(save_network(two_node_net))
        obj["nodes"][0]["color"] = "red"
        with pytest.raises(ParseError, match="color"):
            load_network(json.dumps(obj))

    def test_syntax_error_reports_line(self):
        with pytest.raises(ParseError, match="line 1"):
            load_network(b"{not json")

    def test_empty_node_list_is_valid(self):
        net = load_network(
            json.dumps(
                {
                    "name": "empty",
                    "version": "0",
                    "threshold_statement": "",
                    "nodes": [],
                    "threshold_nodes": [],
                }
            )
        )
        assert net.nodes == ()
        assert validate_network(net).ok

    def test_loader_renormalizes_small_deviation_with_warning(self, two_node_net):
        obj = json.loads(save_network(two_node_net))
        obj["nodes"][0]["cpt"][0] = [0.2000001, 0.8]
        with pytest.warns(RenormalizationWarning):
            net = load_network(json.dumps(obj))
        assert abs(sum(net.cpts["A"].rows[0]) - 1.0) <= 1e-12

    def test_loader_rejects_large_deviation(self, two_node_net):
        obj = json.loads(save_network(two_node_net))
        obj["nodes"][0]["cpt"][0] = [0.5, 0.6]
        with pytest.raises(NetworkValidationError) as exc:
            load_network(json.dumps(obj))
        assert any(v.kind == "non-normalized" for v in exc.value.report.violations)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 100_000))
    def test_random_nets_round_trip_bit_exact(self, seed):
        net = random_net(np.random.default_rng(seed))
        data = save_network(net)
        loaded = load_network(data)
        assert loaded == net
        assert save_network(loaded) == data
        for nid in net.node_ids:
            assert loaded.cpts[nid].rows == net.cpts[nid].rows  # bit-exact floats


class TestDistribution:
    def test_normalized_check(self):
        assert Distribution((0.25, 0.75)).is_normalized()
        assert not Distribution((0.3, 0.75)).is_normalized()
        assert not Distribution((-0.25, 1.25)).is_normalized()
