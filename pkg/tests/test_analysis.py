import json

import numpy as np
import pytest

from nethelpers import random_net
from riskbn.analysis import (
    AlarmRule,
    BadDeltaError,
    NotThresholdNodeError,
    Scenario,
    ScenarioSet,
    assess_threshold,
    diagnose,
    load_scenarios,
    perturb_prior,
    run_scenarios,
    scenarios_to_obj,
    sensitivity,
)
from riskbn.errors import InvalidEvidenceError, ParseError, UnknownNodeError
from riskbn.inference import EvidenceSet, prior_marginals, probability_of
from riskbn.network import BayesNet, Cpt, NodeDef, RISK_LEVELS


def threshold_net():
    """Root cause feeding a proper four-level threshold node."""
    return BayesNet(
        nodes=(
            NodeDef("pressure", "Pressure", ("low", "high"), "ttp"),
            NodeDef("risk", "Risk", RISK_LEVELS, "threshold"),
        ),
        parents={"pressure": (), "risk": ("pressure",)},
        cpts={
            "pressure": Cpt((), ((0.7, 0.3),)),
            "risk": Cpt(
                ("pressure",),
                ((0.6, 0.3, 0.08, 0.02), (0.1, 0.3, 0.35, 0.25)),
            ),
        },
        threshold_nodes=("risk",),
    )


class TestAssessThreshold:
    def test_no_evidence_equals_prior(self):
        net = threshold_net()
        assessment = assess_threshold(net, EvidenceSet(), "risk", AlarmRule())
        prior = prior_marginals(net).marginals["risk"]
        assert assessment.posterior.probs == prior.probs
        assert assessment.alarm is False

    def test_threshold_fixed_to_intolerable(self):
        net = threshold_net()
        ev = EvidenceSet(hard={"risk": "Intolerable"})
        assessment = assess_threshold(net, ev, "risk", AlarmRule("Intolerable", 0.4))
        assert assessment.posterior.probs == (0.0, 0.0, 0.0, 1.0)
        assert assessment.alarm is True

    def test_cutoff_one_with_non_degenerate_posterior(self):
        net = threshold_net()
        assessment = assess_threshold(net, EvidenceSet(), "risk", AlarmRule("Low", 1.0))
        assert assessment.alarm is False

    def test_cutoff_boundary_is_inclusive(self):
        net = threshold_net()
        ev = EvidenceSet(hard={"risk": "High"})
        assessment = assess_threshold(net, ev, "risk", AlarmRule("High", 1.0))
        assert assessment.alarm is True

    def test_non_threshold_node_rejected(self):
        net = threshold_net()
        with pytest.raises(NotThresholdNodeError):
            assess_threshold(net, EvidenceSet(), "pressure", AlarmRule())


class TestDiagnose:
    def test_two_node_lift(self, two_node_net):
        entries = diagnose(two_node_net, EvidenceSet(hard={"B": "b0"}), ["A"])
        by_state = {e.state: e for e in entries}
        assert by_state["a0"].prior == pytest.approx(0.2, abs=1e-12)
        assert by_state["a0"].posterior == pytest.approx(0.18 / 0.42, abs=1e-12)
        assert by_state["a0"].lift == pytest.approx(0.18 / 0.42 - 0.2, abs=1e-12)
        assert entries[0].state in ("a0", "a1")  # sorted by |lift| descending
        assert abs(entries[0].lift) >= abs(entries[-1].lift)

    def test_disconnected_component_has_zero_lift(self):
        net = BayesNet(
            nodes=(
                NodeDef("X", "X", ("x0", "x1"), "ttp"),
                NodeDef("Y", "Y", ("y0", "y1"), "ttp"),
            ),
            parents={"X": (), "Y": ()},
            cpts={"X": Cpt((), ((0.4, 0.6),)), "Y": Cpt((), ((0.9, 0.1),))},
        )
        entries = diagnose(net, EvidenceSet(hard={"X": "x0"}), ["Y"])
        for e in entries:
            assert e.lift == pytest.approx(0.0, abs=1e-12)

    def test_empty_rank_over(self, two_node_net):
        assert diagnose(two_node_net, EvidenceSet(hard={"B": "b0"}), []) == []

    def test_empty_evidence_rejected(self, two_node_net):
        with pytest.raises(InvalidEvidenceError):
            diagnose(two_node_net, EvidenceSet(), ["A"])

    def test_lifts_match_oracle_on_random_nets(self):
        from nethelpers import sample_assignment
        from riskbn.inference import enumerate_joint

        rng = np.random.default_rng(2718)
        for _ in range(10):
            net = random_net(rng, n_nodes=int(rng.integers(2, 7)))
            assignment = sample_assignment(rng, net)
            observed_node = net.nodes[-1].id
            ev = EvidenceSet(hard={observed_node: assignment[observed_node]})
            rank_over = [n.id for n in net.nodes[:-1]]
            entries = diagnose(net, ev, rank_over)
            prior = enumerate_joint(net).marginals
            posterior = enumerate_joint(net, ev).marginals
            for e in entries:
                k = net.state_index(e.node_id, e.state)
                expected = posterior[e.node_id][k] - prior[e.node_id][k]
                assert e.lift == pytest.approx(expected, abs=1e-9)

    def test_tie_break_by_declaration_then_state(self):
        # two independent nodes give exactly-zero lifts, so ordering falls
        # back to declaration order then state order
        net = BayesNet(
            nodes=(
                NodeDef("X", "X", ("x0", "x1"), "ttp"),
                NodeDef("Y", "Y", ("y0", "y1"), "ttp"),
                NodeDef("Z", "Z", ("z0", "z1"), "ttp"),
            ),
            parents={"X": (), "Y": (), "Z": ()},
            cpts={
                "X": Cpt((), ((0.4, 0.6),)),
                "Y": Cpt((), ((0.9, 0.1),)),
                "Z": Cpt((), ((0.25, 0.75),)),
            },
        )
        entries = diagnose(net, EvidenceSet(hard={"X": "x0"}), ["Z", "Y"])
        assert [(e.node_id, e.state) for e in entries] == [
            ("Y", "y0"),
            ("Y", "y1"),
            ("Z", "z0"),
            ("Z", "z1"),
        ]


class TestPerturbPrior:
    def test_proportional_covariation(self):
        out = perturb_prior((0.5, 0.3, 0.2), 0, 0.1)
        assert out[0] == pytest.approx(0.6)
        assert out[1] == pytest.approx(0.3 * 0.4 / 0.5)
        assert out[2] == pytest.approx(0.2 * 0.4 / 0.5)
        assert sum(out) == pytest.approx(1.0, abs=1e-12)

    def test_clipping_at_one(self):
        out = perturb_prior((0.95, 0.05), 0, 0.1)
        assert out[0] == 1.0
        assert out[1] == pytest.approx(0.0)

    def test_degenerate_residual_spread_uniformly(self):
        out = perturb_prior((1.0, 0.0, 0.0), 0, -0.1)
        assert out[0] == pytest.approx(0.9)
        assert out[1] == pytest.approx(0.05)
        assert out[2] == pytest.approx(0.05)


class TestSensitivity:
    def test_two_node_derived_values(self, two_node_net):
        report = sensitivity(two_node_net, "B", "b0", delta=0.1)
        assert report.baseline == pytest.approx(0.42, abs=1e-12)
        a0 = next(e for e in report.entries if e.state == "a0")
        assert a0.high == pytest.approx(0.48, abs=1e-12)
        assert a0.low == pytest.approx(0.36, abs=1e-12)
        assert a0.range == pytest.approx(0.12, abs=1e-12)
        # both states of A move the target by the same range; a0 sorts first
        assert [e.state for e in report.entries] == ["a0", "a1"]

    def test_self_sensitivity_range_is_two_delta(self):
        net = BayesNet(
            nodes=(NodeDef("A", "A", ("a0", "a1"), "ttp"),),
            parents={"A": ()},
            cpts={"A": Cpt((), ((0.5, 0.5),))},
        )
        report = sensitivity(net, "A", "a0", delta=0.1)
        entry = next(e for e in report.entries if e.state == "a0")
        assert entry.range == pytest.approx(0.2, abs=1e-12)

    def test_d_separated_source_has_zero_range(self):
        net = BayesNet(
            nodes=(
                NodeDef("X", "X", ("x0", "x1"), "ttp"),
                NodeDef("Y", "Y", ("y0", "y1"), "ttp"),
            ),
            parents={"X": (), "Y": ()},
            cpts={"X": Cpt((), ((0.4, 0.6),)), "Y": Cpt((), ((0.9, 0.1),))},
        )
        report = sensitivity(net, "Y", "y0", sources=["X"], delta=0.2)
        for entry in report.entries:
            assert entry.range == pytest.approx(0.0, abs=1e-12)

    def test_delta_out_of_range(self, two_node_net):
        with pytest.raises(BadDeltaError):
            sensitivity(two_node_net, "B", "b0", delta=0.0)
        with pytest.raises(BadDeltaError):
            sensitivity(two_node_net, "B", "b0", delta=1.0)

    def test_unknown_target(self, two_node_net):
        with pytest.raises(UnknownNodeError):
            sensitivity(two_node_net, "Z", "b0")

    def test_perturbed_values_reproducible_by_plain_inference(self):
        # soundness: re-running inference on the perturbed network must give
        # exactly the reported numbers
        from riskbn.analysis import _replace_root_prior, root_nodes

        rng = np.random.default_rng(123)
        for _ in range(10):
            net = random_net(rng, n_nodes=6)
            target = net.nodes[-1].id
            state = net.node(target).states[0]
            report = sensitivity(net, target, state, delta=0.15)
            k = net.state_index(target, state)
            for entry in report.entries:
                row = net.cpts[entry.source].rows[0]
                s = net.state_index(entry.source, entry.state)
                for sign, reported in ((-1.0, entry.low), (1.0, entry.high)):
                    perturbed = _replace_root_prior(
                        net, entry.source, perturb_prior(row, s, sign * 0.15)
                    )
                    again = prior_marginals(perturbed).marginals[target][k]
                    assert again == pytest.approx(reported, abs=1e-9)

    def test_tornado_matches_brute_force_order(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            net = random_net(rng, n_nodes=int(rng.integers(3, 9)))
            target = net.nodes[-1].id
            state = net.node(target).states[-1]
            report = sensitivity(net, target, state, delta=0.1)
            # brute force: recompute every (root, state) range independently
            from riskbn.analysis import _replace_root_prior, root_nodes

            k = net.state_index(target, state)
            brute = []
            for nid in root_nodes(net):
                row = net.cpts[nid].rows[0]
                for s, sname in enumerate(net.node(nid).states):
                    lo = prior_marginals(
                        _replace_root_prior(net, nid, perturb_prior(row, s, -0.1))
                    ).marginals[target][k]
                    hi = prior_marginals(
                        _replace_root_prior(net, nid, perturb_prior(row, s, 0.1))
                    ).marginals[target][k]
                    brute.append((nid, sname, abs(hi - lo)))
            brute.sort(
                key=lambda t: (
                    -t[2],
                    net.index_of(t[0]),
                    net.state_index(t[0], t[1]),
                )
            )
            got = [(e.source, e.state) for e in report.entries]
            assert got == [(nid, sname) for nid, sname, _ in brute]


class TestScenarios:
    def test_empty_scenario_equals_plain_assessment(self):
        net = threshold_net()
        scenarios = ScenarioSet((Scenario("baseline", EvidenceSet()),))
        outcomes = run_scenarios(net, scenarios, "risk", AlarmRule())
        direct = assess_threshold(net, EvidenceSet(), "risk", AlarmRule())
        assert outcomes[0].status == "ok"
        assert outcomes[0].assessment.posterior.probs == direct.posterior.probs

    def test_inconsistent_scenario_does_not_abort_batch(self):
        net = BayesNet(
            nodes=(
                NodeDef("cause", "Cause", ("off", "on"), "ttp"),
                NodeDef("risk", "Risk", RISK_LEVELS, "threshold"),
            ),
            parents={"cause": (), "risk": ("cause",)},
            cpts={
                "cause": Cpt((), ((1.0, 0.0),)),
                "risk": Cpt(
                    ("cause",),
                    ((0.7, 0.2, 0.07, 0.03), (0.1, 0.2, 0.3, 0.4)),
                ),
            },
            threshold_nodes=("risk",),
        )
        scenarios = ScenarioSet(
            (
                Scenario("possible", EvidenceSet()),
                Scenario("impossible", EvidenceSet(hard={"cause": "on"})),
                Scenario("after", EvidenceSet(hard={"cause": "off"})),
            )
        )
        outcomes = run_scenarios(net, scenarios, "risk", AlarmRule())
        assert [o.status for o in outcomes] == ["ok", "inconsistent", "ok"]
        assert outcomes[1].assessment is None
        assert outcomes[2].assessment is not None

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError, match="duplicate scenario name"):
            ScenarioSet(
                (Scenario("x", EvidenceSet()), Scenario("x", EvidenceSet()))
            )

    def test_irrelevant_evidence_gives_identical_assessment(self):
        net = BayesNet(
            nodes=(
                NodeDef("island", "Island", ("i0", "i1"), "ttp"),
                NodeDef("pressure", "Pressure", ("low", "high"), "ttp"),
                NodeDef("risk", "Risk", RISK_LEVELS, "threshold"),
            ),
            parents={"island": (), "pressure": (), "risk": ("pressure",)},
            cpts={
                "island": Cpt((), ((0.5, 0.5),)),
                "pressure": Cpt((), ((0.7, 0.3),)),
                "risk": Cpt(
                    ("pressure",),
                    ((0.6, 0.3, 0.08, 0.02), (0.1, 0.3, 0.35, 0.25)),
                ),
            },
            threshold_nodes=("risk",),
        )
        scenarios = ScenarioSet(
            (
                Scenario("plain", EvidenceSet()),
                Scenario("plus-island", EvidenceSet(hard={"island": "i1"})),
            )
        )
        a, b = run_scenarios(net, scenarios, "risk", AlarmRule())
        assert a.assessment.posterior.probs == pytest.approx(
            b.assessment.posterior.probs, abs=1e-12
        )

    def test_scenario_file_round_trip(self):
        scenarios = ScenarioSet(
            (
                Scenario("a", EvidenceSet(hard={"n": "s"}), "desc"),
                Scenario("b", EvidenceSet(soft={"m": (1.0, 0.25)})),
            )
        )
        text = json.dumps(scenarios_to_obj(scenarios))
        loaded = load_scenarios(text)
        assert len(loaded) == 2
        assert loaded.scenarios[0].evidence.hard == {"n": "s"}
        assert loaded.scenarios[1].evidence.soft == {"m": (1.0, 0.25)}

    def test_scenario_file_unknown_field(self):
        with pytest.raises(ParseError, match="mood"):
            load_scenarios(
                json.dumps({"scenarios": [{"name": "x", "evidence": {}, "mood": 1}]})
            )
