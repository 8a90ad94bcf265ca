import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riskbn.elicitation import (
    DirichletPrior,
    EvidenceRecord,
    ExpertJudgment,
    ess_to_prior,
    ledger_to_soft_evidence,
    load_elicitation,
    load_ledger,
    pool_judgments,
    priors_from_judgments,
)
from riskbn.errors import (
    EmptyJudgmentsError,
    JudgmentMismatchError,
    NonPositiveEssError,
    ParseError,
    ShapeMismatchError,
)
from riskbn.network import Distribution


def judgment(dist, weight, node="risk", expert="e", config=None):
    return ExpertJudgment(
        expert_id=expert,
        node_id=node,
        dist=Distribution(tuple(dist)),
        weight=weight,
        parent_config=config,
    )


# Hypothesis strategy: a batch of judgments over the same node with k states
@st.composite
def judgment_sets(draw, max_experts=6, max_states=5):
    k = draw(st.integers(2, max_states))
    n = draw(st.integers(1, max_experts))
    out = []
    for i in range(n):
        raw = draw(
            st.lists(
                st.floats(0.01, 1.0, allow_nan=False), min_size=k, max_size=k
            )
        )
        total = sum(raw)
        weight = draw(st.floats(0.01, 50.0, allow_nan=False))
        out.append(judgment([x / total for x in raw], weight, expert=f"e{i}"))
    return out


class TestPooling:
    def test_weighted_average_example(self):
        pooled, ess = pool_judgments(
            [judgment((0.6, 0.4), 2.0), judgment((0.3, 0.7), 1.0)]
        )
        assert pooled.probs == pytest.approx((0.5, 0.5), abs=1e-15)
        assert ess == pytest.approx(3.0)

    def test_single_judgment_identity(self):
        pooled, ess = pool_judgments([judgment((0.25, 0.75), 7.5)])
        assert pooled.probs == (0.25, 0.75)
        assert ess == 7.5

    def test_identical_distributions_fixed_point(self):
        pooled, _ = pool_judgments(
            [judgment((0.1, 0.9), 3.0), judgment((0.1, 0.9), 11.0)]
        )
        assert pooled.probs == pytest.approx((0.1, 0.9), abs=1e-15)

    def test_empty_input_rejected(self):
        with pytest.raises(EmptyJudgmentsError):
            pool_judgments([])

    def test_mixed_nodes_rejected(self):
        with pytest.raises(JudgmentMismatchError):
            pool_judgments(
                [judgment((0.5, 0.5), 1.0, node="a"), judgment((0.5, 0.5), 1.0, node="b")]
            )

    def test_mixed_configs_rejected(self):
        with pytest.raises(JudgmentMismatchError):
            pool_judgments(
                [
                    judgment((0.5, 0.5), 1.0, config={"p": "x"}),
                    judgment((0.5, 0.5), 1.0, config={"p": "y"}),
                ]
            )

    def test_non_positive_weight_rejected(self):
        with pytest.raises(ValueError):
            judgment((0.5, 0.5), 0.0)

    @settings(max_examples=250, deadline=None)
    @given(js=judgment_sets(), scale=st.floats(0.01, 100.0, allow_nan=False))
    def test_weight_rescaling_invariance(self, js, scale):
        pooled, ess = pool_judgments(js)
        scaled = [
            judgment(j.dist.probs, j.weight * scale, expert=j.expert_id) for j in js
        ]
        pooled2, ess2 = pool_judgments(scaled)
        assert pooled2.probs == pytest.approx(pooled.probs, abs=1e-9)
        assert ess2 == pytest.approx(ess * scale, rel=1e-9)

    @settings(max_examples=250, deadline=None)
    @given(js=judgment_sets(), seed=st.integers(0, 2**32 - 1))
    def test_permutation_invariance(self, js, seed):
        pooled, ess = pool_judgments(js)
        shuffled = list(js)
        np.random.default_rng(seed).shuffle(shuffled)
        pooled2, ess2 = pool_judgments(shuffled)
        assert pooled2.probs == pytest.approx(pooled.probs, abs=1e-12)
        assert ess2 == pytest.approx(ess, rel=1e-12)

    @settings(max_examples=250, deadline=None)
    @given(js=judgment_sets())
    def test_convex_hull_containment(self, js):
        pooled, _ = pool_judgments(js)
        for k, p in enumerate(pooled.probs):
            lo = min(j.dist[k] for j in js)
            hi = max(j.dist[k] for j in js)
            assert lo - 1e-12 <= p <= hi + 1e-12

    @settings(max_examples=250, deadline=None)
    @given(js=judgment_sets())
    def test_pooled_is_normalized(self, js):
        pooled, _ = pool_judgments(js)
        assert abs(sum(pooled.probs) - 1.0) <= 1e-9


class TestEssToPrior:
    def test_scalar_multiplication(self):
        prior = ess_to_prior(Distribution((0.5, 0.5)), 3.0, "n", 1, 2)
        assert prior.alphas == ((1.5, 1.5),)

    def test_sharp_distribution(self):
        prior = ess_to_prior(Distribution((0.9, 0.1)), 10.0, "n", 1, 2)
        assert prior.alphas[0] == pytest.approx((9.0, 1.0), abs=1e-12)

    def test_zero_ess_rejected(self):
        with pytest.raises(NonPositiveEssError):
            ess_to_prior(Distribution((0.5, 0.5)), 0.0, "n", 1, 2)

    def test_unelicited_rows_get_uniform_default(self):
        prior = ess_to_prior(Distribution((0.8, 0.2)), 5.0, "n", 4, 2, row_index=2)
        assert prior.alphas[2] == pytest.approx((4.0, 1.0))
        for r in (0, 1, 3):
            assert prior.alphas[r] == pytest.approx((0.5, 0.5))

    def test_multi_row_requires_row_index(self):
        with pytest.raises(ShapeMismatchError):
            ess_to_prior(Distribution((0.5, 0.5)), 1.0, "n", 4, 2)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ShapeMismatchError):
            ess_to_prior(Distribution((0.5, 0.3, 0.2)), 1.0, "n", 1, 2)


class TestLedger:
    def test_max_normalization(self):
        rec = EvidenceRecord(
            source_category="red_teaming",
            citation="c",
            node_id="n",
            payload_kind="likelihood",
            values=(2.0, 1.0),
        )
        node, vec = ledger_to_soft_evidence(rec)
        assert node == "n"
        assert vec == pytest.approx((1.0, 0.5))

    def test_detection_rate_normalization(self):
        # likelihood built from a reported 97.25% true-positive detection rate
        rec = EvidenceRecord(
            source_category="capability_evaluation",
            citation="detector study",
            node_id="detection",
            payload_kind="likelihood",
            values=(0.97, 0.03),
        )
        _, vec = ledger_to_soft_evidence(rec)
        assert vec[0] == pytest.approx(1.0)
        assert vec[1] == pytest.approx(0.03 / 0.97, abs=1e-12)
        assert f"{vec[1]:.6f}" == "0.030928"

    def test_all_zero_rejected(self):
        rec = EvidenceRecord(
            source_category="red_teaming",
            citation="c",
            node_id="n",
            payload_kind="likelihood",
            values=(0.0, 0.0),
        )
        with pytest.raises(ShapeMismatchError):
            ledger_to_soft_evidence(rec)

    def test_judgment_payload_rejected(self):
        rec = EvidenceRecord(
            source_category="red_teaming",
            citation="c",
            node_id="n",
            payload_kind="judgment",
            values=(0.5, 0.5),
            weight=2.0,
        )
        with pytest.raises(ShapeMismatchError):
            ledger_to_soft_evidence(rec)

    def test_source_category_closed_set(self):
        with pytest.raises(ValueError, match="source_category"):
            EvidenceRecord(
                source_category="hearsay",
                citation="c",
                node_id="n",
                payload_kind="likelihood",
                values=(1.0, 0.5),
            )

    def test_ledger_file_round_trip(self, tmp_path):
        records = [
            {
                "source_category": "historical_data",
                "citation": "trend report",
                "node_id": "volume",
                "payload_kind": "likelihood",
                "values": [0.1, 1.0],
                "weight": None,
                "date": "2025-01-01",
            }
        ]
        loaded = load_ledger(json.dumps(records))
        assert len(loaded) == 1
        assert loaded[0].source_category == "historical_data"

    def test_ledger_unknown_field(self):
        with pytest.raises(ParseError, match="vibe"):
            load_ledger(json.dumps([{"vibe": 1}]))


class TestElicitationFiles:
    FILE = {
        "node_id": "B",
        "judgments": [
            {"expert_id": "e1", "parent_config": {"A": "a0"}, "dist": [0.6, 0.4], "weight": 2},
            {"expert_id": "e2", "parent_config": {"A": "a0"}, "dist": [0.3, 0.7], "weight": 1},
            {"expert_id": "e1", "parent_config": {"A": "a1"}, "dist": [0.2, 0.8], "weight": 4},
        ],
    }

    def test_load_single_object(self):
        entries = load_elicitation(json.dumps(self.FILE))
        assert len(entries) == 1
        node, js = entries[0]
        assert node == "B" and len(js) == 3

    def test_load_list_of_objects(self):
        entries = load_elicitation(json.dumps([self.FILE]))
        assert len(entries) == 1

    def test_unknown_judgment_field(self):
        bad = {"node_id": "B", "judgments": [{"expert_id": "e", "dist": [1, 0], "weight": 1, "mood": "?"}]}
        with pytest.raises(ParseError, match="mood"):
            load_elicitation(json.dumps(bad))

    def test_priors_from_judgments(self, two_node_net):
        entries = load_elicitation(json.dumps(self.FILE))
        priors = priors_from_judgments(two_node_net, entries)
        assert set(priors) == {"B"}
        alphas = priors["B"].alphas
        assert alphas[0] == pytest.approx((1.5, 1.5))  # pooled (0.5,0.5) * ess 3
        assert alphas[1] == pytest.approx((0.8, 3.2))  # (0.2,0.8) * 4

    def test_priors_require_full_parent_config(self, two_node_net):
        entries = [("B", [judgment((0.5, 0.5), 1.0, node="B", config=None)])]
        with pytest.raises(JudgmentMismatchError):
            priors_from_judgments(two_node_net, entries)


class TestDirichletPrior:
    def test_rejects_zero_total_row(self):
        with pytest.raises(ValueError, match="zero total"):
            DirichletPrior("n", ((0.0, 0.0),))

    def test_rejects_negative(self):
        with pytest.raises(ValueError, match="negative"):
            DirichletPrior("n", ((-0.1, 1.0),))
