"""Risk analyses: threshold assessment, diagnosis, sensitivity, scenarios.

All operations are pure functions of the network and their inputs.
Sensitivity perturbs root priors one parameter at a time with proportional
co-variation of the remaining states; diagnosis ranks posterior shifts of
requested nodes under outcome evidence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .errors import (
    InvalidEvidenceError,
    ParseError,
    RiskBnError,
    UnknownNodeError,
    UnknownStateError,
    ZeroProbabilityEvidenceError,
)
from .inference import EMPTY_EVIDENCE, EvidenceSet, posterior_marginals, prior_marginals
from .network import BayesNet, Cpt, Distribution

DEFAULT_ALARM_STATE = "Intolerable"
DEFAULT_ALARM_CUTOFF = 0.5
DEFAULT_SENSITIVITY_DELTA = 0.1


class NotThresholdNodeError(RiskBnError):
    code = "not_threshold_node"

    def __init__(self, node_id: str):
        super().__init__(f"node {node_id!r} is not declared as a threshold node")
        self.node_id = node_id


class BadSourceError(RiskBnError):
    code = "bad_source"


class BadDeltaError(RiskBnError):
    code = "bad_delta"


@dataclass(frozen=True)
class AlarmRule:
    """Alarm fires when P(threshold = state) >= cutoff."""

    state: str = DEFAULT_ALARM_STATE
    cutoff: float = DEFAULT_ALARM_CUTOFF


@dataclass(frozen=True)
class RiskAssessment:
    threshold_node: str
    posterior: Distribution
    alarm: bool
    alarm_rule: AlarmRule


@dataclass(frozen=True)
class Scenario:
    name: str
    evidence: EvidenceSet
    description: str = ""


@dataclass(frozen=True)
class ScenarioSet:
    scenarios: tuple[Scenario, ...]

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        names = [s.name for s in self.scenarios]
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})[0]
            raise ValueError(f"duplicate scenario name {dup!r}")

    def __iter__(self):
        return iter(self.scenarios)

    def __len__(self):
        return len(self.scenarios)


@dataclass(frozen=True)
class ScenarioOutcome:
    name: str
    status: str  # "ok" | "inconsistent"
    assessment: RiskAssessment | None


@dataclass(frozen=True)
class DiagnosticEntry:
    node_id: str
    state: str
    prior: float
    posterior: float

    @property
    def lift(self) -> float:
        return self.posterior - self.prior


@dataclass(frozen=True)
class SensitivityEntry:
    source: str
    state: str  # which prior entry was perturbed
    low: float  # target probability with P(state) decreased by delta
    high: float  # target probability with P(state) increased by delta

    @property
    def range(self) -> float:
        return abs(self.high - self.low)


@dataclass(frozen=True)
class SensitivityReport:
    target_node: str
    target_state: str
    baseline: float
    delta: float
    entries: tuple[SensitivityEntry, ...]


def _check_threshold_node(net: BayesNet, threshold_node: str) -> None:
    if not net.has_node(threshold_node):
        raise UnknownNodeError(threshold_node)
    if threshold_node not in net.threshold_nodes:
        raise NotThresholdNodeError(threshold_node)


def _check_alarm_rule(net: BayesNet, threshold_node: str, rule: AlarmRule) -> None:
    if rule.state not in net.node(threshold_node).states:
        raise UnknownStateError(threshold_node, rule.state)


def assess_threshold(
    net: BayesNet,
    ev: EvidenceSet,
    threshold_node: str,
    alarm_rule: AlarmRule = AlarmRule(),
) -> RiskAssessment:
    """Posterior over the threshold node's risk levels plus the alarm flag."""
    _check_threshold_node(net, threshold_node)
    _check_alarm_rule(net, threshold_node, alarm_rule)
    posterior = posterior_marginals(net, ev).marginals[threshold_node]
    level = posterior[net.state_index(threshold_node, alarm_rule.state)]
    return RiskAssessment(
        threshold_node=threshold_node,
        posterior=posterior,
        alarm=level >= alarm_rule.cutoff,
        alarm_rule=alarm_rule,
    )


def diagnose(
    net: BayesNet,
    outcome_evidence: EvidenceSet,
    rank_over: Sequence[str],
) -> list[DiagnosticEntry]:
    """Prior-vs-posterior shifts of the requested nodes' states.

    Entries are sorted by descending absolute lift; ties break by node
    declaration order, then state order.
    """
    if outcome_evidence.empty:
        raise InvalidEvidenceError("diagnosis requires nonempty outcome evidence")
    for nid in rank_over:
        if not net.has_node(nid):
            raise UnknownNodeError(nid)
    if not rank_over:
        return []
    prior = prior_marginals(net).marginals
    posterior = posterior_marginals(net, outcome_evidence).marginals
    entries = [
        DiagnosticEntry(nid, state, prior[nid][k], posterior[nid][k])
        for nid in rank_over
        for k, state in enumerate(net.node(nid).states)
    ]
    entries.sort(
        key=lambda e: (
            -abs(e.lift),
            net.index_of(e.node_id),
            net.state_index(e.node_id, e.state),
        )
    )
    return entries


def perturb_prior(row: Sequence[float], state_index: int, delta: float) -> tuple[float, ...]:
    """Shift one prior entry by delta (clipped to [0, 1]) and co-vary the rest.

    Remaining states are scaled proportionally to absorb the residual mass;
    if they sum to zero, the residual is split uniformly among them.
    """
    p = row[state_index]
    new_p = min(1.0, max(0.0, p + delta))
    others = [q for i, q in enumerate(row) if i != state_index]
    others_sum = sum(others)
    residual = 1.0 - new_p
    out = []
    for i, q in enumerate(row):
        if i == state_index:
            out.append(new_p)
        elif others_sum > 0.0:
            out.append(q * residual / others_sum)
        else:
            out.append(residual / len(others))
    return tuple(out)


def _replace_root_prior(net: BayesNet, node_id: str, row: tuple[float, ...]) -> BayesNet:
    cpts = dict(net.cpts)
    cpts[node_id] = Cpt(net.cpts[node_id].parent_order, (row,))
    return BayesNet(
        nodes=net.nodes,
        parents=net.parents,
        cpts=cpts,
        threshold_nodes=net.threshold_nodes,
        name=net.name,
        version=net.version,
        threshold_statement=net.threshold_statement,
    )


def root_nodes(net: BayesNet) -> list[str]:
    return [n.id for n in net.nodes if not net.parents[n.id]]


def sensitivity(
    net: BayesNet,
    target_node: str,
    target_state: str,
    sources: Sequence[str] | None = None,
    delta: float = DEFAULT_SENSITIVITY_DELTA,
) -> SensitivityReport:
    """One-way sensitivity of P(target) to each root prior entry.

    For every source root and each of its states, the prior is perturbed
    up and down by delta and the target probability is recomputed by plain
    inference on the perturbed network. Entries are sorted by descending
    range with ties broken by node declaration order, then state order.
    """
    if not net.has_node(target_node):
        raise UnknownNodeError(target_node)
    if target_state not in net.node(target_node).states:
        raise UnknownStateError(target_node, target_state)
    if not 0.0 < delta < 1.0:
        raise BadDeltaError(f"delta must be in (0, 1), got {delta}")
    if sources is None:
        sources = root_nodes(net)
    else:
        for nid in sources:
            if not net.has_node(nid):
                raise UnknownNodeError(nid)
            if net.parents[nid]:
                raise BadSourceError(f"sensitivity source {nid!r} is not a root node")
    k = net.state_index(target_node, target_state)
    baseline = prior_marginals(net).marginals[target_node][k]
    entries = []
    for nid in sources:
        row = net.cpts[nid].rows[0]
        for s, state in enumerate(net.node(nid).states):
            perturbed = {}
            for sign in (-1.0, 1.0):
                new_row = perturb_prior(row, s, sign * delta)
                modified = _replace_root_prior(net, nid, new_row)
                perturbed[sign] = prior_marginals(modified).marginals[target_node][k]
            entries.append(
                SensitivityEntry(
                    source=nid, state=state, low=perturbed[-1.0], high=perturbed[1.0]
                )
            )
    entries.sort(
        key=lambda e: (
            -e.range,
            net.index_of(e.source),
            net.state_index(e.source, e.state),
        )
    )
    return SensitivityReport(
        target_node=target_node,
        target_state=target_state,
        baseline=baseline,
        delta=delta,
        entries=tuple(entries),
    )


def run_scenarios(
    net: BayesNet,
    scenarios: ScenarioSet,
    threshold_node: str,
    alarm_rule: AlarmRule = AlarmRule(),
) -> list[ScenarioOutcome]:
    """Assess every scenario in file order.

    A scenario whose evidence has probability zero is reported as
    "inconsistent" instead of aborting the batch.
    """
    _check_threshold_node(net, threshold_node)
    _check_alarm_rule(net, threshold_node, alarm_rule)
    outcomes = []
    for scenario in scenarios:
        try:
            assessment = assess_threshold(net, scenario.evidence, threshold_node, alarm_rule)
            outcomes.append(ScenarioOutcome(scenario.name, "ok", assessment))
        except ZeroProbabilityEvidenceError:
            outcomes.append(ScenarioOutcome(scenario.name, "inconsistent", None))
    return outcomes


# ---------------------------------------------------------------------------
# Scenario files
# ---------------------------------------------------------------------------


def scenarios_from_obj(obj) -> ScenarioSet:
    if not isinstance(obj, dict) or set(obj) != {"scenarios"}:
        raise ParseError('$: expected an object with a single "scenarios" field')
    if not isinstance(obj["scenarios"], list):
        raise ParseError("$.scenarios: expected a list")
    scenarios = []
    for i, sobj in enumerate(obj["scenarios"]):
        path = f"$.scenarios[{i}]"
        if not isinstance(sobj, dict):
            raise ParseError(f"{path}: expected an object")
        allowed = {"name", "description", "evidence"}
        for key in sobj:
            if key not in allowed:
                raise ParseError(f"{path}: unknown field {key!r}")
        if "name" not in sobj or "evidence" not in sobj:
            raise ParseError(f"{path}: requires name and evidence")
        evobj = sobj["evidence"]
        if not isinstance(evobj, dict) or not set(evobj) <= {"hard", "soft"}:
            raise ParseError(f"{path}.evidence: expected hard/soft maps")
        hard = evobj.get("hard", {})
        soft = evobj.get("soft", {})
        if not isinstance(hard, dict) or not isinstance(soft, dict):
            raise ParseError(f"{path}.evidence: hard and soft must be objects")
        try:
            evidence = EvidenceSet(
                hard={str(k): str(v) for k, v in hard.items()},
                soft={str(k): tuple(float(w) for w in v) for k, v in soft.items()},
            )
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{path}.evidence: {exc}") from None
        scenarios.append(
            Scenario(
                name=str(sobj["name"]),
                evidence=evidence,
                description=str(sobj.get("description", "")),
            )
        )
    try:
        return ScenarioSet(tuple(scenarios))
    except ValueError as exc:
        raise ParseError(f"$.scenarios: {exc}") from None


def load_scenarios(data: bytes | str) -> ScenarioSet:
    """Parse a scenario file."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return scenarios_from_obj(obj)


def scenarios_to_obj(scenarios: ScenarioSet) -> dict:
    return {
        "scenarios": [
            {
                "name": s.name,
                "description": s.description,
                "evidence": {
                    "hard": {k: s.evidence.hard[k] for k in sorted(s.evidence.hard)},
                    "soft": {k: list(s.evidence.soft[k]) for k in sorted(s.evidence.soft)},
                },
            }
            for s in scenarios
        ]
    }
