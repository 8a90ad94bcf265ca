"""Automated validity checks plus generated review checklists.

Three checks have objective oracles and run automatically: nomological
(layer ordering of edges), concurrent (rank correlation of scenario
outputs against proxy risk scores), and predictive (held-out scoring).
Face and content review only generate checklists for human judgment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analysis import AlarmRule, ScenarioSet, assess_threshold
from .errors import RiskBnError, UnknownNodeError
from .learning import MISSING, CaseTable, _check_cases
from .inference import EvidenceSet, posterior_marginals
from .network import LAYERS, BayesNet

DEFAULT_CONCURRENT_CUTOFF = 0.5

_LAYER_RANK = {layer: i for i, layer in enumerate(LAYERS)}


class MissingLayerError(RiskBnError):
    code = "missing_layer"

    def __init__(self, node_id: str, layer: str):
        super().__init__(
            f"node {node_id!r} has layer {layer!r}; expected one of {LAYERS}"
        )
        self.node_id = node_id


@dataclass(frozen=True)
class NomologicalViolation:
    parent: str
    child: str
    parent_layer: str
    child_layer: str

    def __str__(self) -> str:
        return (
            f"{self.parent} ({self.parent_layer}) -> {self.child} ({self.child_layer}) "
            f"runs against the layer order"
        )


@dataclass(frozen=True)
class ConcurrentResult:
    rho: float
    cutoff: float
    passed: bool
    model_scores: tuple[float, ...]
    proxy_scores: tuple[float, ...]


@dataclass(frozen=True)
class PredictiveResult:
    mean_log_loss: float
    brier_score: float
    cases_scored: int
    baseline_log_loss: float  # uniform prediction on the same rows

    @property
    def passed(self) -> bool:
        return self.mean_log_loss <= self.baseline_log_loss


@dataclass(frozen=True)
class ChecklistItem:
    number: int
    kind: str  # "node" | "coverage"
    subject: str
    question: str


def check_nomological(net: BayesNet) -> list[NomologicalViolation]:
    """Flag edges whose child's layer precedes its parent's layer.

    The layer order is capability < affordance < ttp < defense < outcome <
    threshold; edges within one layer are allowed. Nodes with a layer tag
    outside that vocabulary raise MissingLayerError.
    """
    for node in net.nodes:
        if node.layer not in _LAYER_RANK:
            raise MissingLayerError(node.id, node.layer)
    violations = []
    for parent, child in net.edges():
        if not net.has_node(parent):
            continue
        p_layer = net.node(parent).layer
        c_layer = net.node(child).layer
        if _LAYER_RANK[c_layer] < _LAYER_RANK[p_layer]:
            violations.append(NomologicalViolation(parent, child, p_layer, c_layer))
    return violations


def average_ranks(values: Sequence[float]) -> np.ndarray:
    """1-based ranks with ties assigned the average of their positions."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman_rho(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman rank correlation with average-rank tie handling."""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    rx = average_ranks(x)
    ry = average_ranks(y)
    rx = rx - rx.mean()
    ry = ry - ry.mean()
    denom = math.sqrt(float(rx @ rx) * float(ry @ ry))
    if denom == 0.0:
        return math.nan
    return float(rx @ ry) / denom


def check_concurrent(
    net: BayesNet,
    scenarios: ScenarioSet,
    proxy_scores: Sequence[float],
    threshold_node: str | None = None,
    cutoff: float = DEFAULT_CONCURRENT_CUTOFF,
) -> ConcurrentResult:
    """Rank-correlate per-scenario P(threshold = Intolerable) with proxies."""
    if len(scenarios) != len(proxy_scores):
        raise ValueError(
            f"{len(scenarios)} scenarios but {len(proxy_scores)} proxy scores"
        )
    if len(scenarios) < 3:
        raise ValueError("concurrent check needs at least 3 scenarios")
    if threshold_node is None:
        if not net.threshold_nodes:
            raise UnknownNodeError("<no threshold node declared>")
        threshold_node = net.threshold_nodes[0]
    level = net.state_index(threshold_node, "Intolerable")
    model_scores = tuple(
        assess_threshold(net, s.evidence, threshold_node, AlarmRule()).posterior[level]
        for s in scenarios
    )
    rho = spearman_rho(model_scores, tuple(float(p) for p in proxy_scores))
    return ConcurrentResult(
        rho=rho,
        cutoff=cutoff,
        passed=bool(rho >= cutoff),
        model_scores=model_scores,
        proxy_scores=tuple(float(p) for p in proxy_scores),
    )


def check_predictive(
    net: BayesNet,
    holdout: CaseTable,
    target_node: str | None = None,
) -> PredictiveResult:
    """Score one-cell-out predictions on held-out cases.

    For each row where the target cell is observed, the network is
    conditioned on every other observed cell and the predicted distribution
    for the target is scored: log-loss is -ln P(actual) and the Brier score
    is sum((p - indicator)^2). Rows without the target observed are skipped.
    """
    if len(holdout) == 0:
        raise ValueError("holdout table is empty")
    _check_cases(net, holdout)
    if target_node is None:
        if not net.threshold_nodes:
            raise UnknownNodeError("<no threshold node declared>")
        target_node = net.threshold_nodes[0]
    if not net.has_node(target_node):
        raise UnknownNodeError(target_node)
    if target_node not in holdout.columns:
        raise ValueError(f"target node {target_node!r} is not a holdout column")
    t_col = holdout.columns.index(target_node)
    k = net.state_count(target_node)
    log_losses: list[float] = []
    briers: list[float] = []
    for row in holdout.rows:
        actual = row[t_col]
        if actual == MISSING:
            continue
        observed = {
            c: v
            for j, (c, v) in enumerate(zip(holdout.columns, row))
            if j != t_col and v != MISSING
        }
        predicted = posterior_marginals(net, EvidenceSet(hard=observed)).marginals[
            target_node
        ]
        actual_idx = net.state_index(target_node, actual)
        log_losses.append(-math.log(predicted[actual_idx]))
        briers.append(
            sum(
                (predicted[i] - (1.0 if i == actual_idx else 0.0)) ** 2
                for i in range(k)
            )
        )
    if not log_losses:
        raise ValueError(f"target {target_node!r} is observed in no holdout row")
    return PredictiveResult(
        mean_log_loss=sum(log_losses) / len(log_losses),
        brier_score=sum(briers) / len(briers),
        cases_scored=len(log_losses),
        baseline_log_loss=math.log(k),
    )


def generate_checklist(net: BayesNet) -> list[ChecklistItem]:
    """Face/content review questions: one per node, one per uncovered layer."""
    items: list[ChecklistItem] = []
    number = 1
    for node in net.nodes:
        items.append(
            ChecklistItem(
                number=number,
                kind="node",
                subject=node.id,
                question=(
                    f'Does "{node.label or node.id}" with states '
                    f"{', '.join(node.states)} measure what it is meant to measure, "
                    f"and are its probabilities defensible?"
                ),
            )
        )
        number += 1
    present = {node.layer for node in net.nodes}
    for layer in LAYERS:
        if layer not in present:
            items.append(
                ChecklistItem(
                    number=number,
                    kind="coverage",
                    subject=layer,
                    question=(
                        f"The {layer} layer has no nodes. Is that part of the risk "
                        f"decomposition genuinely out of scope, or is a variable missing?"
                    ),
                )
            )
            number += 1
    return items
