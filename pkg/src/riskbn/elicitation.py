"""Expert judgment pooling and evidence-ledger ingestion.

Judgments for one node (and one parent configuration) are combined with a
weighted linear opinion pool; the combined weight is interpreted as an
equivalent sample size and converted to Dirichlet pseudo-counts that seed
the EM learner. Ledger records with likelihood payloads become soft
evidence for the inference engine.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import (
    EmptyJudgmentsError,
    JudgmentMismatchError,
    NonPositiveEssError,
    ParseError,
    ShapeMismatchError,
    UnknownNodeError,
    UnknownStateError,
)
from .network import BayesNet, Distribution

SOURCE_CATEGORIES = (
    "capability_evaluation",
    "red_teaming",
    "threat_landscape",
    "historical_data",
    "sociological_study",
    "resource_cost_assessment",
)

#: Default total pseudo-count for CPT rows that received no elicitation.
DEFAULT_ROW_ALPHA_TOTAL = 1.0


@dataclass(frozen=True)
class ExpertJudgment:
    """One expert's distribution for a node under one parent configuration."""

    expert_id: str
    node_id: str
    dist: Distribution
    weight: float  # equivalent sample size; must be positive
    parent_config: Mapping[str, str] | None = None
    rationale: str = ""

    def __post_init__(self):
        if self.weight <= 0.0:
            raise ValueError(f"judgment weight must be positive, got {self.weight}")
        if self.parent_config is not None:
            object.__setattr__(self, "parent_config", dict(self.parent_config))


@dataclass(frozen=True)
class EvidenceRecord:
    """A sourced observation: expert-style distribution or likelihood vector."""

    source_category: str
    citation: str
    node_id: str
    payload_kind: str  # "judgment" | "likelihood"
    values: tuple[float, ...]
    weight: float | None = None
    date: str = ""

    def __post_init__(self):
        if self.source_category not in SOURCE_CATEGORIES:
            raise ValueError(
                f"source_category must be one of {SOURCE_CATEGORIES}, "
                f"got {self.source_category!r}"
            )
        if self.payload_kind not in ("judgment", "likelihood"):
            raise ValueError(f"unknown payload kind {self.payload_kind!r}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))


@dataclass(frozen=True)
class DirichletPrior:
    """Per-row pseudo-count vectors matching a node's CPT shape."""

    node_id: str
    alphas: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "alphas", tuple(tuple(float(a) for a in row) for row in self.alphas)
        )
        for r, row in enumerate(self.alphas):
            if any(a < 0.0 for a in row):
                raise ValueError(f"negative pseudo-count in row {r} of {self.node_id!r}")
            if sum(row) <= 0.0:
                raise ValueError(f"row {r} of {self.node_id!r} has zero total pseudo-count")


def pool_judgments(judgments: Sequence[ExpertJudgment]) -> tuple[Distribution, float]:
    """Weighted linear opinion pool of judgments for one node and config.

    Returns the pooled distribution and the summed equivalent sample size.
    """
    if not judgments:
        raise EmptyJudgmentsError("no judgments to pool")
    first = judgments[0]
    length = len(first.dist)
    for j in judgments[1:]:
        if j.node_id != first.node_id:
            raise JudgmentMismatchError(
                f"judgments mix nodes {first.node_id!r} and {j.node_id!r}"
            )
        if (j.parent_config or None) != (first.parent_config or None):
            raise JudgmentMismatchError(
                f"judgments for {first.node_id!r} mix parent configurations"
            )
        if len(j.dist) != length:
            raise ShapeMismatchError(
                f"judgment distributions for {first.node_id!r} differ in length"
            )
    total = sum(j.weight for j in judgments)
    if len(judgments) == 1:  # exact identity, no w*p/w rounding
        return first.dist, total
    pooled = tuple(
        sum(j.weight * j.dist[k] for j in judgments) / total for k in range(length)
    )
    return Distribution(pooled), total


def ess_to_prior(
    pooled: Distribution,
    total_ess: float,
    node_id: str,
    row_count: int,
    state_count: int,
    row_index: int | None = None,
    default_row_total: float = DEFAULT_ROW_ALPHA_TOTAL,
) -> DirichletPrior:
    """Convert a pooled distribution into Dirichlet pseudo-counts.

    The elicited row gets ``total_ess * pooled``; all other rows get a
    uniform vector totaling ``default_row_total``. ``row_index`` of None is
    valid only for a single-row (parentless) table.
    """
    if total_ess <= 0.0:
        raise NonPositiveEssError(f"equivalent sample size must be positive, got {total_ess}")
    if len(pooled) != state_count:
        raise ShapeMismatchError(
            f"pooled distribution has {len(pooled)} states, node {node_id!r} has {state_count}"
        )
    if row_index is None:
        if row_count != 1:
            raise ShapeMismatchError(
                f"node {node_id!r} has {row_count} rows; a parent configuration is required"
            )
        row_index = 0
    if not 0 <= row_index < row_count:
        raise ShapeMismatchError(f"row index {row_index} out of range for {node_id!r}")
    uniform = tuple(default_row_total / state_count for _ in range(state_count))
    rows = [uniform] * row_count
    rows[row_index] = tuple(total_ess * p for p in pooled.probs)
    return DirichletPrior(node_id, tuple(rows))


def ledger_to_soft_evidence(rec: EvidenceRecord) -> tuple[str, tuple[float, ...]]:
    """Turn a likelihood-shaped ledger record into a soft-evidence vector.

    The vector is normalized to a maximum entry of 1; inference results are
    invariant to that scale.
    """
    if rec.payload_kind != "likelihood":
        raise ShapeMismatchError(
            f"record for {rec.node_id!r} has a {rec.payload_kind} payload, not likelihood"
        )
    if any(v < 0.0 for v in rec.values):
        raise ShapeMismatchError(f"likelihood for {rec.node_id!r} has a negative entry")
    peak = max(rec.values, default=0.0)
    if peak <= 0.0:
        raise ShapeMismatchError(f"likelihood for {rec.node_id!r} has no positive entry")
    return rec.node_id, tuple(v / peak for v in rec.values)


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


def _judgment_from_obj(node_id: str, obj, path: str) -> ExpertJudgment:
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: expected an object")
    allowed = {"expert_id", "parent_config", "dist", "weight", "rationale"}
    for key in obj:
        if key not in allowed:
            raise ParseError(f"{path}: unknown field {key!r}")
    for key in ("expert_id", "dist", "weight"):
        if key not in obj:
            raise ParseError(f"{path}: missing field {key!r}")
    config = obj.get("parent_config")
    if config is not None and not isinstance(config, dict):
        raise ParseError(f"{path}.parent_config: expected an object or null")
    try:
        return ExpertJudgment(
            expert_id=str(obj["expert_id"]),
            node_id=node_id,
            dist=Distribution(tuple(float(p) for p in obj["dist"])),
            weight=float(obj["weight"]),
            parent_config=config,
            rationale=str(obj.get("rationale", "")),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from None


def load_elicitation(data: bytes | str) -> list[tuple[str, list[ExpertJudgment]]]:
    """Parse an elicitation file: one object per node, or a list of them.

    Each object is ``{"node_id": ..., "judgments": [...]}``.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    entries = obj if isinstance(obj, list) else [obj]
    out: list[tuple[str, list[ExpertJudgment]]] = []
    for i, entry in enumerate(entries):
        path = f"$[{i}]" if isinstance(obj, list) else "$"
        if not isinstance(entry, dict) or set(entry) != {"node_id", "judgments"}:
            raise ParseError(f"{path}: expected fields node_id and judgments")
        node_id = str(entry["node_id"])
        judgments = [
            _judgment_from_obj(node_id, j, f"{path}.judgments[{k}]")
            for k, j in enumerate(entry["judgments"])
        ]
        out.append((node_id, judgments))
    return out


def load_ledger(data: bytes | str) -> list[EvidenceRecord]:
    """Parse a ledger file: a JSON list of evidence records."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(obj, list):
        raise ParseError("$: expected a list of evidence records")
    records = []
    for i, entry in enumerate(obj):
        path = f"$[{i}]"
        if not isinstance(entry, dict):
            raise ParseError(f"{path}: expected an object")
        allowed = {"source_category", "citation", "node_id", "payload_kind", "values", "weight", "date"}
        for key in entry:
            if key not in allowed:
                raise ParseError(f"{path}: unknown field {key!r}")
        try:
            records.append(
                EvidenceRecord(
                    source_category=str(entry["source_category"]),
                    citation=str(entry.get("citation", "")),
                    node_id=str(entry["node_id"]),
                    payload_kind=str(entry["payload_kind"]),
                    values=tuple(float(v) for v in entry["values"]),
                    weight=None if entry.get("weight") is None else float(entry["weight"]),
                    date=str(entry.get("date", "")),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{path}: {exc}") from None
    return records


def priors_from_judgments(
    net: BayesNet,
    entries: Sequence[tuple[str, Sequence[ExpertJudgment]]],
    default_row_total: float = DEFAULT_ROW_ALPHA_TOTAL,
) -> dict[str, DirichletPrior]:
    """Pool judgments per (node, parent configuration) and build priors.

    Judgments naming unknown nodes or malformed configurations raise; rows
    without elicitation keep the uniform default.
    """
    priors: dict[str, DirichletPrior] = {}
    for node_id, judgments in entries:
        if not net.has_node(node_id):
            raise UnknownNodeError(node_id)
        groups: dict[int, list[ExpertJudgment]] = {}
        for j in judgments:
            config = dict(j.parent_config or {})
            declared = set(net.parents[node_id])
            if set(config) != declared:
                raise JudgmentMismatchError(
                    f"judgment for {node_id!r} must configure parents {sorted(declared)}"
                )
            for pid, state in config.items():
                if state not in net.node(pid).states:
                    raise UnknownStateError(pid, state)
            groups.setdefault(net.row_index(node_id, config), []).append(j)
        state_count = net.state_count(node_id)
        uniform = tuple(default_row_total / state_count for _ in range(state_count))
        rows: list[tuple[float, ...]] = [uniform] * net.cpt_row_count(node_id)
        for row_idx in sorted(groups):
            pooled, ess = pool_judgments(groups[row_idx])
            rows[row_idx] = tuple(ess * p for p in pooled.probs)
        priors[node_id] = DirichletPrior(node_id, tuple(rows))
    return priors
