"""Exact inference: variable elimination plus a full-enumeration oracle.

Belief updating conditions the network on an EvidenceSet and recomputes
every node's marginal. The production path is variable elimination with a
min-fill ordering; enumerate_joint materializes the entire joint table and
exists purely to cross-check the elimination path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    CapExceededError,
    InvalidEvidenceError,
    UnknownNodeError,
    UnknownStateError,
    ZeroProbabilityEvidenceError,
)
from .network import BayesNet, Distribution

#: Joint tables larger than this abort enumerate_joint.
DEFAULT_JOINT_CAP = 1 << 22

# Rescale factors whose largest entry drifts below this during elimination;
# the scale is folded back into log_evidence.
_SCALE_FLOOR = 1e-120


@dataclass(frozen=True)
class EvidenceSet:
    """Hard observations (node fixed to a state) and soft likelihood weights."""

    hard: Mapping[str, str] = field(default_factory=dict)
    soft: Mapping[str, tuple[float, ...]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "hard", dict(self.hard))
        object.__setattr__(
            self, "soft", {k: tuple(float(w) for w in v) for k, v in self.soft.items()}
        )

    @property
    def empty(self) -> bool:
        return not self.hard and not self.soft

    def nodes(self) -> list[str]:
        return list(self.hard) + list(self.soft)


EMPTY_EVIDENCE = EvidenceSet()


@dataclass(frozen=True)
class MarginalSet:
    """Per-node posterior distributions plus ln P(evidence)."""

    marginals: Mapping[str, Distribution]
    log_evidence: float

    def __post_init__(self):
        object.__setattr__(self, "marginals", dict(self.marginals))


def check_evidence(net: BayesNet, ev: EvidenceSet) -> None:
    """Validate an evidence set against the network; raises on any problem."""
    overlap = set(ev.hard) & set(ev.soft)
    if overlap:
        raise InvalidEvidenceError(
            f"nodes in both hard and soft evidence: {sorted(overlap)}"
        )
    for nid, state in ev.hard.items():
        if not net.has_node(nid):
            raise UnknownNodeError(nid)
        if state not in net.node(nid).states:
            raise UnknownStateError(nid, state)
    for nid, weights in ev.soft.items():
        if not net.has_node(nid):
            raise UnknownNodeError(nid)
        if len(weights) != net.state_count(nid):
            raise InvalidEvidenceError(
                f"soft evidence for {nid!r} has {len(weights)} weights, "
                f"expected {net.state_count(nid)}"
            )
        if any(w < 0.0 for w in weights):
            raise InvalidEvidenceError(f"soft evidence for {nid!r} has a negative weight")
        if not any(w > 0.0 for w in weights):
            raise InvalidEvidenceError(f"soft evidence for {nid!r} has no positive weight")


# ---------------------------------------------------------------------------
# Factors (internal)
# ---------------------------------------------------------------------------


class _Factor:
    """A table over a sorted tuple of variable indices."""

    __slots__ = ("vars", "table")

    def __init__(self, vars: tuple[int, ...], table: np.ndarray):
        self.vars = vars
        self.table = table


def _multiply(a: _Factor, b: _Factor) -> _Factor:
    if a.vars == b.vars:
        return _Factor(a.vars, a.table * b.table)
    union = tuple(sorted(set(a.vars) | set(b.vars)))
    pos = {v: i for i, v in enumerate(union)}
    sa = [1] * len(union)
    for v, n in zip(a.vars, a.table.shape):
        sa[pos[v]] = n
    sb = [1] * len(union)
    for v, n in zip(b.vars, b.table.shape):
        sb[pos[v]] = n
    return _Factor(union, a.table.reshape(sa) * b.table.reshape(sb))


def _sum_out(f: _Factor, var: int) -> _Factor:
    axis = f.vars.index(var)
    return _Factor(f.vars[:axis] + f.vars[axis + 1 :], f.table.sum(axis=axis))


def _min_fill_order(to_eliminate: list[int], scopes: list[tuple[int, ...]]) -> list[int]:
    """Min-fill elimination order; ties broken by ascending variable index."""
    adj: dict[int, set[int]] = {}
    for scope in scopes:
        for v in scope:
            adj.setdefault(v, set())
        for i, v in enumerate(scope):
            for w in scope[i + 1 :]:
                adj[v].add(w)
                adj[w].add(v)
    pending = sorted(set(to_eliminate))
    order: list[int] = []
    while pending:
        best = None
        best_fill = None
        for v in pending:
            nbrs = [w for w in adj.get(v, ()) if w != v]
            fill = 0
            for i, x in enumerate(nbrs):
                for y in nbrs[i + 1 :]:
                    if y not in adj[x]:
                        fill += 1
            if best_fill is None or fill < best_fill:
                best, best_fill = v, fill
        nbrs = [w for w in adj.get(best, ()) if w != best]
        for i, x in enumerate(nbrs):
            for y in nbrs[i + 1 :]:
                adj[x].add(y)
                adj[y].add(x)
        for w in nbrs:
            adj[w].discard(best)
        adj.pop(best, None)
        pending.remove(best)
        order.append(best)
    return order


def _build_factors(net: BayesNet, ev: EvidenceSet, keep: set[str]) -> list[_Factor]:
    """Evidence-reduced CPT factors for the sub-network ``keep``.

    Hard-evidence variables are sliced out of every factor; soft likelihood
    weights are multiplied into the evidence node's own factor.
    """
    hard_idx = {net.index_of(n): net.state_index(n, s) for n, s in ev.hard.items()}
    factors: list[_Factor] = []
    for node in net.nodes:
        if node.id not in keep:
            continue
        nid = node.id
        i = net.index_of(nid)
        vars_ = tuple(net.index_of(p) for p in net.cpts[nid].parent_order) + (i,)
        table = net.cpt_tensor(nid)
        if nid in ev.soft:
            table = table * np.asarray(ev.soft[nid], dtype=np.float64)
        out_vars = [v for v in vars_ if v not in hard_idx]
        if len(out_vars) != len(vars_):
            slicer = tuple(
                hard_idx[v] if v in hard_idx else slice(None) for v in vars_
            )
            table = np.asarray(table[slicer], dtype=np.float64)
        order = np.argsort(out_vars, kind="stable")
        sorted_vars = tuple(out_vars[k] for k in order)
        if sorted_vars != tuple(out_vars):
            table = np.transpose(table, tuple(order))
        # asarray, not ascontiguousarray: the latter promotes 0-d to 1-d
        factors.append(_Factor(sorted_vars, np.asarray(table, dtype=np.float64)))
    return factors


def _relevant_nodes(net: BayesNet, targets: Iterable[str]) -> set[str]:
    """Ancestral closure of the targets; barren descendants sum out to 1."""
    seen: set[str] = set()
    stack = list(targets)
    while stack:
        nid = stack.pop()
        if nid in seen:
            continue
        seen.add(nid)
        stack.extend(net.parents[nid])
    return seen


def _connected_factors(factors: list[_Factor], seed_var: int) -> list[_Factor]:
    """Factors transitively sharing a variable with seed_var.

    Factors in other components multiply in as constants that cancel under
    normalization; dropping them keeps d-separated queries bit-exact.
    """
    reached = {seed_var}
    kept = [False] * len(factors)
    changed = True
    while changed:
        changed = False
        for i, f in enumerate(factors):
            if kept[i]:
                continue
            if any(v in reached for v in f.vars):
                kept[i] = True
                reached.update(f.vars)
                changed = True
    return [f for i, f in enumerate(factors) if kept[i]]


def _eliminate(factors: list[_Factor], keep_vars: tuple[int, ...]) -> tuple[_Factor, float]:
    """Sum out everything except keep_vars; returns (factor, log_scale)."""
    all_vars = sorted({v for f in factors for v in f.vars})
    order = _min_fill_order([v for v in all_vars if v not in keep_vars], [f.vars for f in factors])
    log_scale = 0.0
    work = list(factors)
    for var in order:
        bucket = [f for f in work if var in f.vars]
        work = [f for f in work if var not in f.vars]
        if not bucket:
            continue
        prod = bucket[0]
        for f in bucket[1:]:
            prod = _multiply(prod, f)
        new = _sum_out(prod, var)
        if new.table.size:
            m = float(new.table.max())
            if 0.0 < m < _SCALE_FLOOR:
                new = _Factor(new.vars, new.table / m)
                log_scale += math.log(m)
        work.append(new)
    if not work:
        return _Factor((), np.float64(1.0)), log_scale
    prod = work[0]
    for f in work[1:]:
        prod = _multiply(prod, f)
    return prod, log_scale


def _log_evidence_ve(net: BayesNet, ev: EvidenceSet) -> float:
    if ev.empty:
        return 0.0
    keep = _relevant_nodes(net, ev.nodes())
    factors = _build_factors(net, ev, keep)
    result, log_scale = _eliminate(factors, ())
    total = float(np.asarray(result.table).sum())
    if total <= 0.0:
        raise ZeroProbabilityEvidenceError(
            f"evidence has probability zero: {ev.hard} soft={list(ev.soft)}"
        )
    return math.log(total) + log_scale


def posterior_marginals(net: BayesNet, ev: EvidenceSet = EMPTY_EVIDENCE) -> MarginalSet:
    """P(node | evidence) for every node, by variable elimination.

    The elimination order is min-fill with declaration-order tie-breaks and
    the summation order is fixed, so identical inputs give bit-identical
    results. Hard-evidence nodes get the indicator of their observed state.
    """
    check_evidence(net, ev)
    log_evidence = _log_evidence_ve(net, ev)
    ev_nodes = ev.nodes()
    marginals: dict[str, Distribution] = {}
    for node in net.nodes:
        nid = node.id
        if nid in ev.hard:
            probs = [0.0] * len(node.states)
            probs[net.state_index(nid, ev.hard[nid])] = 1.0
            marginals[nid] = Distribution(tuple(probs))
            continue
        keep = _relevant_nodes(net, [nid, *ev_nodes])
        factors = _connected_factors(_build_factors(net, ev, keep), net.index_of(nid))
        result, _ = _eliminate(factors, (net.index_of(nid),))
        table = np.asarray(result.table, dtype=np.float64).reshape(-1)
        total = float(table.sum())
        if total <= 0.0:
            raise ZeroProbabilityEvidenceError(
                f"evidence has probability zero: {ev.hard} soft={list(ev.soft)}"
            )
        marginals[nid] = Distribution(tuple(float(p) for p in table / total))
    return MarginalSet(marginals, log_evidence)


def prior_marginals(net: BayesNet) -> MarginalSet:
    """Baseline marginals under no evidence."""
    return posterior_marginals(net, EMPTY_EVIDENCE)


def probability_of(net: BayesNet, ev: EvidenceSet, node_id: str, state: str) -> float:
    """P(node = state | evidence)."""
    if not net.has_node(node_id):
        raise UnknownNodeError(node_id)
    if state not in net.node(node_id).states:
        raise UnknownStateError(node_id, state)
    result = posterior_marginals(net, ev)
    return result.marginals[node_id][net.state_index(node_id, state)]


def posterior_joint(
    net: BayesNet, ev: EvidenceSet, node_ids: Sequence[str]
) -> np.ndarray:
    """Joint posterior over ``node_ids`` (axes in that order), normalized.

    Hard-evidence members contribute a degenerate axis with all mass on the
    observed state. Used by the EM learner for expected family counts.
    """
    check_evidence(net, ev)
    free = [nid for nid in node_ids if nid not in ev.hard]
    shape = tuple(net.state_count(nid) for nid in node_ids)
    if free:
        keep = _relevant_nodes(net, list(free) + ev.nodes())
        factors = _build_factors(net, ev, keep)
        free_vars = tuple(sorted(net.index_of(nid) for nid in free))
        result, _ = _eliminate(factors, free_vars)
        table = np.asarray(result.table, dtype=np.float64)
        total = float(table.sum())
        if total <= 0.0:
            raise ZeroProbabilityEvidenceError(
                f"evidence has probability zero: {ev.hard} soft={list(ev.soft)}"
            )
        table = table / total
        # realign from sorted-variable axes to the caller's node order
        perm = tuple(
            result.vars.index(net.index_of(nid)) for nid in free
        )
        table = np.transpose(table, perm) if perm != tuple(range(len(perm))) else table
    else:
        table = np.float64(1.0)
    out = np.zeros(shape, dtype=np.float64)
    slicer = tuple(
        net.state_index(nid, ev.hard[nid]) if nid in ev.hard else slice(None)
        for nid in node_ids
    )
    out[slicer] = table
    return out


# ---------------------------------------------------------------------------
# Full-enumeration oracle
# ---------------------------------------------------------------------------


def enumerate_joint(
    net: BayesNet, ev: EvidenceSet = EMPTY_EVIDENCE, cap: int = DEFAULT_JOINT_CAP
) -> MarginalSet:
    """Marginals by materializing the full joint table.

    Same contract as posterior_marginals; exists as an independent oracle
    for verifying the elimination path. Aborts if the joint would exceed
    ``cap`` entries.
    """
    check_evidence(net, ev)
    if not net.nodes:
        return MarginalSet({}, 0.0)
    shape = tuple(net.state_count(n.id) for n in net.nodes)
    size = 1
    for n in shape:
        size *= n
        if size > cap:
            raise CapExceededError(size, cap)
    joint = np.ones(shape, dtype=np.float64)
    for i, node in enumerate(net.nodes):
        order = tuple(net.index_of(p) for p in net.cpts[node.id].parent_order) + (i,)
        tensor = net.cpt_tensor(node.id)
        perm = tuple(np.argsort(order, kind="stable"))
        aligned = np.transpose(tensor, perm)
        expanded_shape = [1] * len(shape)
        for v in order:
            expanded_shape[v] = shape[v]
        joint = joint * aligned.reshape(expanded_shape)
    for nid, state in ev.hard.items():
        vec = np.zeros(net.state_count(nid))
        vec[net.state_index(nid, state)] = 1.0
        expanded_shape = [1] * len(shape)
        expanded_shape[net.index_of(nid)] = len(vec)
        joint = joint * vec.reshape(expanded_shape)
    for nid, weights in ev.soft.items():
        vec = np.asarray(weights, dtype=np.float64)
        expanded_shape = [1] * len(shape)
        expanded_shape[net.index_of(nid)] = len(vec)
        joint = joint * vec.reshape(expanded_shape)
    total = float(joint.sum())
    if total <= 0.0:
        raise ZeroProbabilityEvidenceError(
            f"evidence has probability zero: {ev.hard} soft={list(ev.soft)}"
        )
    marginals: dict[str, Distribution] = {}
    for i, node in enumerate(net.nodes):
        axes = tuple(k for k in range(len(shape)) if k != i)
        table = joint.sum(axis=axes) if axes else joint
        marginals[node.id] = Distribution(tuple(float(p) for p in table / total))
    log_evidence = 0.0 if ev.empty else math.log(total)
    return MarginalSet(marginals, log_evidence)
