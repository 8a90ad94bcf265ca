"""Discrete Bayesian networks with risk-modeling metadata.

A network is a DAG of named nodes. Each node has an ordered set of states,
a layer tag placing it in the kill-chain decomposition, and a conditional
probability table with one row per parent-state configuration. Rows are
enumerated row-major over the declared parent order.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import CycleError, NetworkValidationError, ParseError

LAYERS = ("capability", "affordance", "ttp", "defense", "outcome", "threshold")
RISK_LEVELS = ("Low", "Medium", "High", "Intolerable")
PROVENANCE_TAGS = ("PAPER", "ELICITED", "DERIVED")

#: |row sum - 1| above this is a validation violation.
NORMALIZATION_TOL = 1e-9
#: Loader silently renormalizes rows whose sum is off by at most this much.
RENORMALIZE_TOL = 1e-6


class RenormalizationWarning(UserWarning):
    """A loaded CPT row was off by <= RENORMALIZE_TOL and was rescaled."""


@dataclass(frozen=True)
class Provenance:
    """One source annotation: free text plus a PAPER/ELICITED/DERIVED tag."""

    text: str
    tag: str

    def __post_init__(self):
        if self.tag not in PROVENANCE_TAGS:
            raise ValueError(f"provenance tag must be one of {PROVENANCE_TAGS}, got {self.tag!r}")


@dataclass(frozen=True)
class NodeDef:
    """A named variable with an ordered, finite set of states."""

    id: str
    label: str
    states: tuple[str, ...]
    layer: str
    description: str = ""
    provenance: tuple[Provenance, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "provenance", tuple(self.provenance))
        if not self.id:
            raise ValueError("node id must be non-empty")
        if len(self.states) < 2:
            raise ValueError(f"node {self.id!r} needs at least 2 states")
        if any(not s for s in self.states):
            raise ValueError(f"node {self.id!r} has an empty state name")
        if len(set(self.states)) != len(self.states):
            raise ValueError(f"node {self.id!r} has duplicate state names")


@dataclass(frozen=True)
class Distribution:
    """An ordered probability vector, one entry per state."""

    probs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))

    def is_normalized(self, tol: float = NORMALIZATION_TOL) -> bool:
        return (
            all(0.0 <= p <= 1.0 for p in self.probs)
            and abs(sum(self.probs) - 1.0) <= tol
        )

    def __len__(self) -> int:
        return len(self.probs)

    def __getitem__(self, i: int) -> float:
        return self.probs[i]


@dataclass(frozen=True)
class Cpt:
    """Conditional probability table: one row per parent configuration.

    Rows are enumerated row-major over ``parent_order`` with each parent's
    states in their declared order; a parentless node has a single row.
    """

    parent_order: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "parent_order", tuple(self.parent_order))
        object.__setattr__(
            self, "rows", tuple(tuple(float(p) for p in row) for row in self.rows)
        )


@dataclass(frozen=True)
class Violation:
    """One validation finding: a kind, the offending node, and detail."""

    kind: str  # cycle | bad-row-count | non-normalized | dangling-parent | bad-threshold-states
    node_id: str
    detail: str

    def __str__(self) -> str:
        return f"[{self.kind}] {self.node_id}: {self.detail}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:  # truthy when there are findings
        return bool(self.violations)


@dataclass(frozen=True, eq=False)
class BayesNet:
    """Immutable network: nodes, parent map, CPTs, and threshold metadata."""

    nodes: tuple[NodeDef, ...]
    parents: Mapping[str, tuple[str, ...]]
    cpts: Mapping[str, Cpt]
    threshold_nodes: tuple[str, ...] = ()
    name: str = ""
    version: str = ""
    threshold_statement: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(
            self, "parents", {n.id: tuple(self.parents.get(n.id, ())) for n in self.nodes}
        )
        object.__setattr__(self, "cpts", dict(self.cpts))
        object.__setattr__(self, "threshold_nodes", tuple(self.threshold_nodes))
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})[0]
            raise ValueError(f"duplicate node id {dup!r}")
        self._cache["index"] = {n.id: i for i, n in enumerate(self.nodes)}
        self._cache["state_index"] = {
            n.id: {s: k for k, s in enumerate(n.states)} for n in self.nodes
        }

    def __eq__(self, other) -> bool:
        if not isinstance(other, BayesNet):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and self.parents == other.parents
            and self.cpts == other.cpts
            and self.threshold_nodes == other.threshold_nodes
            and self.name == other.name
            and self.version == other.version
            and self.threshold_statement == other.threshold_statement
        )

    # -- lookup helpers -------------------------------------------------

    @property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes)

    def node(self, node_id: str) -> NodeDef:
        return self.nodes[self.index_of(node_id)]

    def has_node(self, node_id: str) -> bool:
        return node_id in self._cache["index"]

    def index_of(self, node_id: str) -> int:
        try:
            return self._cache["index"][node_id]
        except KeyError:
            raise KeyError(f"unknown node {node_id!r}") from None

    def state_index(self, node_id: str, state: str) -> int:
        try:
            return self._cache["state_index"][node_id][state]
        except KeyError:
            raise KeyError(f"unknown state {state!r} of node {node_id!r}") from None

    def state_count(self, node_id: str) -> int:
        return len(self.node(node_id).states)

    def children(self, node_id: str) -> tuple[str, ...]:
        if "children" not in self._cache:
            ch: dict[str, list[str]] = {n.id: [] for n in self.nodes}
            for n in self.nodes:
                for p in self.parents[n.id]:
                    if p in ch:
                        ch[p].append(n.id)
            self._cache["children"] = {k: tuple(v) for k, v in ch.items()}
        return self._cache["children"][node_id]

    def edges(self) -> list[tuple[str, str]]:
        """All (parent, child) pairs in declaration order of the child."""
        return [(p, n.id) for n in self.nodes for p in self.parents[n.id]]

    def cpt_row_count(self, node_id: str) -> int:
        count = 1
        for p in self.parents[node_id]:
            count *= self.state_count(p)
        return count

    def cpt_tensor(self, node_id: str) -> np.ndarray:
        """CPT as an ndarray with one axis per parent (declared order) + node."""
        tensors = self._cache.setdefault("tensors", {})
        if node_id not in tensors:
            cpt = self.cpts[node_id]
            shape = [self.state_count(p) for p in cpt.parent_order]
            shape.append(self.state_count(node_id))
            tensors[node_id] = np.asarray(cpt.rows, dtype=np.float64).reshape(shape)
        return tensors[node_id]

    def row_config(self, node_id: str, row_index: int) -> dict[str, str]:
        """Parent configuration (id -> state name) for a CPT row index."""
        config: dict[str, str] = {}
        order = self.cpts[node_id].parent_order
        radices = [self.state_count(p) for p in order]
        for pid, radix in zip(reversed(order), reversed(radices)):
            row_index, k = divmod(row_index, radix)
            config[pid] = self.node(pid).states[k]
        return {pid: config[pid] for pid in order}

    def row_index(self, node_id: str, config: Mapping[str, str]) -> int:
        """CPT row index for a full parent configuration."""
        idx = 0
        for pid in self.cpts[node_id].parent_order:
            idx = idx * self.state_count(pid) + self.state_index(pid, config[pid])
        return idx


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _cycle_components(net: BayesNet) -> list[tuple[str, ...]]:
    """Strongly connected components that contain a cycle, by Tarjan.

    Components are returned with members in declaration order; iteration
    order is deterministic (driven by declaration order).
    """
    index = net._cache["index"]
    succ: dict[str, list[str]] = {n.id: [] for n in net.nodes}
    for n in net.nodes:
        for p in net.parents[n.id]:
            if p in succ:
                succ[p].append(n.id)

    counter = [0]
    low: dict[str, int] = {}
    num: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    cycles: list[tuple[str, ...]] = []

    def strongconnect(root: str) -> None:
        work = [(root, 0)]
        while work:
            v, pi = work.pop()
            if pi == 0:
                num[v] = low[v] = counter[0]
                counter[0] += 1
                stack.append(v)
                on_stack.add(v)
            recurse = False
            for i in range(pi, len(succ[v])):
                w = succ[v][i]
                if w not in num:
                    work.append((v, i + 1))
                    work.append((w, 0))
                    recurse = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], num[w])
            if recurse:
                continue
            if low[v] == num[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                if len(comp) > 1 or v in succ[v]:
                    cycles.append(tuple(sorted(comp, key=index.__getitem__)))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])

    for n in net.nodes:
        if n.id not in num:
            strongconnect(n.id)
    cycles.sort(key=lambda comp: index[comp[0]])
    return cycles


def validate_network(net: BayesNet) -> ValidationReport:
    """Check every network invariant; an empty report means the net is valid.

    Findings are ordered deterministically: per-node problems in node
    declaration order, then cycle findings.
    """
    violations: list[Violation] = []
    for node in net.nodes:
        dangling = False
        for pid in net.parents[node.id]:
            if not net.has_node(pid):
                violations.append(
                    Violation("dangling-parent", node.id, f"parent {pid!r} does not exist")
                )
                dangling = True
        cpt = net.cpts.get(node.id)
        if cpt is None:
            violations.append(Violation("bad-row-count", node.id, "no CPT defined"))
            continue
        if tuple(cpt.parent_order) != tuple(net.parents[node.id]):
            violations.append(
                Violation(
                    "bad-row-count",
                    node.id,
                    f"CPT parent order {cpt.parent_order} != declared {net.parents[node.id]}",
                )
            )
            continue
        if not dangling:
            expected = net.cpt_row_count(node.id)
            if len(cpt.rows) != expected:
                violations.append(
                    Violation(
                        "bad-row-count",
                        node.id,
                        f"expected {expected} rows, found {len(cpt.rows)}",
                    )
                )
        for r, row in enumerate(cpt.rows):
            if len(row) != len(node.states):
                violations.append(
                    Violation(
                        "bad-row-count",
                        node.id,
                        f"row {r} has {len(row)} entries, expected {len(node.states)}",
                    )
                )
                continue
            if any(p < 0.0 or p > 1.0 for p in row):
                violations.append(
                    Violation("non-normalized", node.id, f"row {r} has an entry outside [0, 1]")
                )
                continue
            dev = sum(row) - 1.0
            if abs(dev) > NORMALIZATION_TOL:
                violations.append(
                    Violation(
                        "non-normalized",
                        node.id,
                        f"row {r} sums to 1{dev:+.12g}",
                    )
                )
    for tid in net.threshold_nodes:
        if not net.has_node(tid):
            violations.append(
                Violation("bad-threshold-states", tid, "threshold node does not exist")
            )
        elif net.node(tid).states != RISK_LEVELS:
            violations.append(
                Violation(
                    "bad-threshold-states",
                    tid,
                    f"states must be {RISK_LEVELS} in order, found {net.node(tid).states}",
                )
            )
    for comp in _cycle_components(net):
        violations.append(
            Violation("cycle", comp[0], "cycle through {" + ", ".join(comp) + "}")
        )
    return ValidationReport(tuple(violations))


def topological_order(net: BayesNet) -> list[str]:
    """Node ids with every node after all its parents.

    Ties are broken by declaration order, so the result is deterministic.
    Raises CycleError naming a node on a cycle if the graph is cyclic.
    """
    remaining_deg = {n.id: 0 for n in net.nodes}
    for n in net.nodes:
        for p in net.parents[n.id]:
            if p in remaining_deg:
                remaining_deg[n.id] += 1
    order: list[str] = []
    ready = [n.id for n in net.nodes if remaining_deg[n.id] == 0]
    # net.nodes is declaration-ordered, so a FIFO over ready keeps ties stable
    # as long as newly ready nodes are inserted in declaration order.
    while ready:
        ready.sort(key=net.index_of)
        nid = ready.pop(0)
        order.append(nid)
        for child in net.children(nid):
            remaining_deg[child] -= 1
            if remaining_deg[child] == 0:
                ready.append(child)
    if len(order) != len(net.nodes):
        comp = _cycle_components(net)[0]
        raise CycleError(comp[0], comp)
    return order


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

_TOP_KEYS = ("name", "version", "threshold_statement", "nodes", "threshold_nodes")
_NODE_KEYS = ("id", "label", "states", "layer", "description", "provenance", "parents", "cpt")
_PROV_KEYS = ("text", "tag")


def format_probability(x: float) -> str:
    """Decimal text with 17 significant digits; round-trips float64 exactly."""
    return format(float(x), ".17g")


def _expect(cond: bool, path: str, msg: str) -> None:
    if not cond:
        raise ParseError(f"{path}: {msg}")


def _check_keys(obj: dict, allowed: Sequence[str], path: str) -> None:
    for key in obj:
        _expect(key in allowed, path, f"unknown field {key!r}")
    for key in allowed:
        _expect(key in obj, path, f"missing field {key!r}")


def _string(obj, path: str) -> str:
    _expect(isinstance(obj, str), path, "expected a string")
    return obj


def _string_list(obj, path: str) -> list[str]:
    _expect(isinstance(obj, list), path, "expected a list")
    return [_string(s, f"{path}[{i}]") for i, s in enumerate(obj)]


def network_from_obj(obj, *, renormalize: bool = True) -> BayesNet:
    """Build and validate a network from a parsed JSON document.

    Unknown or missing fields raise ParseError naming the field and path.
    Rows whose sum is within RENORMALIZE_TOL of 1 are rescaled with a
    RenormalizationWarning; any remaining invariant violation raises
    NetworkValidationError embedding the full report.
    """
    _expect(isinstance(obj, dict), "$", "expected a JSON object")
    _check_keys(obj, _TOP_KEYS, "$")
    _expect(isinstance(obj["nodes"], list), "$.nodes", "expected a list")
    nodes: list[NodeDef] = []
    parents: dict[str, tuple[str, ...]] = {}
    cpts: dict[str, Cpt] = {}
    for i, nobj in enumerate(obj["nodes"]):
        path = f"$.nodes[{i}]"
        _expect(isinstance(nobj, dict), path, "expected an object")
        _check_keys(nobj, _NODE_KEYS, path)
        prov = []
        _expect(isinstance(nobj["provenance"], list), f"{path}.provenance", "expected a list")
        for j, pobj in enumerate(nobj["provenance"]):
            ppath = f"{path}.provenance[{j}]"
            _expect(isinstance(pobj, dict), ppath, "expected an object")
            _check_keys(pobj, _PROV_KEYS, ppath)
            tag = _string(pobj["tag"], f"{ppath}.tag")
            _expect(tag in PROVENANCE_TAGS, f"{ppath}.tag", f"tag must be one of {PROVENANCE_TAGS}")
            prov.append(Provenance(_string(pobj["text"], f"{ppath}.text"), tag))
        try:
            node = NodeDef(
                id=_string(nobj["id"], f"{path}.id"),
                label=_string(nobj["label"], f"{path}.label"),
                states=tuple(_string_list(nobj["states"], f"{path}.states")),
                layer=_string(nobj["layer"], f"{path}.layer"),
                description=_string(nobj["description"], f"{path}.description"),
                provenance=tuple(prov),
            )
        except ValueError as exc:
            raise ParseError(f"{path}: {exc}") from None
        nodes.append(node)
        parents[node.id] = tuple(_string_list(nobj["parents"], f"{path}.parents"))
        _expect(isinstance(nobj["cpt"], list), f"{path}.cpt", "expected a list of rows")
        rows = []
        for r, row in enumerate(nobj["cpt"]):
            rpath = f"{path}.cpt[{r}]"
            _expect(isinstance(row, list), rpath, "expected a list of numbers")
            _expect(
                all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in row),
                rpath,
                "entries must be numbers",
            )
            row = [float(p) for p in row]
            if renormalize and row:
                total = sum(row)
                deviation = abs(total - 1.0)
                if NORMALIZATION_TOL < deviation <= RENORMALIZE_TOL and all(
                    p >= 0.0 for p in row
                ):
                    row = [p / total for p in row]
                    warnings.warn(
                        f"renormalized CPT row {r} of node {node.id!r} (sum was {total:.12g})",
                        RenormalizationWarning,
                        stacklevel=3,
                    )
            rows.append(tuple(row))
        cpts[node.id] = Cpt(parent_order=parents[node.id], rows=tuple(rows))
    try:
        net = BayesNet(
            nodes=tuple(nodes),
            parents=parents,
            cpts=cpts,
            threshold_nodes=tuple(_string_list(obj["threshold_nodes"], "$.threshold_nodes")),
            name=_string(obj["name"], "$.name"),
            version=_string(obj["version"], "$.version"),
            threshold_statement=_string(obj["threshold_statement"], "$.threshold_statement"),
        )
    except ValueError as exc:
        raise ParseError(f"$.nodes: {exc}") from None
    report = validate_network(net)
    if not report.ok:
        raise NetworkValidationError(report)
    return net


def load_network(data: bytes | str) -> BayesNet:
    """Parse a network file (strict schema) and validate it."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return network_from_obj(obj)


def _js(s: str) -> str:
    return json.dumps(s, ensure_ascii=False)


def network_to_obj(net: BayesNet) -> dict:
    """Plain-dict rendering of a network in canonical key order."""
    return {
        "name": net.name,
        "version": net.version,
        "threshold_statement": net.threshold_statement,
        "nodes": [
            {
                "id": n.id,
                "label": n.label,
                "states": list(n.states),
                "layer": n.layer,
                "description": n.description,
                "provenance": [{"text": p.text, "tag": p.tag} for p in n.provenance],
                "parents": list(net.parents[n.id]),
                "cpt": [[p for p in row] for row in net.cpts[n.id].rows],
            }
            for n in net.nodes
        ],
        "threshold_nodes": list(net.threshold_nodes),
    }


def save_network(net: BayesNet) -> bytes:
    """Canonical UTF-8 serialization.

    Keys appear in schema order, nodes in declaration order, probabilities
    as decimal text with 17 significant digits, so save-load-save is
    byte-identical.
    """
    out: list[str] = ["{\n"]
    out.append(f'  "name": {_js(net.name)},\n')
    out.append(f'  "version": {_js(net.version)},\n')
    out.append(f'  "threshold_statement": {_js(net.threshold_statement)},\n')
    if net.nodes:
        out.append('  "nodes": [\n')
        for i, n in enumerate(net.nodes):
            out.append("    {\n")
            out.append(f'      "id": {_js(n.id)},\n')
            out.append(f'      "label": {_js(n.label)},\n')
            out.append(f'      "states": [{", ".join(_js(s) for s in n.states)}],\n')
            out.append(f'      "layer": {_js(n.layer)},\n')
            out.append(f'      "description": {_js(n.description)},\n')
            if n.provenance:
                out.append('      "provenance": [\n')
                for j, p in enumerate(n.provenance):
                    comma = "," if j + 1 < len(n.provenance) else ""
                    out.append(
                        f'        {{"text": {_js(p.text)}, "tag": {_js(p.tag)}}}{comma}\n'
                    )
                out.append("      ],\n")
            else:
                out.append('      "provenance": [],\n')
            out.append(
                f'      "parents": [{", ".join(_js(p) for p in net.parents[n.id])}],\n'
            )
            rows = net.cpts[n.id].rows
            out.append('      "cpt": [\n')
            for r, row in enumerate(rows):
                comma = "," if r + 1 < len(rows) else ""
                out.append(
                    f'        [{", ".join(format_probability(p) for p in row)}]{comma}\n'
                )
            out.append("      ]\n")
            out.append("    }" + ("," if i + 1 < len(net.nodes) else "") + "\n")
        out.append("  ],\n")
    else:
        out.append('  "nodes": [],\n')
    out.append(
        f'  "threshold_nodes": [{", ".join(_js(t) for t in net.threshold_nodes)}]\n'
    )
    out.append("}\n")
    return "".join(out).encode("utf-8")
