"""MAP-EM parameter estimation from case data with missing values.

The E-step computes expected family counts per case through the inference
engine; the M-step sets each CPT row to the Dirichlet posterior mean
(expected count + alpha) / (row total + alpha total). The monitored
objective is log-likelihood plus the pseudo-count log-prior
sum(alpha * ln theta), which the posterior-mean M-step maximizes exactly,
so the objective trace is non-decreasing.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .elicitation import DEFAULT_ROW_ALPHA_TOTAL, DirichletPrior
from .errors import (
    ParseError,
    ShapeMismatchError,
    UnknownNodeError,
    UnknownStateError,
    ZeroProbabilityCaseError,
    ZeroProbabilityEvidenceError,
)
from .inference import EvidenceSet, posterior_joint, _log_evidence_ve
from .network import BayesNet, Cpt

MISSING = "?"


@dataclass(frozen=True)
class CaseTable:
    """Observed cases: one column per node, cells are state names or '?'."""

    columns: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        for i, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise ValueError(f"row {i} has {len(row)} cells, expected {len(self.columns)}")

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class EmConfig:
    max_iterations: int = 200
    log_likelihood_tolerance: float = 1e-6
    priors: Mapping[str, DirichletPrior] = field(default_factory=dict)
    seed: int = 0
    restarts: int = 0  # >0 adds seeded jittered initializations
    default_row_alpha_total: float = DEFAULT_ROW_ALPHA_TOTAL

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.log_likelihood_tolerance <= 0.0:
            raise ValueError("log_likelihood_tolerance must be positive")
        object.__setattr__(self, "priors", dict(self.priors))


@dataclass(frozen=True)
class EmResult:
    net: BayesNet
    iterations: int
    log_likelihood_trace: tuple[float, ...]
    map_objective_trace: tuple[float, ...]
    converged: bool


def load_cases(data: bytes | str, provenance: str = "") -> CaseTable:
    """Parse case CSV: header of node ids, cells are state names, '?' missing."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    reader = csv.reader(io.StringIO(data))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("case file is empty") from None
    rows = [tuple(cell.strip() for cell in row) for row in reader if row]
    return CaseTable(tuple(h.strip() for h in header), tuple(rows), provenance)


def save_cases(table: CaseTable) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    writer.writerows(table.rows)
    return buf.getvalue().encode("utf-8")


def _check_cases(net: BayesNet, data: CaseTable) -> None:
    for col in data.columns:
        if not net.has_node(col):
            raise UnknownNodeError(col)
    for i, row in enumerate(data.rows):
        for col, cell in zip(data.columns, row):
            if cell != MISSING and cell not in net.node(col).states:
                raise UnknownStateError(col, cell)


def _case_evidence(columns: tuple[str, ...], row: tuple[str, ...]) -> EvidenceSet:
    return EvidenceSet(
        hard={c: v for c, v in zip(columns, row) if v != MISSING}
    )


def log_likelihood(net: BayesNet, data: CaseTable) -> float:
    """Sum over cases of ln P(observed cells); empty table gives 0.

    A case with zero probability under the network raises
    ZeroProbabilityCaseError naming its row index.
    """
    _check_cases(net, data)
    total = 0.0
    cache: dict[tuple[str, ...], float] = {}
    for i, row in enumerate(data.rows):
        if row in cache:
            total += cache[row]
            continue
        ev = _case_evidence(data.columns, row)
        try:
            value = _log_evidence_ve(net, ev)
        except ZeroProbabilityEvidenceError:
            raise ZeroProbabilityCaseError(i) from None
        cache[row] = value
        total += value
    return total


def _resolve_priors(net: BayesNet, cfg: EmConfig) -> dict[str, np.ndarray]:
    """Per-node alpha matrices; nodes without an explicit prior get uniform."""
    priors: dict[str, np.ndarray] = {}
    for node in net.nodes:
        k = net.state_count(node.id)
        rows = net.cpt_row_count(node.id)
        prior = cfg.priors.get(node.id)
        if prior is None:
            priors[node.id] = np.full((rows, k), cfg.default_row_alpha_total / k)
        else:
            alphas = np.asarray(prior.alphas, dtype=np.float64)
            if alphas.shape != (rows, k):
                raise ShapeMismatchError(
                    f"prior for {node.id!r} has shape {alphas.shape}, expected {(rows, k)}"
                )
            priors[node.id] = alphas
    return priors


def _prior_mean_net(net: BayesNet, priors: dict[str, np.ndarray]) -> BayesNet:
    return _with_cpts(
        net, {nid: a / a.sum(axis=1, keepdims=True) for nid, a in priors.items()}
    )


def _with_cpts(net: BayesNet, tables: dict[str, np.ndarray]) -> BayesNet:
    cpts = {
        nid: Cpt(net.cpts[nid].parent_order, tuple(tuple(row) for row in tables[nid]))
        for nid in net.node_ids
    }
    return BayesNet(
        nodes=net.nodes,
        parents=net.parents,
        cpts=cpts,
        threshold_nodes=net.threshold_nodes,
        name=net.name,
        version=net.version,
        threshold_statement=net.threshold_statement,
    )


def _log_prior(theta: dict[str, np.ndarray], priors: dict[str, np.ndarray]) -> float:
    """Pseudo-count log prior sum(alpha * ln theta), with 0 * ln 0 = 0."""
    total = 0.0
    for nid, alphas in priors.items():
        t = theta[nid]
        mask = alphas > 0.0
        total += float(np.sum(alphas[mask] * np.log(t[mask])))
    return total


def em_fit(net: BayesNet, data: CaseTable, cfg: EmConfig | None = None) -> EmResult:
    """Fit CPTs by MAP-EM, seeded by Dirichlet priors.

    Initialization is the prior mean unless ``cfg.restarts`` asks for extra
    seeded jittered starts, in which case the run with the best final MAP
    objective wins. Identical inputs produce bit-identical results.
    """
    cfg = cfg or EmConfig()
    _check_cases(net, data)
    priors = _resolve_priors(net, cfg)
    if len(data) == 0 and any(a.sum() <= 0.0 for a in priors.values()):
        raise ValueError("no data and zero-total priors: nothing to estimate")

    inits = [_init_tables(priors, None)]
    if cfg.restarts > 0:
        rng = np.random.default_rng(cfg.seed)
        inits.extend(_init_tables(priors, rng) for _ in range(cfg.restarts))

    best: EmResult | None = None
    for init in inits:
        result = _em_run(net, data, cfg, priors, init)
        if best is None or result.map_objective_trace[-1] > best.map_objective_trace[-1]:
            best = result
    return best


def _init_tables(priors: dict[str, np.ndarray], rng) -> dict[str, np.ndarray]:
    tables = {}
    for nid, alphas in priors.items():
        mean = alphas / alphas.sum(axis=1, keepdims=True)
        if rng is not None:
            mean = mean * np.exp(0.5 * rng.standard_normal(mean.shape))
            mean = mean / mean.sum(axis=1, keepdims=True)
        tables[nid] = mean
    return tables


def _em_run(
    net: BayesNet,
    data: CaseTable,
    cfg: EmConfig,
    priors: dict[str, np.ndarray],
    init: dict[str, np.ndarray],
) -> EmResult:
    # group duplicate rows; the reduction order (first occurrence) is fixed
    unique_rows: list[tuple[str, ...]] = []
    weights: list[int] = []
    row_pos: dict[tuple[str, ...], int] = {}
    row_of_case: list[int] = []
    for row in data.rows:
        if row not in row_pos:
            row_pos[row] = len(unique_rows)
            unique_rows.append(row)
            weights.append(0)
        weights[row_pos[row]] += 1
        row_of_case.append(row_pos[row])

    families = {
        node.id: tuple(net.cpts[node.id].parent_order) + (node.id,) for node in net.nodes
    }
    col_of = {c: k for k, c in enumerate(data.columns)}

    theta = init
    ll_trace: list[float] = []
    map_trace: list[float] = []
    converged = False
    iterations = 0
    prev_obj = -math.inf
    current = _with_cpts(net, theta)
    for iterations in range(1, cfg.max_iterations + 1):
        counts = {nid: np.zeros_like(priors[nid]) for nid in net.node_ids}
        ll = 0.0
        for u, row in enumerate(unique_rows):
            weight = float(weights[u])
            observed = {
                c: row[col_of[c]] for c in data.columns if row[col_of[c]] != MISSING
            }
            ev = EvidenceSet(hard=observed)
            try:
                ll_row = _log_evidence_ve(current, ev)
            except ZeroProbabilityEvidenceError:
                first_case = row_of_case.index(u)
                raise ZeroProbabilityCaseError(first_case) from None
            ll += weight * ll_row
            for nid, family in families.items():
                if all(m in observed for m in family):
                    idx = tuple(
                        current.state_index(m, observed[m]) for m in family
                    )
                    table = counts[nid].reshape(
                        tuple(current.state_count(m) for m in family)
                    )
                    table[idx] += weight
                else:
                    post = posterior_joint(current, ev, family)
                    counts[nid] += weight * post.reshape(counts[nid].shape)
        obj = ll + _log_prior(theta, priors)
        ll_trace.append(ll)
        map_trace.append(obj)
        if abs(obj - prev_obj) < cfg.log_likelihood_tolerance:
            converged = True
            break
        prev_obj = obj
        posterior = {
            nid: counts[nid] + priors[nid] for nid in net.node_ids
        }
        theta = {
            nid: p / p.sum(axis=1, keepdims=True) for nid, p in posterior.items()
        }
        current = _with_cpts(net, theta)
    return EmResult(
        net=current,
        iterations=iterations,
        log_likelihood_trace=tuple(ll_trace),
        map_objective_trace=tuple(map_trace),
        converged=converged,
    )


# ---------------------------------------------------------------------------
# Case sampling (forward simulation, used for calibration and testing)
# ---------------------------------------------------------------------------


def sample_cases(
    net: BayesNet,
    n: int,
    seed: int = 0,
    missing_rate: float = 0.0,
) -> CaseTable:
    """Draw complete cases by forward sampling, optionally masking cells.

    Sampling order, random stream, and masking are all fixed by ``seed``.
    """
    from .network import topological_order

    rng = np.random.default_rng(seed)
    order = topological_order(net)
    columns = net.node_ids
    col_of = {c: k for k, c in enumerate(columns)}
    samples = np.zeros((n, len(columns)), dtype=np.int64)
    for nid in order:
        k = net.state_count(nid)
        tensor = net.cpt_tensor(nid).reshape(-1, k)
        parent_ids = net.cpts[nid].parent_order
        if parent_ids:
            row_idx = np.zeros(n, dtype=np.int64)
            for pid in parent_ids:
                row_idx = row_idx * net.state_count(pid) + samples[:, col_of[pid]]
        else:
            row_idx = np.zeros(n, dtype=np.int64)
        u = rng.random(n)
        cdf = np.cumsum(tensor, axis=1)
        samples[:, col_of[nid]] = np.minimum(
            (u[:, None] > cdf[row_idx]).sum(axis=1), k - 1
        )
    cells = []
    mask = rng.random((n, len(columns))) < missing_rate if missing_rate > 0 else None
    for i in range(n):
        row = []
        for j, nid in enumerate(columns):
            if mask is not None and mask[i, j]:
                row.append(MISSING)
            else:
                row.append(net.node(nid).states[samples[i, j]])
        cells.append(tuple(row))
    return CaseTable(columns, tuple(cells), provenance=f"sampled(seed={seed}, n={n})")
