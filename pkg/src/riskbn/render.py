"""Shared JSON and plain-text rendering for the CLI and the HTTP service.

Both surfaces emit results through these builders so that a CLI invocation
with --format json and the equivalent API response are byte-identical.
Probabilities are written as decimal text with 17 significant digits.
"""

from __future__ import annotations

import json
from typing import Mapping, Sequence

from .analysis import (
    AlarmRule,
    DiagnosticEntry,
    RiskAssessment,
    ScenarioOutcome,
    SensitivityReport,
)
from .inference import EvidenceSet, MarginalSet
from .network import BayesNet, ValidationReport, format_probability
from .validity import (
    ChecklistItem,
    ConcurrentResult,
    NomologicalViolation,
    PredictiveResult,
)


def _render(value, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    if isinstance(value, dict):
        if not value:
            out.append("{}")
            return
        out.append("{\n")
        items = list(value.items())
        for i, (key, item) in enumerate(items):
            out.append(f"{pad}  {json.dumps(str(key), ensure_ascii=False)}: ")
            _render(item, indent + 1, out)
            out.append(",\n" if i + 1 < len(items) else "\n")
        out.append(pad + "}")
    elif isinstance(value, (list, tuple)):
        if not value:
            out.append("[]")
            return
        if all(_is_scalar(v) for v in value):
            out.append("[" + ", ".join(_scalar(v) for v in value) + "]")
            return
        out.append("[\n")
        for i, item in enumerate(value):
            out.append(pad + "  ")
            _render(item, indent + 1, out)
            out.append(",\n" if i + 1 < len(value) else "\n")
        out.append(pad + "]")
    else:
        out.append(_scalar(value))


def _is_scalar(value) -> bool:
    return value is None or isinstance(value, (bool, int, float, str))


def _scalar(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_probability(value)
    if isinstance(value, int):
        return str(value)
    return json.dumps(value, ensure_ascii=False)


def render_json(obj) -> str:
    """Deterministic pretty JSON ending in a newline."""
    out: list[str] = []
    _render(obj, 0, out)
    out.append("\n")
    return "".join(out)


# ---------------------------------------------------------------------------
# Document builders (plain dicts ready for render_json)
# ---------------------------------------------------------------------------


def evidence_doc(ev: EvidenceSet) -> dict:
    return {
        "hard": {k: ev.hard[k] for k in sorted(ev.hard)},
        "soft": {k: [float(w) for w in ev.soft[k]] for k in sorted(ev.soft)},
    }


def assessment_doc(assessment: RiskAssessment, net: BayesNet) -> dict:
    states = net.node(assessment.threshold_node).states
    return {
        "threshold_node": assessment.threshold_node,
        "posterior": {s: float(p) for s, p in zip(states, assessment.posterior.probs)},
        "alarm": assessment.alarm,
        "alarm_rule": {
            "state": assessment.alarm_rule.state,
            "cutoff": float(assessment.alarm_rule.cutoff),
        },
    }


def query_doc(
    net: BayesNet,
    ev: EvidenceSet,
    result: MarginalSet,
    assessment: RiskAssessment | None,
    query_nodes: Sequence[str] | None = None,
) -> dict:
    nodes = query_nodes if query_nodes is not None else [n.id for n in net.nodes]
    return {
        "evidence": evidence_doc(ev),
        "log_evidence": float(result.log_evidence),
        "marginals": {
            nid: {
                s: float(p)
                for s, p in zip(net.node(nid).states, result.marginals[nid].probs)
            }
            for nid in nodes
        },
        "assessment": None if assessment is None else assessment_doc(assessment, net),
    }


def validation_doc(report: ValidationReport) -> dict:
    return {
        "valid": report.ok,
        "violations": [
            {"kind": v.kind, "node": v.node_id, "detail": v.detail}
            for v in report.violations
        ],
    }


def sensitivity_doc(report: SensitivityReport) -> dict:
    return {
        "target": {"node": report.target_node, "state": report.target_state},
        "baseline": float(report.baseline),
        "delta": float(report.delta),
        "entries": [
            {
                "source": e.source,
                "state": e.state,
                "low": float(e.low),
                "high": float(e.high),
                "range": float(e.range),
            }
            for e in report.entries
        ],
    }


def diagnose_doc(ev: EvidenceSet, entries: Sequence[DiagnosticEntry]) -> dict:
    return {
        "evidence": evidence_doc(ev),
        "entries": [
            {
                "node": e.node_id,
                "state": e.state,
                "prior": float(e.prior),
                "posterior": float(e.posterior),
                "lift": float(e.lift),
            }
            for e in entries
        ],
    }


def scenarios_doc(
    net: BayesNet, outcomes: Sequence[ScenarioOutcome], threshold_node: str, rule: AlarmRule
) -> dict:
    return {
        "threshold_node": threshold_node,
        "alarm_rule": {"state": rule.state, "cutoff": float(rule.cutoff)},
        "results": [
            {
                "name": o.name,
                "status": o.status,
                "assessment": None
                if o.assessment is None
                else assessment_doc(o.assessment, net),
            }
            for o in outcomes
        ],
    }


def pool_doc(node_id: str, pooled, total_ess: float) -> dict:
    return {
        "node": node_id,
        "pooled": [float(p) for p in pooled.probs],
        "total_ess": float(total_ess),
    }


def network_summary_doc(net: BayesNet) -> dict:
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
                "parents": list(net.parents[n.id]),
            }
            for n in net.nodes
        ],
        "edges": [{"parent": p, "child": c} for p, c in net.edges()],
        "threshold_nodes": list(net.threshold_nodes),
    }


def validity_doc(
    nomological: Sequence[NomologicalViolation],
    concurrent: ConcurrentResult | None,
    predictive: PredictiveResult | None,
    checklist: Sequence[ChecklistItem],
) -> dict:
    return {
        "nomological": {
            "passed": not nomological,
            "violations": [
                {
                    "parent": v.parent,
                    "child": v.child,
                    "parent_layer": v.parent_layer,
                    "child_layer": v.child_layer,
                }
                for v in nomological
            ],
        },
        "concurrent": None
        if concurrent is None
        else {
            "rho": float(concurrent.rho),
            "cutoff": float(concurrent.cutoff),
            "passed": concurrent.passed,
        },
        "predictive": None
        if predictive is None
        else {
            "mean_log_loss": float(predictive.mean_log_loss),
            "brier_score": float(predictive.brier_score),
            "cases_scored": predictive.cases_scored,
            "baseline_log_loss": float(predictive.baseline_log_loss),
            "passed": predictive.passed,
        },
        "face_content": {
            "status": "manual",
            "checklist": [
                {
                    "number": item.number,
                    "kind": item.kind,
                    "subject": item.subject,
                    "question": item.question,
                }
                for item in checklist
            ],
        },
    }


def learn_doc(result, net: BayesNet) -> dict:
    return {
        "iterations": result.iterations,
        "converged": result.converged,
        "log_likelihood_trace": [float(x) for x in result.log_likelihood_trace],
        "map_objective_trace": [float(x) for x in result.map_objective_trace],
        "cpts": {
            n.id: [[float(p) for p in row] for row in result.net.cpts[n.id].rows]
            for n in net.nodes
        },
    }


def error_doc(code: str, message: str) -> dict:
    return {"error": {"code": code, "message": message}}


# ---------------------------------------------------------------------------
# Plain-text tables
# ---------------------------------------------------------------------------


def _table(rows: list[Sequence[str]], header: Sequence[str]) -> str:
    widths = [len(h) for h in header]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(header)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines) + "\n"


def _prob(p: float) -> str:
    return f"{p:.6f}"


def query_text(doc: dict) -> str:
    rows = []
    for nid, dist in doc["marginals"].items():
        for state, p in dist.items():
            rows.append((nid, state, _prob(p)))
    out = _table(rows, ("node", "state", "probability"))
    out += f"\nlog evidence: {doc['log_evidence']:.6f}\n"
    if doc["assessment"] is not None:
        out += "\n" + assessment_text(doc["assessment"])
    return out


def assessment_text(adoc: dict) -> str:
    rows = [(state, _prob(p)) for state, p in adoc["posterior"].items()]
    out = f"threshold node: {adoc['threshold_node']}\n"
    out += _table(rows, ("risk level", "probability"))
    rule = adoc["alarm_rule"]
    flag = "ALARM" if adoc["alarm"] else "ok"
    out += f"alarm [{rule['state']} >= {rule['cutoff']:g}]: {flag}\n"
    return out


def validation_text(doc: dict) -> str:
    if doc["valid"]:
        return "network is valid\n"
    rows = [(v["kind"], v["node"], v["detail"]) for v in doc["violations"]]
    return _table(rows, ("kind", "node", "detail"))


def sensitivity_text(doc: dict) -> str:
    out = (
        f"target: P({doc['target']['node']} = {doc['target']['state']})"
        f"  baseline {doc['baseline']:.6f}  delta {doc['delta']:g}\n\n"
    )
    rows = [
        (e["source"], e["state"], _prob(e["low"]), _prob(e["high"]), _prob(e["range"]))
        for e in doc["entries"]
    ]
    return out + _table(rows, ("source", "state", "low", "high", "range"))


def diagnose_text(doc: dict) -> str:
    rows = [
        (e["node"], e["state"], _prob(e["prior"]), _prob(e["posterior"]), f"{e['lift']:+.6f}")
        for e in doc["entries"]
    ]
    return _table(rows, ("node", "state", "prior", "posterior", "lift"))


def scenarios_text(doc: dict) -> str:
    header = ("scenario", "status", "Low", "Medium", "High", "Intolerable", "alarm")
    rows = []
    for r in doc["results"]:
        if r["assessment"] is None:
            rows.append((r["name"], r["status"], "-", "-", "-", "-", "-"))
        else:
            post = r["assessment"]["posterior"]
            rows.append(
                (
                    r["name"],
                    r["status"],
                    *(_prob(post[level]) for level in ("Low", "Medium", "High", "Intolerable")),
                    "ALARM" if r["assessment"]["alarm"] else "ok",
                )
            )
    rule = doc["alarm_rule"]
    out = (
        f"threshold node: {doc['threshold_node']}"
        f"  alarm rule: {rule['state']} >= {rule['cutoff']:g}\n\n"
    )
    return out + _table(rows, header)


def pool_text(doc: dict) -> str:
    rows = [(str(k), _prob(p)) for k, p in enumerate(doc["pooled"])]
    return (
        _table(rows, ("state index", "pooled probability"))
        + f"total equivalent sample size: {doc['total_ess']:g}\n"
    )


def validity_text(doc: dict) -> str:
    out = []
    nomo = doc["nomological"]
    out.append(f"nomological: {'pass' if nomo['passed'] else 'FAIL'}")
    for v in nomo["violations"]:
        out.append(
            f"  {v['parent']} ({v['parent_layer']}) -> {v['child']} ({v['child_layer']})"
        )
    if doc["concurrent"] is not None:
        c = doc["concurrent"]
        out.append(
            f"concurrent: rho = {c['rho']:.6f} (cutoff {c['cutoff']:g}): "
            f"{'pass' if c['passed'] else 'FAIL'}"
        )
    if doc["predictive"] is not None:
        p = doc["predictive"]
        out.append(
            f"predictive: mean log-loss {p['mean_log_loss']:.6f}, "
            f"Brier {p['brier_score']:.6f} over {p['cases_scored']} cases "
            f"(uniform baseline {p['baseline_log_loss']:.6f}): "
            f"{'pass' if p['passed'] else 'FAIL'}"
        )
    out.append("face/content review checklist (manual):")
    for item in doc["face_content"]["checklist"]:
        out.append(f"  {item['number']:>3}. [{item['kind']}] {item['subject']}: {item['question']}")
    return "\n".join(out) + "\n"


def learn_text(doc: dict) -> str:
    out = [
        f"iterations: {doc['iterations']}  converged: {doc['converged']}",
        f"final log-likelihood: {doc['log_likelihood_trace'][-1]:.6f}",
        f"final MAP objective: {doc['map_objective_trace'][-1]:.6f}",
        "",
    ]
    for nid, rows in doc["cpts"].items():
        out.append(nid)
        for row in rows:
            out.append("  " + "  ".join(_prob(p) for p in row))
    return "\n".join(out) + "\n"
