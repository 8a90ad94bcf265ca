"""Local HTTP service exposing the analysis operations for UI use.

Read-only over an immutable loaded network: replacing the network is an
atomic reference swap, so in-flight queries finish against the network
they started with. Responses render through the same code path as the
CLI's JSON output, byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from . import render
from .analysis import (
    AlarmRule,
    assess_threshold,
    diagnose,
    run_scenarios,
    scenarios_from_obj,
    sensitivity,
)
from .errors import NoNetworkError, ParseError, RiskBnError
from .inference import EvidenceSet, posterior_marginals
from .network import BayesNet, network_from_obj
from .validity import check_nomological, generate_checklist

DEFAULT_PORT = 8790


@dataclass
class SessionState:
    """Mutable server-side state: the loaded network plus configuration."""

    net: BayesNet | None = None
    alarm_rule: AlarmRule = field(default_factory=AlarmRule)
    sensitivity_delta: float = 0.1


def _json_response(doc: dict, status: int = 200) -> Response:
    return Response(
        content=render.render_json(doc),
        status_code=status,
        media_type="application/json",
    )


def _error_response(exc: RiskBnError) -> Response:
    status = 409 if exc.code == "no_network" else 400
    return _json_response(render.error_doc(exc.code, str(exc)), status)


def _evidence_from_body(body: dict) -> EvidenceSet:
    evobj = body.get("evidence", {})
    if not isinstance(evobj, dict) or not set(evobj) <= {"hard", "soft"}:
        raise ParseError("evidence must be an object with hard/soft maps")
    hard = evobj.get("hard", {})
    soft = evobj.get("soft", {})
    if not isinstance(hard, dict) or not isinstance(soft, dict):
        raise ParseError("evidence.hard and evidence.soft must be objects")
    try:
        return EvidenceSet(
            hard={str(k): str(v) for k, v in hard.items()},
            soft={str(k): tuple(float(w) for w in v) for k, v in soft.items()},
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad evidence: {exc}") from None


def _alarm_from_body(body: dict, default: AlarmRule) -> AlarmRule:
    rule = body.get("alarm_rule")
    if rule is None:
        return default
    if not isinstance(rule, dict) or not set(rule) <= {"state", "cutoff"}:
        raise ParseError("alarm_rule must be {state, cutoff}")
    try:
        return AlarmRule(
            str(rule.get("state", default.state)),
            float(rule.get("cutoff", default.cutoff)),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad alarm_rule: {exc}") from None


def create_app(
    net: BayesNet | None = None,
    alarm_rule: AlarmRule | None = None,
    sensitivity_delta: float = 0.1,
    ui_dir: str | None = None,
) -> FastAPI:
    """Build the service; ``net`` may be loaded later via POST /api/network."""
    state = SessionState(
        net=net,
        alarm_rule=alarm_rule or AlarmRule(),
        sensitivity_delta=sensitivity_delta,
    )
    app = FastAPI(title="riskbn", docs_url=None, redoc_url=None)
    app.state.session = state
    app.add_middleware(
        CORSMiddleware,
        allow_origin_regex=r"https?://(localhost|127\.0\.0\.1)(:\d+)?",
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def _require_net() -> BayesNet:
        current = state.net
        if current is None:
            raise NoNetworkError()
        return current

    async def _body(request: Request) -> dict:
        raw = await request.body()
        if not raw:
            return {}
        try:
            body = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"request body: {exc.msg}") from None
        if not isinstance(body, dict):
            raise ParseError("request body must be a JSON object")
        return body

    @app.exception_handler(RiskBnError)
    async def _handle(request: Request, exc: RiskBnError):
        return _error_response(exc)

    @app.get("/api/network")
    async def get_network():
        return _json_response(render.network_summary_doc(_require_net()))

    @app.post("/api/network")
    async def post_network(request: Request):
        body = await _body(request)
        state.net = network_from_obj(body)
        return _json_response(render.network_summary_doc(state.net))

    @app.post("/api/query")
    async def post_query(request: Request):
        current = _require_net()
        body = await _body(request)
        ev = _evidence_from_body(body)
        rule = _alarm_from_body(body, state.alarm_rule)
        result = posterior_marginals(current, ev)
        assessment = None
        if current.threshold_nodes:
            threshold = body.get("threshold", current.threshold_nodes[0])
            assessment = assess_threshold(current, ev, str(threshold), rule)
        return _json_response(render.query_doc(current, ev, result, assessment))

    @app.post("/api/sensitivity")
    async def post_sensitivity(request: Request):
        current = _require_net()
        body = await _body(request)
        target = body.get("target")
        if not isinstance(target, dict) or "node" not in target or "state" not in target:
            raise ParseError("target must be {node, state}")
        delta = float(body.get("delta", state.sensitivity_delta))
        sources = body.get("sources")
        report = sensitivity(
            current, str(target["node"]), str(target["state"]),
            sources=sources, delta=delta,
        )
        return _json_response(render.sensitivity_doc(report))

    @app.post("/api/diagnose")
    async def post_diagnose(request: Request):
        current = _require_net()
        body = await _body(request)
        ev = _evidence_from_body(
            {"evidence": body.get("outcome_evidence", body.get("evidence", {}))}
        )
        rank_over = body.get("rank_over", [])
        if not isinstance(rank_over, list):
            raise ParseError("rank_over must be a list of node ids")
        entries = diagnose(current, ev, [str(r) for r in rank_over])
        return _json_response(render.diagnose_doc(ev, entries))

    @app.post("/api/scenarios/run")
    async def post_scenarios(request: Request):
        current = _require_net()
        body = await _body(request)
        scenario_set = scenarios_from_obj({"scenarios": body.get("scenarios", [])})
        threshold = body.get("threshold")
        if threshold is None:
            if not current.threshold_nodes:
                raise ParseError("threshold is required for a network without threshold nodes")
            threshold = current.threshold_nodes[0]
        rule = _alarm_from_body(body, state.alarm_rule)
        outcomes = run_scenarios(current, scenario_set, str(threshold), rule)
        return _json_response(render.scenarios_doc(current, outcomes, str(threshold), rule))

    @app.post("/api/validate")
    async def post_validate(request: Request):
        current = _require_net()
        body = await _body(request)
        nomological = check_nomological(current)
        concurrent = None
        predictive = None
        if "scenarios" in body and "proxy_scores" in body:
            from .validity import check_concurrent

            scenario_set = scenarios_from_obj({"scenarios": body["scenarios"]})
            concurrent = check_concurrent(
                current, scenario_set, [float(x) for x in body["proxy_scores"]]
            )
        doc = render.validity_doc(
            nomological, concurrent, predictive, generate_checklist(current)
        )
        return _json_response(doc)

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
