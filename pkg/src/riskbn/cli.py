"""Command-line interface wrapping every pipeline stage.

Exit codes: 0 success, 1 contract errors (machine-readable code on
stderr), 2 usage errors. JSON output (--format json or RISKBN_FORMAT=json)
is byte-identical to the HTTP service's responses for the same inputs.
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click

from . import render
from .analysis import (
    AlarmRule,
    ScenarioSet,
    assess_threshold,
    diagnose,
    load_scenarios,
    run_scenarios,
    sensitivity,
)
from .elicitation import load_elicitation, pool_judgments, priors_from_judgments
from .errors import ParseError, RiskBnError, UnknownNodeError
from .inference import EvidenceSet, posterior_marginals
from .learning import EmConfig, em_fit, load_cases
from .network import BayesNet, load_network, validate_network
from .validity import (
    check_concurrent,
    check_nomological,
    check_predictive,
    generate_checklist,
)

_FORMATS = ("json", "text")


def _fail(exc: RiskBnError) -> None:
    click.echo(f"error[{exc.code}]: {exc}", err=True)
    sys.exit(1)


def handle_errors(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except RiskBnError as exc:
            _fail(exc)

    return wrapper


def _read_network(path: str) -> BayesNet:
    return load_network(Path(path).read_bytes())


def _parse_hard(pairs: tuple[str, ...]) -> dict[str, str]:
    hard = {}
    for pair in pairs:
        if "=" not in pair:
            raise click.UsageError(f"evidence must be node=state, got {pair!r}")
        node, state = pair.split("=", 1)
        hard[node] = state
    return hard


def _parse_soft(pairs: tuple[str, ...]) -> dict[str, tuple[float, ...]]:
    soft = {}
    for pair in pairs:
        if "=" not in pair:
            raise click.UsageError(f"soft evidence must be node=w1,w2,..., got {pair!r}")
        node, weights = pair.split("=", 1)
        try:
            soft[node] = tuple(float(w) for w in weights.split(","))
        except ValueError:
            raise click.UsageError(f"bad weight list in {pair!r}") from None
    return soft


def _parse_alarm(text: str | None) -> AlarmRule:
    if text is None:
        return AlarmRule()
    if ":" not in text:
        raise click.UsageError(f"alarm rule must be state:cutoff, got {text!r}")
    state, cutoff = text.rsplit(":", 1)
    try:
        return AlarmRule(state, float(cutoff))
    except ValueError:
        raise click.UsageError(f"bad cutoff in {text!r}") from None


def _default_assessment(net: BayesNet, ev: EvidenceSet, alarm: AlarmRule):
    if not net.threshold_nodes:
        return None
    return assess_threshold(net, ev, net.threshold_nodes[0], alarm)


def _emit(doc: dict, fmt: str, text_renderer) -> None:
    if fmt == "json":
        sys.stdout.write(render.render_json(doc))
    else:
        sys.stdout.write(text_renderer(doc))


format_option = click.option(
    "--format",
    "fmt",
    type=click.Choice(_FORMATS),
    default=None,
    envvar="RISKBN_FORMAT",
    help="Output format (default text; RISKBN_FORMAT overrides).",
)

plot_option = click.option(
    "--plot-dir",
    type=click.Path(file_okay=False),
    default=None,
    help="Also render report figures (PNG) into this directory.",
)


def _fmt(fmt: str | None) -> str:
    return fmt or "text"


@click.group()
@click.version_option(package_name="riskbn")
def main():
    """Bayesian-network toolkit for AI-cyber risk thresholds."""


@main.command()
@click.argument("network", type=click.Path(exists=True, dir_okay=False))
@format_option
@handle_errors
def validate(network, fmt):
    """Check every network invariant; exit 1 if any is violated."""
    try:
        net = _read_network(network)
        report = validate_network(net)
    except RiskBnError as exc:
        if exc.code == "validation_failed":
            _emit(render.validation_doc(exc.report), _fmt(fmt), render.validation_text)
        raise
    _emit(render.validation_doc(report), _fmt(fmt), render.validation_text)


@main.command()
@click.argument("network", type=click.Path(exists=True, dir_okay=False))
@click.option("--evidence", "-e", multiple=True, help="Hard evidence node=state.")
@click.option("--soft", "-s", multiple=True, help="Soft evidence node=w1,w2,...")
@click.option("--query", default=None, help="Comma-separated nodes to report.")
@click.option("--alarm", default=None, help="Alarm rule state:cutoff.")
@format_option
@plot_option
@handle_errors
def infer(network, evidence, soft, query, alarm, fmt, plot_dir):
    """Posterior marginals (and threshold assessment) under evidence."""
    net = _read_network(network)
    ev = EvidenceSet(hard=_parse_hard(evidence), soft=_parse_soft(soft))
    result = posterior_marginals(net, ev)
    rule = _parse_alarm(alarm)
    assessment = _default_assessment(net, ev, rule)
    query_nodes = None
    if query:
        query_nodes = [q.strip() for q in query.split(",") if q.strip()]
        for q in query_nodes:
            if not net.has_node(q):
                raise UnknownNodeError(q)
    doc = render.query_doc(net, ev, result, assessment, query_nodes)
    _emit(doc, _fmt(fmt), render.query_text)
    if plot_dir:
        from . import plots

        Path(plot_dir).mkdir(parents=True, exist_ok=True)
        plots.marginals_figure(net, result, Path(plot_dir) / "marginals.png")


@main.command()
@click.argument("elicitation", type=click.Path(exists=True, dir_okay=False))
@click.option("--node", required=True, help="Node whose judgments to pool.")
@click.option("--config", "-c", multiple=True, help="Parent configuration parent=state.")
@format_option
@handle_errors
def pool(elicitation, node, config, fmt):
    """Pool expert judgments for one node (and parent configuration)."""
    entries = load_elicitation(Path(elicitation).read_bytes())
    wanted_config = _parse_hard(config) or None
    judgments = [
        j
        for node_id, js in entries
        for j in js
        if node_id == node and (j.parent_config or None) == wanted_config
    ]
    pooled, total = pool_judgments(judgments)
    doc = render.pool_doc(node, pooled, total)
    _emit(doc, _fmt(fmt), render.pool_text)


@main.command()
@click.argument("network", type=click.Path(exists=True, dir_okay=False))
@click.option("--data", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--priors", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--max-iter", default=200, show_default=True)
@click.option("--tol", default=1e-6, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--restarts", default=0, show_default=True)
@click.option("--out", default=None, type=click.Path(dir_okay=False), help="Write learned network here.")
@format_option
@plot_option
@handle_errors
def learn(network, data, priors, max_iter, tol, seed, restarts, out, fmt, plot_dir):
    """Fit CPTs to case data by MAP-EM."""
    net = _read_network(network)
    cases = load_cases(Path(data).read_bytes())
    prior_map = {}
    if priors:
        entries = load_elicitation(Path(priors).read_bytes())
        prior_map = priors_from_judgments(net, entries)
    cfg = EmConfig(
        max_iterations=max_iter,
        log_likelihood_tolerance=tol,
        priors=prior_map,
        seed=seed,
        restarts=restarts,
    )
    result = em_fit(net, cases, cfg)
    if out:
        from .network import save_network

        Path(out).write_bytes(save_network(result.net))
    doc = render.learn_doc(result, net)
    _emit(doc, _fmt(fmt), render.learn_text)
    if plot_dir:
        from . import plots

        Path(plot_dir).mkdir(parents=True, exist_ok=True)
        plots.em_trace_figure(result, Path(plot_dir) / "em_trace.png")


@main.command("sensitivity")
@click.argument("network", type=click.Path(exists=True, dir_okay=False))
@click.option("--target", required=True, help="Target node=state.")
@click.option("--delta", default=0.1, show_default=True)
@click.option("--sources", default=None, help="Comma-separated root nodes.")
@format_option
@plot_option
@handle_errors
def sensitivity_cmd(network, target, delta, sources, fmt, plot_dir):
    """One-way sensitivity of a target probability to root priors."""
    net = _read_network(network)
    if "=" not in target:
        raise click.UsageError(f"target must be node=state, got {target!r}")
    node, state = target.split("=", 1)
    source_list = None
    if sources:
        source_list = [s.strip() for s in sources.split(",") if s.strip()]
    report = sensitivity(net, node, state, sources=source_list, delta=delta)
    doc = render.sensitivity_doc(report)
    _emit(doc, _fmt(fmt), render.sensitivity_text)
    if plot_dir:
        from . import plots

        Path(plot_dir).mkdir(parents=True, exist_ok=True)
        plots.tornado_figure(report, Path(plot_dir) / "tornado.png")


@main.command("diagnose")
@click.argument("network", type=click.Path(exists=True, dir_okay=False))
@click.option("--evidence", "-e", multiple=True, required=True, help="Outcome evidence node=state.")
@click.option("--soft", "-s", multiple=True, help="Soft evidence node=w1,w2,...")
@click.option("--rank", required=True, help="Comma-separated nodes to rank.")
@format_option
@handle_errors
def diagnose_cmd(network, evidence, soft, rank, fmt):
    """Rank posterior shifts of candidate causes under outcome evidence."""
    net = _read_network(network)
    ev = EvidenceSet(hard=_parse_hard(evidence), soft=_parse_soft(soft))
    rank_over = [r.strip() for r in rank.split(",") if r.strip()]
    entries = diagnose(net, ev, rank_over)
    doc = render.diagnose_doc(ev, entries)
    _emit(doc, _fmt(fmt), render.diagnose_text)


@main.command()
@click.argument("network", type=click.Path(exists=True, dir_okay=False))
@click.argument("scenarios", type=click.Path(exists=True, dir_okay=False))
@click.option("--threshold", required=True, help="Threshold node to assess.")
@click.option("--alarm", default=None, help="Alarm rule state:cutoff.")
@format_option
@plot_option
@handle_errors
def scenario(network, scenarios, threshold, alarm, fmt, plot_dir):
    """Assess every scenario in a scenario file."""
    net = _read_network(network)
    scenario_set = load_scenarios(Path(scenarios).read_bytes())
    rule = _parse_alarm(alarm)
    outcomes = run_scenarios(net, scenario_set, threshold, rule)
    doc = render.scenarios_doc(net, outcomes, threshold, rule)
    _emit(doc, _fmt(fmt), render.scenarios_text)
    if plot_dir:
        from . import plots

        Path(plot_dir).mkdir(parents=True, exist_ok=True)
        plots.scenarios_figure(net, outcomes, Path(plot_dir) / "scenarios.png")


@main.command()
@click.argument("network", type=click.Path(exists=True, dir_okay=False))
@click.option("--scenarios", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--proxy", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--holdout", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--threshold", default=None, help="Threshold node (default: first declared).")
@format_option
@handle_errors
def validity(network, scenarios, proxy, holdout, threshold, fmt):
    """Run the automated validity checks and emit the review checklist."""
    import json as _json

    net = _read_network(network)
    nomological = check_nomological(net)
    concurrent = None
    if scenarios and proxy:
        scenario_set = load_scenarios(Path(scenarios).read_bytes())
        try:
            proxy_scores = _json.loads(Path(proxy).read_text("utf-8"))
        except _json.JSONDecodeError as exc:
            raise ParseError(f"proxy file: {exc.msg}") from None
        concurrent = check_concurrent(net, scenario_set, proxy_scores, threshold)
    elif scenarios or proxy:
        raise click.UsageError("--scenarios and --proxy must be given together")
    predictive = None
    if holdout:
        predictive = check_predictive(net, load_cases(Path(holdout).read_bytes()), threshold)
    doc = render.validity_doc(nomological, concurrent, predictive, generate_checklist(net))
    _emit(doc, _fmt(fmt), render.validity_text)


@main.command()
@click.argument("network", type=click.Path(exists=True, dir_okay=False))
@click.option("--port", default=8790, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--ui-dir", default=None, type=click.Path(file_okay=False, exists=True))
@click.option("--alarm", default=None, help="Default alarm rule state:cutoff.")
@handle_errors
def serve(network, port, host, ui_dir, alarm):
    """Serve the HTTP analysis API (and optionally the web UI) locally."""
    import uvicorn

    from .server import create_app

    net = _read_network(network)
    app = create_app(net, alarm_rule=_parse_alarm(alarm), ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command("export-bundled")
@click.argument("directory", type=click.Path(file_okay=False))
def export_bundled(directory):
    """Write the bundled phishing model, scenarios, and ledger files."""
    from .phishing import write_bundled_files

    paths = write_bundled_files(directory)
    for name, path in paths.items():
        click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
