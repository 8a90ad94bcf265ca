"""Report figures rendered to files alongside the JSON/text output.

All figures use the Agg backend so they work headless; every function
returns the path it wrote.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .analysis import ScenarioOutcome, SensitivityReport
from .inference import MarginalSet
from .network import BayesNet, RISK_LEVELS

_RISK_COLORS = {
    "Low": "#4daf4a",
    "Medium": "#ffb000",
    "High": "#ff7f00",
    "Intolerable": "#e41a1c",
}


def marginals_figure(net: BayesNet, result: MarginalSet, path: str | Path) -> Path:
    """Horizontal probability bars for every node/state."""
    labels = []
    values = []
    for node in net.nodes:
        dist = result.marginals[node.id]
        for state, p in zip(node.states, dist.probs):
            labels.append(f"{node.id} = {state}")
            values.append(p)
    height = max(2.0, 0.28 * len(labels) + 1.0)
    fig, ax = plt.subplots(figsize=(8, height))
    y = range(len(labels))
    ax.barh(y, values, color="#377eb8")
    ax.set_yticks(list(y))
    ax.set_yticklabels(labels, fontsize=8)
    ax.invert_yaxis()
    ax.set_xlim(0, 1)
    ax.set_xlabel("probability")
    ax.set_title("Posterior marginals")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def tornado_figure(report: SensitivityReport, path: str | Path) -> Path:
    """Tornado diagram: one bar per perturbed root prior entry, widest first."""
    labels = [f"{e.source} = {e.state}" for e in report.entries]
    lows = [e.low for e in report.entries]
    highs = [e.high for e in report.entries]
    height = max(2.0, 0.35 * len(labels) + 1.2)
    fig, ax = plt.subplots(figsize=(8, height))
    y = range(len(labels))
    for i, (lo, hi) in enumerate(zip(lows, highs)):
        left, width = min(lo, hi), abs(hi - lo)
        ax.barh(i, width or 1e-4, left=left, color="#377eb8", alpha=0.85)
    ax.axvline(report.baseline, color="black", lw=1, ls="--", label="baseline")
    ax.set_yticks(list(y))
    ax.set_yticklabels(labels, fontsize=8)
    ax.invert_yaxis()
    ax.set_xlabel(f"P({report.target_node} = {report.target_state})")
    ax.set_title(f"One-way sensitivity (delta = {report.delta:g})")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def scenarios_figure(
    net: BayesNet, outcomes: Sequence[ScenarioOutcome], path: str | Path
) -> Path:
    """Stacked risk-level bars, one row per scenario."""
    names = [o.name for o in outcomes]
    fig, ax = plt.subplots(figsize=(8, max(2.0, 0.5 * len(names) + 1.2)))
    y = range(len(names))
    lefts = [0.0] * len(names)
    for k, level in enumerate(RISK_LEVELS):
        widths = []
        for o in outcomes:
            widths.append(o.assessment.posterior[k] if o.assessment else 0.0)
        ax.barh(y, widths, left=lefts, color=_RISK_COLORS[level], label=level)
        lefts = [l + w for l, w in zip(lefts, widths)]
    for i, o in enumerate(outcomes):
        if o.assessment is None:
            ax.text(0.5, i, "inconsistent evidence", ha="center", va="center", fontsize=8)
    ax.set_yticks(list(y))
    ax.set_yticklabels(names, fontsize=9)
    ax.invert_yaxis()
    ax.set_xlim(0, 1)
    ax.set_xlabel("probability")
    ax.set_title("Scenario risk assessments")
    ax.legend(ncol=4, fontsize=8, loc="upper center", bbox_to_anchor=(0.5, -0.12))
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def em_trace_figure(result, path: str | Path) -> Path:
    """MAP objective and log-likelihood per EM iteration."""
    fig, ax = plt.subplots(figsize=(7, 4))
    iters = range(1, len(result.map_objective_trace) + 1)
    ax.plot(iters, result.map_objective_trace, marker="o", label="MAP objective")
    ax.plot(iters, result.log_likelihood_trace, marker="s", label="log-likelihood")
    ax.set_xlabel("iteration")
    ax.set_ylabel("objective")
    ax.set_title(f"EM fit ({'converged' if result.converged else 'max iterations'})")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
