"""riskbn: discrete Bayesian networks for AI-cyber risk threshold analysis.

The toolkit encodes threshold decompositions as layered networks, fuses
expert judgment and case data into node parameters, and answers
diagnostic, sensitivity, and scenario queries against designated risk
threshold nodes.
"""

from .analysis import (
    AlarmRule,
    RiskAssessment,
    Scenario,
    ScenarioSet,
    SensitivityReport,
    assess_threshold,
    diagnose,
    load_scenarios,
    run_scenarios,
    sensitivity,
)
from .elicitation import (
    DirichletPrior,
    EvidenceRecord,
    ExpertJudgment,
    ess_to_prior,
    ledger_to_soft_evidence,
    load_elicitation,
    load_ledger,
    pool_judgments,
    priors_from_judgments,
)
from .inference import (
    EvidenceSet,
    MarginalSet,
    enumerate_joint,
    posterior_marginals,
    prior_marginals,
    probability_of,
)
from .learning import CaseTable, EmConfig, EmResult, em_fit, load_cases, log_likelihood, sample_cases
from .network import (
    BayesNet,
    Cpt,
    Distribution,
    NodeDef,
    Provenance,
    ValidationReport,
    load_network,
    save_network,
    topological_order,
    validate_network,
)
from .phishing import audit_monotone, build_bundled_model, bundled_ledger, bundled_scenarios
from .validity import (
    check_concurrent,
    check_nomological,
    check_predictive,
    generate_checklist,
    spearman_rho,
)

__version__ = "0.1.0"

__all__ = [
    "AlarmRule",
    "BayesNet",
    "CaseTable",
    "Cpt",
    "DirichletPrior",
    "Distribution",
    "EmConfig",
    "EmResult",
    "EvidenceRecord",
    "EvidenceSet",
    "ExpertJudgment",
    "MarginalSet",
    "NodeDef",
    "Provenance",
    "RiskAssessment",
    "Scenario",
    "ScenarioSet",
    "SensitivityReport",
    "ValidationReport",
    "assess_threshold",
    "audit_monotone",
    "build_bundled_model",
    "bundled_ledger",
    "bundled_scenarios",
    "check_concurrent",
    "check_nomological",
    "check_predictive",
    "diagnose",
    "em_fit",
    "enumerate_joint",
    "ess_to_prior",
    "generate_checklist",
    "ledger_to_soft_evidence",
    "load_cases",
    "load_elicitation",
    "load_ledger",
    "load_network",
    "load_scenarios",
    "log_likelihood",
    "pool_judgments",
    "posterior_marginals",
    "prior_marginals",
    "priors_from_judgments",
    "probability_of",
    "run_scenarios",
    "sample_cases",
    "save_network",
    "sensitivity",
    "spearman_rho",
    "topological_order",
    "validate_network",
]
