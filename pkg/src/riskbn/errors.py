"""Exception taxonomy with stable machine-readable codes.

Every error that can cross the CLI or HTTP boundary carries a ``code``
attribute; the CLI prints it to stderr and the service embeds it in the
JSON error body.
"""

from __future__ import annotations


class RiskBnError(Exception):
    """Base class for all toolkit errors."""

    code = "error"


class ParseError(RiskBnError):
    """Input file or request body does not conform to its schema."""

    code = "parse_error"


class UnknownNodeError(RiskBnError):
    code = "unknown_node"

    def __init__(self, node_id: str):
        super().__init__(f"unknown node: {node_id!r}")
        self.node_id = node_id


class UnknownStateError(RiskBnError):
    code = "unknown_state"

    def __init__(self, node_id: str, state: str):
        super().__init__(f"unknown state {state!r} for node {node_id!r}")
        self.node_id = node_id
        self.state = state


class InvalidEvidenceError(RiskBnError):
    """Evidence set violates its own invariants (overlap, bad weights)."""

    code = "invalid_evidence"


class ZeroProbabilityEvidenceError(RiskBnError):
    """The supplied evidence has probability zero under the network."""

    code = "zero_probability_evidence"


class CycleError(RiskBnError):
    code = "cycle"

    def __init__(self, node_id: str, cycle_nodes: tuple[str, ...]):
        super().__init__(
            f"graph contains a cycle through {node_id!r}: {{{', '.join(cycle_nodes)}}}"
        )
        self.node_id = node_id
        self.cycle_nodes = cycle_nodes


class NetworkValidationError(RiskBnError):
    """Raised when a network fails validation; embeds the full report."""

    code = "validation_failed"

    def __init__(self, report):
        lines = "; ".join(str(v) for v in report.violations)
        super().__init__(f"network validation failed: {lines}")
        self.report = report


class CapExceededError(RiskBnError):
    code = "cap_exceeded"

    def __init__(self, joint_size: int, cap: int):
        super().__init__(f"joint table has {joint_size} entries, exceeds cap {cap}")
        self.joint_size = joint_size
        self.cap = cap


class JudgmentMismatchError(RiskBnError):
    """Judgments in one pool disagree on node or parent configuration."""

    code = "judgment_mismatch"


class EmptyJudgmentsError(RiskBnError):
    code = "empty_judgments"


class NonPositiveEssError(RiskBnError):
    code = "non_positive_ess"


class ShapeMismatchError(RiskBnError):
    code = "shape_mismatch"


class ZeroProbabilityCaseError(RiskBnError):
    """A data row has probability zero under the current parameters."""

    code = "zero_probability_case"

    def __init__(self, row_index: int):
        super().__init__(f"case row {row_index} has probability zero under the model")
        self.row_index = row_index


class NoNetworkError(RiskBnError):
    code = "no_network"

    def __init__(self):
        super().__init__("no network loaded")
