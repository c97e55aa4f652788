"""Python access to the agentcomm runtime."""

from ._core import (
    Error,
    KnowledgeStore,
    evaluate_proposals,
    lookup,
    run_scenario,
    validate,
    verify_trace,
)

__all__ = [
    "Error",
    "KnowledgeStore",
    "evaluate_proposals",
    "lookup",
    "run_scenario",
    "validate",
    "verify_trace",
]
