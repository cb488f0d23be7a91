"""Sampling, verdict voting and scoring."""

from .clients import ChatCompletionClient, Client, MockClient, TransportError, query_llm
from .verdict import (
    LABELS,
    ConfusionMatrix,
    EmptyBallot,
    Verdict,
    VerdictValue,
    majority_vote,
    parse_verdict,
    score,
)

__all__ = [
    "LABELS",
    "ChatCompletionClient",
    "Client",
    "ConfusionMatrix",
    "EmptyBallot",
    "MockClient",
    "TransportError",
    "Verdict",
    "VerdictValue",
    "majority_vote",
    "parse_verdict",
    "query_llm",
    "score",
]
