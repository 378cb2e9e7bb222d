"""Decomposition oracles: the port, an LLM adapter, mocks and a replay cache."""

from .base import (
    BUDGET,
    TRANSPORT,
    UNPARSEABLE,
    Oracle,
    OracleFailure,
    OracleRequest,
    OracleResponse,
)
from .cache import Exchange, ExchangeCache
from .llm import ChatTransport, LLMOracle
from .mocks import AdversarialOracle, FailingOracle, ScriptedOracle
from .parsing import SALVAGE, STRICT, ParseResult, Rejection, parse_predicates
from .prompts import build_prompt_stage1, build_prompt_stage2

__all__ = [
    "AdversarialOracle",
    "BUDGET",
    "ChatTransport",
    "Exchange",
    "ExchangeCache",
    "FailingOracle",
    "LLMOracle",
    "Oracle",
    "OracleFailure",
    "OracleRequest",
    "OracleResponse",
    "ParseResult",
    "Rejection",
    "SALVAGE",
    "STRICT",
    "ScriptedOracle",
    "TRANSPORT",
    "UNPARSEABLE",
    "build_prompt_stage1",
    "build_prompt_stage2",
    "parse_predicates",
]
