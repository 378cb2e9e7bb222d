"""Two-stage prompt chain for the LLM decomposition oracle.

The first prompt asks for a free-form sub-task breakdown; the second asks
the model to restate its own breakdown as one operator call per line.
Builders are pure: the same request always yields the same bytes.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

from ..model import Domain, format_ground

if TYPE_CHECKING:
    from .base import OracleRequest

PROMPT_VERSION = "1"

SYSTEM_MESSAGE = "You are an AI planner specializing in HTN planning."


def render_operators(domain: Domain) -> str:
    blocks = []
    for action in domain.actions.values():
        lines = [f"operator {action.name}({', '.join(p.name for p in action.params)}):"]
        lines.append("    preconditions: " + (", ".join(map(str, action.preconditions)) or "none"))
        lines.append("    adds: " + (", ".join(map(str, action.add)) or "nothing"))
        lines.append("    deletes: " + (", ".join(map(str, action.delete)) or "nothing"))
        blocks.append("\n".join(lines))
    return "\n" + "\n".join(blocks) + "\n"


def render_axioms(domain: Domain) -> str:
    if not domain.axioms:
        return ""
    blocks = []
    for axiom in domain.axioms.values():
        head = f"{axiom.name}({', '.join(p.name for p in axiom.params)})"
        blocks.append(f"function {head}:\n    true when: {axiom.body}")
    return "\n" + "\n".join(blocks) + "\n"


def render_state(request: OracleRequest) -> str:
    return ", ".join(format_ground(a[0], a[1:]) for a in request.state.sorted_atoms)


def build_prompt_stage1(request: OracleRequest) -> str:
    operators = render_operators(request.domain)
    axioms = render_axioms(request.domain)
    return (
        "The domain is defined by the following operators (each defined as a  Python function):" + operators
        + ". Some of the preconditions in the operators are defined by the following python functions: " + axioms
        + ". Provide the Sub-Tasks Breakdown for the following task: " + str(request.task)
        + ". Here are the preconditions of the task: " + ", ".join(request.preconditions)
        + ". Here are the effects of the task: " + ", ".join(request.effects)
        + ". Here is the current state: " + render_state(request)
        + " Provide a complete and logically valid decomposition using the operators and functions provided."
        + " Do not invent new operators. Your output should be a step-by-step list of sub-tasks in logical order,"
        + " using arguments ground in the current state."
    )


def build_prompt_stage2(request: OracleRequest, stage1_response: str) -> str:
    operators = render_operators(request.domain)
    axioms = render_axioms(request.domain)
    return (
        ". You generated the following response:" + stage1_response
        + "to my request to provide the Sub-Tasks Breakdown for the following task: " + str(request.task)
        + ". I also gave you the preconditions of the task: " + ", ".join(request.preconditions)
        + " and the effects of the task: " + ", ".join(request.effects)
        + ".and gave you the state: " + render_state(request)
        + "and gave you the domain  defined by the following operators (each defined as a  Python function):"
        + operators
        + ". I also gave you the following python functions which are called to check some preconditions"
        + " and to check some effects: " + axioms
        + ". As a follow-up, can you map  the subtasks you generated with the operators I provided, please?"
        + " please list the operator names as predicates,"
        + " for the match you generate use only the predicate names of the operators and the arguments"
        + " in your sub-task breakdown"
        + " Always respond with a compact, machine-readable format using predicate form. "
        + " Avoid explanations or extra text unless explicitly requested. "
        + " When generating your output, list only the predicates in the form: "
        + " predicate(arg1, arg2, ...)"
        + " where predicate is name of an operator I provided"
        + " Separate predicates by newlines. Do not include explanations, headings, or descriptions."
        + " Use only the operator names I provided. Ensure that every predicate corresponds exactly"
        + " to one of those operators and that all arguments match those in your sub-task breakdown"
    )


def conversation(prompt: str) -> list[dict[str, str]]:
    return [
        {"role": "system", "content": SYSTEM_MESSAGE},
        {"role": "user", "content": prompt},
    ]
