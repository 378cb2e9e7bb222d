"""Sound HTN planning with an oracle fallback for missing methods.

Plans are found by ordered task decomposition.  When no method applies to a
compound task, an oracle (an LLM, or a deterministic mock) proposes a
sequence of primitive actions; a verifier task appended after every
decomposition keeps the planner sound whatever the oracle says.
"""

from .loader import load_domain, load_problem, parse_task
from .model import Domain, GroundTask, Problem, State, apply_action, make_verifier
from .planner import Limits, PlanResult, plan, plan_tasks
from .validator import Verdict, execute, satisfies

__all__ = [
    "Domain",
    "GroundTask",
    "Limits",
    "PlanResult",
    "Problem",
    "State",
    "Verdict",
    "apply_action",
    "execute",
    "load_domain",
    "load_problem",
    "make_verifier",
    "parse_task",
    "plan",
    "plan_tasks",
    "satisfies",
]
