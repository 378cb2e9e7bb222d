"""Shared test utilities."""

from __future__ import annotations

import re

from soundhtn.model import State
from soundhtn.oracle import ScriptedOracle
from soundhtn.oracle.base import OracleRequest

_TASK = re.compile(r"Sub-Tasks Breakdown for the following task: (.+?)\. Here are the preconditions")
_STATE = re.compile(r"Here is the current state: (.*?) Provide a complete")
_ATOM = re.compile(r"(\w+)\(([^()]*)\)")
_STEP = re.compile(r"^\d+\. Perform (.+)$", re.M)


class FixtureChat:
    """Chat transport stand-in that answers like a cooperative model.

    Stage one gets a numbered breakdown taken from a scripted fixture (the
    first alternative executable in the state written in the prompt); stage
    two restates those steps one operator call per line.  ``messages`` keeps
    every conversation it was sent.
    """

    def __init__(self, fixture, domain):
        self.scripted = ScriptedOracle(fixture)
        self.domain = domain
        self.messages = []

    def __call__(self, messages):
        self.messages.append(messages)
        prompt = messages[-1]["content"]
        if prompt.startswith(". You generated the following response:"):
            steps = _STEP.findall(prompt)
            return "\n".join(steps) + "\n"
        task_text = _TASK.search(prompt).group(1)
        state = State.of(
            (m.group(1), *[a.strip() for a in m.group(2).split(",") if a.strip()])
            for m in _ATOM.finditer(_STATE.search(prompt).group(1))
        )
        name, _, rest = task_text.partition("(")
        task = self.domain.task(name, *[a.strip() for a in rest.rstrip(")").split(",")])
        request = OracleRequest.build(self.domain, state, task, state.objects)
        answer = self.scripted.decompose(request)
        lines = [f"{i}. Perform {t}" for i, t in enumerate(answer.tasks, start=1)]
        return f"Sub-Tasks Breakdown for {task_text}:\n" + "\n".join(lines) + "\n"
