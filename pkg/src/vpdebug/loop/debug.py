"""The critic-refiner debugging loop."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from vpdebug.dsl.nodes import SourceSpan
from vpdebug.dsl.parser import DslSyntaxError, parse
from vpdebug.dsl.subtrees import body_span, check_span, differs_only_within, span_from_bytes
from vpdebug.model.remote import RemoteError
from vpdebug.runtime.interpreter import DEFAULT_STEP_LIMIT, execute_or_syntax_error
from vpdebug.runtime.trace import DEFAULT_TOKEN_BUDGET, render_feedback

ACCEPTED = "critic-accepted"
MAX_STEPS = "max-steps"
POLICIES = ("strict", "lenient")


@dataclass(frozen=True)
class CriticVerdict:
    """``score`` is the probability of the program being correct; ``loc``
    is present when the critic called the program incorrect and said where."""

    score: float
    loc: Optional[SourceSpan] = None

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must be in [0, 1], got {self.score}")

    def to_dict(self) -> dict:
        return {"score": self.score, "loc": self.loc.to_dict() if self.loc else None}


# (program, feedback) -> verdict
Critic = Callable[[str, str], CriticVerdict]
# (program, feedback, loc) -> rewritten program
Refiner = Callable[[str, str, SourceSpan], str]


@dataclass(frozen=True)
class DebugSessionConfig:
    threshold: float = 0.5
    max_steps: int = 3
    containment: str = "strict"
    feedback_budget: int = DEFAULT_TOKEN_BUDGET
    step_limit: int = DEFAULT_STEP_LIMIT

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must be in (0, 1)")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.containment not in POLICIES:
            raise ValueError(f"containment must be one of {POLICIES}")


@dataclass(frozen=True)
class DebugEntry:
    program: str
    feedback: str
    verdict: CriticVerdict
    loc: Optional[SourceSpan] = None  # the span handed to the refiner
    refined_program: Optional[str] = None  # what the refiner returned
    contained: Optional[bool] = None  # refined program differs only within loc

    def to_dict(self) -> dict:
        return {
            "program": self.program,
            "feedback": self.feedback,
            "verdict": self.verdict.to_dict(),
            "loc": self.loc.to_dict() if self.loc else None,
            "refined_program": self.refined_program,
            "contained": self.contained,
        }


@dataclass(frozen=True)
class DebugTranscript:
    entries: tuple[DebugEntry, ...]
    final_program: str
    reason: str

    @property
    def iterations(self) -> int:
        return len(self.entries)

    @property
    def refiner_calls(self) -> int:
        return sum(e.refined_program is not None for e in self.entries)

    def to_dict(self) -> dict:
        return {
            "entries": [e.to_dict() for e in self.entries],
            "final_program": self.final_program,
            "reason": self.reason,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2)


class DebugSessionAborted(Exception):
    """A remote backend failed; ``transcript`` holds every iteration completed before it."""

    def __init__(self, transcript: DebugTranscript, cause: Exception):
        super().__init__(f"debug session aborted after {transcript.iterations} iteration(s): {cause}")
        self.transcript = transcript
        self.cause = cause


def default_loc(program: str) -> SourceSpan:
    """The function body, or the whole text when the program does not parse."""
    try:
        return body_span(parse(program))
    except DslSyntaxError:
        return span_from_bytes(program, 0, len(program.encode("utf-8")))


def _usable(program: str, loc: Optional[SourceSpan]) -> bool:
    if loc is None or loc.start_byte >= loc.end_byte:
        return False
    try:
        check_span(program, loc)
    except (IndexError, ValueError):
        return False
    return True


def run_debug_loop(
    program: str,
    scenes: Sequence,
    critic: Critic,
    refiner: Refiner,
    cfg: DebugSessionConfig = DebugSessionConfig(),
) -> DebugTranscript:
    """Alternate critic and refiner for at most ``cfg.max_steps`` iterations.

    Each iteration executes the current program, asks the critic for a
    verdict and stops if the score is strictly above the threshold.
    Otherwise the refiner rewrites the located span. Under the strict
    policy a rewrite that touches bytes outside the span is discarded and
    the program stays as it was.
    """
    entries: list[DebugEntry] = []
    current = program
    for _ in range(cfg.max_steps):
        outcome = execute_or_syntax_error(current, scenes, cfg.step_limit)
        feedback = render_feedback(outcome, cfg.feedback_budget).text
        try:
            verdict = critic(current, feedback)
        except RemoteError as e:
            raise DebugSessionAborted(DebugTranscript(tuple(entries), current, MAX_STEPS), e) from e
        if verdict.score > cfg.threshold:
            entries.append(DebugEntry(current, feedback, verdict))
            return DebugTranscript(tuple(entries), current, ACCEPTED)
        loc = verdict.loc if _usable(current, verdict.loc) else default_loc(current)
        try:
            refined = refiner(current, feedback, loc)
        except RemoteError as e:
            raise DebugSessionAborted(DebugTranscript(tuple(entries), current, MAX_STEPS), e) from e
        contained = differs_only_within(current, refined, loc)
        entries.append(DebugEntry(current, feedback, verdict, loc, refined, contained))
        if contained or cfg.containment == "lenient":
            current = refined
    return DebugTranscript(tuple(entries), current, MAX_STEPS)
