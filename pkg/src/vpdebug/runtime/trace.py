"""Trace records and their pysnooper-style text rendering."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional

DEFAULT_TOKEN_BUDGET = 1024
VALUE_CHAR_LIMIT = 200
ELISION_MARKER = "…[truncated]…"


def render_value(value: Any) -> str:
    """repr() capped at ``VALUE_CHAR_LIMIT`` characters."""
    text = repr(value)
    if len(text) > VALUE_CHAR_LIMIT:
        text = text[:VALUE_CHAR_LIMIT] + "…"
    return text


def render_result(value: Any) -> str:
    """Header form of a return value: strings bare, everything else repr."""
    if isinstance(value, str):
        return value if len(value) <= VALUE_CHAR_LIMIT else value[:VALUE_CHAR_LIMIT] + "…"
    return render_value(value)


@dataclass(frozen=True)
class VarChange:
    change_kind: str  # 'new' | 'modified'
    name: str
    value: str  # rendered


@dataclass(frozen=True)
class TraceEvent:
    kind: str  # 'call' | 'line' | 'return' | 'exception'
    line_no: int
    source_line: str
    # variable diffs observed since the previous event, printed before it
    var_changes: tuple[VarChange, ...] = ()
    exception_text: Optional[str] = None
    return_value: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "line_no": self.line_no,
            "source_line": self.source_line,
            "var_changes": [[c.change_kind, c.name, c.value] for c in self.var_changes],
            "exception_text": self.exception_text,
            "return_value": self.return_value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TraceEvent":
        return cls(
            d["kind"],
            d["line_no"],
            d["source_line"],
            tuple(VarChange(*c) for c in d.get("var_changes", ())),
            d.get("exception_text"),
            d.get("return_value"),
        )


@dataclass(frozen=True)
class ExecutionOutcome:
    result: Optional[str]  # header rendering of the return value; None on exception
    exception: Optional[str]  # "ErrorType: message"
    events: tuple[TraceEvent, ...]
    step_count: int
    value: Any = field(default=None, compare=False, repr=False)
    perception_faults: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.exception is not None and self.result is not None:
            raise ValueError("an outcome cannot carry both a result and an exception")

    @property
    def ok(self) -> bool:
        return self.exception is None

    def summary(self) -> dict:
        return {"result": self.result, "exception": self.exception, "step_count": self.step_count}

    def to_dict(self) -> dict:
        return {**self.summary(), "events": [e.to_dict() for e in self.events]}

    @classmethod
    def from_dict(cls, d: dict) -> "ExecutionOutcome":
        return cls(d["result"], d["exception"], tuple(TraceEvent.from_dict(e) for e in d["events"]), d["step_count"])

    def events_jsonl(self) -> str:
        return "".join(json.dumps(e.to_dict(), ensure_ascii=False) + "\n" for e in self.events)


@dataclass(frozen=True)
class FeedbackText:
    text: str
    truncated: bool


_LABELS = {"new": "New var:", "modified": "Modified var:"}


def _label(text: str) -> str:
    return f"{text:.<15} "


def feedback_lines(outcome: ExecutionOutcome) -> list[str]:
    lines = [f"-> {outcome.result if outcome.exception is None else None}", ""]
    for ev in outcome.events:
        for ch in ev.var_changes:
            lines.append(f"{_label(_LABELS[ch.change_kind])}{ch.name} = {ch.value}")
        lines.append(f"{ev.kind:<9} {ev.line_no:>4} {ev.source_line}")
        if ev.kind == "exception":
            lines.append(f"{_label('Exception:')}{ev.exception_text}")
            lines.append("Call ended by exception")
        elif ev.kind == "return":
            lines.append(f"{_label('Return value:')}{ev.return_value}")
    return lines


def render_feedback(outcome: ExecutionOutcome, budget: int = DEFAULT_TOKEN_BUDGET) -> FeedbackText:
    """Render an outcome as feedback text, eliding the middle past ``budget`` tokens.

    A token is a whitespace-delimited word. Truncation keeps whole lines: up
    to half the budget from the head, the rest from the tail.
    """
    lines = feedback_lines(outcome)
    counts = [len(line.split()) for line in lines]
    if sum(counts) <= budget:
        return FeedbackText("\n".join(lines) + "\n", False)
    head_budget = budget // 2
    tail_budget = budget - head_budget
    head, used = [], 0
    for line, c in zip(lines, counts):
        if used + c > head_budget:
            break
        head.append(line)
        used += c
    tail, used = [], 0
    for line, c in zip(reversed(lines[len(head):]), reversed(counts[len(head):])):
        if used + c > tail_budget:
            break
        tail.append(line)
        used += c
    tail.reverse()
    return FeedbackText("\n".join(head + [ELISION_MARKER] + tail) + "\n", True)
