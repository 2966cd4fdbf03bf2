"""Dataset records, training-record serialization and an independent checker."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence

from vpdebug.dsl.nodes import SourceSpan
from vpdebug.dsl.subtrees import span_from_bytes
from vpdebug.harness.metrics import matches_ground_truth
from vpdebug.loop.loccodec import encode_loc
from vpdebug.model.vocab import T_CORRECT, T_INCORRECT
from vpdebug.runtime.interpreter import execute_or_syntax_error
from vpdebug.runtime.trace import DEFAULT_TOKEN_BUDGET, render_feedback


@dataclass(frozen=True)
class PoolEntry:
    """One program with its question, scenes and ground truth."""

    id: str
    question: str
    scene_ids: tuple[str, ...]
    ground_truth: Any  # answer string, or [l, low, r, up] box
    program: str
    task_kind: str = "qa"

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "question": self.question,
            "scene_ids": list(self.scene_ids),
            "ground_truth": self.ground_truth,
            "program": self.program,
            "task_kind": self.task_kind,
        }

    @classmethod
    def from_dict(cls, d: dict, index: int = 0) -> "PoolEntry":
        gt = d["ground_truth"]
        return cls(
            id=str(d.get("id", index)),
            question=d["question"],
            scene_ids=tuple(d["scene_ids"]),
            ground_truth=list(gt) if isinstance(gt, (list, tuple)) else gt,
            program=d["program"],
            task_kind=d.get("task_kind", "grounding" if isinstance(gt, (list, tuple)) else "qa"),
        )


@dataclass(frozen=True)
class DatasetRecord:
    id: str
    question: str
    scene_ids: tuple[str, ...]
    ground_truth: Any
    program_correct: str
    program_incorrect: str
    loc: SourceSpan  # span within program_incorrect
    outcome_correct: dict
    outcome_incorrect: dict
    error_category: str
    mode: str = "mask-best"
    masked_steps: tuple[int, ...] = field(default=(), compare=False)

    @property
    def correct_loc(self) -> SourceSpan:
        """The span in ``program_correct`` that ``loc`` replaced."""
        delta = len(self.program_correct.encode("utf-8")) - len(self.program_incorrect.encode("utf-8"))
        return span_from_bytes(self.program_correct, self.loc.start_byte, self.loc.end_byte + delta)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "question": self.question,
            "scene_ids": list(self.scene_ids),
            "ground_truth": self.ground_truth,
            "program_correct": self.program_correct,
            "program_incorrect": self.program_incorrect,
            "loc": self.loc.to_dict(),
            "outcome_correct": self.outcome_correct,
            "outcome_incorrect": self.outcome_incorrect,
            "error_category": self.error_category,
            "mode": self.mode,
            "masked_steps": list(self.masked_steps),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetRecord":
        return cls(
            id=str(d["id"]),
            question=d["question"],
            scene_ids=tuple(d["scene_ids"]),
            ground_truth=d["ground_truth"],
            program_correct=d["program_correct"],
            program_incorrect=d["program_incorrect"],
            loc=SourceSpan.from_dict(d["loc"]),
            outcome_correct=d["outcome_correct"],
            outcome_incorrect=d["outcome_incorrect"],
            error_category=d["error_category"],
            mode=d.get("mode", "mask-best"),
            masked_steps=tuple(d.get("masked_steps", ())),
        )


def dumps_jsonl(rows: Iterable[dict]) -> str:
    return "".join(json.dumps(r, sort_keys=True, ensure_ascii=False) + "\n" for r in rows)


def loads_jsonl(text: str) -> list[dict]:
    return [json.loads(line) for line in text.splitlines() if line.strip()]


class RecordInvariantError(ValueError):
    pass


def _outside_loc_equal(p_corr: str, p_inc: str, loc: SourceSpan) -> bool:
    # direct byte comparison of the common prefix and suffix around loc
    a, b = p_corr.encode("utf-8"), p_inc.encode("utf-8")
    if loc.end_byte > len(b):
        return False
    tail = len(b) - loc.end_byte
    return a[: loc.start_byte] == b[: loc.start_byte] and len(a) >= loc.start_byte + tail and a[len(a) - tail :] == b[loc.end_byte :]


def check_record(record: DatasetRecord, store) -> list[str]:
    """Re-verify a record from scratch; returns the list of violated properties."""
    problems = []
    if not _outside_loc_equal(record.program_correct, record.program_incorrect, record.loc):
        problems.append("programs differ outside loc")
    scenes = store.get_many(record.scene_ids)
    if not matches_ground_truth(execute_or_syntax_error(record.program_correct, scenes), record.ground_truth):
        problems.append("correct program does not match ground truth")
    if matches_ground_truth(execute_or_syntax_error(record.program_incorrect, scenes), record.ground_truth):
        problems.append("incorrect program matches ground truth")
    return problems


def check_records_jsonl(text: str, store) -> dict[str, list[str]]:
    """Problems per record id, for every record that has any."""
    out = {}
    for d in loads_jsonl(text):
        rec = DatasetRecord.from_dict(d)
        problems = check_record(rec, store)
        if problems:
            out[rec.id] = problems
    return out


def _feedback(program: str, scenes, budget: int) -> str:
    return render_feedback(execute_or_syntax_error(program, scenes), budget).text


def serialize_training_records(
    records: Sequence[DatasetRecord],
    natural: Sequence[PoolEntry],
    store,
    budget: int = DEFAULT_TOKEN_BUDGET,
) -> tuple[list[dict], list[dict]]:
    """Critic and refiner training rows.

    Each injected pair gives a critic row for both programs and one refiner
    row. Each natural program gives one critic row, labeled by whether its
    execution matches the ground truth and carrying no location.
    """
    critic, refiner = [], []
    for rec in records:
        if not _outside_loc_equal(rec.program_correct, rec.program_incorrect, rec.loc):
            raise RecordInvariantError(f"record {rec.id}: programs differ outside loc {rec.loc.to_dict()}")
        scenes = store.get_many(rec.scene_ids)
        fb_inc = _feedback(rec.program_incorrect, scenes, budget)
        marked = encode_loc(rec.program_incorrect, rec.loc)
        critic.append(
            {
                "id": f"{rec.id}/correct",
                "objective": "critic-injected",
                "program": rec.program_correct,
                "feedback": _feedback(rec.program_correct, scenes, budget),
                "target": T_CORRECT,
            }
        )
        critic.append(
            {
                "id": f"{rec.id}/incorrect",
                "objective": "critic-injected",
                "program": rec.program_incorrect,
                "feedback": fb_inc,
                "target": f"{T_INCORRECT}\n{marked}",
            }
        )
        refiner.append(
            {
                "id": rec.id,
                "program_incorrect": rec.program_incorrect,
                "feedback": fb_inc,
                "marked_program": marked,
                "target": rec.program_correct,
            }
        )
    for entry in natural:
        scenes = store.get_many(entry.scene_ids)
        outcome = execute_or_syntax_error(entry.program, scenes)
        critic.append(
            {
                "id": f"{entry.id}/natural",
                "objective": "critic-natural",
                "program": entry.program,
                "feedback": render_feedback(outcome, budget).text,
                "target": T_CORRECT if matches_ground_truth(outcome, entry.ground_truth) else T_INCORRECT,
            }
        )
    return critic, refiner


def critic_label(row: dict) -> str:
    return T_CORRECT if row["target"] == T_CORRECT else T_INCORRECT


def marked_program_of(row: dict) -> Optional[str]:
    head, sep, rest = row["target"].partition("\n")
    return rest if sep else None
