"""Dataset evaluation: metrics per debugging iteration and an error-source tally."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

from vpdebug.dsl.nodes import SourceSpan
from vpdebug.harness.metrics import answer_match, grounding_iou, is_box
from vpdebug.loop.backends import OracleCritic, OracleRefiner
from vpdebug.loop.debug import DebugSessionAborted, DebugSessionConfig, run_debug_loop
from vpdebug.runtime.interpreter import execute_or_syntax_error

CORRECT = "correct"
VLM_ERROR = "vlm-error-simulated"
PROGRAM_ERROR = "program-error"
ERROR_SOURCES = (CORRECT, VLM_ERROR, PROGRAM_ERROR)


@dataclass(frozen=True)
class Sample:
    """A question with its scenes, ground truth and the program to evaluate.

    ``reference_program`` and ``loc`` are optional: a known-correct program
    and the span where ``program`` departs from it, as stored by injection.
    """

    id: str
    question: str
    scene_ids: tuple[str, ...]
    ground_truth: Any
    program: str
    task_kind: str = "qa"
    reference_program: Optional[str] = None
    loc: Optional[SourceSpan] = None

    def __post_init__(self):
        if self.task_kind not in ("qa", "grounding"):
            raise ValueError(f"unknown task kind {self.task_kind!r}")
        if self.task_kind == "grounding" and not is_box(self.ground_truth):
            raise ValueError(f"sample {self.id}: grounding ground truth must be a box")

    @classmethod
    def from_record(cls, record) -> "Sample":
        return cls(
            record.id,
            record.question,
            tuple(record.scene_ids),
            record.ground_truth,
            record.program_incorrect,
            "grounding" if is_box(record.ground_truth) else "qa",
            record.program_correct,
            record.loc,
        )

    @classmethod
    def from_pool_entry(cls, entry) -> "Sample":
        return cls(entry.id, entry.question, tuple(entry.scene_ids), entry.ground_truth, entry.program, entry.task_kind)


def sample_score(outcome, sample: Sample) -> float:
    """1/0 answer match for QA; IoU for grounding. Exceptions score 0."""
    if outcome.exception is not None:
        return 0.0
    if sample.task_kind == "grounding":
        return grounding_iou(outcome.value, sample.ground_truth)
    return 1.0 if answer_match(outcome.result, str(sample.ground_truth)) else 0.0


@dataclass(frozen=True)
class SampleResult:
    id: str
    task_kind: str
    scores: tuple[float, ...]  # one per iteration, 0..T
    final_program: str
    reason: Optional[str] = None  # loop termination reason; None when T = 0
    source: Optional[str] = None  # error-source label of the final program
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "task_kind": self.task_kind,
            "scores": list(self.scores),
            "final_program": self.final_program,
            "reason": self.reason,
            "source": self.source,
            "error": self.error,
        }


def _mean(values: Sequence[float]) -> Optional[float]:
    # fsum is exactly rounded, so the mean does not depend on sample order
    return math.fsum(values) / len(values) if values else None


@dataclass(frozen=True)
class EvalReport:
    max_steps: int
    samples: tuple[SampleResult, ...]
    accuracy: tuple[Optional[float], ...] = field(init=False)
    mean_iou: tuple[Optional[float], ...] = field(init=False)
    error_sources: dict = field(init=False)

    def __post_init__(self):
        # a total order, so the report does not depend on input order even with repeated ids
        key = lambda r: (r.id, json.dumps(r.to_dict(), sort_keys=True))
        object.__setattr__(self, "samples", tuple(sorted(self.samples, key=key)))
        acc, ious = [], []
        for k in range(self.max_steps + 1):
            acc.append(_mean([r.scores[k] for r in self.samples if r.task_kind == "qa"]))
            ious.append(_mean([r.scores[k] for r in self.samples if r.task_kind == "grounding"]))
        tally = {s: 0 for s in ERROR_SOURCES}
        for r in self.samples:
            if r.source is not None:
                tally[r.source] += 1
        object.__setattr__(self, "accuracy", tuple(acc))
        object.__setattr__(self, "mean_iou", tuple(ious))
        object.__setattr__(self, "error_sources", tally)

    @property
    def n_errors(self) -> int:
        return sum(r.error is not None for r in self.samples)

    def to_dict(self) -> dict:
        return {
            "max_steps": self.max_steps,
            "accuracy": list(self.accuracy),
            "mean_iou": list(self.mean_iou),
            "error_sources": dict(self.error_sources),
            "n_samples": len(self.samples),
            "n_errors": self.n_errors,
            "samples": [r.to_dict() for r in self.samples],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2)

    def table(self) -> str:
        """Tab-separated metric per iteration."""
        fmt = lambda v: "-" if v is None else f"{100 * v:.1f}"
        rows = ["iteration\taccuracy\tmean_iou"]
        for k in range(self.max_steps + 1):
            rows.append(f"{k}\t{fmt(self.accuracy[k])}\t{fmt(self.mean_iou[k])}")
        return "\n".join(rows) + "\n"


def oracle_for_sample(sample: Sample, scenes) -> tuple:
    critic = OracleCritic(sample.ground_truth, scenes, sample.reference_program, sample.program, sample.loc)
    refiner = OracleRefiner(sample.reference_program if sample.reference_program is not None else sample.program)
    return critic, refiner


def _error_source(program: str, sample: Sample, scenes, score: float, step_limit: int) -> str:
    """Label a final program: correct, a simulated perception fault on the
    reference program's path, or a program error."""
    if score >= (0.5 if sample.task_kind == "grounding" else 1.0):
        return CORRECT
    gold_path = sample.reference_program if sample.reference_program is not None else program
    if execute_or_syntax_error(gold_path, scenes, step_limit).perception_faults:
        return VLM_ERROR
    return PROGRAM_ERROR


BackendFactory = Callable[[Sample, Sequence], tuple]


def _evaluate_one(sample: Sample, store, max_steps: int, cfg: DebugSessionConfig, backends: BackendFactory) -> SampleResult:
    try:
        scenes = store.get_many(sample.scene_ids)
    except KeyError as e:
        return SampleResult(sample.id, sample.task_kind, (0.0,) * (max_steps + 1), sample.program, error=str(e))
    score0 = sample_score(execute_or_syntax_error(sample.program, scenes, cfg.step_limit), sample)
    if max_steps == 0:
        source = _error_source(sample.program, sample, scenes, score0, cfg.step_limit)
        return SampleResult(sample.id, sample.task_kind, (score0,), sample.program, None, source)
    critic, refiner = backends(sample, scenes)
    error = None
    try:
        transcript = run_debug_loop(sample.program, scenes, critic, refiner, cfg)
    except DebugSessionAborted as e:
        transcript, error = e.transcript, str(e)
    # program in hand after k iterations: the input of iteration k+1
    programs = [e.program for e in transcript.entries]
    after = [programs[k] if k < len(programs) else transcript.final_program for k in range(1, max_steps + 1)]
    scores = [score0]
    cache = {sample.program: score0}
    for prog in after:
        if prog not in cache:
            cache[prog] = sample_score(execute_or_syntax_error(prog, scenes, cfg.step_limit), sample)
        scores.append(cache[prog])
    source = _error_source(transcript.final_program, sample, scenes, scores[-1], cfg.step_limit)
    return SampleResult(sample.id, sample.task_kind, tuple(scores), transcript.final_program, transcript.reason, source, error)


def evaluate(
    dataset: Sequence[Sample],
    store,
    max_steps: int = 3,
    cfg: Optional[DebugSessionConfig] = None,
    backends: BackendFactory = oracle_for_sample,
    workers: int = 1,
) -> EvalReport:
    """Score every sample before debugging (iteration 0) and after each of
    ``max_steps`` debugging iterations. ``max_steps = 0`` disables the loop."""
    if not dataset:
        raise ValueError("empty dataset")
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    if cfg is None:
        cfg = DebugSessionConfig(max_steps=max(max_steps, 1))
    elif max_steps:
        cfg = DebugSessionConfig(cfg.threshold, max_steps, cfg.containment, cfg.feedback_budget, cfg.step_limit)
    run = lambda s: _evaluate_one(s, store, max_steps, cfg, backends)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, dataset))
    else:
        results = [run(s) for s in dataset]
    return EvalReport(max_steps, tuple(results))


__all__ = [
    "ERROR_SOURCES",
    "EvalReport",
    "Sample",
    "SampleResult",
    "evaluate",
    "oracle_for_sample",
    "sample_score",
]
