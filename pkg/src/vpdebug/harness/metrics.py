"""Answer and grounding metrics."""

from __future__ import annotations

import string
from functools import lru_cache
from importlib import resources
from typing import Any, Sequence

from vpdebug.world.api import ImagePatch
from vpdebug.world.geometry import iou

GROUNDING_MATCH_IOU = 0.5


@lru_cache(maxsize=None)
def stopwords() -> frozenset[str]:
    text = resources.files("vpdebug.data").joinpath("stopwords.txt").read_text(encoding="utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip() and not w.startswith("#"))


def normalize_answer(text: str) -> tuple[str, ...]:
    """Lowercase, strip punctuation at token edges, drop stopwords."""
    stop = stopwords()
    out = []
    for tok in str(text).lower().split():
        tok = tok.strip(string.punctuation)
        if tok and tok not in stop:
            out.append(tok)
    return tuple(out)


def answer_match(predicted: str, gold: str) -> bool:
    return normalize_answer(predicted) == normalize_answer(gold)


def is_box(value: Any) -> bool:
    return isinstance(value, (list, tuple)) and len(value) == 4 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    )


def grounding_iou(value: Any, gold_box: Sequence[float]) -> float:
    """IoU of a returned patch against the gold box; anything but a patch scores 0."""
    if not isinstance(value, ImagePatch):
        return 0.0
    return iou(value.box, tuple(gold_box))


def matches_ground_truth(outcome, ground_truth) -> bool:
    """Whether an execution outcome counts as correct for this ground truth.

    QA answers use ``answer_match`` on the rendered result; grounding
    answers need IoU >= ``GROUNDING_MATCH_IOU``.
    """
    if outcome.exception is not None:
        return False
    if is_box(ground_truth):
        return grounding_iou(outcome.value, ground_truth) >= GROUNDING_MATCH_IOU
    return answer_match(outcome.result, str(ground_truth))
