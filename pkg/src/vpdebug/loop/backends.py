"""Critic and refiner backends: oracles, fixed stand-ins and HTTP clients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional, Sequence

import requests

from vpdebug.dsl.nodes import SourceSpan
from vpdebug.dsl.subtrees import span_from_bytes
from vpdebug.harness.metrics import matches_ground_truth
from vpdebug.loop.debug import CriticVerdict
from vpdebug.loop.loccodec import LocCodecError, decode_loc, encode_loc
from vpdebug.model.remote import MalformedResponseError, expect_field, request_json
from vpdebug.runtime.interpreter import execute_or_syntax_error


def _lead(b: bytes, k: int) -> int:
    while 0 < k < len(b) and (b[k] & 0xC0) == 0x80:
        k -= 1
    return k


def _trail(b: bytes, k: int) -> int:
    while k < len(b) and (b[k] & 0xC0) == 0x80:
        k += 1
    return k


def _diff_span(reference: str, program: str) -> Optional[SourceSpan]:
    """Smallest span of ``program`` outside which it equals ``reference``."""
    a, b = reference.encode("utf-8"), program.encode("utf-8")
    if a == b:
        return None
    n = min(len(a), len(b))
    i = 0
    while i < n and a[i] == b[i]:
        i += 1
    j = 0
    while j < n - i and a[len(a) - 1 - j] == b[len(b) - 1 - j]:
        j += 1
    start, end = _lead(b, i), _trail(b, len(b) - j)
    if end <= start:
        # pure deletion: cover a neighbouring code point so the span is non-empty
        if start < len(b):
            end = _trail(b, start + 1)
        elif start > 0:
            start = _lead(b, start - 1)
        else:
            return None
    return span_from_bytes(program, start, end)


@dataclass
class OracleCritic:
    """Scores 1 when execution matches the ground truth, else 0.

    For the stored incorrect program the location is the stored injected
    span. Any other failing program is located by its byte difference
    from the reference correct program, when one is given.
    """

    ground_truth: Any
    scenes: Sequence
    program_correct: Optional[str] = None
    program_incorrect: Optional[str] = None
    loc: Optional[SourceSpan] = None

    def __post_init__(self):
        if self.ground_truth is None:
            raise ValueError("oracle critic needs a ground truth")

    def __call__(self, program: str, feedback: str) -> CriticVerdict:
        if matches_ground_truth(execute_or_syntax_error(program, self.scenes), self.ground_truth):
            return CriticVerdict(1.0)
        if program == self.program_incorrect and self.loc is not None:
            return CriticVerdict(0.0, self.loc)
        if self.program_correct is not None:
            return CriticVerdict(0.0, _diff_span(self.program_correct, program))
        return CriticVerdict(0.0)


@dataclass
class OracleRefiner:
    """Replaces the span with the matching bytes of the reference program.

    The bytes before and after ``loc`` must agree with the reference;
    otherwise the program is returned unchanged.
    """

    program_correct: str

    def __call__(self, program: str, feedback: str, loc: SourceSpan) -> str:
        ref, cur = self.program_correct.encode("utf-8"), program.encode("utf-8")
        head, tail = cur[: loc.start_byte], cur[loc.end_byte :]
        if len(head) + len(tail) > len(ref) or not ref.startswith(head) or not ref.endswith(tail):
            return program
        return ref.decode("utf-8")


def oracle_backends(record, store) -> tuple[OracleCritic, OracleRefiner]:
    """Oracle critic and refiner for one injected ``DatasetRecord``."""
    if record.ground_truth is None:
        raise ValueError(f"record {record.id} has no ground truth")
    critic = OracleCritic(
        record.ground_truth,
        store.get_many(record.scene_ids),
        record.program_correct,
        record.program_incorrect,
        record.loc,
    )
    return critic, OracleRefiner(record.program_correct)


@dataclass(frozen=True)
class ConstantCritic:
    """Always returns the same score, with no location."""

    score: float

    def __call__(self, program: str, feedback: str) -> CriticVerdict:
        return CriticVerdict(self.score)


def identity_refiner(program: str, feedback: str, loc: SourceSpan) -> str:
    return program


class RemoteCritic:
    """``POST {endpoint}/v1/critic`` with ``{program, feedback}``.

    The response's ``p_correct`` becomes the score. A ``marked_program``
    whose markers decode cleanly against the submitted program supplies
    the location; anything else leaves it unset.
    """

    def __init__(self, endpoint: str, timeout: float = 30.0, retries: int = 0):
        self.url = endpoint.rstrip("/") + "/v1/critic"
        self.timeout = timeout
        self.retries = retries
        self.session = requests.Session()

    def __call__(self, program: str, feedback: str) -> CriticVerdict:
        body = request_json(
            "POST", self.url, {"program": program, "feedback": feedback}, self.timeout, self.retries, self.session
        )
        score = float(expect_field(body, "p_correct", (int, float)))
        if not 0.0 <= score <= 1.0:
            raise MalformedResponseError(f"p_correct {score} outside [0, 1]")
        marked = body.get("marked_program")
        if marked is not None and not isinstance(marked, str):
            raise MalformedResponseError("marked_program must be a string or null")
        loc = None
        if marked is not None:
            try:
                clean, span = decode_loc(marked)
            except LocCodecError:
                clean, span = None, None
            if clean == program:
                loc = span
        return CriticVerdict(score, loc)


class RemoteRefiner:
    """``POST {endpoint}/v1/refine`` with ``{program, feedback, marked_program}``."""

    def __init__(self, endpoint: str, timeout: float = 60.0, retries: int = 0):
        self.url = endpoint.rstrip("/") + "/v1/refine"
        self.timeout = timeout
        self.retries = retries
        self.session = requests.Session()

    def __call__(self, program: str, feedback: str, loc: SourceSpan) -> str:
        payload = {"program": program, "feedback": feedback, "marked_program": encode_loc(program, loc)}
        body = request_json("POST", self.url, payload, self.timeout, self.retries, self.session)
        return expect_field(body, "program", str)


def remote_critic(endpoint: str, program: str, feedback: str, timeout: float = 30.0) -> CriticVerdict:
    return RemoteCritic(endpoint, timeout)(program, feedback)


def remote_refiner(endpoint: str, program: str, feedback: str, loc: SourceSpan, timeout: float = 60.0) -> str:
    return RemoteRefiner(endpoint, timeout)(program, feedback, loc)


__all__ = [
    "ConstantCritic",
    "OracleCritic",
    "OracleRefiner",
    "RemoteCritic",
    "RemoteRefiner",
    "identity_refiner",
    "oracle_backends",
    "remote_critic",
    "remote_refiner",
]
