"""Infilling prompt for error injection, and the matching decoder view."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Optional, Sequence

import numpy as np

from vpdebug.dsl.nodes import SourceSpan
from vpdebug.dsl.subtrees import splice
from vpdebug.model.vocab import MASKED, Vocabulary

PLACEHOLDERS = ("{QUESTION}", "{CODE}", "{API_DEFINITION}", "{PROGRAM_SIGNATURE}")


@lru_cache(maxsize=None)
def load_template() -> str:
    return resources.files("vpdebug.data").joinpath("prompts/error_injection.txt").read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def load_api_definition() -> str:
    return resources.files("vpdebug.data").joinpath("prompts/api_definition.py").read_text(encoding="utf-8").rstrip("\n")


@dataclass(frozen=True)
class InfillSplit:
    """A program cut around a masked span.

    ``glue`` is the horizontal whitespace between the previous token and
    the span on the same line. It is generated together with the span so
    that the token before the hole is a real token rather than a lone space.
    """

    prefix: str
    glue: str
    span: str
    suffix: str

    @classmethod
    def of(cls, program: str, loc: SourceSpan) -> "InfillSplit":
        data = program.encode("utf-8")
        head = data[: loc.start_byte].decode("utf-8")
        prefix = head.rstrip(" \t")
        if not prefix or prefix.endswith("\n"):
            # indentation stays with its newline token
            prefix = head
        return cls(
            prefix,
            head[len(prefix) :],
            data[loc.start_byte : loc.end_byte].decode("utf-8"),
            data[loc.end_byte :].decode("utf-8"),
        )


def build_prompt(question: str, program: str, loc: SourceSpan, template: Optional[str] = None) -> tuple[str, str]:
    """Fill the template for masking ``loc`` in ``program``.

    Returns ``(head, program_prefix)``. The model's fixed generation prefix
    is extended with the program text up to the masked span, so a decoder
    continues straight into the masked content and ends it with EOS.
    """
    template = template if template is not None else load_template()
    masked = splice(program, loc, MASKED)
    head, _, tail = template.partition("{PROGRAM_SIGNATURE}")
    if tail:
        raise ValueError("{PROGRAM_SIGNATURE} must end the template")
    head = (
        head.replace("{QUESTION}", question)
        .replace("{API_DEFINITION}", load_api_definition())
        .replace("{CODE}", masked)
    )
    return head, InfillSplit.of(program, loc).prefix


def prompt_ids(vocab: Vocabulary, question: str, program: str, loc: SourceSpan) -> list[int]:
    """Tokenize the filled prompt. The program prefix is tokenized on its own
    so its token boundaries match the ones seen in training."""
    head, prefix = build_prompt(question, program, loc)
    return vocab.tokenize(head) + vocab.tokenize(prefix)


def suffix_head(vocab: Vocabulary, suffix: str) -> int:
    """First token of the text after the hole, or EOS at the end of the program."""
    ids = vocab.tokenize(suffix) if suffix else []
    return ids[0] if ids else vocab.eos_id


def infill_training_sequence(vocab: Vocabulary, program: str, loc: SourceSpan) -> tuple[list[int], int]:
    """``(ids, predict_from)`` for one masked span: the prefix, then glue and
    span, then the first suffix token. Only the last two parts are predicted."""
    cut = InfillSplit.of(program, loc)
    prefix = vocab.tokenize(cut.prefix)
    ids = prefix + vocab.tokenize(cut.glue + cut.span) + [suffix_head(vocab, cut.suffix)]
    return ids, len(prefix)


_DEPTH = {"(": 1, "[": 1, "{": 1, ")": -1, "]": -1, "}": -1}


class InfillView:
    """Next-token source for filling one hole.

    The wrapped model predicts how code continues after the prefix. The
    hole is complete when the model would emit the first token of the
    text after it, so once the generated text has balanced brackets that
    token's probability is moved onto EOS.
    """

    def __init__(self, model, vocab: Vocabulary, prompt_len: int, suffix: str):
        self.model = model
        self.vocab = vocab
        self.prompt_len = prompt_len
        self.stop_id = suffix_head(vocab, suffix)
        self._depth_cache: dict[tuple, int] = {}

    def _depth(self, generated: Sequence[int]) -> int:
        key = tuple(generated)
        if key not in self._depth_cache:
            text = self.vocab.detokenize(generated)
            self._depth_cache[key] = sum(_DEPTH.get(c, 0) for c in text)
        return self._depth_cache[key]

    def next_distribution(self, context: Sequence[int]) -> np.ndarray:
        d = self.model.next_distribution(context)
        p = np.array(getattr(d, "probs", d), dtype=float)
        generated = context[self.prompt_len :]
        eos = self.vocab.eos_id
        if self.stop_id != eos:
            stop_mass = p[self.stop_id]
            p[self.stop_id] = 0.0
            if generated and self._depth(generated) <= 0:
                p[eos] += stop_mass
        total = p.sum()
        if total <= 0:
            # the model was certain of the suffix before the hole balanced
            p[eos] = total = 1.0
        return p / total
