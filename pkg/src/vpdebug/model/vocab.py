"""Vocabulary and DSL-aware tokenizer with byte fallback."""

from __future__ import annotations

import json
import re
from collections import Counter
from typing import Iterable, Sequence

from vpdebug.dsl.lexer import NEWLINE, WS, lex

EOS = "<EOS>"
MASKED = "<MASKED>"
BUG_OPEN = "<BUG>"
BUG_CLOSE = "<BUG/>"
T_CORRECT = "<CORRECT>"
T_INCORRECT = "<INCORRECT>"
RESERVED = (EOS, MASKED, BUG_OPEN, BUG_CLOSE, T_CORRECT, T_INCORRECT)
BYTE_TOKENS = tuple(f"<0x{b:02X}>" for b in range(256))

# longest first so "<BUG/>" is not read as "<BUG>" + "/>"
_RESERVED_RE = re.compile("|".join(re.escape(t) for t in sorted(RESERVED, key=len, reverse=True)))
_BYTE_RE = re.compile(r"<0x([0-9A-F]{2})>")


def pieces(text: str) -> list[str]:
    """Split text into string pieces.

    Reserved markers are atomic. Everything else follows the DSL lexer,
    with horizontal whitespace glued onto the following token and a
    newline glued onto the indentation after it.
    """
    out: list[str] = []
    pos = 0
    for m in _RESERVED_RE.finditer(text):
        out.extend(_code_pieces(text[pos:m.start()]))
        out.append(m.group())
        pos = m.end()
    out.extend(_code_pieces(text[pos:]))
    return out


def _code_pieces(text: str) -> list[str]:
    if not text:
        return []
    out: list[str] = []
    pending = ""
    after_newline = False
    for tok in lex(text, tolerant=True):
        if tok.kind == WS:
            if after_newline:
                out[-1] += tok.text
            else:
                pending += tok.text
            after_newline = False
            continue
        out.append(pending + tok.text)
        pending = ""
        after_newline = tok.kind == NEWLINE
    if pending:
        out.append(pending)
    return out


class Vocabulary:
    """Dense token ids: reserved tokens, then 256 byte tokens, then corpus pieces."""

    def __init__(self, tokens: Sequence[str]):
        self.tokens = list(tokens)
        self.index = {t: i for i, t in enumerate(self.tokens)}
        if len(self.index) != len(self.tokens):
            raise ValueError("duplicate tokens in vocabulary")
        missing = [t for t in (*RESERVED, *BYTE_TOKENS) if t not in self.index]
        if missing:
            raise ValueError(f"vocabulary lacks reserved tokens: {missing[:5]}")
        self.eos_id = self.index[EOS]
        self.masked_id = self.index[MASKED]
        self.bug_open_id = self.index[BUG_OPEN]
        self.bug_close_id = self.index[BUG_CLOSE]
        self.correct_id = self.index[T_CORRECT]
        self.incorrect_id = self.index[T_INCORRECT]
        self._byte_ids = [self.index[t] for t in BYTE_TOKENS]

    def __len__(self):
        return len(self.tokens)

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and other.tokens == self.tokens

    @classmethod
    def build(cls, texts: Iterable[str], min_count: int = 1) -> "Vocabulary":
        counts = Counter(p for t in texts for p in pieces(t))
        base = [*RESERVED, *BYTE_TOKENS]
        known = set(base)
        extra = sorted((p for p, c in counts.items() if c >= min_count and p not in known), key=lambda p: (-counts[p], p))
        return cls(base + extra)

    def tokenize(self, text: str) -> list[int]:
        ids: list[int] = []
        for p in pieces(text):
            i = self.index.get(p)
            if i is not None and not _BYTE_RE.fullmatch(p):
                ids.append(i)
            else:
                ids.extend(self._byte_ids[b] for b in p.encode("utf-8"))
        return ids

    def detokenize(self, ids: Iterable[int]) -> str:
        out: list[str] = []
        buf = bytearray()
        for i in ids:
            tok = self.tokens[i]
            m = _BYTE_RE.fullmatch(tok)
            if m:
                buf.append(int(m.group(1), 16))
                continue
            if buf:
                out.append(buf.decode("utf-8", errors="replace"))
                buf.clear()
            out.append(tok)
        if buf:
            out.append(buf.decode("utf-8", errors="replace"))
        return "".join(out)

    def to_json(self) -> str:
        return json.dumps({"version": 1, "tokens": self.tokens}, ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "Vocabulary":
        return cls(json.loads(text)["tokens"])
