"""Order-k n-gram model with add-alpha smoothing and longest-context backoff."""

from __future__ import annotations

import json
from collections import defaultdict
from typing import Iterable, Optional, Sequence

import numpy as np

from vpdebug.model.distribution import TokenDistribution

SMOOTHING_MODES = ("uniform", "hierarchical")


class NGramModel:
    """Add-alpha n-gram model.

    ``smoothing="uniform"`` uses the longest context with any counts and
    spreads the alpha pseudo-counts uniformly:
    ``(c(ctx, w) + alpha) / (c(ctx) + alpha * V)``.

    ``smoothing="hierarchical"`` spreads the pseudo-counts according to the
    next-shorter context's distribution instead of uniformly, recursively
    down to a uniform base. Its tail (everything but the argmax) then
    ranks plausible alternatives rather than being flat noise.
    """

    def __init__(self, vocab_size: int, order: int = 3, alpha: float = 1.0, smoothing: str = "uniform"):
        if order < 1:
            raise ValueError("order must be >= 1")
        if alpha < 0:
            raise ValueError("alpha must be >= 0")
        if smoothing not in SMOOTHING_MODES:
            raise ValueError(f"smoothing must be one of {SMOOTHING_MODES}")
        if alpha == 0 and smoothing == "hierarchical":
            raise ValueError("hierarchical smoothing needs alpha > 0")
        self.vocab_size = vocab_size
        self.order = order
        self.alpha = alpha
        self.smoothing = smoothing
        # context tuple (length 0..order-1) -> {next id: count}
        self.counts: dict[tuple, dict[int, int]] = defaultdict(dict)
        self._cache: dict[tuple, TokenDistribution] = {}

    def update(self, tokens: Sequence[int], predict_from: int = 0) -> None:
        """Count n-grams whose predicted token sits at index >= ``predict_from``."""
        self._cache.clear()
        for i in range(max(predict_from, 0), len(tokens)):
            tok = tokens[i]
            for k in range(0, self.order):
                if i - k < 0:
                    break
                table = self.counts[tuple(tokens[i - k : i])]
                table[tok] = table.get(tok, 0) + 1

    def fit(self, sequences: Iterable[tuple[Sequence[int], int]]) -> "NGramModel":
        for tokens, predict_from in sequences:
            self.update(tokens, predict_from)
        return self

    def _seen_contexts(self, context: Sequence[int]) -> list[tuple]:
        """Seen suffixes of ``context``, shortest first. A context is only
        counted when its shorter suffixes are, so the list is contiguous."""
        out = []
        for k in range(0, min(self.order - 1, len(context)) + 1):
            ctx = tuple(context[len(context) - k :]) if k else ()
            if ctx not in self.counts:
                break
            out.append(ctx)
        return out

    def _smooth(self, table: dict, prior: np.ndarray) -> np.ndarray:
        V = self.vocab_size
        c = np.zeros(V)
        c[list(table)] = list(table.values())
        probs = (c + self.alpha * V * prior) / (c.sum() + self.alpha * V)
        return probs / probs.sum()  # absorb float rounding

    def next_distribution(self, context: Sequence[int]) -> TokenDistribution:
        seen = self._seen_contexts(context)
        key = seen[-1] if seen else None
        if key in self._cache:
            return self._cache[key]
        V = self.vocab_size
        uniform = np.full(V, 1.0 / V)
        if not seen:
            probs = uniform
        elif self.smoothing == "uniform":
            probs = self._smooth(self.counts[key], uniform)
        else:
            probs = uniform
            for ctx in seen:
                probs = self._smooth(self.counts[ctx], probs)
        dist = TokenDistribution(probs)
        self._cache[key] = dist
        return dist

    def to_json(self) -> str:
        return json.dumps(
            {
                "vocab_size": self.vocab_size,
                "order": self.order,
                "alpha": self.alpha,
                "smoothing": self.smoothing,
                "counts": [[list(ctx), sorted(t.items())] for ctx, t in sorted(self.counts.items())],
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "NGramModel":
        d = json.loads(text)
        m = cls(d["vocab_size"], d["order"], d["alpha"], d.get("smoothing", "uniform"))
        for ctx, items in d["counts"]:
            m.counts[tuple(ctx)] = {int(k): int(v) for k, v in items}
        return m
