"""Greedy and mask-best decoding over a next-token distribution source.

Every sampling step draws exactly one uniform number and inverts the CDF,
so two runs with the same seed consume identical random streams and only
diverge where their distributions differ.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

import numpy as np


class DistributionSource(Protocol):
    def next_distribution(self, context: Sequence[int]): ...


class DegenerateTailError(ValueError):
    """The argmax holds all the mass, so the tail is undefined."""


@dataclass(frozen=True)
class MaskBestConfig:
    th: float = 0.9  # confidence threshold
    max_masked: int = 1  # N
    max_tokens: int = 64  # T
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.th <= 1:
            raise ValueError("th must lie in (0, 1]")
        if self.max_masked < 0:
            raise ValueError("max_masked must be >= 0")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")


@dataclass(frozen=True)
class DecodeResult:
    tokens: tuple[int, ...]  # generated ids, EOS excluded
    masked_steps: tuple[int, ...]  # 0-based steps where the tail was used
    stopped_on_eos: bool


def _probs(dist) -> np.ndarray:
    return np.asarray(getattr(dist, "probs", dist), dtype=float)


def top_two(p: np.ndarray) -> tuple[int, Optional[int]]:
    """Indices of the largest and second-largest entries (lowest index wins ties)."""
    i_star = int(np.argmax(p))
    if p.size == 1:
        return i_star, None
    rest = p.copy()
    rest[i_star] = -np.inf
    return i_star, int(np.argmax(rest))


def confidence_gap(p: np.ndarray) -> float:
    i_star, i2 = top_two(p)
    return float(p[i_star] - (p[i2] if i2 is not None else 0.0))


def should_mask(p: np.ndarray, th: float) -> bool:
    """The low-confidence gate: the top two probabilities are closer than ``th``."""
    return confidence_gap(p) < th


def tail_distribution(p: np.ndarray) -> np.ndarray:
    """Zero the argmax and rescale the others by the mass they jointly hold.

    The divisor is the summed mass off the argmax, which equals ``1 - p[i*]``
    for a normalized input but does not amplify rounding error when
    ``p[i*]`` is close to 1.
    """
    p = np.asarray(p, dtype=float)
    i_star, _ = top_two(p)
    tail = p.copy()
    tail[i_star] = 0.0
    rest = tail.sum()
    if rest <= 0.0:
        raise DegenerateTailError("argmax carries all probability mass")
    tail /= rest
    return tail


def sample_index(p: np.ndarray, u: float) -> int:
    """Inverse-CDF sample for a uniform draw ``u`` in [0, 1)."""
    cdf = np.cumsum(p)
    i = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    if i >= p.size or p[i] == 0.0:
        # rounding at the top end; fall back to the last token with mass
        i = int(np.flatnonzero(p)[-1])
    return i


def mask_best_decode(
    model: DistributionSource,
    prompt: Sequence[int],
    cfg: MaskBestConfig,
    eos_id: int,
    rng: np.random.Generator,
) -> DecodeResult:
    generated: list[int] = []
    masked: list[int] = []
    n = 0
    context = list(prompt)
    for step in range(cfg.max_tokens):
        p = _probs(model.next_distribution(context))
        if n < cfg.max_masked and should_mask(p, cfg.th):
            try:
                p = tail_distribution(p)
            except DegenerateTailError:
                pass  # nothing to mask; the step does not count against N
            else:
                n += 1
                masked.append(step)
        tok = sample_index(p, rng.random())
        if tok == eos_id:
            return DecodeResult(tuple(generated), tuple(masked), True)
        generated.append(tok)
        context.append(tok)
    return DecodeResult(tuple(generated), tuple(masked), False)


def mask_best_sample(
    model: DistributionSource,
    prompt: Sequence[int],
    cfg: MaskBestConfig,
    eos_id: int,
    rng: Optional[np.random.Generator] = None,
) -> list[int]:
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    return list(mask_best_decode(model, prompt, cfg, eos_id, rng).tokens)


def greedy_decode(model: DistributionSource, prompt: Sequence[int], max_tokens: int, eos_id: int) -> DecodeResult:
    generated: list[int] = []
    context = list(prompt)
    for _ in range(max_tokens):
        tok = int(np.argmax(_probs(model.next_distribution(context))))
        if tok == eos_id:
            return DecodeResult(tuple(generated), (), True)
        generated.append(tok)
        context.append(tok)
    return DecodeResult(tuple(generated), (), False)


def greedy_sample(model: DistributionSource, prompt: Sequence[int], max_tokens: int, eos_id: int) -> list[int]:
    return list(greedy_decode(model, prompt, max_tokens, eos_id).tokens)
