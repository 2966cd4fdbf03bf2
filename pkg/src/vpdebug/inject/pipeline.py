"""Error injection over a pool of correct programs."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Optional, Sequence

import numpy as np

from vpdebug.dsl.parser import parse
from vpdebug.dsl.subtrees import enumerate_subtrees, span_from_bytes
from vpdebug.harness.metrics import matches_ground_truth
from vpdebug.inject.categorize import categorize_error
from vpdebug.inject.prompt import InfillSplit, InfillView, infill_training_sequence, prompt_ids
from vpdebug.inject.records import DatasetRecord, PoolEntry
from vpdebug.inject.sampling import MaskBestConfig, greedy_decode, mask_best_decode
from vpdebug.model.ngram import NGramModel
from vpdebug.model.vocab import Vocabulary
from vpdebug.runtime.interpreter import execute, execute_or_syntax_error

MODES = ("greedy", "mask-best")
DEFAULT_ATTEMPTS = 5
# Injection-model defaults. A near-zero alpha keeps greedy decoding faithful
# to the training programs; hierarchical smoothing makes the tail below the
# argmax rank real alternatives, which is what mask-best samples from.
INFILL_ALPHA = 0.01
INFILL_SMOOTHING = "hierarchical"


def error_rate(n_injected: int, n_correct_pool: int) -> float:
    """Percentage of the pool that received an error, one decimal, half away from zero."""
    if n_correct_pool <= 0:
        raise ValueError("correct pool must be non-empty")
    if n_injected < 0:
        raise ValueError("n_injected must be >= 0")
    pct = Decimal(100) * Decimal(n_injected) / Decimal(n_correct_pool)
    return float(pct.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def train_infill_model(
    programs: Iterable[str],
    order: int = 3,
    alpha: float = INFILL_ALPHA,
    smoothing: str = INFILL_SMOOTHING,
    vocab: Optional[Vocabulary] = None,
) -> tuple[Vocabulary, NGramModel]:
    """Fit an n-gram infilling model: for every subtree of every program,
    predict the subtree's tokens and EOS from the text before it."""
    programs = list(programs)
    holes = [(prog, ref.span) for prog in programs for ref in enumerate_subtrees(parse(prog))]
    if vocab is None:
        texts = list(programs)
        for prog, span in holes:
            cut = InfillSplit.of(prog, span)
            texts += [cut.prefix, cut.glue + cut.span]
        vocab = Vocabulary.build(texts)
    model = NGramModel(len(vocab), order=order, alpha=alpha, smoothing=smoothing)
    for prog, span in holes:
        ids, start = infill_training_sequence(vocab, prog, span)
        model.update(ids, start)
    return vocab, model


def _common_prefix(a: str, b: str) -> str:
    i = 0
    while i < min(len(a), len(b)) and a[i] == b[i]:
        i += 1
    return a[:i]


@dataclass(frozen=True)
class Attempt:
    span_text: str
    recovery: str
    accepted: bool


def inject_error(
    entry: PoolEntry,
    scenes,
    model,
    vocab: Vocabulary,
    cfg: MaskBestConfig = MaskBestConfig(),
    mode: str = "mask-best",
    attempts: int = DEFAULT_ATTEMPTS,
    rng: Optional[np.random.Generator] = None,
    log: Optional[list] = None,
) -> Optional[DatasetRecord]:
    """Try up to ``attempts`` resamplings of a random subtree; return the first
    one whose execution no longer matches the ground truth."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    program = parse(entry.program)
    outcome_c = execute(program, scenes)
    if not matches_ground_truth(outcome_c, entry.ground_truth):
        raise ValueError(f"pool entry {entry.id}: program does not reproduce its ground truth")
    refs = enumerate_subtrees(program)
    for _ in range(attempts):
        ref = refs[int(rng.integers(len(refs)))]
        cut = InfillSplit.of(entry.program, ref.span)
        ids = prompt_ids(vocab, entry.question, entry.program, ref.span)
        view = InfillView(model, vocab, len(ids), cut.suffix)
        if mode == "greedy":
            dec = greedy_decode(view, ids, cfg.max_tokens, vocab.eos_id)
        else:
            dec = mask_best_decode(view, ids, cfg, vocab.eos_id, rng)
        generated = vocab.detokenize(dec.tokens)
        # the glue whitespace was generated too; the record's loc starts after
        # whatever part of it came back unchanged
        keep = len(_common_prefix(generated, cut.glue))
        recovery = generated[keep:]
        accepted = False
        if recovery.strip():
            candidate = cut.prefix + cut.glue[:keep] + recovery + cut.suffix
            outcome_i = execute_or_syntax_error(candidate, scenes)
            accepted = not matches_ground_truth(outcome_i, entry.ground_truth)
        if log is not None:
            log.append(Attempt(cut.span, generated, accepted))
        if not accepted:
            continue
        start = len((cut.prefix + cut.glue[:keep]).encode("utf-8"))
        loc = span_from_bytes(candidate, start, start + len(recovery.encode("utf-8")))
        return DatasetRecord(
            id=entry.id,
            question=entry.question,
            scene_ids=entry.scene_ids,
            ground_truth=entry.ground_truth,
            program_correct=entry.program,
            program_incorrect=candidate,
            loc=loc,
            outcome_correct=outcome_c.summary(),
            outcome_incorrect=outcome_i.summary(),
            error_category=categorize_error(entry.program, candidate, loc, outcome_i),
            mode=mode,
            masked_steps=dec.masked_steps,
        )
    return None


@dataclass(frozen=True)
class InjectionReport:
    mode: str
    n_pool: int
    records: tuple[DatasetRecord, ...]

    @property
    def n_injected(self) -> int:
        return len(self.records)

    @property
    def rate(self) -> float:
        return error_rate(self.n_injected, self.n_pool)


def run_injection(
    pool: Sequence[PoolEntry],
    store,
    model,
    vocab: Vocabulary,
    cfg: MaskBestConfig = MaskBestConfig(),
    mode: str = "mask-best",
    attempts: int = DEFAULT_ATTEMPTS,
) -> InjectionReport:
    """Inject into every pool entry. Entry ``i`` draws from its own stream
    seeded by ``(cfg.seed, i)``, so results do not depend on scheduling."""
    records = []
    for i, entry in enumerate(pool):
        rng = np.random.default_rng([cfg.seed, i])
        rec = inject_error(entry, store.get_many(entry.scene_ids), model, vocab, cfg, mode, attempts, rng)
        if rec is not None:
            records.append(rec)
    return InjectionReport(mode, len(pool), tuple(records))
