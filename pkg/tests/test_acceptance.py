"""Acceptance criteria, one test per criterion.

Each test times its body against the criterion's limit and emits a single
``PASS``/``FAIL`` line. The lines are collected and repeated in an
"acceptance criteria" section at the end of the pytest run.
"""

import json
import time
from contextlib import contextmanager

import numpy as np
import pytest

from vpdebug.dsl.parser import parse
from vpdebug.dsl.printer import pretty_print
from vpdebug.dsl.subtrees import span_from_bytes
from vpdebug.harness import datasets
from vpdebug.harness.metrics import matches_ground_truth
from vpdebug.harness.stats import dataset_stats
from vpdebug.inject.pipeline import run_injection
from vpdebug.inject.records import (
    T_CORRECT,
    T_INCORRECT,
    check_records_jsonl,
    critic_label,
    dumps_jsonl,
    serialize_training_records,
)
from vpdebug.inject.sampling import (
    DegenerateTailError,
    MaskBestConfig,
    confidence_gap,
    mask_best_decode,
    should_mask,
    tail_distribution,
    top_two,
)
from vpdebug.loop import (
    ACCEPTED,
    ConstantCritic,
    DebugSessionConfig,
    decode_loc,
    encode_loc,
    identity_refiner,
    oracle_backends,
    run_debug_loop,
)
from vpdebug.runtime import execute, execute_or_syntax_error, render_feedback
from vpdebug.world.geometry import iou


@contextmanager
def criterion(emit, number: int, title: str, limit_s: float):
    """Run a criterion body, print its verdict line, and enforce the time limit."""
    start = time.perf_counter()
    detail = {}
    try:
        yield detail
    except BaseException as exc:
        elapsed = time.perf_counter() - start
        emit(f"FAIL criterion {number} ({title}): {type(exc).__name__}: {exc} [{elapsed:.2f}s / {limit_s:g}s]")
        raise
    elapsed = time.perf_counter() - start
    ok = elapsed < limit_s
    extra = f" {detail['info']}" if "info" in detail else ""
    emit(f"{'PASS' if ok else 'FAIL'} criterion {number} ({title}):{extra} [{elapsed:.2f}s / {limit_s:g}s]")
    assert ok, f"criterion {number} exceeded {limit_s}s ({elapsed:.2f}s)"


# 1 ------------------------------------------------------------------------


def test_c01_golden_feedback(fig_scene, fig_program, verdict):
    expected = datasets.golden_feedback_path().read_text(encoding="utf-8")
    with criterion(verdict, 1, "golden feedback", 1.0):
        text = render_feedback(execute(parse(fig_program), [fig_scene])).text
        assert text == expected
        assert text.startswith("-> None\n")
        assert (
            "New var:....... image_patch = ImagePatch(left=0, right=500, upper=375, lower=0, height=375, "
            "width=500, horizontal_center=250.0, vertical_center=187.5)"
        ) in text
        assert "Modified var:.. image_patch = 0" in text
        assert "Call ended by exception" in text


# 2 ------------------------------------------------------------------------


class _Scripted:
    def __init__(self, dists):
        self.dists = dists

    def next_distribution(self, context):
        return self.dists[len(context) - 1]


def test_c02_mask_best_math(verdict):
    rng = np.random.default_rng(2024)
    with criterion(verdict, 2, "mask-best math", 10.0) as detail:
        fired = degenerate = 0
        for k in range(10_000):
            size = int(rng.integers(2, 40))
            p = rng.dirichlet(np.full(size, rng.choice([0.05, 0.5, 1.0, 5.0])))
            i_star, i2 = top_two(p)
            if np.count_nonzero(p) < 2:
                # sparse draws can underflow to one-hot; no tail exists there
                with pytest.raises(DegenerateTailError):
                    tail_distribution(p)
                degenerate += 1
                continue
            tail = tail_distribution(p)
            assert abs(tail.sum() - 1.0) <= 1e-9
            assert tail[i_star] == 0.0
            rest = [i for i in range(size) if i != i_star and p[i] > 0]
            a, b = rng.choice(rest, size=2, replace=len(rest) < 2)
            assert abs(tail[a] / tail[b] - p[a] / p[b]) <= 1e-9 * (p[a] / p[b])
            gate = p[i_star] - p[i2] < 0.9
            assert should_mask(p, 0.9) == gate
            assert confidence_gap(p) == p[i_star] - p[i2]
            fired += gate
            if k % 20 == 0:
                # a scripted decode over fresh distributions never masks more than N steps
                n_max = int(rng.integers(0, 4))
                dists = [rng.dirichlet(np.ones(6)) for _ in range(12)]
                cfg = MaskBestConfig(th=0.9, max_masked=n_max, max_tokens=12)
                res = mask_best_decode(_Scripted(dists), [0], cfg, eos_id=-1, rng=rng)
                assert len(res.masked_steps) <= n_max
        detail["info"] = f"gate fired on {fired}/10000, {degenerate} one-hot draws"


# 3 ------------------------------------------------------------------------


def test_c03_mask_best_beats_greedy(pool, store, infill, verdict):
    """Single-resample success rate of mask-best vs greedy (seed 0).

    The 1.5x check uses one resample per program, the per-try statistic the
    rates are reported in. The default five-attempt retry numbers are
    printed for information only; with retries, greedy also gets five
    different subtrees and the gap narrows.
    """
    vocab, model = infill
    assert len(pool) == 200
    with criterion(verdict, 3, "mask-best >= 1.5x greedy", 300.0) as detail:
        cfg = MaskBestConfig(seed=0)
        greedy = run_injection(pool, store, model, vocab, cfg, "greedy", attempts=1)
        masked = run_injection(pool, store, model, vocab, cfg, "mask-best", attempts=1)
        ratio = masked.n_injected / max(greedy.n_injected, 1)
        g5 = run_injection(pool, store, model, vocab, cfg, "greedy", attempts=5)
        m5 = run_injection(pool, store, model, vocab, cfg, "mask-best", attempts=5)
        detail["info"] = (
            f"greedy {greedy.rate}% vs mask-best {masked.rate}% (x{ratio:.2f}); "
            f"info, 5 attempts: greedy {g5.rate}% vs mask-best {m5.rate}% (x{m5.n_injected / max(g5.n_injected, 1):.2f})"
        )
        assert greedy.n_injected > 0
        assert masked.n_injected >= 1.5 * greedy.n_injected


# 4 ------------------------------------------------------------------------


def test_c04_record_validity(injected, store, tmp_path, verdict):
    with criterion(verdict, 4, "record validity", 120.0) as detail:
        out = tmp_path / "records.jsonl"
        out.write_text(dumps_jsonl(r.to_dict() for r in injected.records), encoding="utf-8")
        failures = check_records_jsonl(out.read_text(encoding="utf-8"), store)
        detail["info"] = f"{len(injected.records)} records, {len(failures)} invalid"
        assert injected.records
        assert failures == {}


# 5 ------------------------------------------------------------------------


def test_c05_oracle_loop(injected, store, verdict):
    cfg = DebugSessionConfig(threshold=0.5, max_steps=3)
    probe = "def execute_command(image) -> str:\n    return 'x'"
    with criterion(verdict, 5, "oracle closed loop", 60.0) as detail:
        for rec in injected.records:
            scenes = store.get_many(rec.scene_ids)
            critic, refiner = oracle_backends(rec, store)
            tr = run_debug_loop(rec.program_incorrect, scenes, critic, refiner, cfg)
            assert tr.reason == ACCEPTED and tr.refiner_calls == 1 and tr.iterations == 2, rec.id
            assert matches_ground_truth(execute_or_syntax_error(tr.final_program, scenes), rec.ground_truth), rec.id
        scenes = store.get_many(injected.records[0].scene_ids)
        accepting = run_debug_loop(probe, scenes, ConstantCritic(1.0), identity_refiner, cfg)
        assert accepting.refiner_calls == 0 and accepting.reason == ACCEPTED
        rejecting = run_debug_loop(probe, scenes, ConstantCritic(0.0), identity_refiner, cfg)
        assert rejecting.refiner_calls == 3
        assert len([e for e in rejecting.entries if e.refined_program is not None]) == 3
        detail["info"] = f"{len(injected.records)} records accepted after one refinement"


# 6 ------------------------------------------------------------------------


def _random_utf8_span(rng, text):
    raw = text.encode("utf-8")
    bounds = [i for i in range(len(raw) + 1) if i == len(raw) or (raw[i] & 0xC0) != 0x80]
    i, j = sorted(rng.choice(len(bounds), size=2, replace=False))
    return span_from_bytes(text, bounds[i], bounds[j])


def test_c06_loc_codec(fig_program, pool, verdict):
    expected = (datasets.data_dir() / "golden" / "fig_loc.marked.txt").read_text(encoding="utf-8").rstrip("\n")
    program = fig_program.rstrip("\n")
    rng = np.random.default_rng(6)
    texts = [p.program for p in pool] + ["x = 'ünïcode → ok'\nreturn x", "a"]
    with criterion(verdict, 6, "loc codec", 5.0):
        loc = parse(program).root.body[-1].span
        assert encode_loc(program, loc) == expected
        for _ in range(1000):
            text = texts[int(rng.integers(len(texts)))]
            if len(text.encode()) < 2:
                text = text + " b"
            span = _random_utf8_span(rng, text)
            assert decode_loc(encode_loc(text, span)) == (text, span)


# 7 ------------------------------------------------------------------------


def test_c07_table_formula(tmp_path, verdict):
    def lines(name, n):
        path = tmp_path / name
        path.write_text("{}\n" * n)
        return path

    paths = (lines("pool.jsonl", 18126), lines("greedy.jsonl", 3927), lines("mask.jsonl", 7758))
    with criterion(verdict, 7, "error-rate formula", 1.0) as detail:
        row = dataset_stats("GQA", paths[0], None, {"greedy": paths[1], "mask-best": paths[2]})
        detail["info"] = f"greedy {row.rate('greedy')}% mask-best {row.rate('mask-best')}%"
        assert row.rate("greedy") == 21.7
        assert row.rate("mask-best") == 42.8


# 8 ------------------------------------------------------------------------


def _pixel_iou(a, b, size):
    ys, xs = np.mgrid[0:size, 0:size] + 0.5
    ina = (xs >= a[0]) & (xs < a[2]) & (ys >= a[1]) & (ys < a[3])
    inb = (xs >= b[0]) & (xs < b[2]) & (ys >= b[1]) & (ys < b[3])
    union = (ina | inb).sum()
    return (ina & inb).sum() / union if union else 0.0


def _random_box(rng, size):
    x0, x1 = sorted(rng.choice(size + 1, size=2, replace=False))
    y0, y1 = sorted(rng.choice(size + 1, size=2, replace=False))
    return (int(x0), int(y0), int(x1), int(y1))


def test_c08_iou_oracle(verdict):
    rng = np.random.default_rng(8)
    size = 64
    with criterion(verdict, 8, "IoU vs pixel grid", 5.0) as detail:
        worst = 0.0
        for _ in range(100):
            a, b = _random_box(rng, size), _random_box(rng, size)
            err = abs(iou(a, b) - _pixel_iou(a, b, size))
            worst = max(worst, err)
            assert err <= 1e-6, (a, b)
            assert iou(a, a) == 1.0
        assert iou((0, 0, 10, 10), (20, 20, 30, 30)) == 0.0
        assert iou((0, 0, 10, 10), (10, 0, 20, 10)) == 0.0
        detail["info"] = f"max abs error {worst:.1e}"


# 9 ------------------------------------------------------------------------


def test_c09_parser_round_trip(pool, natural_pool, verdict):
    programs = [p.program for p in list(pool) + list(natural_pool)]
    with criterion(verdict, 9, "parser round-trip", 10.0) as detail:
        assert len(programs) >= 200
        for src in programs:
            first = parse(src)
            assert parse(pretty_print(first)).root == first.root
        detail["info"] = f"{len(programs)} programs"


# 10 -----------------------------------------------------------------------


def test_c10_training_records(injected, natural_pool, store, verdict):
    records, natural = list(injected.records), list(natural_pool)
    with criterion(verdict, 10, "training-record cardinality", 5.0) as detail:
        critic, refiner = serialize_training_records(records, natural, store)
        k, m = len(records), len(natural)
        assert len(critic) == 2 * k + m
        assert len(refiner) == k
        by_program = {}
        for rec in records:
            by_program.setdefault(rec.id, rec)
        for row in critic:
            entry_id, kind = row["id"].rsplit("/", 1)
            if kind == "correct":
                assert critic_label(row) == T_CORRECT
                assert row["target"] == T_CORRECT
            elif kind == "incorrect":
                assert critic_label(row) == T_INCORRECT
                assert row["target"].startswith(T_INCORRECT + "\n")
            else:
                entry = next(e for e in natural if e.id == entry_id)
                outcome = execute_or_syntax_error(entry.program, store.get_many(entry.scene_ids))
                want = T_CORRECT if matches_ground_truth(outcome, entry.ground_truth) else T_INCORRECT
                assert critic_label(row) == want
        for rec in records:
            scenes = store.get_many(rec.scene_ids)
            assert matches_ground_truth(execute_or_syntax_error(rec.program_correct, scenes), rec.ground_truth)
            assert not matches_ground_truth(execute_or_syntax_error(rec.program_incorrect, scenes), rec.ground_truth)
        detail["info"] = f"k={k} m={m}: {len(critic)} critic rows, {len(refiner)} refiner rows"
