import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vpdebug.harness import datasets
from vpdebug.harness.config import load_config
from vpdebug.harness.corpus import generate_corpus, write_corpus
from vpdebug.harness.evaluate import Sample, evaluate
from vpdebug.harness.metrics import answer_match, grounding_iou, normalize_answer, stopwords
from vpdebug.harness.stats import StatsRow, dataset_stats, render_table
from vpdebug.inject.records import dumps_jsonl
from vpdebug.world import Image, ImagePatch, SceneStore

# ---------------------------------------------------------------- metrics


def test_answer_match_examples():
    assert answer_match("the red jacket", "red jacket")
    assert not answer_match("yes", "no")
    assert not answer_match("2", "two")
    assert answer_match("Red, jacket.", "red jacket")


def test_stopword_list_is_pinned():
    words = stopwords()
    assert 25 <= len(words) <= 35
    assert {"the", "a", "an", "of"} <= words


@settings(max_examples=200)
@given(st.text(alphabet="abc THE.,!", max_size=20), st.text(alphabet="abc THE.,!", max_size=20))
def test_answer_match_symmetric_idempotent(a, b):
    assert answer_match(a, b) == answer_match(b, a)
    assert normalize_answer(" ".join(normalize_answer(a))) == normalize_answer(a)


def test_grounding_iou(fig_scene):
    patch = ImagePatch(Image(fig_scene), 40, 20, 160, 190)
    assert grounding_iou(patch, [40, 20, 160, 190]) == 1.0
    assert grounding_iou("chair", [40, 20, 160, 190]) == 0.0


# ---------------------------------------------------------------- evaluate


def test_empty_dataset(store):
    with pytest.raises(ValueError, match="empty dataset"):
        evaluate([], store)


def test_oracle_fixes_all_injected(injected, pool, store):
    broken = [Sample.from_record(r) for r in injected.records[:30]]
    broken_ids = {s.id for s in broken}
    unbroken = [Sample.from_pool_entry(p) for p in pool if p.id not in broken_ids][:20]
    report = evaluate(broken + unbroken, store, max_steps=3)
    n_qa = sum(s.task_kind == "qa" for s in broken + unbroken)
    n_qa_unbroken = sum(s.task_kind == "qa" for s in unbroken)
    assert report.accuracy[0] == pytest.approx(n_qa_unbroken / n_qa)
    assert report.accuracy[1:] == (1.0, 1.0, 1.0)
    assert report.error_sources["correct"] == 50


def test_t_zero_equals_direct_execution(injected, pool, store):
    data = [Sample.from_record(r) for r in injected.records[:20]] + [Sample.from_pool_entry(p) for p in pool[:20]]
    direct = evaluate(data, store, max_steps=0)
    debugged = evaluate(data, store, max_steps=3)
    assert direct.accuracy == debugged.accuracy[:1]
    assert direct.mean_iou == debugged.mean_iou[:1]
    assert all(r.reason is None for r in direct.samples)


def test_grounding_identity(pool, store):
    ground = [Sample.from_pool_entry(p) for p in pool if p.task_kind == "grounding"]
    assert ground, "corpus should contain grounding samples"
    report = evaluate(ground, store, max_steps=0)
    assert report.mean_iou[0] == pytest.approx(1.0)
    assert report.accuracy[0] is None


def test_missing_scene_counts_incorrect(pool, store):
    good = Sample.from_pool_entry(pool[0])
    missing = Sample("ghost", "q", ("no_such_scene",), "yes", pool[0].program)
    report = evaluate([good, missing], store, max_steps=1)
    ghost = [r for r in report.samples if r.id == "ghost"][0]
    assert "no_such_scene" in ghost.error and ghost.scores == (0.0, 0.0)
    assert report.n_errors == 1


def test_order_independent(injected, pool, store):
    data = [Sample.from_record(r) for r in injected.records[:15]] + [Sample.from_pool_entry(p) for p in pool[:15]]
    shuffled = list(data)
    random.Random(1).shuffle(shuffled)
    a, b = evaluate(data, store), evaluate(shuffled, store)
    assert a.to_dict() == b.to_dict()
    assert evaluate(data, store, workers=4).to_dict() == a.to_dict()


def test_error_source_tally(tmp_path):
    scene = {
        "image_id": "s", "width": 100, "height": 100, "default_answer": "no", "image_qa": {},
        "objects": [{"name": "cup", "box": [10, 10, 50, 50], "qa": {"What color is the cup?": "blue"},
                     "faulty_qa": ["What color is the cup?"]}],
    }
    (tmp_path / "s.json").write_text(json.dumps(scene))
    store = SceneStore(tmp_path)
    head = "def execute_command(image) -> str:\n"
    query = head + "    return ImagePatch(image).find('cup')[0].simple_query('What color is the cup?')"
    data = [
        Sample("vlm", "q", ("s",), "red", query),
        Sample("prog", "q", ("s",), "red", head + "    return 'green'"),
        Sample("ok", "q", ("s",), "no", head + "    return 'no'"),
    ]
    report = evaluate(data, store, max_steps=0)
    assert report.error_sources == {"correct": 1, "vlm-error-simulated": 1, "program-error": 1}


def test_report_table_and_json(injected, store):
    report = evaluate([Sample.from_record(r) for r in injected.records[:5]], store)
    assert report.table().splitlines()[0] == "iteration\taccuracy\tmean_iou"
    assert json.loads(report.to_json())["max_steps"] == 3


# ---------------------------------------------------------------- stats


def test_stats_gqa_row():
    row = StatsRow("GQA", 0, 18126, {"greedy": 3927, "mask-best": 7758})
    assert row.rate("greedy") == 21.7 and row.rate("mask-best") == 42.8
    assert "21.7" in render_table([row]) and "42.8" in render_table([row])


def test_stats_edge_cases(tmp_path):
    assert StatsRow("x", 0, 40, {"greedy": 10}).rate("greedy") == 25.0
    assert StatsRow("x", 0, 40, {"greedy": 0}).rate("greedy") == 0.0
    assert StatsRow("x", 0, 0, {}).rate("greedy") == 0.0
    pc = tmp_path / "pc.jsonl"
    pc.write_text(dumps_jsonl({"i": i} for i in range(40)))
    rec = tmp_path / "r.jsonl"
    rec.write_text(dumps_jsonl({"i": i} for i in range(10)))
    row = dataset_stats("t", pc, tmp_path / "missing.jsonl", {"mask-best": rec})
    assert (row.n_correct, row.n_incorrect_natural, row.rate("mask-best")) == (40, 0, 25.0)


# ---------------------------------------------------------------- config


def test_config_file_and_env(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({
        "endpoints": {"critic": "http://file"},
        "budgets": {"feedback_tokens": 512},
        "debug": {"max_steps": 2},
    }))
    cfg = load_config(path, environ={"VPDEBUG_CRITIC_ENDPOINT": "http://env", "VPDEBUG_MAX_STEPS": "9"})
    assert cfg.endpoints.critic == "http://env"
    assert cfg.budgets.feedback_tokens == 512
    assert cfg.debug.max_steps == 2
    assert load_config(None, environ={}).debug.threshold == 0.5


def test_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"budgets": {"tokens": 1}}))
    with pytest.raises(ValueError):
        load_config(path, environ={})
    path.write_text(json.dumps({"extras": {}}))
    with pytest.raises(ValueError):
        load_config(path, environ={})


# ---------------------------------------------------------------- bundled corpus


def test_bundled_corpus_regenerates_byte_identically(tmp_path):
    write_corpus(generate_corpus(), tmp_path)
    for rel in ("corpus/pool_correct.jsonl", "corpus/pool_natural_incorrect.jsonl", "scenes/scene_000.json", "scenes/fig_trace.json"):
        assert (tmp_path / rel).read_bytes() == (datasets.data_dir() / rel).read_bytes(), rel


def test_bundled_pool_split_is_honest(pool, natural_pool, store):
    from vpdebug.harness.metrics import matches_ground_truth
    from vpdebug.runtime import execute_or_syntax_error

    assert len(pool) >= 200
    for entry in pool:
        assert matches_ground_truth(execute_or_syntax_error(entry.program, store.get_many(entry.scene_ids)), entry.ground_truth)
    for entry in natural_pool:
        assert not matches_ground_truth(execute_or_syntax_error(entry.program, store.get_many(entry.scene_ids)), entry.ground_truth)
