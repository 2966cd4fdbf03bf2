import dataclasses

import pytest

from vpdebug.harness.metrics import matches_ground_truth
from vpdebug.inject.records import (
    RecordInvariantError,
    check_record,
    check_records_jsonl,
    critic_label,
    dumps_jsonl,
    marked_program_of,
    serialize_training_records,
)
from vpdebug.loop.loccodec import decode_loc
from vpdebug.model import T_CORRECT, T_INCORRECT
from vpdebug.runtime import execute_or_syntax_error


def test_one_pair_gives_two_critic_rows_and_one_refiner_row(injected, store):
    rec = injected.records[0]
    critic, refiner = serialize_training_records([rec], [], store)
    assert [critic_label(r) for r in critic] == [T_CORRECT, T_INCORRECT]
    assert marked_program_of(critic[0]) is None
    clean, span = decode_loc(marked_program_of(critic[1]))
    assert clean == rec.program_incorrect and span == rec.loc
    assert len(refiner) == 1
    row = refiner[0]
    assert row["target"] == rec.program_correct
    assert row["program_incorrect"] == rec.program_incorrect
    assert decode_loc(row["marked_program"]) == (rec.program_incorrect, rec.loc)


def test_natural_incorrect_row_has_no_loc(natural_pool, store):
    critic, refiner = serialize_training_records([], natural_pool[:5], store)
    assert refiner == []
    for row in critic:
        assert row["target"] == T_INCORRECT
        assert marked_program_of(row) is None


def test_natural_labels_follow_execution(pool, natural_pool, store):
    mixed = list(pool[:10]) + list(natural_pool[:10])
    critic, _ = serialize_training_records([], mixed, store)
    for entry, row in zip(mixed, critic):
        ok = matches_ground_truth(execute_or_syntax_error(entry.program, store.get_many(entry.scene_ids)), entry.ground_truth)
        assert critic_label(row) == (T_CORRECT if ok else T_INCORRECT)


def test_feedback_rows_are_rendered_traces(injected, store):
    critic, _ = serialize_training_records(injected.records[:1], [], store)
    assert critic[0]["feedback"].startswith("-> ")
    assert "call         1 def execute_command" in critic[0]["feedback"]


def test_invariant_violation_rejected(injected, store):
    rec = injected.records[0]
    broken = dataclasses.replace(rec, program_incorrect="# tampered\n" + rec.program_incorrect)
    with pytest.raises(RecordInvariantError, match=rec.id):
        serialize_training_records([broken], [], store)


def test_byte_stable_jsonl(injected, natural_pool, store):
    a = serialize_training_records(injected.records[:10], natural_pool[:5], store)
    b = serialize_training_records(injected.records[:10], natural_pool[:5], store)
    assert dumps_jsonl(a[0]) == dumps_jsonl(b[0]) and dumps_jsonl(a[1]) == dumps_jsonl(b[1])


def test_checker_detects_each_violation(injected, store):
    rec = injected.records[0]
    assert check_record(rec, store) == []
    outside = dataclasses.replace(rec, program_incorrect=rec.program_incorrect + "\n")
    assert "programs differ outside loc" in check_record(outside, store)
    swapped = dataclasses.replace(rec, program_incorrect=rec.program_correct, program_correct=rec.program_incorrect)
    problems = check_record(swapped, store)
    assert "correct program does not match ground truth" in problems


def test_checker_over_jsonl(injected, store):
    text = dumps_jsonl(r.to_dict() for r in injected.records)
    assert check_records_jsonl(text, store) == {}
