import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vpdebug.dsl import body_span, parse, span_from_bytes
from vpdebug.harness import datasets
from vpdebug.harness.metrics import matches_ground_truth
from vpdebug.harness.server import MockServer, RecordOracle
from vpdebug.loop import (
    ACCEPTED,
    MAX_STEPS,
    ConstantCritic,
    CriticVerdict,
    DebugSessionAborted,
    DebugSessionConfig,
    LocCodecError,
    OracleCritic,
    OracleRefiner,
    RemoteCritic,
    RemoteRefiner,
    decode_loc,
    default_loc,
    encode_loc,
    identity_refiner,
    oracle_backends,
    run_debug_loop,
)
from vpdebug.model import MalformedResponseError, TransportError
from vpdebug.runtime import execute_or_syntax_error

# ---------------------------------------------------------------- loc codec


def test_encode_fig_loc(fig_program):
    program = fig_program.rstrip("\n")
    loc = parse(program).root.body[-1].span
    expected = (datasets.data_dir() / "golden" / "fig_loc.marked.txt").read_text(encoding="utf-8").rstrip("\n")
    assert encode_loc(program, loc) == expected
    assert decode_loc(expected) == (program, loc)


def test_encode_full_body(fig_program):
    program = fig_program.rstrip("\n")
    loc = body_span(parse(program))
    marked = encode_loc(program, loc)
    assert marked.startswith("def execute_command(image) -> str:\n    <BUG>image_patch")
    assert marked.endswith("not large?')<BUG/>")


@pytest.mark.parametrize(
    "marked",
    ["no markers", "<BUG>a<BUG/> <BUG>b<BUG/>", "<BUG>a<BUG>b<BUG/>c<BUG/>", "<BUG/>a<BUG>", "x<BUG><BUG/>y", "<BUG>only"],
)
def test_decode_rejects_malformed(marked):
    with pytest.raises(LocCodecError):
        decode_loc(marked)


def test_encode_rejects_invalid_span():
    with pytest.raises(LocCodecError):
        encode_loc("abc", span_from_bytes("abcdef", 0, 5))


@settings(max_examples=300)
@given(st.data())
def test_codec_round_trip(data):
    text = data.draw(st.text(alphabet=st.characters(blacklist_characters="<", blacklist_categories=("Cs",)), min_size=1, max_size=60))
    raw = text.encode()
    starts = [i for i in range(len(raw)) if (raw[i] & 0xC0) != 0x80]
    start = data.draw(st.sampled_from(starts))
    ends = [j for j in range(start + 1, len(raw) + 1) if j == len(raw) or (raw[j] & 0xC0) != 0x80]
    end = data.draw(st.sampled_from(ends))
    loc = span_from_bytes(text, start, end)
    assert decode_loc(encode_loc(text, loc)) == (text, loc)


# ---------------------------------------------------------------- debug loop

CFG = DebugSessionConfig()


def test_defaults():
    assert (CFG.threshold, CFG.max_steps, CFG.containment) == (0.5, 3, "strict")
    for kw in ({"threshold": 0.0}, {"threshold": 1.0}, {"max_steps": 0}, {"containment": "loose"}):
        with pytest.raises(ValueError):
            DebugSessionConfig(**kw)
    with pytest.raises(ValueError):
        CriticVerdict(1.5)


def test_oracle_restores_every_record(injected, store):
    for rec in injected.records:
        critic, refiner = oracle_backends(rec, store)
        tr = run_debug_loop(rec.program_incorrect, store.get_many(rec.scene_ids), critic, refiner, CFG)
        assert tr.reason == ACCEPTED
        assert tr.refiner_calls == 1
        assert tr.final_program == rec.program_correct


def test_oracle_critic_definition(injected, store):
    rec = injected.records[0]
    critic, refiner = oracle_backends(rec, store)
    assert critic(rec.program_correct, "") == CriticVerdict(1.0)
    assert critic(rec.program_incorrect, "") == CriticVerdict(0.0, rec.loc)
    assert refiner(rec.program_incorrect, "", rec.loc) == rec.program_correct
    with pytest.raises(ValueError):
        OracleCritic(None, [])


def test_oracle_critic_locates_other_failures(fig_scene):
    good = "def execute_command(image) -> str:\n    return 'chair'"
    bad = "def execute_command(image) -> str:\n    return 'sofa'"
    critic = OracleCritic("chair", [fig_scene], program_correct=good)
    v = critic(bad, "")
    assert v.score == 0.0 and bad.encode()[v.loc.start_byte : v.loc.end_byte] == b"sofa"
    assert OracleRefiner(good)(bad, "", v.loc) == good


def test_accepting_critic_skips_refiner(fig_scene):
    calls = []

    def refiner(p, fb, loc):
        calls.append(p)
        return p

    tr = run_debug_loop("def execute_command(image) -> str:\n    return 'x'", [fig_scene], ConstantCritic(0.9), refiner, CFG)
    assert tr.reason == ACCEPTED and calls == [] and tr.iterations == 1


def test_rejecting_critic_runs_exactly_t_iterations(fig_scene):
    for t in (1, 3, 5):
        tr = run_debug_loop(
            "def execute_command(image) -> str:\n    return 'x'", [fig_scene], ConstantCritic(0.1), identity_refiner,
            DebugSessionConfig(max_steps=t),
        )
        assert tr.reason == MAX_STEPS and tr.iterations == t and tr.refiner_calls == t


def test_threshold_is_strict(fig_scene):
    tr = run_debug_loop("def execute_command(image) -> str:\n    return 'x'", [fig_scene], ConstantCritic(0.5), identity_refiner, CFG)
    assert tr.reason == MAX_STEPS


def test_missing_loc_defaults_to_body(fig_scene, fig_program):
    seen = []

    def refiner(p, fb, loc):
        seen.append(loc)
        return p

    run_debug_loop(fig_program, [fig_scene], ConstantCritic(0.0), refiner, DebugSessionConfig(max_steps=1))
    assert seen == [body_span(parse(fig_program))]


def test_unparseable_program_still_reaches_critic(fig_scene):
    seen = []

    def critic(p, fb):
        seen.append(fb)
        return CriticVerdict(0.0)

    src = "def execute_command(image) -> str:\n    return ("
    tr = run_debug_loop(src, [fig_scene], critic, identity_refiner, DebugSessionConfig(max_steps=1))
    assert seen and "SyntaxError" in seen[0]
    assert tr.entries[0].loc == default_loc(src) == span_from_bytes(src, 0, len(src))


def _drifting_refiner(p, fb, loc):
    return "# comment\n" + p.replace("'x'", "'y'")


def test_containment_strict_keeps_program(fig_scene):
    src = "def execute_command(image) -> str:\n    return 'x'"
    tr = run_debug_loop(src, [fig_scene], ConstantCritic(0.0), _drifting_refiner, DebugSessionConfig(max_steps=2))
    assert all(e.contained is False for e in tr.entries)
    assert tr.final_program == src
    assert [e.program for e in tr.entries] == [src, src]


def test_containment_lenient_accepts_rewrite(fig_scene):
    src = "def execute_command(image) -> str:\n    return 'x'"
    cfg = DebugSessionConfig(max_steps=1, containment="lenient")
    tr = run_debug_loop(src, [fig_scene], ConstantCritic(0.0), _drifting_refiner, cfg)
    assert tr.final_program == _drifting_refiner(src, "", None)


def test_strict_containment_holds_for_every_accepted_refinement(injected, store):
    for rec in injected.records[:40]:
        critic, refiner = oracle_backends(rec, store)
        tr = run_debug_loop(rec.program_incorrect, store.get_many(rec.scene_ids), critic, refiner, CFG)
        for e in tr.entries:
            if e.refined_program is not None and e.contained:
                a, b = e.program.encode(), e.refined_program.encode()
                assert b[: e.loc.start_byte] == a[: e.loc.start_byte]
                assert b[len(b) - (len(a) - e.loc.end_byte) :] == a[e.loc.end_byte :]


def test_transcript_json(fig_scene):
    tr = run_debug_loop("def execute_command(image) -> str:\n    return 'x'", [fig_scene], ConstantCritic(0.2), identity_refiner, CFG)
    d = json.loads(tr.to_json())
    assert d["reason"] == MAX_STEPS and len(d["entries"]) == 3
    assert all(e["refined_program"] is not None for e in d["entries"])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=8), st.integers(1, 5))
def test_loop_bound(fig_scene, scores, t):
    it = iter(scores * 10)
    tr = run_debug_loop(
        "def execute_command(image) -> str:\n    return 'x'", [fig_scene],
        lambda p, fb: CriticVerdict(next(it)), identity_refiner, DebugSessionConfig(max_steps=t),
    )
    assert tr.iterations <= t
    for e in tr.entries:
        assert (e.refined_program is None) == (e.verdict.score > 0.5)


# ---------------------------------------------------------------- remote backends


@pytest.fixture
def oracle_server(injected):
    oracle = RecordOracle(injected.records)
    with MockServer(critic=oracle.critic, refine=oracle.refine) as server:
        yield server


def test_remote_loop_matches_oracle(oracle_server, injected, store):
    critic, refiner = RemoteCritic(oracle_server.url), RemoteRefiner(oracle_server.url)
    for rec in injected.records[:10]:
        assert critic(rec.program_incorrect, "fb") == CriticVerdict(0.0, rec.loc)
        assert critic(rec.program_correct, "fb") == CriticVerdict(1.0)
        tr = run_debug_loop(rec.program_incorrect, store.get_many(rec.scene_ids), critic, refiner, CFG)
        assert tr.reason == ACCEPTED and tr.final_program == rec.program_correct


def test_remote_half_score_rejected(fig_scene):
    server = MockServer(critic=lambda body: {"p_correct": 0.5}, refine=lambda body: {"program": body["program"]})
    with server:
        tr = run_debug_loop(
            "def execute_command(image) -> str:\n    return 'x'", [fig_scene],
            RemoteCritic(server.url), RemoteRefiner(server.url), CFG,
        )
    assert tr.reason == MAX_STEPS and tr.iterations == 3


def test_remote_marked_program_for_other_text_is_ignored():
    with MockServer(critic=lambda body: {"p_correct": 0.1, "marked_program": "<BUG>other<BUG/>"}) as server:
        assert RemoteCritic(server.url)("prog", "fb") == CriticVerdict(0.1)


def test_remote_malformed_critic(fig_scene):
    for body in ({"p_correct": "high"}, {"p_correct": 2.0}, {}, {"p_correct": True}, {"p_correct": 0.2, "marked_program": 3}):
        with MockServer(critic=lambda b, body=body: body) as server:
            with pytest.raises(MalformedResponseError):
                RemoteCritic(server.url)("p", "fb")


def test_remote_refiner_drift_is_contained(fig_scene):
    src = "def execute_command(image) -> str:\n    return 'x'"
    server = MockServer(critic=lambda b: {"p_correct": 0.0}, refine=lambda b: {"program": "# new\n" + b["program"]})
    with server:
        tr = run_debug_loop(src, [fig_scene], RemoteCritic(server.url), RemoteRefiner(server.url), DebugSessionConfig(max_steps=1))
    assert tr.entries[0].contained is False and tr.final_program == src


def test_transport_failure_aborts_with_partial_transcript(fig_scene):
    src = "def execute_command(image) -> str:\n    return 'x'"
    server = MockServer(critic=lambda b: {"p_correct": 0.0}, refine=lambda b: {"program": b["program"]})
    with server:
        critic = RemoteCritic(server.url)

        def flaky(p, fb):
            if flaky.calls == 1:
                server.fail_next = 1
            flaky.calls += 1
            return critic(p, fb)

        flaky.calls = 0
        with pytest.raises(DebugSessionAborted) as err:
            run_debug_loop(src, [fig_scene], flaky, RemoteRefiner(server.url), CFG)
    assert err.value.transcript.iterations == 1
    assert isinstance(err.value.cause, TransportError)
