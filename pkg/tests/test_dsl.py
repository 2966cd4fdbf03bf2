import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vpdebug.dsl import (
    DslSyntaxError,
    UnsupportedConstructError,
    differs_only_within,
    enumerate_subtrees,
    iter_children,
    parse,
    pretty_print,
    resolve,
    span_from_bytes,
    span_text,
    splice,
    walk,
)
from vpdebug.dsl import nodes as n

MINIMAL = "def execute_command(image) -> str:\n    return 'yes'"


def test_parse_three_statement_program(fig_program):
    src = (
        "def execute_command(image) -> str:\n"
        "    image_patch = ImagePatch(image)\n"
        "    return image_patch.simple_query('What item of furniture is not large?')"
    )
    ast = parse(src)
    assert ast.root.name == "execute_command"
    assert [type(s).__name__ for s in ast.root.body] == ["Assign", "Return"]
    assert len(parse(fig_program).root.body) == 3


def test_parse_minimal():
    ast = parse(MINIMAL)
    assert len(ast.root.body) == 1
    assert isinstance(ast.root.body[0], n.Return)


def test_syntax_error_reports_line_and_expected_set():
    with pytest.raises(DslSyntaxError) as err:
        parse("def f(:")
    assert err.value.line_no == 1
    assert "line 1, col" in str(err.value)
    assert "expected" in str(err.value)


@pytest.mark.parametrize(
    "body,construct",
    [
        ("    import os\n    return 'x'", "'import' statement"),
        ("    try:\n        x = 1\n    except:\n        pass\n    return 'x'", "'try' statement"),
        ("    class A:\n        pass\n    return 'x'", "'class' statement"),
        ("    x = (i for i in [1])\n    return 'x'", "generator expression"),
        ("    x = {1, 2}\n    return 'x'", "set display"),
        ("    def g():\n        return 1\n    return 'x'", "nested function"),
    ],
)
def test_unsupported_constructs_fail_loudly(body, construct):
    with pytest.raises(UnsupportedConstructError) as err:
        parse("def execute_command(image) -> str:\n" + body)
    assert "unsupported construct" in str(err.value)
    assert construct in str(err.value)


def test_two_functions_rejected():
    with pytest.raises(DslSyntaxError):
        parse(MINIMAL + "\ndef g(x):\n    return x")


def test_pretty_print_minimal_fixpoint():
    assert pretty_print(parse(MINIMAL)) == MINIMAL


def test_pretty_print_fig_program_is_byte_identical(fig_program):
    assert pretty_print(parse(fig_program)) == fig_program.rstrip("\n")


def test_pretty_print_list_comprehension_round_trip():
    src = (
        "def execute_command(image) -> str:\n"
        "    ps = [p for p in ImagePatch(image).find('cup') if p.horizontal_center > 10]\n"
        "    return str(len(ps))"
    )
    a = parse(src)
    assert parse(pretty_print(a)).root == a.root


def test_enumerate_subtrees_minimal():
    refs = enumerate_subtrees(parse(MINIMAL))
    assert [type(resolve(parse(MINIMAL), r.node_path)).__name__ for r in refs] == ["Return", "Constant"]


def test_enumerate_subtrees_contains_simple_query_call(fig_program):
    src = fig_program
    texts = [span_text(src, r.span) for r in enumerate_subtrees(parse(src))]
    assert "image_patch.simple_query('What item of furniture is not large?')" in texts


def test_subtree_refs_resolve_to_their_spans(pool):
    for entry in pool[:50]:
        ast = parse(entry.program)
        for ref in enumerate_subtrees(ast):
            assert resolve(ast, ref.node_path).span == ref.span


def test_child_spans_nested_and_siblings_disjoint(pool):
    for entry in pool:
        ast = parse(entry.program)
        for node in walk(ast.root):
            kids = list(iter_children(node))
            for k in kids:
                assert node.span.start_byte <= k.span.start_byte <= k.span.end_byte <= node.span.end_byte
            ordered = sorted(kids, key=lambda k: k.span.start_byte)
            for a, b in zip(ordered, ordered[1:]):
                assert a.span.end_byte <= b.span.start_byte


def test_splice_examples(fig_program):
    src = "def execute_command(image) -> str:\n    return 'a'"
    ast = parse(src)
    const = ast.root.body[0].value
    assert splice(src, const.span, "'b'").endswith("return 'b'")
    assert splice(src, const.span, "'a'") == src
    last = parse(fig_program).root.body[-1]
    out = splice(fig_program, last.span, "return 'no'")
    a, b = fig_program.split("\n"), out.split("\n")
    assert [i for i in range(len(a)) if a[i] != b[i]] == [3]


def test_splice_rejects_out_of_bounds():
    with pytest.raises((ValueError, IndexError)):
        splice(MINIMAL, n.SourceSpan(0, 10_000, 1, 2), "x")


def test_span_invariants():
    with pytest.raises(ValueError):
        n.SourceSpan(5, 5, 1, 1)
    with pytest.raises(ValueError):
        span_from_bytes("é", 0, 1)  # splits a code point


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_splice_containment_property(data):
    src = "def execute_command(image) -> str:\n    x = 'héllo wörld'\n    return x"
    raw = src.encode()
    ast = parse(src)
    ref = data.draw(st.sampled_from(enumerate_subtrees(ast)))
    repl = data.draw(st.text(st.characters(blacklist_categories=("Cs",)), max_size=12))
    out = splice(src, ref.span, repl).encode()
    assert out[: ref.span.start_byte] == raw[: ref.span.start_byte]
    assert out[len(out) - (len(raw) - ref.span.end_byte) :] == raw[ref.span.end_byte :]
    assert differs_only_within(src, out.decode(), ref.span)


def test_round_trip_over_corpus(pool, natural_pool):
    for entry in list(pool) + list(natural_pool):
        a = parse(entry.program)
        assert parse(pretty_print(a)).root == a.root, entry.id
