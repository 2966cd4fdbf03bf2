"""Subtree enumeration and byte-exact span splicing."""

from __future__ import annotations

from dataclasses import dataclass

from vpdebug.dsl import nodes as n


@dataclass(frozen=True)
class SubtreeRef:
    node_path: tuple[int, ...]
    span: n.SourceSpan


def enumerate_subtrees(program: n.ProgramAst) -> list[SubtreeRef]:
    """Every statement and expression node below the root, in pre-order."""
    refs: list[SubtreeRef] = []

    def visit(node: n.Node, path: tuple[int, ...]):
        if path and isinstance(node, (n.Stmt, n.Expr)):
            refs.append(SubtreeRef(path, node.span))
        for i, child in enumerate(n.iter_children(node)):
            visit(child, path + (i,))

    visit(program.root, ())
    return refs


def resolve(program: n.ProgramAst, path: tuple[int, ...]) -> n.Node:
    node: n.Node = program.root
    for i in path:
        node = list(n.iter_children(node))[i]
    return node


def span_text(source: str, span: n.SourceSpan) -> str:
    return source.encode("utf-8")[span.start_byte : span.end_byte].decode("utf-8")


def line_range_span(source: str, first_line: int, last_line: int) -> n.SourceSpan:
    """Span covering the non-indentation text of lines ``first_line..last_line``."""
    data = source.encode("utf-8")
    lines = data.split(b"\n")
    if not 1 <= first_line <= last_line <= len(lines):
        raise ValueError(f"line range {first_line}-{last_line} outside program")
    offset = sum(len(l) + 1 for l in lines[: first_line - 1])
    first = lines[first_line - 1]
    start = offset + len(first) - len(first.lstrip(b" \t"))
    end = sum(len(l) + 1 for l in lines[:last_line]) - 1
    return n.SourceSpan(start, end, first_line, last_line)


def check_span(source: str, span: n.SourceSpan) -> bytes:
    """Validate ``span`` against ``source`` and return the encoded source."""
    data = source.encode("utf-8")
    if span.end_byte > len(data):
        raise IndexError(f"span end {span.end_byte} beyond source length {len(data)}")
    for b in (span.start_byte, span.end_byte):
        if b < len(data) and (data[b] & 0xC0) == 0x80:
            raise ValueError(f"span boundary {b} splits a UTF-8 code point")
    if data[: span.start_byte].count(b"\n") + 1 != span.start_line:
        raise ValueError("span start_line does not match start_byte")
    if data[: span.end_byte - 1].count(b"\n") + 1 != span.end_line:
        raise ValueError("span end_line does not match end_byte")
    return data


def splice(source: str, span: n.SourceSpan, replacement: str) -> str:
    """Replace the bytes under ``span`` with ``replacement``."""
    data = check_span(source, span)
    return (data[: span.start_byte] + replacement.encode("utf-8") + data[span.end_byte :]).decode("utf-8")


def differs_only_within(old: str, new: str, span: n.SourceSpan) -> bool:
    """True if ``new`` equals ``old`` outside ``span`` (prefix and suffix kept)."""
    a, b = old.encode("utf-8"), new.encode("utf-8")
    suffix = a[span.end_byte :]
    return (
        len(b) >= span.start_byte + len(suffix)
        and b[: span.start_byte] == a[: span.start_byte]
        and b[len(b) - len(suffix) :] == suffix
    )


def body_span(program: n.ProgramAst) -> n.SourceSpan:
    body = program.root.body
    return n.SourceSpan(body[0].span.start_byte, body[-1].span.end_byte, body[0].span.start_line, body[-1].span.end_line)


def span_from_bytes(source: str, start: int, end: int) -> n.SourceSpan:
    """Build a span for byte range ``[start, end)`` with its line numbers filled in."""
    data = source.encode("utf-8")
    if not 0 <= start < end <= len(data):
        raise ValueError(f"byte range [{start}, {end}) invalid for source of {len(data)} bytes")
    span = n.SourceSpan(start, end, data[:start].count(b"\n") + 1, data[: end - 1].count(b"\n") + 1)
    check_span(source, span)
    return span
