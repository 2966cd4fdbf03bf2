from vpdebug.dsl.nodes import ProgramAst, SourceSpan, iter_children, walk
from vpdebug.dsl.parser import DslSyntaxError, UnsupportedConstructError, parse
from vpdebug.dsl.printer import node_to_str, pretty_print
from vpdebug.dsl.subtrees import (
    SubtreeRef,
    body_span,
    differs_only_within,
    enumerate_subtrees,
    line_range_span,
    resolve,
    span_from_bytes,
    span_text,
    splice,
)

__all__ = [
    "DslSyntaxError",
    "ProgramAst",
    "SourceSpan",
    "SubtreeRef",
    "UnsupportedConstructError",
    "body_span",
    "differs_only_within",
    "enumerate_subtrees",
    "iter_children",
    "line_range_span",
    "node_to_str",
    "parse",
    "pretty_print",
    "resolve",
    "span_from_bytes",
    "span_text",
    "splice",
    "walk",
]
