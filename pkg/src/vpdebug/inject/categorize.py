"""Static classification of injected errors by AST diff plus scope analysis."""

from __future__ import annotations

from dataclasses import fields
from typing import Optional

from vpdebug.dsl import nodes as n
from vpdebug.dsl.parser import DslSyntaxError, parse
from vpdebug.runtime.interpreter import BUILTINS
from vpdebug.world.api import API_FUNCTIONS

UNDEFINED_NAME = "undefined-name"
API_CALL_CHANGE = "api-call-change"
LITERAL_CHANGE = "literal-change"
CONTROL_FLOW_CHANGE = "control-flow-change"
OPERATOR_CHANGE = "operator-change"
OTHER = "other"
CATEGORIES = (UNDEFINED_NAME, API_CALL_CHANGE, LITERAL_CHANGE, CONTROL_FLOW_CHANGE, OPERATOR_CHANGE, OTHER)

# checked in this order; the first category any differing pair falls in wins
_PRIORITY = (CONTROL_FLOW_CHANGE, API_CALL_CHANGE, OPERATOR_CHANGE, LITERAL_CHANGE, OTHER)

_CONTROL = (n.If, n.For, n.While, n.Break, n.Continue, n.Return, n.Pass, n.IfExp)
_OPERATORS = (n.BinOp, n.UnaryOp, n.BoolOp, n.Compare)


def _local_fields(node: n.Node) -> tuple:
    """Non-child field values (operator, name, literal value, ...)."""
    out = []
    for f in fields(node):
        if f.name == "span" or not f.compare:
            continue
        v = getattr(node, f.name)
        if isinstance(v, n.Node) or (isinstance(v, tuple) and any(isinstance(x, n.Node) for x in v)):
            continue
        if isinstance(node, n.FormattedString) and f.name == "parts":
            v = tuple(x for x in v if isinstance(x, str))
        out.append((f.name, v))
    return tuple(out)


def ast_diff(a: Optional[n.Node], b: Optional[n.Node], out: list) -> list:
    """Collect the outermost pairs of nodes that differ."""
    if a == b:
        return out
    if a is None or b is None or type(a) is not type(b) or _local_fields(a) != _local_fields(b):
        out.append((a, b))
        return out
    ca, cb = list(n.iter_children(a)), list(n.iter_children(b))
    if len(ca) != len(cb):
        out.append((a, b))
        return out
    for x, y in zip(ca, cb):
        ast_diff(x, y, out)
    return out


def _is_api_name(node) -> bool:
    return isinstance(node, n.Name) and node.id in API_FUNCTIONS


def _classify_pair(a, b) -> str:
    if isinstance(a, _CONTROL) or isinstance(b, _CONTROL):
        return CONTROL_FLOW_CHANGE
    if isinstance(a, (n.Call, n.Attribute, n.Keyword)) or isinstance(b, (n.Call, n.Attribute, n.Keyword)):
        return API_CALL_CHANGE
    if _is_api_name(a) or _is_api_name(b):
        return API_CALL_CHANGE
    if type(a) is type(b) and isinstance(a, _OPERATORS):
        return OPERATOR_CHANGE
    if isinstance(a, (n.Constant, n.FormattedString)) and isinstance(b, (n.Constant, n.FormattedString)):
        return LITERAL_CHANGE
    return OTHER


def _store_names(root: n.Node) -> tuple[list[tuple[str, int]], set[int], set[str]]:
    """Assignments as (name, end byte), ids of Name nodes in store position,
    and names bound by lambdas or comprehensions."""
    assigned: list[tuple[str, int]] = []
    store_ids: set[int] = set()
    local_bound: set[str] = set()

    def targets(t, end, bound=False):
        if isinstance(t, n.Name):
            store_ids.add(id(t))
            (local_bound.add(t.id) if bound else assigned.append((t.id, end)))
        elif isinstance(t, (n.TupleLit, n.ListLit)):
            for e in t.elts:
                targets(e, end, bound)

    for node in n.walk(root):
        if isinstance(node, (n.Assign, n.AugAssign)):
            targets(node.target, node.span.end_byte)
        elif isinstance(node, n.For):
            targets(node.target, node.target.span.end_byte)
        elif isinstance(node, n.Comprehension):
            targets(node.target, 0, bound=True)
        elif isinstance(node, n.Lambda):
            local_bound.update(node.params)
    return assigned, store_ids, local_bound


def undefined_names(program: n.ProgramAst, loc: n.SourceSpan) -> list[str]:
    """Names read inside ``loc`` with no binding that ends before ``loc`` starts."""
    root = program.root
    assigned, store_ids, local_bound = _store_names(root)
    known = set(root.params) | set(API_FUNCTIONS) | set(BUILTINS) | local_bound
    known.update(name for name, end in assigned if end <= loc.start_byte)
    out = []
    for node in n.walk(root):
        if (
            isinstance(node, n.Name)
            and id(node) not in store_ids
            and loc.contains(node.span)
            and node.id not in known
            and node.id not in out
        ):
            out.append(node.id)
    return out


def categorize_error(p_corr: str, p_inc: str, loc: n.SourceSpan, outcome_incorrect=None) -> str:
    """Category of the change from ``p_corr`` to ``p_inc`` at ``loc``.

    ``outcome_incorrect`` is accepted for interface symmetry; the result
    depends only on the two programs and the span.
    """
    try:
        a, b = parse(p_corr), parse(p_inc)
    except DslSyntaxError:
        return OTHER
    if undefined_names(b, loc):
        return UNDEFINED_NAME
    pairs = ast_diff(a.root, b.root, [])
    found = {_classify_pair(x, y) for x, y in pairs}
    for cat in _PRIORITY:
        if cat in found:
            return cat
    return OTHER
