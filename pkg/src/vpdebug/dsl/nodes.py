"""AST node types for the visual-program DSL.

Every node carries a ``SourceSpan``. Spans are excluded from equality, so
``==`` on two trees is structural identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import ClassVar, Iterator, Optional, Union


@dataclass(frozen=True)
class SourceSpan:
    start_byte: int
    end_byte: int  # exclusive
    start_line: int
    end_line: int

    def __post_init__(self):
        if not 0 <= self.start_byte < self.end_byte:
            raise ValueError(f"invalid span [{self.start_byte}, {self.end_byte})")
        if self.start_line > self.end_line:
            raise ValueError("span start_line after end_line")

    def contains(self, other: "SourceSpan") -> bool:
        return self.start_byte <= other.start_byte and other.end_byte <= self.end_byte

    def to_dict(self) -> dict:
        return {
            "start_byte": self.start_byte,
            "end_byte": self.end_byte,
            "start_line": self.start_line,
            "end_line": self.end_line,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SourceSpan":
        return cls(d["start_byte"], d["end_byte"], d["start_line"], d["end_line"])


def _span() -> SourceSpan:
    return field(default=None, compare=False, repr=False)


class Node:
    kind: ClassVar[str] = "node"
    span: SourceSpan


class Stmt(Node):
    pass


class Expr(Node):
    pass


# ---------------------------------------------------------------- expressions


@dataclass(frozen=True)
class Name(Expr):
    kind: ClassVar[str] = "name"
    id: str
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Constant(Expr):
    """Literal str/int/float/bool/None. ``raw`` is the token text as written."""

    kind: ClassVar[str] = "constant"
    value: object
    raw: str
    span: SourceSpan = _span()


@dataclass(frozen=True)
class FormattedString(Expr):
    """f-string; ``parts`` alternates raw literal text and ``{expr}`` fields."""

    kind: ClassVar[str] = "formatted-string"
    prefix: str
    quote: str
    parts: tuple[Union[str, Expr], ...]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Attribute(Expr):
    kind: ClassVar[str] = "attribute-access"
    value: Expr
    attr: str
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Slice(Node):
    kind: ClassVar[str] = "slice"
    lower: Optional[Expr]
    upper: Optional[Expr]
    step: Optional[Expr]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Subscript(Expr):
    kind: ClassVar[str] = "subscript"
    value: Expr
    index: Union[Expr, Slice]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Keyword(Node):
    kind: ClassVar[str] = "keyword"
    arg: str
    value: Expr
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Call(Expr):
    kind: ClassVar[str] = "call"
    func: Expr
    args: tuple[Expr, ...]
    keywords: tuple[Keyword, ...]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class BinOp(Expr):
    kind: ClassVar[str] = "binary-op"
    left: Expr
    op: str
    right: Expr
    span: SourceSpan = _span()


@dataclass(frozen=True)
class UnaryOp(Expr):
    kind: ClassVar[str] = "unary-op"
    op: str  # '-', '+', 'not'
    operand: Expr
    span: SourceSpan = _span()


@dataclass(frozen=True)
class BoolOp(Expr):
    kind: ClassVar[str] = "bool-op"
    op: str  # 'and' | 'or'
    values: tuple[Expr, ...]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Compare(Expr):
    kind: ClassVar[str] = "comparison"
    left: Expr
    ops: tuple[str, ...]
    comparators: tuple[Expr, ...]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class IfExp(Expr):
    kind: ClassVar[str] = "conditional-expression"
    test: Expr
    body: Expr
    orelse: Expr
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Lambda(Expr):
    kind: ClassVar[str] = "lambda"
    params: tuple[str, ...]
    body: Expr
    span: SourceSpan = _span()


@dataclass(frozen=True)
class ListLit(Expr):
    kind: ClassVar[str] = "list"
    elts: tuple[Expr, ...]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class TupleLit(Expr):
    kind: ClassVar[str] = "tuple"
    elts: tuple[Expr, ...]
    parenthesized: bool = field(default=True, compare=False)
    span: SourceSpan = _span()


@dataclass(frozen=True)
class DictLit(Expr):
    kind: ClassVar[str] = "dict"
    keys: tuple[Expr, ...]
    values: tuple[Expr, ...]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Comprehension(Node):
    kind: ClassVar[str] = "comprehension"
    target: Expr
    iter: Expr
    ifs: tuple[Expr, ...]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class ListComp(Expr):
    kind: ClassVar[str] = "list-comprehension"
    elt: Expr
    generators: tuple[Comprehension, ...]
    span: SourceSpan = _span()


# ----------------------------------------------------------------- statements


@dataclass(frozen=True)
class Assign(Stmt):
    kind: ClassVar[str] = "assignment"
    target: Expr
    value: Expr
    span: SourceSpan = _span()


@dataclass(frozen=True)
class AugAssign(Stmt):
    kind: ClassVar[str] = "augmented-assignment"
    target: Expr
    op: str  # binary operator without '='
    value: Expr
    span: SourceSpan = _span()


@dataclass(frozen=True)
class ExprStmt(Stmt):
    kind: ClassVar[str] = "expression-statement"
    value: Expr
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Return(Stmt):
    kind: ClassVar[str] = "return"
    value: Optional[Expr]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class If(Stmt):
    kind: ClassVar[str] = "if"
    test: Expr
    body: tuple[Stmt, ...]
    orelse: tuple[Stmt, ...]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class For(Stmt):
    kind: ClassVar[str] = "for"
    target: Expr
    iter: Expr
    body: tuple[Stmt, ...]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class While(Stmt):
    kind: ClassVar[str] = "while"
    test: Expr
    body: tuple[Stmt, ...]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Break(Stmt):
    kind: ClassVar[str] = "break"
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Continue(Stmt):
    kind: ClassVar[str] = "continue"
    span: SourceSpan = _span()


@dataclass(frozen=True)
class Pass(Stmt):
    kind: ClassVar[str] = "pass"
    span: SourceSpan = _span()


@dataclass(frozen=True)
class FunctionDef(Node):
    kind: ClassVar[str] = "function-definition"
    name: str
    params: tuple[str, ...]
    returns: Optional[str]  # annotation text, verbatim
    body: tuple[Stmt, ...]
    span: SourceSpan = _span()


@dataclass(frozen=True)
class ProgramAst:
    """Parsed program: the root function plus the source it came from."""

    root: FunctionDef
    source: str = field(compare=False, repr=False)


def iter_children(node: Node) -> Iterator[Node]:
    """Yield direct child nodes in field order."""
    for f in fields(node):
        if f.name == "span":
            continue
        value = getattr(node, f.name)
        if isinstance(value, Node):
            yield value
        elif isinstance(value, tuple):
            for item in value:
                if isinstance(item, Node):
                    yield item


def walk(node: Node) -> Iterator[Node]:
    """Pre-order traversal including ``node`` itself."""
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(reversed(list(iter_children(current))))
