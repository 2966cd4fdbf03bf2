"""Recursive-descent parser for the visual-program DSL.

The accepted language is a Python subset: one top-level function whose body
uses assignment, if/elif/else, for, while, break/continue/pass, return and
the expression forms listed in ``docs/grammar.md``. Anything else fails with
``UnsupportedConstructError``; malformed input fails with ``DslSyntaxError``.
"""

from __future__ import annotations

import ast as _pyast
from typing import Iterable, Optional

from vpdebug.dsl import nodes as n
from vpdebug.dsl.lexer import (
    KEYWORDS,
    NAME,
    NEWLINE,
    NUMBER,
    OP,
    STRING,
    TRIVIA,
    UNSUPPORTED_KEYWORDS,
    LexError,
    Token,
    lex,
)

INDENT = "INDENT"
DEDENT = "DEDENT"
END = "END"

_COMPARE_OPS = {"<", ">", "==", "!=", "<=", ">="}
_AUG_OPS = {"+=", "-=", "*=", "/=", "//=", "%=", "**="}
_UNSUPPORTED_OPS = {"|": "bitwise operator", "&": "bitwise operator", "^": "bitwise operator",
                    "~": "bitwise operator", "@": "decorator or matrix operator",
                    ";": "semicolon-separated statements"}


class DslSyntaxError(SyntaxError):
    """Malformed program text. ``expected`` is the set of acceptable tokens."""

    def __init__(self, line: int, col: int, expected: Iterable[str], got: str = ""):
        self.line_no = line
        self.col = col
        self.expected = frozenset(expected)
        self.got = got
        super().__init__(f"line {line}, col {col}: expected {', '.join(sorted(self.expected))}")


class UnsupportedConstructError(DslSyntaxError):
    """Valid Python that falls outside the DSL subset."""

    def __init__(self, construct: str, line: int, col: int):
        self.construct = construct
        SyntaxError.__init__(self, f"line {line}, col {col}: unsupported construct: {construct}")
        self.line_no = line
        self.col = col
        self.expected = frozenset()
        self.got = construct


def _describe(tok: Token) -> str:
    if tok.kind in (OP,) or tok.text in KEYWORDS:
        return repr(tok.text)
    return tok.kind


def _layout(raw: list[Token], source: str) -> list[Token]:
    """Drop trivia and synthesize NEWLINE / INDENT / DEDENT / END tokens."""
    out: list[Token] = []
    indents = [0]
    depth = 0
    at_line_start = True
    lines = source.split("\n")
    last = None
    for tok in raw:
        if tok.kind in TRIVIA:
            continue
        if tok.kind == NEWLINE:
            if depth == 0 and not at_line_start:
                out.append(Token(NEWLINE, "", tok.start, tok.start, tok.line, tok.col))
                at_line_start = True
            continue
        if at_line_start and depth == 0:
            prefix = lines[tok.line - 1][: tok.col - 1]
            width = len(prefix.expandtabs(8))
            if width > indents[-1]:
                indents.append(width)
                out.append(Token(INDENT, "", tok.start, tok.start, tok.line, tok.col))
            else:
                while width < indents[-1]:
                    indents.pop()
                    out.append(Token(DEDENT, "", tok.start, tok.start, tok.line, tok.col))
                if width != indents[-1]:
                    raise DslSyntaxError(tok.line, tok.col, {"consistent indentation"}, "dedent")
            at_line_start = False
        if tok.kind == OP and tok.text in "([{":
            depth += 1
        elif tok.kind == OP and tok.text in ")]}":
            depth = max(0, depth - 1)
        out.append(tok)
        last = tok
    pos = last.end if last else 0
    line = (last.line if last else 1)
    col = (last.col + len(last.text)) if last else 1
    if not at_line_start:
        out.append(Token(NEWLINE, "", pos, pos, line, col))
    for _ in indents[1:]:
        out.append(Token(DEDENT, "", pos, pos, line, col))
    out.append(Token(END, "", pos, pos, line, col))
    return out


class _Parser:
    def __init__(self, source: str, tokens: list[Token], line_starts: list[int]):
        self.source = source
        self.src_bytes = source.encode("utf-8")
        self.toks = tokens
        self.i = 0
        self.line_starts = line_starts  # byte offset of each line start

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind in (OP, NAME)

    def at_kind(self, kind: str) -> bool:
        return self.tok.kind == kind

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def fail(self, expected: Iterable[str]):
        t = self.tok
        if t.kind == OP and t.text in _UNSUPPORTED_OPS:
            raise UnsupportedConstructError(_UNSUPPORTED_OPS[t.text], t.line, t.col)
        if t.kind == NAME and t.text in UNSUPPORTED_KEYWORDS:
            raise UnsupportedConstructError(f"'{t.text}' statement", t.line, t.col)
        raise DslSyntaxError(t.line, t.col, expected, _describe(t))

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail({repr(text)})
        return self.advance()

    def expect_kind(self, kind: str) -> Token:
        if not self.at_kind(kind):
            self.fail({kind})
        return self.advance()

    def expect_name(self) -> Token:
        t = self.tok
        if t.kind != NAME or t.text in KEYWORDS:
            self.fail({NAME})
        return self.advance()

    def span(self, first: Token, last_end: int, end_line: int) -> n.SourceSpan:
        return n.SourceSpan(first.start, last_end, first.line, end_line)

    def span_nodes(self, a, b) -> n.SourceSpan:
        return n.SourceSpan(a.span.start_byte, b.span.end_byte, a.span.start_line, b.span.end_line)

    def prev(self) -> Token:
        return self.toks[self.i - 1]

    def span_from(self, first: Token) -> n.SourceSpan:
        last = self.prev()
        return n.SourceSpan(first.start, last.end, first.line, last.line)

    def span_from_node(self, node: n.Node) -> n.SourceSpan:
        last = self.prev()
        return n.SourceSpan(node.span.start_byte, last.end, node.span.start_line, last.line)

    # -- program / statements ---------------------------------------------

    def program(self) -> n.FunctionDef:
        if self.at_kind(INDENT):
            self.fail({"'def'"})
        if self.at_kind(END):
            self.fail({"'def'"})
        func = self.funcdef()
        if self.at("def"):
            t = self.tok
            raise UnsupportedConstructError("multiple function definitions", t.line, t.col)
        if not self.at_kind(END):
            self.fail({END.lower() + " of input"})
        return func

    def funcdef(self) -> n.FunctionDef:
        first = self.tok
        if not self.at("def"):
            if first.kind == NAME and first.text in UNSUPPORTED_KEYWORDS:
                raise UnsupportedConstructError(f"'{first.text}' statement", first.line, first.col)
            self.fail({"'def'"})
        self.advance()
        name = self.expect_name().text
        self.expect("(")
        params = []
        while not self.at(")"):
            if self.at("*") or self.at("**"):
                t = self.tok
                raise UnsupportedConstructError("star parameters", t.line, t.col)
            if self.tok.kind != NAME or self.tok.text in KEYWORDS:
                self.fail({"')'", NAME})
            params.append(self.advance().text)
            if self.at("=") or self.at(":"):
                t = self.tok
                raise UnsupportedConstructError("parameter defaults or annotations", t.line, t.col)
            if not self.at(","):
                break
            self.advance()
        if not self.at(")"):
            self.fail({"')'", "','"} if params else {"')'", NAME})
        self.advance()
        returns = None
        if self.at("->"):
            self.advance()
            ann_first = self.tok
            self.test()
            returns = self.src_bytes[ann_first.start : self.prev().end].decode("utf-8")
        self.expect(":")
        body = self.suite()
        return n.FunctionDef(name, tuple(params), returns, body, span=self.span_stmt(first, body[-1]))

    def span_stmt(self, first: Token, last_node: n.Node) -> n.SourceSpan:
        return n.SourceSpan(first.start, last_node.span.end_byte, first.line, last_node.span.end_line)

    def suite(self) -> tuple[n.Stmt, ...]:
        if self.at_kind(NEWLINE):
            self.advance()
            if not self.at_kind(INDENT):
                self.fail({INDENT})
            self.advance()
            body = []
            while not self.at_kind(DEDENT):
                if self.at_kind(END):
                    self.fail({DEDENT})
                body.append(self.statement())
            self.advance()
            return tuple(body)
        return (self.simple_statement(),)

    def statement(self) -> n.Stmt:
        t = self.tok
        if t.kind == NAME:
            if t.text == "if":
                return self.if_stmt()
            if t.text == "for":
                return self.for_stmt()
            if t.text == "while":
                return self.while_stmt()
            if t.text == "def":
                raise UnsupportedConstructError("nested function definitions", t.line, t.col)
        if t.kind == INDENT:
            self.fail({"statement"})
        return self.simple_statement()

    def end_simple(self):
        if not self.at_kind(NEWLINE):
            self.fail({NEWLINE})
        self.advance()

    def simple_statement(self) -> n.Stmt:
        t = self.tok
        if t.kind == NAME and t.text in UNSUPPORTED_KEYWORDS:
            raise UnsupportedConstructError(f"'{t.text}' statement", t.line, t.col)
        if t.kind == NAME and t.text in ("elif", "else"):
            self.fail({"statement"})
        if self.at("return"):
            self.advance()
            value = None
            if not self.at_kind(NEWLINE):
                value = self.testlist()
            stmt = n.Return(value, span=self.span_from(t))
        elif self.at("break"):
            self.advance()
            stmt = n.Break(span=self.span_from(t))
        elif self.at("continue"):
            self.advance()
            stmt = n.Continue(span=self.span_from(t))
        elif self.at("pass"):
            self.advance()
            stmt = n.Pass(span=self.span_from(t))
        else:
            expr = self.testlist()
            if self.at("="):
                self.advance()
                self.check_target(expr)
                value = self.testlist()
                if self.at("="):
                    x = self.tok
                    raise UnsupportedConstructError("chained assignment", x.line, x.col)
                stmt = n.Assign(expr, value, span=self.span_from(t))
            elif self.tok.kind == OP and self.tok.text in _AUG_OPS:
                op = self.advance().text[:-1]
                if not isinstance(expr, (n.Name, n.Attribute, n.Subscript)):
                    raise UnsupportedConstructError("augmented assignment to this target", t.line, t.col)
                value = self.testlist()
                stmt = n.AugAssign(expr, op, value, span=self.span_from(t))
            elif self.at(":"):
                x = self.tok
                raise UnsupportedConstructError("annotated assignment", x.line, x.col)
            else:
                stmt = n.ExprStmt(expr, span=self.span_from(t))
        self.end_simple()
        return stmt

    def check_target(self, expr: n.Expr):
        if isinstance(expr, (n.Name, n.Attribute, n.Subscript)):
            return
        if isinstance(expr, (n.TupleLit, n.ListLit)) and expr.elts:
            for e in expr.elts:
                self.check_target(e)
            return
        line, col = self.position_of(expr.span.start_byte)
        raise DslSyntaxError(line, col, {"assignable target"}, expr.kind)

    def position_of(self, byte: int) -> tuple[int, int]:
        import bisect

        line = bisect.bisect_right(self.line_starts, byte)
        start = self.line_starts[line - 1]
        col = len(self.src_bytes[start:byte].decode("utf-8", errors="replace")) + 1
        return line, col

    def if_stmt(self) -> n.If:
        first = self.advance()  # 'if' or 'elif'
        test = self.test()
        self.expect(":")
        body = self.suite()
        orelse: tuple[n.Stmt, ...] = ()
        if self.at("elif"):
            orelse = (self.if_stmt(),)
        elif self.at("else"):
            self.advance()
            self.expect(":")
            orelse = self.suite()
        last = orelse[-1] if orelse else body[-1]
        return n.If(test, body, orelse, span=self.span_stmt(first, last))

    def for_stmt(self) -> n.For:
        first = self.advance()
        target = self.exprlist()
        self.check_target(target)
        self.expect("in")
        it = self.testlist()
        self.expect(":")
        body = self.suite()
        if self.at("else"):
            t = self.tok
            raise UnsupportedConstructError("for-else", t.line, t.col)
        return n.For(target, it, body, span=self.span_stmt(first, body[-1]))

    def while_stmt(self) -> n.While:
        first = self.advance()
        test = self.test()
        self.expect(":")
        body = self.suite()
        if self.at("else"):
            t = self.tok
            raise UnsupportedConstructError("while-else", t.line, t.col)
        return n.While(test, body, span=self.span_stmt(first, body[-1]))

    # -- expressions -------------------------------------------------------

    def testlist(self) -> n.Expr:
        first = self.test()
        if not self.at(","):
            return first
        elts = [first]
        while self.at(","):
            self.advance()
            if self.at_kind(NEWLINE) or self.at("=") or self.at(")") or self.tok.text in _AUG_OPS:
                break
            elts.append(self.test())
        return n.TupleLit(tuple(elts), parenthesized=False, span=self.span_from_node(first))

    def exprlist(self) -> n.Expr:
        first = self.arith()
        if not self.at(","):
            return first
        elts = [first]
        while self.at(","):
            self.advance()
            if self.at("in"):
                break
            elts.append(self.arith())
        return n.TupleLit(tuple(elts), parenthesized=False, span=self.span_from_node(first))

    def test(self) -> n.Expr:
        if self.at("lambda"):
            return self.lambda_expr()
        first = self.tok
        body = self.or_test()
        if self.at("if"):
            self.advance()
            cond = self.or_test()
            self.expect("else")
            orelse = self.test()
            return n.IfExp(cond, body, orelse, span=self.span_from(first))
        return body

    def lambda_expr(self) -> n.Lambda:
        first = self.advance()
        params = []
        while not self.at(":"):
            if self.at("*") or self.at("**"):
                t = self.tok
                raise UnsupportedConstructError("star parameters", t.line, t.col)
            params.append(self.expect_name().text)
            if self.at("="):
                t = self.tok
                raise UnsupportedConstructError("parameter defaults", t.line, t.col)
            if not self.at(","):
                break
            self.advance()
        self.expect(":")
        body = self.test()
        return n.Lambda(tuple(params), body, span=self.span_from(first))

    def or_test(self) -> n.Expr:
        first = self.tok
        left = self.and_test()
        if not self.at("or"):
            return left
        values = [left]
        while self.at("or"):
            self.advance()
            values.append(self.and_test())
        return n.BoolOp("or", tuple(values), span=self.span_from(first))

    def and_test(self) -> n.Expr:
        first = self.tok
        left = self.not_test()
        if not self.at("and"):
            return left
        values = [left]
        while self.at("and"):
            self.advance()
            values.append(self.not_test())
        return n.BoolOp("and", tuple(values), span=self.span_from(first))

    def not_test(self) -> n.Expr:
        if self.at("not"):
            first = self.advance()
            operand = self.not_test()
            return n.UnaryOp("not", operand, span=self.span_from(first))
        return self.comparison()

    def comp_op(self) -> Optional[str]:
        t = self.tok
        if t.kind == OP and t.text in _COMPARE_OPS:
            self.advance()
            return t.text
        if self.at("in"):
            self.advance()
            return "in"
        if self.at("not") and self.peek().text == "in":
            self.advance()
            self.advance()
            return "not in"
        if self.at("is"):
            self.advance()
            if self.at("not"):
                self.advance()
                return "is not"
            return "is"
        return None

    def comparison(self) -> n.Expr:
        first = self.tok
        left = self.arith()
        ops, comps = [], []
        while True:
            op = self.comp_op()
            if op is None:
                break
            ops.append(op)
            comps.append(self.arith())
        if not ops:
            return left
        return n.Compare(left, tuple(ops), tuple(comps), span=self.span_from(first))

    def arith(self) -> n.Expr:
        first = self.tok
        left = self.term()
        while self.tok.kind == OP and self.tok.text in ("+", "-"):
            op = self.advance().text
            right = self.term()
            left = n.BinOp(left, op, right, span=self.span_from(first))
        return left

    def term(self) -> n.Expr:
        first = self.tok
        left = self.factor()
        while self.tok.kind == OP and self.tok.text in ("*", "/", "//", "%"):
            op = self.advance().text
            right = self.factor()
            left = n.BinOp(left, op, right, span=self.span_from(first))
        return left

    def factor(self) -> n.Expr:
        if self.tok.kind == OP and self.tok.text in ("-", "+"):
            first = self.advance()
            operand = self.factor()
            return n.UnaryOp(first.text, operand, span=self.span_from(first))
        return self.power()

    def power(self) -> n.Expr:
        first = self.tok
        base = self.primary()
        if self.at("**"):
            self.advance()
            exponent = self.factor()
            return n.BinOp(base, "**", exponent, span=self.span_from(first))
        return base

    def primary(self) -> n.Expr:
        first = self.tok
        expr = self.atom()
        while True:
            if self.at("("):
                self.advance()
                args, kwargs = self.call_args()
                self.expect(")")
                expr = n.Call(expr, args, kwargs, span=self.span_from(first))
            elif self.at("."):
                self.advance()
                attr = self.expect_name().text
                expr = n.Attribute(expr, attr, span=self.span_from(first))
            elif self.at("["):
                self.advance()
                index = self.subscript()
                self.expect("]")
                expr = n.Subscript(expr, index, span=self.span_from(first))
            else:
                return expr

    def call_args(self):
        args: list[n.Expr] = []
        kwargs: list[n.Keyword] = []
        while not self.at(")"):
            t = self.tok
            if self.at("*") or self.at("**"):
                raise UnsupportedConstructError("star arguments", t.line, t.col)
            if t.kind == NAME and t.text not in KEYWORDS and self.peek().text == "=" and self.peek().kind == OP:
                self.advance()
                self.advance()
                value = self.test()
                kwargs.append(n.Keyword(t.text, value, span=self.span_from(t)))
            else:
                if kwargs:
                    raise DslSyntaxError(t.line, t.col, {"keyword argument"}, _describe(t))
                value = self.test()
                if self.at("for"):
                    x = self.tok
                    raise UnsupportedConstructError("generator expression", x.line, x.col)
                args.append(value)
            if not self.at(","):
                break
            self.advance()
        if not self.at(")"):
            self.fail({"')'", "','"})
        return tuple(args), tuple(kwargs)

    def subscript(self):
        first = self.tok
        lower = upper = step = None
        if not self.at(":"):
            lower = self.test()
            if not self.at(":"):
                if self.at(","):
                    t = self.tok
                    raise UnsupportedConstructError("multi-dimensional subscript", t.line, t.col)
                return lower
        self.expect(":")
        if not (self.at("]") or self.at(":")):
            upper = self.test()
        if self.at(":"):
            self.advance()
            if not self.at("]"):
                step = self.test()
        return n.Slice(lower, upper, step, span=self.span_from(first))

    def atom(self) -> n.Expr:
        t = self.tok
        if t.kind == NAME:
            if t.text in ("True", "False", "None"):
                self.advance()
                value = {"True": True, "False": False, "None": None}[t.text]
                return n.Constant(value, t.text, span=self.span_from(t))
            if t.text in UNSUPPORTED_KEYWORDS:
                raise UnsupportedConstructError(f"'{t.text}' expression", t.line, t.col)
            if t.text in KEYWORDS:
                self.fail({"expression"})
            self.advance()
            return n.Name(t.text, span=self.span_from(t))
        if t.kind == NUMBER:
            self.advance()
            raw = t.text
            if any(c in raw for c in ".eE"):
                value = float(raw)
            else:
                if len(raw) > 1 and raw.startswith("0"):
                    raise DslSyntaxError(t.line, t.col, {"decimal literal"}, raw)
                value = int(raw)
            return n.Constant(value, raw, span=self.span_from(t))
        if t.kind == STRING:
            self.advance()
            if self.at_kind(STRING):
                x = self.tok
                raise UnsupportedConstructError("implicit string concatenation", x.line, x.col)
            prefix = t.text[: len(t.text) - len(t.text.lstrip("rRfF"))]
            if "f" in prefix.lower():
                return self.fstring(t, prefix)
            return n.Constant(_pyast.literal_eval(t.text), t.text, span=self.span_from(t))
        if t.kind == OP:
            if t.text == "(":
                return self.paren()
            if t.text == "[":
                return self.list_display()
            if t.text == "{":
                return self.dict_display()
        self.fail({"expression"})

    def paren(self) -> n.Expr:
        first = self.advance()
        if self.at(")"):
            self.advance()
            return n.TupleLit((), span=self.span_from(first))
        inner = self.test()
        if self.at("for"):
            x = self.tok
            raise UnsupportedConstructError("generator expression", x.line, x.col)
        if self.at(","):
            elts = [inner]
            while self.at(","):
                self.advance()
                if self.at(")"):
                    break
                elts.append(self.test())
            self.expect(")")
            return n.TupleLit(tuple(elts), span=self.span_from(first))
        self.expect(")")
        return inner

    def list_display(self) -> n.Expr:
        first = self.advance()
        if self.at("]"):
            self.advance()
            return n.ListLit((), span=self.span_from(first))
        head = self.test()
        if self.at("for"):
            gens = []
            while self.at("for"):
                gfirst = self.advance()
                target = self.exprlist()
                self.check_target(target)
                self.expect("in")
                it = self.or_test()
                ifs = []
                while self.at("if"):
                    self.advance()
                    ifs.append(self.or_test())
                gens.append(n.Comprehension(target, it, tuple(ifs), span=self.span_from(gfirst)))
            self.expect("]")
            return n.ListComp(head, tuple(gens), span=self.span_from(first))
        elts = [head]
        while self.at(","):
            self.advance()
            if self.at("]"):
                break
            elts.append(self.test())
        self.expect("]")
        return n.ListLit(tuple(elts), span=self.span_from(first))

    def dict_display(self) -> n.Expr:
        first = self.advance()
        keys, values = [], []
        while not self.at("}"):
            if self.at("**"):
                t = self.tok
                raise UnsupportedConstructError("dict unpacking", t.line, t.col)
            k = self.test()
            if not self.at(":"):
                t = self.tok
                if self.at(",") or self.at("}"):
                    raise UnsupportedConstructError("set display", t.line, t.col)
                self.fail({"':'"})
            self.advance()
            v = self.test()
            if self.at("for"):
                t = self.tok
                raise UnsupportedConstructError("dict comprehension", t.line, t.col)
            keys.append(k)
            values.append(v)
            if not self.at(","):
                break
            self.advance()
        self.expect("}")
        return n.DictLit(tuple(keys), tuple(values), span=self.span_from(first))

    def fstring(self, tok: Token, prefix: str) -> n.FormattedString:
        quote = tok.text[len(prefix)]
        body = tok.text[len(prefix) + 1 : -1]
        body_byte = tok.start + len(tok.text[: len(prefix) + 1].encode("utf-8"))
        body_col = tok.col + len(prefix) + 1
        parts: list = []
        literal = []
        i = 0
        while i < len(body):
            c = body[i]
            if c == "{" and body.startswith("{{", i):
                literal.append("{{")
                i += 2
                continue
            if c == "}" and body.startswith("}}", i):
                literal.append("}}")
                i += 2
                continue
            if c == "}":
                raise DslSyntaxError(tok.line, body_col + i, {"'}}'"}, "'}'")
            if c == "{":
                if literal:
                    parts.append("".join(literal))
                    literal = []
                j = _match_brace(body, i)
                if j < 0:
                    raise DslSyntaxError(tok.line, body_col + i, {"'}'"}, "end of string")
                inner = body[i + 1 : j]
                for marker, what in (("!", "conversion in f-string"), (":", "format spec in f-string")):
                    k = _top_level_index(inner, marker)
                    if k >= 0 and not (marker == "!" and inner[k : k + 2] == "!="):
                        raise UnsupportedConstructError(what, tok.line, body_col + i + 1 + k)
                offset = body_byte + len(body[: i + 1].encode("utf-8"))
                parts.append(_parse_embedded(inner, offset, tok.line, body_col + i + 1))
                i = j + 1
                continue
            literal.append(c)
            i += 1
        if literal:
            parts.append("".join(literal))
        return n.FormattedString(prefix, quote, tuple(parts), span=self.span_from(tok))


def _match_brace(s: str, i: int) -> int:
    depth = 0
    quote = None
    for j in range(i, len(s)):
        c = s[j]
        if quote:
            if c == quote:
                quote = None
            continue
        if c in "'\"":
            quote = c
        elif c in "{[(":
            depth += 1
        elif c in "}])":
            depth -= 1
            if depth == 0:
                return j if c == "}" else -1
    return -1


def _top_level_index(s: str, ch: str) -> int:
    depth = 0
    quote = None
    for j, c in enumerate(s):
        if quote:
            if c == quote:
                quote = None
            continue
        if c in "'\"":
            quote = c
        elif c in "{[(":
            depth += 1
        elif c in "}])":
            depth -= 1
        elif c == ch and depth == 0:
            return j
    return -1


def _parse_embedded(text: str, byte_offset: int, line: int, col: int) -> n.Expr:
    try:
        raw = lex(text)
    except LexError as e:
        raise DslSyntaxError(line, col + e.col - 1, {"valid token"}) from None
    shifted = [
        Token(t.kind, t.text, t.start + byte_offset, t.end + byte_offset, line, t.col + col - 1)
        for t in raw
        if t.kind not in TRIVIA
    ]
    if not shifted:
        raise DslSyntaxError(line, col, {"expression"}, "'}'")
    if any(t.kind == NEWLINE for t in shifted):
        raise DslSyntaxError(line, col, {"'}'"}, NEWLINE)
    end = shifted[-1].end
    shifted.append(Token(END, "", end, end, line, shifted[-1].col + len(shifted[-1].text)))
    sub = _Parser(text, shifted, [0])
    expr = sub.test()
    if not sub.at_kind(END):
        sub.fail({"'}'"})
    return expr


def _line_starts(src_bytes: bytes) -> list[int]:
    starts = [0]
    idx = src_bytes.find(b"\n")
    while idx >= 0:
        starts.append(idx + 1)
        idx = src_bytes.find(b"\n", idx + 1)
    return starts


def parse(source: str) -> n.ProgramAst:
    """Parse program text into a ``ProgramAst`` with byte-offset spans."""
    try:
        raw = lex(source)
    except LexError as e:
        raise DslSyntaxError(e.line, e.col, {"valid token"}) from None
    tokens = _layout(raw, source)
    parser = _Parser(source, tokens, _line_starts(source.encode("utf-8")))
    return n.ProgramAst(parser.program(), source)
