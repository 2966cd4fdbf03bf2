"""Canonical pretty-printer: 4-space indent, literals kept as written."""

from __future__ import annotations

from vpdebug.dsl import nodes as n

# Binding strength, loosest first.
_LAMBDA, _IFEXP, _OR, _AND, _NOT, _CMP, _ARITH, _TERM, _UNARY, _POWER, _ATOM = range(11)

_BINOP_PREC = {"+": _ARITH, "-": _ARITH, "*": _TERM, "/": _TERM, "//": _TERM, "%": _TERM, "**": _POWER}


def _prec(e: n.Node) -> int:
    if isinstance(e, n.Lambda):
        return _LAMBDA
    if isinstance(e, n.IfExp):
        return _IFEXP
    if isinstance(e, n.BoolOp):
        return _OR if e.op == "or" else _AND
    if isinstance(e, n.UnaryOp):
        return _NOT if e.op == "not" else _UNARY
    if isinstance(e, n.Compare):
        return _CMP
    if isinstance(e, n.BinOp):
        return _BINOP_PREC[e.op]
    if isinstance(e, n.TupleLit) and not e.elts:
        return _ATOM
    if isinstance(e, n.TupleLit):
        return _LAMBDA - 1  # bare tuples always need parens inside other expressions
    return _ATOM


def expr_to_str(e: n.Node, ctx: int = _LAMBDA) -> str:
    """Render an expression; parenthesize when it binds looser than ``ctx``."""
    text = _expr(e)
    if _prec(e) < ctx:
        return f"({text})"
    return text


def _tuple(elts, bare: bool) -> str:
    inner = ", ".join(expr_to_str(x, _LAMBDA) for x in elts)
    if len(elts) == 1:
        inner += ","
    return inner if bare and elts else f"({inner})"


def _expr(e: n.Node) -> str:
    if isinstance(e, n.Name):
        return e.id
    if isinstance(e, n.Constant):
        return e.raw
    if isinstance(e, n.FormattedString):
        body = "".join(p if isinstance(p, str) else "{" + expr_to_str(p, _LAMBDA) + "}" for p in e.parts)
        return f"{e.prefix}{e.quote}{body}{e.quote}"
    if isinstance(e, n.Attribute):
        base = expr_to_str(e.value, _ATOM)
        if isinstance(e.value, n.Constant) and isinstance(e.value.value, int):
            base = f"({base})"
        return f"{base}.{e.attr}"
    if isinstance(e, n.Subscript):
        if isinstance(e.index, n.Slice):
            idx = _expr(e.index)
        else:
            idx = expr_to_str(e.index, _LAMBDA)
        return f"{expr_to_str(e.value, _ATOM)}[{idx}]"
    if isinstance(e, n.Slice):
        parts = [expr_to_str(x, _LAMBDA) if x is not None else "" for x in (e.lower, e.upper)]
        text = ":".join(parts)
        if e.step is not None:
            text += ":" + expr_to_str(e.step, _LAMBDA)
        return text
    if isinstance(e, n.Call):
        args = [expr_to_str(a, _LAMBDA) for a in e.args]
        args += [f"{k.arg}={expr_to_str(k.value, _LAMBDA)}" for k in e.keywords]
        return f"{expr_to_str(e.func, _ATOM)}({', '.join(args)})"
    if isinstance(e, n.BinOp):
        p = _BINOP_PREC[e.op]
        if e.op == "**":
            return f"{expr_to_str(e.left, _ATOM)} ** {expr_to_str(e.right, _UNARY)}"
        return f"{expr_to_str(e.left, p)} {e.op} {expr_to_str(e.right, p + 1)}"
    if isinstance(e, n.UnaryOp):
        if e.op == "not":
            return f"not {expr_to_str(e.operand, _NOT)}"
        return f"{e.op}{expr_to_str(e.operand, _UNARY)}"
    if isinstance(e, n.BoolOp):
        p = _prec(e)
        return f" {e.op} ".join(expr_to_str(v, p + 1) for v in e.values)
    if isinstance(e, n.Compare):
        out = [expr_to_str(e.left, _ARITH)]
        for op, c in zip(e.ops, e.comparators):
            out.append(f"{op} {expr_to_str(c, _ARITH)}")
        return " ".join(out)
    if isinstance(e, n.IfExp):
        return f"{expr_to_str(e.body, _OR)} if {expr_to_str(e.test, _OR)} else {expr_to_str(e.orelse, _LAMBDA)}"
    if isinstance(e, n.Lambda):
        params = ", ".join(e.params)
        head = f"lambda {params}" if params else "lambda"
        return f"{head}: {expr_to_str(e.body, _LAMBDA)}"
    if isinstance(e, n.ListLit):
        return "[" + ", ".join(expr_to_str(x, _LAMBDA) for x in e.elts) + "]"
    if isinstance(e, n.TupleLit):
        return _tuple(e.elts, bare=False)
    if isinstance(e, n.DictLit):
        items = (f"{expr_to_str(k, _LAMBDA)}: {expr_to_str(v, _LAMBDA)}" for k, v in zip(e.keys, e.values))
        return "{" + ", ".join(items) + "}"
    if isinstance(e, n.ListComp):
        out = [expr_to_str(e.elt, _LAMBDA)]
        for g in e.generators:
            out.append(f"for {_target(g.target)} in {expr_to_str(g.iter, _OR)}")
            out.extend(f"if {expr_to_str(c, _OR)}" for c in g.ifs)
        return "[" + " ".join(out) + "]"
    raise TypeError(f"cannot print {type(e).__name__}")


def _target(e: n.Expr) -> str:
    if isinstance(e, n.TupleLit) and e.elts:
        return _tuple(e.elts, bare=True)
    return expr_to_str(e, _ARITH)


def _testlist(e: n.Expr) -> str:
    if isinstance(e, n.TupleLit) and e.elts:
        return _tuple(e.elts, bare=True)
    return expr_to_str(e)


def _stmt(s: n.Stmt, indent: int, out: list[str]):
    pad = "    " * indent
    if isinstance(s, n.Assign):
        out.append(f"{pad}{_testlist(s.target)} = {_testlist(s.value)}")
    elif isinstance(s, n.AugAssign):
        out.append(f"{pad}{expr_to_str(s.target)} {s.op}= {_testlist(s.value)}")
    elif isinstance(s, n.ExprStmt):
        out.append(f"{pad}{_testlist(s.value)}")
    elif isinstance(s, n.Return):
        out.append(f"{pad}return" if s.value is None else f"{pad}return {_testlist(s.value)}")
    elif isinstance(s, (n.Break, n.Continue, n.Pass)):
        out.append(f"{pad}{s.kind}")
    elif isinstance(s, n.If):
        keyword = "if"
        while True:
            out.append(f"{pad}{keyword} {expr_to_str(s.test)}:")
            _block(s.body, indent + 1, out)
            if len(s.orelse) == 1 and isinstance(s.orelse[0], n.If):
                s = s.orelse[0]
                keyword = "elif"
                continue
            if s.orelse:
                out.append(f"{pad}else:")
                _block(s.orelse, indent + 1, out)
            break
    elif isinstance(s, n.For):
        out.append(f"{pad}for {_target(s.target)} in {_testlist(s.iter)}:")
        _block(s.body, indent + 1, out)
    elif isinstance(s, n.While):
        out.append(f"{pad}while {expr_to_str(s.test)}:")
        _block(s.body, indent + 1, out)
    else:
        raise TypeError(f"cannot print {type(s).__name__}")


def _block(body, indent: int, out: list[str]):
    for s in body:
        _stmt(s, indent, out)


def pretty_print(program) -> str:
    """Render a ``ProgramAst`` (or bare ``FunctionDef``) as canonical text."""
    root = program.root if isinstance(program, n.ProgramAst) else program
    head = f"def {root.name}({', '.join(root.params)})"
    if root.returns is not None:
        head += f" -> {root.returns}"
    out = [head + ":"]
    _block(root.body, 1, out)
    return "\n".join(out)


def node_to_str(node: n.Node) -> str:
    """Render any statement or expression node on its own."""
    if isinstance(node, n.Stmt):
        out: list[str] = []
        _stmt(node, 0, out)
        return "\n".join(out)
    return _expr(node)
