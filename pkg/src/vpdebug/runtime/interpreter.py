"""Tree-walking interpreter for DSL programs with a line-stepping tracer.

Values are plain Python objects (str, int, list, ...) plus the world API
types. Only whitelisted builtins, methods and API names are reachable, and
every run is bounded by a statement step limit and an expression-operation
budget, so injected programs with infinite loops still terminate.
"""

from __future__ import annotations

import ast as _pyast
import operator
from typing import Any, Optional, Sequence, Union

from vpdebug.dsl import nodes as n
from vpdebug.dsl.parser import DslSyntaxError, parse
from vpdebug.runtime.trace import (
    ExecutionOutcome,
    TraceEvent,
    VarChange,
    render_result,
    render_value,
)
from vpdebug.world.api import (
    API_FUNCTIONS,
    UNSUPPORTED_FUNCTIONS,
    UNSUPPORTED_METHODS,
    Image,
    ImagePatch,
)
from vpdebug.world.scene import SceneGraph

DEFAULT_STEP_LIMIT = 10_000
OP_BUDGET_PER_STEP = 100
MAX_CALL_DEPTH = 100
MAX_SEQUENCE = 1_000_000


class StepLimitExceeded(Exception):
    pass


class UnsupportedAPIError(Exception):
    pass


# -------------------------------------------------------------- sandboxing

_SAFE_METHODS = {
    str: {"lower", "upper", "strip", "lstrip", "rstrip", "split", "join", "replace", "startswith",
          "endswith", "count", "find", "index", "capitalize", "title", "isdigit", "isalpha",
          "isnumeric"},
    list: {"append", "extend", "insert", "pop", "remove", "index", "count", "sort", "reverse",
           "copy", "clear"},
    dict: {"get", "keys", "values", "items", "pop", "update", "setdefault", "copy"},
    tuple: {"count", "index"},
    set: {"add", "update", "union", "intersection", "difference", "issubset", "issuperset"},
    float: {"is_integer"},
}


def _range(*args):
    r = range(*args)
    if len(r) > MAX_SEQUENCE:
        raise OverflowError("range too large")
    return r


def _print(*args, **kwargs):
    return None


BUILTINS = {
    "len": len, "str": str, "int": int, "float": float, "bool": bool, "list": list,
    "tuple": tuple, "dict": dict, "set": set, "range": _range, "sorted": sorted, "min": min,
    "max": max, "sum": sum, "abs": abs, "round": round, "enumerate": enumerate, "zip": zip,
    "any": any, "all": all, "reversed": reversed, "print": _print,
}

_BINOPS = {
    "+": operator.add, "-": operator.sub, "*": operator.mul, "/": operator.truediv,
    "//": operator.floordiv, "%": operator.mod, "**": operator.pow,
}

_CMPOPS = {
    "<": operator.lt, ">": operator.gt, "==": operator.eq, "!=": operator.ne,
    "<=": operator.le, ">=": operator.ge,
    "in": lambda a, b: a in b, "not in": lambda a, b: a not in b,
    "is": operator.is_, "is not": operator.is_not,
}


def _type_name(value) -> str:
    return type(value).__name__


def _no_attribute(obj, attr):
    return AttributeError(f"'{_type_name(obj)}' object has no attribute '{attr}'")


def safe_getattr(obj, attr: str):
    if isinstance(obj, ImagePatch):
        if attr in ImagePatch.API_ATTRS:
            return getattr(obj, attr)
        if attr in UNSUPPORTED_METHODS:
            raise UnsupportedAPIError(f"ImagePatch.{attr} is not supported by the scene-graph backend")
        raise _no_attribute(obj, attr)
    for typ, names in _SAFE_METHODS.items():
        if type(obj) is typ and attr in names:
            return getattr(obj, attr)
    raise _no_attribute(obj, attr)


def _guarded_binop(op: str, a, b):
    if op == "**" and isinstance(a, int) and isinstance(b, int) and abs(b) > 10_000 and abs(a) > 1:
        raise OverflowError("exponent too large")
    if op == "*":
        for seq, k in ((a, b), (b, a)):
            if isinstance(seq, (str, list, tuple)) and isinstance(k, int) and len(seq) * k > MAX_SEQUENCE:
                raise OverflowError("repetition result too large")
    return _BINOPS[op](a, b)


# ------------------------------------------------------------ control flow


class _Break(Exception):
    pass


class _Continue(Exception):
    pass


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class Closure:
    """A DSL lambda, callable from both DSL code and Python builtins."""

    def __init__(self, node: n.Lambda, scopes: list, interp: "_Run"):
        self.node = node
        self.scopes = scopes
        self.interp = interp

    def __call__(self, *args, **kwargs):
        params = self.node.params
        if kwargs:
            raise TypeError("<lambda>() got an unexpected keyword argument")
        if len(args) != len(params):
            raise TypeError(f"<lambda>() takes {len(params)} positional argument{'s' if len(params) != 1 else ''} but {len(args)} were given")
        interp = self.interp
        interp.depth += 1
        try:
            if interp.depth > MAX_CALL_DEPTH:
                raise RecursionError("maximum recursion depth exceeded")
            interp.tick()
            return interp.eval(self.node.body, self.scopes + [dict(zip(params, args))])
        finally:
            interp.depth -= 1

    def __repr__(self):
        return "<function <lambda>>"


def _assigned_names(func: n.FunctionDef) -> set[str]:
    names = set(func.params)

    def targets(t):
        if isinstance(t, n.Name):
            names.add(t.id)
        elif isinstance(t, (n.TupleLit, n.ListLit)):
            for e in t.elts:
                targets(e)

    for node in n.walk(func):
        if isinstance(node, (n.Assign, n.AugAssign, n.For)):
            targets(node.target)
    return names


class _Run:
    def __init__(self, program: n.ProgramAst, step_limit: int):
        self.func = program.root
        self.lines = program.source.split("\n")
        self.step_limit = step_limit
        self.op_budget = step_limit * OP_BUDGET_PER_STEP
        self.ops = 0
        self.steps = 0
        self.depth = 0
        self.locals: dict[str, Any] = {}
        self.local_names = _assigned_names(self.func)
        self.events: list[TraceEvent] = []
        self.snapshot: dict[str, str] = {}
        self.current_line = self.func.span.start_line
        self._fstring_cache: dict = {}

    # -- tracing ----------------------------------------------------------

    def source_line(self, line_no: int) -> str:
        return self.lines[line_no - 1].rstrip("\r") if 0 < line_no <= len(self.lines) else ""

    def emit(self, kind: str, line_no: int, **extra):
        current = {k: render_value(v) for k, v in self.locals.items()}
        changes = []
        for name, text in current.items():
            if name not in self.snapshot:
                changes.append(VarChange("new", name, text))
            elif self.snapshot[name] != text:
                changes.append(VarChange("modified", name, text))
        self.snapshot = current
        self.events.append(TraceEvent(kind, line_no, self.source_line(line_no), tuple(changes), **extra))

    def step(self, node: n.Node):
        self.current_line = node.span.start_line
        if self.steps >= self.step_limit:
            raise StepLimitExceeded(f"step limit of {self.step_limit} statements exceeded")
        self.steps += 1
        self.emit("line", self.current_line)

    def tick(self):
        self.ops += 1
        if self.ops > self.op_budget:
            raise StepLimitExceeded(f"operation budget of {self.op_budget} exceeded")

    # -- entry ------------------------------------------------------------

    def run(self, args: Sequence[Any]) -> ExecutionOutcome:
        func = self.func
        images = [a for a in args if isinstance(a, Image)]
        for a in args:
            if isinstance(a, list):
                images.extend(x for x in a if isinstance(x, Image))
        value = None
        exception = None
        if len(func.params) != len(args):
            exception = (
                f"TypeError: {func.name}() takes {len(func.params)} positional argument"
                f"{'s' if len(func.params) != 1 else ''} but {len(args)} were given"
            )
            self.emit("exception", func.span.start_line, exception_text=exception)
        else:
            self.locals.update(zip(func.params, args))
            self.snapshot = {k: render_value(v) for k, v in self.locals.items()}
            self.events.append(TraceEvent("call", func.span.start_line, self.source_line(func.span.start_line)))
            try:
                try:
                    self.exec_block(func.body)
                except _Return as r:
                    value = r.value
                self.emit("return", self.current_line, return_value=render_value(value))
            except (_Break, _Continue):
                exception = "SyntaxError: 'break' outside loop"
                self.emit("exception", self.current_line, exception_text=exception)
            except Exception as e:  # program errors surface in the trace
                exception = f"{_type_name(e)}: {e}" if str(e) else _type_name(e)
                self.emit("exception", self.current_line, exception_text=exception)
        faults = tuple(f for img in images for f in img.faults)
        if exception is not None:
            return ExecutionOutcome(None, exception, tuple(self.events), self.steps, None, faults)
        return ExecutionOutcome(render_result(value), None, tuple(self.events), self.steps, value, faults)

    # -- statements -------------------------------------------------------

    def exec_block(self, body):
        for stmt in body:
            self.exec_stmt(stmt)

    def exec_stmt(self, s: n.Stmt):
        self.step(s)
        if isinstance(s, n.Assign):
            self.assign(s.target, self.eval(s.value))
        elif isinstance(s, n.AugAssign):
            current = self.eval(s.target)
            self.assign(s.target, _guarded_binop(s.op, current, self.eval(s.value)))
        elif isinstance(s, n.ExprStmt):
            self.eval(s.value)
        elif isinstance(s, n.Return):
            raise _Return(None if s.value is None else self.eval(s.value))
        elif isinstance(s, n.If):
            if self.eval(s.test):
                self.exec_block(s.body)
            elif s.orelse:
                self.exec_block(s.orelse)
        elif isinstance(s, n.For):
            iterator = iter(self.eval(s.iter))
            first = True
            while True:
                if not first:
                    self.step(s)
                first = False
                try:
                    item = next(iterator)
                except StopIteration:
                    break
                self.assign(s.target, item)
                try:
                    self.exec_block(s.body)
                except _Break:
                    break
                except _Continue:
                    continue
        elif isinstance(s, n.While):
            first = True
            while True:
                if not first:
                    self.step(s)
                first = False
                if not self.eval(s.test):
                    break
                try:
                    self.exec_block(s.body)
                except _Break:
                    break
                except _Continue:
                    continue
        elif isinstance(s, n.Break):
            raise _Break()
        elif isinstance(s, n.Continue):
            raise _Continue()
        elif isinstance(s, n.Pass):
            pass
        else:  # pragma: no cover - parser never produces other statements
            raise TypeError(f"unknown statement {s.kind}")

    def assign(self, target: n.Expr, value, scope: Optional[dict] = None):
        if isinstance(target, n.Name):
            (self.locals if scope is None else scope)[target.id] = value
        elif isinstance(target, (n.TupleLit, n.ListLit)):
            try:
                items = list(iter(value))
            except TypeError:
                raise TypeError(f"cannot unpack non-iterable {_type_name(value)} object") from None
            k = len(target.elts)
            if len(items) > k:
                raise ValueError(f"too many values to unpack (expected {k})")
            if len(items) < k:
                raise ValueError(f"not enough values to unpack (expected {k}, got {len(items)})")
            for t, v in zip(target.elts, items):
                self.assign(t, v, scope)
        elif isinstance(target, n.Subscript):
            obj = self.eval(target.value)
            index = self.eval_index(target.index)
            if not isinstance(obj, (list, dict)):
                raise TypeError(f"'{_type_name(obj)}' object does not support item assignment")
            obj[index] = value
        elif isinstance(target, n.Attribute):
            obj = self.eval(target.value)
            raise AttributeError(f"cannot set attribute '{target.attr}' on '{_type_name(obj)}' object")
        else:  # pragma: no cover - parser validates targets
            raise TypeError(f"cannot assign to {target.kind}")

    # -- expressions ------------------------------------------------------

    def lookup(self, name: str, scopes: list):
        for scope in reversed(scopes):
            if name in scope:
                return scope[name]
        if name in self.locals:
            return self.locals[name]
        if name in self.local_names:
            raise UnboundLocalError(f"local variable '{name}' referenced before assignment")
        if name in API_FUNCTIONS:
            return API_FUNCTIONS[name]
        if name in BUILTINS:
            return BUILTINS[name]
        if name in UNSUPPORTED_FUNCTIONS:
            raise UnsupportedAPIError(f"{name} is not supported by the scene-graph backend")
        raise NameError(f"name '{name}' is not defined")

    def eval_index(self, index, scopes=()):
        if isinstance(index, n.Slice):
            parts = [None if x is None else self.eval(x, scopes) for x in (index.lower, index.upper, index.step)]
            return slice(*parts)
        return self.eval(index, scopes)

    def eval(self, e: n.Expr, scopes: Union[list, tuple] = ()):
        scopes = list(scopes)
        if isinstance(e, n.Name):
            return self.lookup(e.id, scopes)
        if isinstance(e, n.Constant):
            return e.value
        if isinstance(e, n.Attribute):
            return safe_getattr(self.eval(e.value, scopes), e.attr)
        if isinstance(e, n.Call):
            func = self.eval(e.func, scopes)
            args = [self.eval(a, scopes) for a in e.args]
            kwargs = {k.arg: self.eval(k.value, scopes) for k in e.keywords}
            if not callable(func):
                raise TypeError(f"'{_type_name(func)}' object is not callable")
            self.tick()
            return func(*args, **kwargs)
        if isinstance(e, n.Subscript):
            obj = self.eval(e.value, scopes)
            return obj[self.eval_index(e.index, scopes)]
        if isinstance(e, n.BinOp):
            return _guarded_binop(e.op, self.eval(e.left, scopes), self.eval(e.right, scopes))
        if isinstance(e, n.UnaryOp):
            v = self.eval(e.operand, scopes)
            if e.op == "not":
                return not v
            return -v if e.op == "-" else +v
        if isinstance(e, n.BoolOp):
            v = None
            for part in e.values:
                v = self.eval(part, scopes)
                if (e.op == "and" and not v) or (e.op == "or" and v):
                    return v
            return v
        if isinstance(e, n.Compare):
            left = self.eval(e.left, scopes)
            for op, comp in zip(e.ops, e.comparators):
                right = self.eval(comp, scopes)
                if not _CMPOPS[op](left, right):
                    return False
                left = right
            return True
        if isinstance(e, n.IfExp):
            return self.eval(e.body, scopes) if self.eval(e.test, scopes) else self.eval(e.orelse, scopes)
        if isinstance(e, n.Lambda):
            return Closure(e, scopes, self)
        if isinstance(e, n.ListLit):
            return [self.eval(x, scopes) for x in e.elts]
        if isinstance(e, n.TupleLit):
            return tuple(self.eval(x, scopes) for x in e.elts)
        if isinstance(e, n.DictLit):
            return {self.eval(k, scopes): self.eval(v, scopes) for k, v in zip(e.keys, e.values)}
        if isinstance(e, n.ListComp):
            out: list = []
            self.comprehend(e, 0, scopes + [{}], out)
            return out
        if isinstance(e, n.FormattedString):
            pieces = []
            for part in e.parts:
                if isinstance(part, str):
                    pieces.append(self.fstring_literal(e, part))
                else:
                    pieces.append(format(self.eval(part, scopes)))
            return "".join(pieces)
        raise TypeError(f"cannot evaluate {e.kind}")  # pragma: no cover

    def comprehend(self, e: n.ListComp, level: int, scopes: list, out: list):
        gen = e.generators[level]
        inner = scopes[-1]
        for item in self.eval(gen.iter, scopes if level else scopes[:-1]):
            self.tick()
            self.assign(gen.target, item, inner)
            if all(self.eval(c, scopes) for c in gen.ifs):
                if level + 1 < len(e.generators):
                    self.comprehend(e, level + 1, scopes, out)
                else:
                    out.append(self.eval(e.elt, scopes))
                    if len(out) > MAX_SEQUENCE:
                        raise OverflowError("list comprehension too large")

    def fstring_literal(self, e: n.FormattedString, part: str) -> str:
        key = (e.prefix, e.quote, part)
        if key not in self._fstring_cache:
            text = part.replace("{{", "{").replace("}}", "}")
            if "r" not in e.prefix.lower():
                text = _pyast.literal_eval(e.quote + text + e.quote)
            self._fstring_cache[key] = text
        return self._fstring_cache[key]


def _bind_scenes(scenes: Sequence[SceneGraph]) -> list:
    images = [Image(s) for s in scenes]
    if len(images) == 1:
        return [images[0]]
    return [images]


def execute(
    program: Union[str, n.ProgramAst],
    scenes: Sequence[SceneGraph],
    step_limit: int = DEFAULT_STEP_LIMIT,
) -> ExecutionOutcome:
    """Run ``execute_command`` on the scenes and record its trace.

    A single scene binds the ``image`` parameter to one image; several
    scenes bind it to a list. Parse failures raise ``DslSyntaxError``;
    runtime errors are captured in the outcome.
    """
    ast = parse(program) if isinstance(program, str) else program
    return _Run(ast, step_limit).run(_bind_scenes(scenes))


def syntax_error_outcome(source: str, err: DslSyntaxError) -> ExecutionOutcome:
    lines = source.split("\n")
    line_no = min(max(err.line_no, 1), max(len(lines), 1))
    text = f"SyntaxError: {err}"
    event = TraceEvent("exception", line_no, lines[line_no - 1] if lines else "", exception_text=text)
    return ExecutionOutcome(None, text, (event,), 0)


def execute_or_syntax_error(
    program: str, scenes: Sequence[SceneGraph], step_limit: int = DEFAULT_STEP_LIMIT
) -> ExecutionOutcome:
    """Like ``execute`` but unparseable programs yield a synthetic SyntaxError outcome."""
    try:
        ast = parse(program)
    except DslSyntaxError as err:
        return syntax_error_outcome(program, err)
    return execute(ast, scenes, step_limit)
