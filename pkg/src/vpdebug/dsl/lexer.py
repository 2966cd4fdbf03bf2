"""Lossless lexer for the visual-program DSL.

``lex`` returns every byte of the input as a token, trivia included
(whitespace, comments, newlines), so that ``"".join(t.text for t in
lex(src)) == src`` always holds. The parser drops trivia; the model
tokenizer keeps it.
"""

from __future__ import annotations

import re
from typing import NamedTuple

NAME = "NAME"
NUMBER = "NUMBER"
STRING = "STRING"
OP = "OP"
NEWLINE = "NEWLINE"
WS = "WS"
COMMENT = "COMMENT"
ERROR = "ERROR"

TRIVIA = frozenset({WS, COMMENT})

KEYWORDS = frozenset(
    {
        "def", "return", "if", "elif", "else", "for", "in", "while", "break",
        "continue", "pass", "and", "or", "not", "is", "lambda", "None", "True",
        "False",
    }
)

# Python keywords the DSL rejects with an unsupported-construct error.
UNSUPPORTED_KEYWORDS = frozenset(
    {
        "class", "import", "from", "try", "except", "finally", "with", "yield",
        "global", "nonlocal", "del", "assert", "raise", "async", "await", "as",
    }
)

_OPERATORS = [
    "**=", "//=", "->", "**", "//", "==", "!=", "<=", ">=", "+=", "-=", "*=",
    "/=", "%=", "+", "-", "*", "/", "%", "<", ">", "=", "(", ")", "[", "]",
    "{", "}", ",", ":", ".", ";", "@", "&", "|", "^", "~",
]

_TOKEN_RE = re.compile(
    r"""
    (?P<NEWLINE>\r?\n)
  | (?P<WS>(?:[ \t\f]|\\\r?\n)+)
  | (?P<COMMENT>\#[^\r\n]*)
  | (?P<STRING>(?:[rR][fF]?|[fF][rR]?)?(?P<q>['"])(?:\\.|(?!(?P=q))[^\\\r\n])*(?P=q))
  | (?P<NUMBER>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<NAME>[^\W\d]\w*)
  | (?P<OP>"""
    + "|".join(re.escape(op) for op in _OPERATORS)
    + r""")
    """,
    re.VERBOSE,
)


class Token(NamedTuple):
    kind: str
    text: str
    start: int  # byte offset
    end: int  # byte offset, exclusive
    line: int  # 1-based
    col: int  # 1-based, in characters


class LexError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


def lex(source: str, tolerant: bool = False) -> list[Token]:
    """Split ``source`` into tokens covering it completely.

    In strict mode an unrecognized character raises ``LexError``; in
    tolerant mode it becomes a one-character ``ERROR`` token.
    """
    tokens: list[Token] = []
    ascii_only = source.isascii()
    pos = 0
    byte_pos = 0
    line = 1
    line_start = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            if not tolerant:
                raise LexError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
            kind, text = ERROR, source[pos]
        else:
            kind, text = m.lastgroup, m.group()
        width = len(text) if ascii_only else len(text.encode("utf-8"))
        tokens.append(Token(kind, text, byte_pos, byte_pos + width, line, pos - line_start + 1))
        pos += len(text)
        byte_pos += width
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos - (len(text) - text.rfind("\n") - 1)
    return tokens
