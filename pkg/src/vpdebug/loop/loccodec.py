"""Text form of an error location: the span wrapped in ``<BUG>``/``<BUG/>``."""

from __future__ import annotations

from vpdebug.dsl.nodes import SourceSpan
from vpdebug.dsl.subtrees import check_span, span_from_bytes
from vpdebug.model.vocab import BUG_CLOSE, BUG_OPEN


class LocCodecError(ValueError):
    pass


def encode_loc(program: str, loc: SourceSpan) -> str:
    try:
        data = check_span(program, loc)
    except (IndexError, ValueError) as e:
        raise LocCodecError(f"invalid span: {e}") from None
    return (
        data[: loc.start_byte]
        + BUG_OPEN.encode()
        + data[loc.start_byte : loc.end_byte]
        + BUG_CLOSE.encode()
        + data[loc.end_byte :]
    ).decode("utf-8")


def decode_loc(marked: str) -> tuple[str, SourceSpan]:
    """Strip the single marker pair and return the clean program and its span."""
    n_open, n_close = marked.count(BUG_OPEN), marked.count(BUG_CLOSE)
    if n_open != 1 or n_close != 1:
        raise LocCodecError(f"expected one {BUG_OPEN}…{BUG_CLOSE} pair, found {n_open} open and {n_close} close markers")
    data = marked.encode("utf-8")
    i, j = data.index(BUG_OPEN.encode()), data.index(BUG_CLOSE.encode())
    if j < i:
        raise LocCodecError("close marker precedes open marker")
    inner = data[i + len(BUG_OPEN) : j]
    if not inner:
        raise LocCodecError("empty location")
    clean = (data[:i] + inner + data[j + len(BUG_CLOSE) :]).decode("utf-8")
    return clean, span_from_bytes(clean, i, i + len(inner))
