"""Lossless tokenizer for Java source.

Whitespace is dropped but every other byte of the input ends up in exactly
one token, comments included.  Spans are byte offsets into the UTF-8
encoding of the source.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import LexError

KEYWORDS = frozenset("""
    abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package
    private protected public return short static strictfp super switch
    synchronized this throw throws transient try void volatile while
""".split())

LITERAL_WORDS = frozenset({"true", "false", "null"})

PRIMITIVE_TYPES = frozenset({"boolean", "byte", "char", "short", "int", "long", "float", "double"})

# '>>', '>>>', '>>=' and '>>>=' are deliberately absent: the lexer emits
# single '>' tokens and the parser glues adjacent ones, so that generic
# closers like ``List<List<String>>`` stay one token per bracket.
OPERATORS = sorted("""
    <<= ... -> :: ++ -- && || == != <= >= += -= *= /= &= |= ^= %= <<
    ( ) { } [ ] ; , . @ = > < ! ~ ? : + - * / & | ^ %
""".split(), key=len, reverse=True)

_NUMBER = re.compile(r"""
      0[xX][0-9a-fA-F_]*(\.[0-9a-fA-F_]*)?([pP][+-]?\d+)?[lLfFdD]?
    | 0[bB][01_]+[lL]?
    | (\d[\d_]*\.?[\d_]*|\.\d[\d_]*)([eE][+-]?\d+)?[lLfFdD]?
""", re.VERBOSE)
_IDENT = re.compile(r"[A-Za-z_$\u0080-\uffff][A-Za-z0-9_$\u0080-\uffff]*")
_SPACE = re.compile(r"\s+")


@dataclass(frozen=True)
class SourceToken:
    index: int
    text: str
    kind: str  # keyword | identifier | punctuation | literal | comment
    span: tuple[int, int]
    line: int
    column: int

    @property
    def is_comment(self) -> bool:
        return self.kind == "comment"


class _Offsets:
    """Character index -> byte offset, cheap for ASCII input."""

    def __init__(self, source: str):
        self.ascii = source.isascii()
        if not self.ascii:
            table = [0]
            total = 0
            for ch in source:
                total += len(ch.encode("utf-8"))
                table.append(total)
            self.table = table

    def __call__(self, i: int) -> int:
        return i if self.ascii else self.table[i]


def _position(source: str, i: int) -> tuple[int, int]:
    line = source.count("\n", 0, i) + 1
    column = i - (source.rfind("\n", 0, i) + 1) + 1
    return line, column


def tokenize(source: str) -> list[SourceToken]:
    """Split ``source`` into tokens; raises :class:`LexError` on bad input."""
    tokens: list[SourceToken] = []
    to_byte = _Offsets(source)
    i, n = 0, len(source)
    line, line_start = 1, 0

    def emit(start, end, kind):
        text = source[start:end]
        tokens.append(SourceToken(
            len(tokens), text, kind, (to_byte(start), to_byte(end)), line, start - line_start + 1,
        ))

    while i < n:
        ch = source[i]
        if ch.isspace():
            m = _SPACE.match(source, i)
            chunk = m.group()
            newlines = chunk.count("\n")
            if newlines:
                line += newlines
                line_start = i + chunk.rfind("\n") + 1
            i = m.end()
            continue
        start = i
        if source.startswith("//", i):
            end = source.find("\n", i)
            end = n if end < 0 else end
            if end > i and source[end - 1] == "\r":
                end -= 1
            emit(start, end, "comment")
            i = end
        elif source.startswith("/*", i):
            end = source.find("*/", i + 2)
            if end < 0:
                raise LexError("unterminated block comment", *_position(source, i))
            end += 2
            emit(start, end, "comment")
            chunk = source[start:end]
            if "\n" in chunk:
                line += chunk.count("\n")
                line_start = start + chunk.rfind("\n") + 1
            i = end
        elif source.startswith('"""', i):
            end = source.find('"""', i + 3)
            while end > 0 and source[end - 1] == "\\":
                end = source.find('"""', end + 1)
            if end < 0:
                raise LexError("unterminated text block", *_position(source, i))
            end += 3
            emit(start, end, "literal")
            chunk = source[start:end]
            line += chunk.count("\n")
            if "\n" in chunk:
                line_start = start + chunk.rfind("\n") + 1
            i = end
        elif ch == '"' or ch == "'":
            j = i + 1
            while True:
                if j >= n or source[j] == "\n":
                    what = "string" if ch == '"' else "character"
                    raise LexError(f"unterminated {what} literal", *_position(source, i))
                if source[j] == "\\":
                    j += 2
                    continue
                if source[j] == ch:
                    break
                j += 1
            emit(start, j + 1, "literal")
            i = j + 1
        elif ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            m = _NUMBER.match(source, i)
            emit(start, m.end(), "literal")
            i = m.end()
        else:
            m = _IDENT.match(source, i)
            if m:
                word = m.group()
                if word in KEYWORDS:
                    kind = "keyword"
                elif word in LITERAL_WORDS:
                    kind = "literal"
                else:
                    kind = "identifier"
                emit(start, m.end(), kind)
                i = m.end()
                continue
            for op in OPERATORS:
                if source.startswith(op, i):
                    emit(start, i + len(op), "punctuation")
                    i += len(op)
                    break
            else:
                raise LexError(f"unexpected character {ch!r}", *_position(source, i))
    return tokens
