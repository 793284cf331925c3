"""Shared lexer for the textual model syntaxes.

All four file kinds use the same lexical rules: identifiers
[A-Za-z_][A-Za-z0-9_]*, double-quoted strings with backslash escapes,
decimal numbers, block/list punctuation and the `->` arrow. `#` starts a
comment that runs to the end of the line. Line and column are 1-based.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Token:
    type: str  # IDENT STRING NUMBER LBRACE RBRACE LBRACKET RBRACKET EQUALS COMMA ARROW EOF
    text: str
    value: object
    span: SourceSpan


class LexicalError(Exception):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(message)
        self.span = span


_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER_RE = re.compile(r"-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?")

_PUNCT = {
    "{": "LBRACE",
    "}": "RBRACE",
    "[": "LBRACKET",
    "]": "RBRACKET",
    "=": "EQUALS",
    ",": "COMMA",
}

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t", "r": "\r"}


def lex(source: str, file: str = "<input>") -> list[Token]:
    """Tokenize source, raising LexicalError on the first bad character."""
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    length = len(source)

    def span() -> SourceSpan:
        return SourceSpan(file, line, pos - line_start + 1)

    while pos < length:
        ch = source[pos]
        if ch == "\n":
            line += 1
            pos += 1
            line_start = pos
            continue
        if ch in " \t\r":
            pos += 1
            continue
        if ch == "#":
            while pos < length and source[pos] != "\n":
                pos += 1
            continue
        if ch == "-" and source.startswith("->", pos):
            tokens.append(Token("ARROW", "->", "->", span()))
            pos += 2
            continue
        if ch in _PUNCT:
            tokens.append(Token(_PUNCT[ch], ch, ch, span()))
            pos += 1
            continue
        if ch == '"':
            start_span = span()
            pos += 1
            parts: list[str] = []
            while True:
                if pos >= length or source[pos] == "\n":
                    raise LexicalError("unterminated string", start_span)
                c = source[pos]
                if c == '"':
                    pos += 1
                    break
                if c == "\\":
                    if pos + 1 >= length:
                        raise LexicalError("unterminated string", start_span)
                    escape = source[pos + 1]
                    if escape not in _ESCAPES:
                        raise LexicalError(
                            f"unknown escape sequence \\{escape}", start_span
                        )
                    parts.append(_ESCAPES[escape])
                    pos += 2
                    continue
                parts.append(c)
                pos += 1
            tokens.append(Token("STRING", '"..."', "".join(parts), start_span))
            continue
        match = _IDENT_RE.match(source, pos)
        if match:
            tokens.append(Token("IDENT", match.group(), match.group(), span()))
            pos = match.end()
            continue
        match = _NUMBER_RE.match(source, pos)
        if match:
            tokens.append(Token("NUMBER", match.group(), float(match.group()), span()))
            pos = match.end()
            continue
        raise LexicalError(f"unexpected character {ch!r}", span())

    tokens.append(Token("EOF", "", None, span()))
    return tokens
