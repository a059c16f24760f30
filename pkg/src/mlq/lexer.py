"""Lexer for mlq source text.

Tokens keep their original lexeme plus 1-based line/col of the first
character, so concatenating lexemes with the original whitespace
reconstructs the source.  `// ...` comments run to end of line and are
skipped.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from mlq.diagnostics import Diagnostic, error

MAX_DIAGNOSTICS = 20

KEYWORDS = {
    "thing", "property", "message", "provided", "required", "port",
    "receives", "sends", "data_analytics", "dataset", "features", "label",
    "model", "save_to", "linear_regression", "knn", "statechart", "init",
    "state", "on", "entry", "exit", "transition", "event", "guard", "action",
    "after", "print", "var", "if", "then", "else", "end", "da_train",
    "da_predict", "da_save", "da_observe", "configuration", "instance",
    "connector", "and", "or", "not", "int", "real", "bool", "string",
}

BOOL_LITERALS = {"true", "false"}

# Longest first so max-munch works by simple prefix scan.
OPERATORS = ["<->", "->", "<=", ">=", "==", "!=", "<", ">", "=", "!", "?",
             "+", "-", "*", "/"]

PUNCTUATION = "{}():,.;"


class TokenKind(enum.Enum):
    KEYWORD = "keyword"
    IDENT = "identifier"
    INT = "int-literal"
    REAL = "real-literal"
    STRING = "string-literal"
    BOOL = "bool-literal"
    PUNCT = "punctuation"
    OP = "operator"
    EOF = "end-of-input"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    line: int
    col: int


def _is_ident_start(c: str) -> bool:
    return c.isalpha() or c == "_"


def _is_ident_part(c: str) -> bool:
    return c.isalnum() or c == "_"


def tokenize(source: str) -> tuple[list[Token], list[Diagnostic]]:
    """Lex `source`; returns (tokens, diagnostics).

    Tokens lexed before an error are kept, so error recovery in the parser
    still sees a usable prefix.  A trailing EOF token is always appended.
    """
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    pos = 0
    line = 1
    col = 1
    n = len(source)

    def advance(k: int = 1):
        nonlocal pos, line, col
        for _ in range(k):
            if pos < n and source[pos] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            pos += 1

    while pos < n:
        c = source[pos]
        if c in " \t\r\n":
            advance()
            continue
        if c == "/" and pos + 1 < n and source[pos + 1] == "/":
            while pos < n and source[pos] != "\n":
                advance()
            continue

        start_line, start_col = line, col

        if _is_ident_start(c):
            begin = pos
            while pos < n and _is_ident_part(source[pos]):
                advance()
            word = source[begin:pos]
            if word in BOOL_LITERALS:
                kind = TokenKind.BOOL
            elif word in KEYWORDS:
                kind = TokenKind.KEYWORD
            else:
                kind = TokenKind.IDENT
            tokens.append(Token(kind, word, start_line, start_col))
            continue

        if c.isdigit():
            begin = pos
            while pos < n and source[pos].isdigit():
                advance()
            is_real = False
            if pos + 1 < n and source[pos] == "." and source[pos + 1].isdigit():
                is_real = True
                advance()
                while pos < n and source[pos].isdigit():
                    advance()
            # optional exponent, so pretty-printed float reprs re-lex
            if pos < n and source[pos] in "eE":
                look = pos + 1
                if look < n and source[look] in "+-":
                    look += 1
                if look < n and source[look].isdigit():
                    is_real = True
                    advance(look - pos)
                    while pos < n and source[pos].isdigit():
                        advance()
            kind = TokenKind.REAL if is_real else TokenKind.INT
            tokens.append(Token(kind, source[begin:pos], start_line, start_col))
            continue

        if c == '"':
            begin = pos
            advance()
            closed = False
            while pos < n:
                if source[pos] == "\\" and pos + 1 < n:
                    advance(2)
                    continue
                if source[pos] == '"':
                    advance()
                    closed = True
                    break
                if source[pos] == "\n":
                    break
                advance()
            if not closed:
                if len(diags) < MAX_DIAGNOSTICS:
                    diags.append(error("LEX002", "unterminated string literal",
                                       start_line, start_col))
                continue
            tokens.append(Token(TokenKind.STRING, source[begin:pos],
                                start_line, start_col))
            continue

        for op in OPERATORS:
            if source.startswith(op, pos):
                advance(len(op))
                tokens.append(Token(TokenKind.OP, op, start_line, start_col))
                break
        else:
            if c in PUNCTUATION:
                advance()
                tokens.append(Token(TokenKind.PUNCT, c, start_line, start_col))
            else:
                if len(diags) < MAX_DIAGNOSTICS:
                    diags.append(error("LEX001", f"unknown character {c!r}",
                                       start_line, start_col))
                advance()

    tokens.append(Token(TokenKind.EOF, "", line, col))
    return tokens, diags


def string_value(lexeme: str) -> str:
    """Decode a string literal lexeme (including its quotes)."""
    body = lexeme[1:-1]
    out = []
    i = 0
    while i < len(body):
        c = body[i]
        if c == "\\" and i + 1 < len(body):
            esc = body[i + 1]
            out.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc, esc))
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def quote_string(value: str) -> str:
    """Encode a string value as a literal the lexer accepts back."""
    out = ['"']
    for c in value:
        if c == "\\":
            out.append("\\\\")
        elif c == '"':
            out.append('\\"')
        elif c == "\n":
            out.append("\\n")
        elif c == "\t":
            out.append("\\t")
        else:
            out.append(c)
    out.append('"')
    return "".join(out)
