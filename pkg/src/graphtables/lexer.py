"""Hand-written tokenizer for the statement language.

Unquoted identifiers fold to upper case; double-quoted identifiers keep their
exact spelling (and may contain characters like the euro sign).  Strings are
single-quoted with '' as the escape.  DATE'2023-03-22' is a date literal and
a number directly followed by a currency symbol is a currency literal.

Tokens keep their source offsets, so the concatenation of lexemes plus the
skipped whitespace/comments reconstructs the input exactly.
"""

from __future__ import annotations

import datetime
import re
from dataclasses import dataclass
from decimal import Decimal

from .errors import LexError
from .values import CURRENCY_SYMBOLS, Currency

# Alternation order matters: longest and most specific first.
_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<date>[Dd][Aa][Tt][Ee]'[^']*')
  | (?P<currency>\d+(?:\.\d+)?[€$£])
  | (?P<decimal>\d+\.\d+)
  | (?P<int>\d+)
  | (?P<qident>"(?:[^"]|"")*")
  | (?P<string>'(?:[^']|'')*')
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<arrow><-\[|\]->|-\[|\]-)
  | (?P<punct2>\.\.|<=|>=|<>|!=)
  | (?P<punct>[()\[\]{},:.=<>+\-*/?;])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    type: str          # 'ident', 'string', 'int', 'decimal', 'currency', 'date', 'end', or the punctuation itself
    value: object
    text: str          # exact lexeme
    start: int
    end: int
    line: int
    col: int
    exact: bool = False  # True for double-quoted identifiers

    def is_kw(self, *names: str) -> bool:
        return self.type == "ident" and not self.exact and self.value in names


def _line_starts(text: str) -> list[int]:
    starts = [0]
    for i, ch in enumerate(text):
        if ch == "\n":
            starts.append(i + 1)
    return starts


def _pos(starts: list[int], offset: int) -> tuple[int, int]:
    import bisect
    line = bisect.bisect_right(starts, offset) - 1
    return line + 1, offset - starts[line] + 1


def tokenize(text: str) -> list[Token]:
    starts = _line_starts(text)
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        m = _TOKEN_RE.match(text, i)
        if m is None:
            line, col = _pos(starts, i)
            ch = text[i]
            if ch in "'\"":
                raise LexError("unterminated literal", line, col)
            raise LexError(f"unexpected character {ch!r}", line, col)
        kind = m.lastgroup
        lexeme = m.group()
        line, col = _pos(starts, i)
        if kind in ("ws", "comment"):
            i = m.end()
            continue
        if kind == "date":
            body = lexeme[5:-1]
            try:
                value = datetime.date.fromisoformat(body)
            except ValueError:
                raise LexError(f"bad date literal {body!r}", line, col) from None
            tokens.append(Token("date", value, lexeme, i, m.end(), line, col))
        elif kind == "currency":
            code = CURRENCY_SYMBOLS[lexeme[-1]]
            tokens.append(Token("currency", Currency(Decimal(lexeme[:-1]), code),
                                lexeme, i, m.end(), line, col))
        elif kind == "decimal":
            tokens.append(Token("decimal", Decimal(lexeme), lexeme, i, m.end(), line, col))
        elif kind == "int":
            tokens.append(Token("int", int(lexeme), lexeme, i, m.end(), line, col))
        elif kind == "qident":
            name = lexeme[1:-1].replace('""', '"')
            tokens.append(Token("ident", name, lexeme, i, m.end(), line, col, exact=True))
        elif kind == "string":
            value = lexeme[1:-1].replace("''", "'")
            tokens.append(Token("string", value, lexeme, i, m.end(), line, col))
        elif kind == "ident":
            tokens.append(Token("ident", lexeme.upper(), lexeme, i, m.end(), line, col))
        else:  # arrow, punct2, punct
            tokens.append(Token(lexeme, lexeme, lexeme, i, m.end(), line, col))
        i = m.end()
    eline, ecol = _pos(starts, n)
    tokens.append(Token("end", None, "", n, n, eline, ecol))
    return tokens
