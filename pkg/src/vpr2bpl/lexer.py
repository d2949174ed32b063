"""A small configurable tokenizer shared by the Viper and Boogie parsers."""

from __future__ import annotations

from dataclasses import dataclass

from .common import ParseError


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT | INT | REAL | SYM | EOF
    text: str
    line: int
    col: int


def tokenize(src: str, symbols: list[str]) -> list[Token]:
    """Tokenize ``src``.  ``symbols`` must be sorted longest-first by caller or
    will be sorted here.  Comments: ``//`` to end of line."""
    symbols = sorted(symbols, key=len, reverse=True)
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if src.startswith("//", i):
            while i < n and src[i] != "\n":
                i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and src[j].isdigit():
                j += 1
            if j < n - 1 and src[j] == "." and src[j + 1].isdigit():
                k = j + 1
                while k < n and src[k].isdigit():
                    k += 1
                toks.append(Token("REAL", src[i:k], line, col))
                col += k - i
                i = k
                continue
            toks.append(Token("INT", src[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            toks.append(Token("IDENT", src[i:j], line, col))
            col += j - i
            i = j
            continue
        for sym in symbols:
            if src.startswith(sym, i):
                toks.append(Token("SYM", sym, line, col))
                col += len(sym)
                i += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(Token("EOF", "", line, col))
    return toks


class TokenStream:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.peek()
        if t.kind != "EOF":
            self.pos += 1
        return t

    def at_sym(self, *texts: str) -> bool:
        t = self.peek()
        return t.kind == "SYM" and t.text in texts

    def at_kw(self, *words: str) -> bool:
        t = self.peek()
        return t.kind == "IDENT" and t.text in words

    def expect_sym(self, text: str) -> Token:
        t = self.peek()
        if t.kind != "SYM" or t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text!r}", t.line, t.col)
        return self.next()

    def expect_kw(self, word: str) -> Token:
        t = self.peek()
        if t.kind != "IDENT" or t.text != word:
            raise ParseError(f"expected {word!r}, found {t.text!r}", t.line, t.col)
        return self.next()

    def expect_ident(self) -> Token:
        t = self.peek()
        if t.kind != "IDENT":
            raise ParseError(f"expected identifier, found {t.text!r}", t.line, t.col)
        return self.next()

    def error(self, msg: str):
        t = self.peek()
        raise ParseError(msg, t.line, t.col)
