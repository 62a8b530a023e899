"""Tokenizer for the supported C-like subset."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import SourceSyntaxError, UnsupportedConstructError

KEYWORDS = {
    "int", "float", "bool", "char", "void",
    "if", "else", "for", "while", "do", "switch", "case", "default",
    "try", "catch", "return", "break", "continue", "true", "false",
}

# longest first so '<=' wins over '<'
OPERATORS = [
    "++", "--", "+=", "-=", "*=", "/=", "==", "!=", "<=", ">=", "&&", "||",
    "+", "-", "*", "/", "%", "=", "<", ">", "!",
    "(", ")", "{", "}", ";", ",", ":", "?",
]

UNSUPPORTED_CHARS = {"[": "array indexing", "]": "array indexing",
                     "&": "address-of", "|": "bitwise or", "^": "bitwise xor",
                     "~": "bitwise not", ".": "member access", "#": "preprocessor"}


@dataclass(frozen=True)
class Token:
    kind: str  # ident | number | string | char | keyword | op | eof
    value: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def err(msg, cls=SourceSyntaxError):
        raise cls(msg, line, col)

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end == -1:
                err("unterminated block comment")
            skipped = text[i:end + 2]
            newlines = skipped.count("\n")
            if newlines:
                line += newlines
                col = len(skipped) - skipped.rfind("\n")
            else:
                col += len(skipped)
            i = end + 2
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                if text[j] == ".":
                    seen_dot = True
                j += 1
            if j < n and text[j] in "fF":  # float suffix
                j += 1
            tokens.append(Token("number", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "keyword" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        if ch == '"':
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\\":
                    j += 1
                if text[j] == "\n":
                    err("unterminated string literal")
                j += 1
            if j >= n:
                err("unterminated string literal")
            tokens.append(Token("string", text[i:j + 1], line, col))
            col += j + 1 - i
            i = j + 1
            continue
        if ch == "'":
            j = i + 1
            while j < n and text[j] != "'":
                if text[j] == "\\":
                    j += 1
                j += 1
            if j >= n:
                err("unterminated char literal")
            tokens.append(Token("char", text[i:j + 1], line, col))
            col += j + 1 - i
            i = j + 1
            continue
        for op in OPERATORS:
            if text.startswith(op, i):
                tokens.append(Token("op", op, line, col))
                col += len(op)
                i += len(op)
                break
        else:
            if ch in UNSUPPORTED_CHARS:
                err(f"unsupported construct ({UNSUPPORTED_CHARS[ch]}): {ch!r}",
                    UnsupportedConstructError)
            err(f"unexpected character {ch!r}")
    tokens.append(Token("eof", "", line, col))
    return tokens
