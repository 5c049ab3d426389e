"""Pre-tokenization by ASCII character class, with quoted-string grouping."""

import enum
import string
from typing import NamedTuple


class TokenKind(enum.Enum):
    LOWER = "lower"
    UPPER = "upper"
    DIGIT = "digit"
    WHITESPACE = "whitespace"
    PUNCT = "punct"
    STRING_CONTENT = "string"
    QUOTE = "quote"


class Token(NamedTuple):
    text: str
    kind: TokenKind


_CLASS_OF = {}
for _chars, _kind in (
    (string.ascii_lowercase, TokenKind.LOWER),
    (string.ascii_uppercase, TokenKind.UPPER),
    (string.digits, TokenKind.DIGIT),
    (string.whitespace, TokenKind.WHITESPACE),
):
    for _c in _chars:
        _CLASS_OF[_c] = _kind

RUN_KINDS = frozenset(_CLASS_OF.values())
DEFAULT_QUOTES = frozenset("'\"")


def char_kind(c: str) -> TokenKind:
    return _CLASS_OF.get(c, TokenKind.PUNCT)


def tokenize(text: str, quote_chars=DEFAULT_QUOTES) -> list:
    """Split ``text`` into tokens whose texts concatenate back to ``text``.

    Runs of one class (lower, upper, digit, whitespace) become one token;
    anything else is a one-character punctuation token.  A quote character
    starts a string literal that ends at the next occurrence of the same
    quote; the literal yields quote, content, quote.  An opening quote with
    no partner is left as plain punctuation.
    """
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in quote_chars:
            j = text.find(c, i + 1)
            if j == -1:
                tokens.append(Token(c, TokenKind.PUNCT))
                i += 1
                continue
            tokens.append(Token(c, TokenKind.QUOTE))
            if j > i + 1:
                tokens.append(Token(text[i + 1:j], TokenKind.STRING_CONTENT))
            tokens.append(Token(c, TokenKind.QUOTE))
            i = j + 1
            continue
        kind = char_kind(c)
        j = i + 1
        if kind is not TokenKind.PUNCT:
            while j < n and text[j] not in quote_chars and _CLASS_OF.get(text[j]) is kind:
                j += 1
        tokens.append(Token(text[i:j], kind))
        i = j
    return tokens
