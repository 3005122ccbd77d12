"""Lossless code tokenization aligned to suggestion trigger characters.

Splits source text at trigger characters, whitespace runs, newlines, and
identifier/number/operator boundaries. Concatenating the token texts always
reproduces the input exactly; every token starting with a trigger character
is a single-character token of kind TRIGGER, so mask and suggestion
boundaries line up with the places where completions are requested.
"""

from __future__ import annotations

import re
import string
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache


class TokenKind(str, Enum):
    IDENTIFIER = "identifier"
    NUMBER = "number"
    OPERATOR = "operator"
    TRIGGER = "trigger"
    WHITESPACE = "whitespace"
    NEWLINE = "newline"
    OTHER = "other"


DEFAULT_TRIGGER_CHARACTERS = ("(", ".", "=", ",", "[", ":")


@dataclass(frozen=True)
class TriggerSet:
    """Ordered set of single characters at which suggestions may begin."""

    characters: tuple[str, ...] = DEFAULT_TRIGGER_CHARACTERS
    _members: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        seen = []
        for ch in self.characters:
            if len(ch) != 1:
                raise ValueError(f"trigger must be a single character: {ch!r}")
            if ch.isalpha() or ch.isdecimal():
                raise ValueError(f"letters and digits cannot be triggers: {ch!r}")
            if ch in ("\r", "\n"):
                raise ValueError("newline characters cannot be triggers")
            if ch not in seen:
                seen.append(ch)
        if not seen:
            raise ValueError("trigger set must be non-empty")
        object.__setattr__(self, "characters", tuple(seen))
        object.__setattr__(self, "_members", frozenset(seen))

    def __contains__(self, ch: str) -> bool:
        return ch in self._members

    def __iter__(self):
        return iter(self.characters)


DEFAULT_TRIGGERS = TriggerSet()


@dataclass(frozen=True)
class CodeToken:
    text: str
    byte_offset: int
    kind: TokenKind

    def __post_init__(self):
        if not self.text:
            raise ValueError("token text must be non-empty")


@lru_cache(maxsize=16)
def _compile(trigger_chars: tuple[str, ...]) -> re.Pattern:
    trig = set(trigger_chars)
    alternatives = [f"(?P<trigger>[{re.escape(''.join(trigger_chars))}])"]
    alternatives.append(r"(?P<newline>\r\n|[\r\n])")
    ws = "".join(c for c in " \t" if c not in trig)
    if ws:
        alternatives.append(f"(?P<whitespace>[{re.escape(ws)}]+)")
    if "_" in trig:
        alternatives.append(r"(?P<identifier>[^\W\d_][^\W_]*)")
    else:
        alternatives.append(r"(?P<identifier>[^\W\d]\w*)")
    alternatives.append(r"(?P<number>\d+)")
    punct = "".join(c for c in string.punctuation if c not in trig and c != "_")
    if punct:
        alternatives.append(f"(?P<operator>[{re.escape(punct)}]+)")
    alternatives.append(r"(?P<other>(?s:.))")
    return re.compile("|".join(alternatives))


def tokenize(source: str, triggers: TriggerSet = DEFAULT_TRIGGERS) -> list[CodeToken]:
    """Tokenize source losslessly; total function over arbitrary text."""
    pattern = _compile(triggers.characters)
    tokens: list[CodeToken] = []
    byte_offset = 0
    for match in pattern.finditer(source):
        kind = TokenKind(match.lastgroup)
        text = match.group()
        # single-char fallback matches merge into maximal OTHER runs
        if kind is TokenKind.OTHER and tokens and tokens[-1].kind is TokenKind.OTHER:
            prev = tokens[-1]
            tokens[-1] = CodeToken(prev.text + text, prev.byte_offset, TokenKind.OTHER)
        else:
            tokens.append(CodeToken(text, byte_offset, kind))
        byte_offset += len(text.encode("utf-8"))
    return tokens


def token_texts(tokens: list[CodeToken]) -> list[str]:
    return [t.text for t in tokens]


def content_texts(tokens: list[CodeToken]) -> list[str]:
    """Token texts with whitespace and newline tokens dropped (metric view)."""
    return [
        t.text
        for t in tokens
        if t.kind not in (TokenKind.WHITESPACE, TokenKind.NEWLINE)
    ]
