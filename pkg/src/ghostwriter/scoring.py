"""Exact Match and sentence-level BLEU over code tokens.

Exact Match compares normalized text: one trailing newline stripped from
each side, then trailing whitespace trimmed per line (strict byte equality
available via a flag). BLEU uses clipped n-gram precisions for orders 1..4
with uniform weights, add-one smoothing on orders >= 2, and a brevity
penalty; tokens are code tokens with whitespace and newlines dropped, so a
sample that exact-matches always scores BLEU 1.0.
"""

from __future__ import annotations

import math
from collections import Counter

from .tokenization import DEFAULT_TRIGGERS, TriggerSet, content_texts, tokenize

BLEU_MAX_ORDER = 4


class EmptyReference(ValueError):
    """Reference contains no code tokens."""


def _normalize(text: str) -> str:
    if text.endswith("\r\n"):
        text = text[:-2]
    elif text.endswith(("\n", "\r")):
        text = text[:-1]
    return "\n".join(line.rstrip() for line in text.split("\n"))


def exact_match(candidate: str, reference: str, strict: bool = False) -> int:
    """1 iff candidate equals reference (normalized unless strict)."""
    if strict:
        return int(candidate == reference)
    return int(_normalize(candidate) == _normalize(reference))


def code_tokens(text: str, triggers: TriggerSet = DEFAULT_TRIGGERS) -> list[str]:
    return content_texts(tokenize(text, triggers))


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(
    candidate: str,
    reference: str,
    triggers: TriggerSet = DEFAULT_TRIGGERS,
) -> float:
    """Sentence BLEU in [0, 1] over code tokens."""
    ref_tokens = code_tokens(reference, triggers)
    if not ref_tokens:
        raise EmptyReference("reference has no code tokens")
    cand_tokens = code_tokens(candidate, triggers)
    c, r = len(cand_tokens), len(ref_tokens)
    if c == 0:
        return 0.0

    log_precision_sum = 0.0
    for n in range(1, BLEU_MAX_ORDER + 1):
        cand_counts = _ngrams(cand_tokens, n)
        ref_counts = _ngrams(ref_tokens, n)
        matches = sum(min(count, ref_counts[g]) for g, count in cand_counts.items())
        total = max(0, c - n + 1)
        if n == 1:
            if matches == 0:
                return 0.0
            precision = matches / total
        else:
            precision = (matches + 1) / (total + 1)
        log_precision_sum += math.log(precision) / BLEU_MAX_ORDER

    brevity = 1.0 if c > r else math.exp(1.0 - r / c)
    return brevity * math.exp(log_precision_sum)
