"""Deterministic order-k n-gram model: the reference completion backend.

Counts every k-token window in the corpus (windows never cross file
boundaries) plus all shorter-context tables down to unigrams for backoff.
Decoding conditions on the tokens before the cursor only; the after-context
is accepted and ignored. Ties in a frequency table break toward the
lexicographically smallest token so decoding is reproducible everywhere.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
import zlib
from collections import Counter
from typing import Iterable, Optional

from .backends import (
    Completion,
    CompletionBackend,
    DecodeParams,
    EmptyVocabulary,
    GenerationTimeout,
    choose_strategy,
)
from .tokenization import DEFAULT_TRIGGERS, TriggerSet, tokenize

MAGIC = b"NGRM1"

_NEWLINES = ("\n", "\r\n", "\r")


class ModelFormatError(ValueError):
    """File is not a recognizable serialized n-gram model."""


class NGramModel:
    """Immutable frequency tables: (k-1)-token context -> successor counts."""

    def __init__(self, order: int, counts: dict[tuple[str, ...], Counter]):
        if order < 2:
            raise ValueError("order must be >= 2")
        self.order = order
        self._counts = counts
        self.vocabulary = frozenset(counts.get((), Counter()).keys())

    def successor_table(self, history: list[str]) -> Optional[Counter]:
        """Longest-context table matching the history, backing off to unigrams."""
        for length in range(self.order - 1, -1, -1):
            if length > len(history):
                continue
            ctx = tuple(history[len(history) - length :]) if length else ()
            table = self._counts.get(ctx)
            if table:
                return table
        return None

    def context_counts(self, context: tuple[str, ...]) -> Counter:
        return Counter(self._counts.get(tuple(context), Counter()))

    @property
    def is_empty(self) -> bool:
        return not self.vocabulary

    def _canonical(self) -> bytes:
        entries = sorted(
            (list(ctx), sorted(table.items())) for ctx, table in self._counts.items()
        )
        payload = {"order": self.order, "counts": entries}
        return json.dumps(payload, ensure_ascii=False, sort_keys=True).encode("utf-8")

    def fingerprint(self) -> str:
        return hashlib.sha256(self._canonical()).hexdigest()[:16]

    def save(self, path: str) -> None:
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(zlib.compress(self._canonical()))

    @classmethod
    def load(cls, path: str) -> "NGramModel":
        with open(path, "rb") as fh:
            blob = fh.read()
        if not blob.startswith(MAGIC):
            raise ModelFormatError(f"{path}: missing {MAGIC!r} header")
        payload = json.loads(zlib.decompress(blob[len(MAGIC) :]))
        counts = {
            tuple(ctx): Counter(dict(table)) for ctx, table in payload["counts"]
        }
        return cls(payload["order"], counts)


def build_ngram(
    corpus_files: Iterable[tuple[str, str]],
    order: int = 4,
    triggers: TriggerSet = DEFAULT_TRIGGERS,
) -> NGramModel:
    """Count all token windows up to `order` per file; empty corpus is legal."""
    if order < 2:
        raise ValueError("order must be >= 2")
    counts: dict[tuple[str, ...], Counter] = {}
    for _path, text in corpus_files:
        texts = [t.text for t in tokenize(text, triggers)]
        for i, tok in enumerate(texts):
            for length in range(0, order):
                if i - length < 0:
                    break
                ctx = tuple(texts[i - length : i])
                counts.setdefault(ctx, Counter())[tok] += 1
    return NGramModel(order, counts)


def _is_newline(token: str) -> bool:
    return token in _NEWLINES


def _check_deadline(deadline_s: Optional[float]) -> None:
    if deadline_s is not None and time.monotonic() > deadline_s:
        raise GenerationTimeout("generation deadline exceeded")


def greedy_decode(
    model: NGramModel,
    history: list[str],
    max_new_tokens: int,
    deadline_s: Optional[float] = None,
) -> tuple[list[str], float]:
    """Most-likely successor at each step; returns (tokens, log-probability)."""
    generated: list[str] = []
    log_prob = 0.0
    context = list(history)
    for _ in range(max_new_tokens):
        _check_deadline(deadline_s)
        table = model.successor_table(context)
        if not table:
            break
        total = sum(table.values())
        token = min(table, key=lambda t: (-table[t], t))
        log_prob += math.log(table[token] / total)
        generated.append(token)
        context.append(token)
        if _is_newline(token):
            break
    return generated, log_prob


def beam_decode(
    model: NGramModel,
    history: list[str],
    width: int,
    max_new_tokens: int,
    deadline_s: Optional[float] = None,
) -> tuple[list[str], float]:
    """Keep the `width` best partial sequences by raw log-probability."""
    beams: list[tuple[float, tuple[str, ...], bool]] = [(0.0, (), False)]
    for _ in range(max_new_tokens):
        _check_deadline(deadline_s)
        if all(done for _, _, done in beams):
            break
        pool: list[tuple[float, tuple[str, ...], bool]] = []
        for log_prob, seq, done in beams:
            if done:
                pool.append((log_prob, seq, done))
                continue
            table = model.successor_table(history + list(seq))
            if not table:
                # nothing to extend with; sequence competes as-is
                pool.append((log_prob, seq, True))
                continue
            total = sum(table.values())
            for token, count in table.items():
                pool.append(
                    (
                        log_prob + math.log(count / total),
                        seq + (token,),
                        _is_newline(token),
                    )
                )
        pool.sort(key=lambda b: (-b[0], b[1]))
        beams = pool[:width]
    best_log_prob, best_seq, _ = beams[0]
    return list(best_seq), best_log_prob


class NGramBackend(CompletionBackend):
    """Serves completions from an n-gram model; safe for concurrent callers."""

    def __init__(self, model: NGramModel):
        self.model = model
        self.backend_id = f"ngram{model.order}"

    def generate(self, input, params: DecodeParams, *, ctx=None, request_id=None, deadline_s=None):
        if self.model.is_empty:
            raise EmptyVocabulary("model was built from an empty corpus")
        strategy = choose_strategy(input.input_token_count, params)
        history = list(input.before_tokens)
        if strategy == "greedy":
            tokens, _ = greedy_decode(self.model, history, params.max_new_tokens, deadline_s)
        else:
            tokens, _ = beam_decode(
                self.model, history, params.beam_width, params.max_new_tokens, deadline_s
            )
        return Completion(
            text="".join(tokens),
            strategy=strategy,
            generated_tokens=len(tokens),
            backend_id=self.backend_id,
        )

    def fingerprint(self) -> str:
        return f"ngram:{self.model.fingerprint()}"
