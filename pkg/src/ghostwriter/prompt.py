"""Masked-context model input construction.

Builds the model input ``[metadata; before; <mask>; after; <mask>]`` from a
cursor context: metadata lines first, then the code before the cursor, a
mask sentinel, the code after, and a closing sentinel. When the context
exceeds the token budget, the before side keeps its most recent ceil(70%)
share and the after side the first floor(30%) share, with unused share
transferred to the side that can still use it.

Training examples append the masked target after the second sentinel; the
target span is chosen at a trigger character or line start and runs to the
end of a line.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass, field
from typing import Optional

from .tokenization import (
    DEFAULT_TRIGGERS,
    CodeToken,
    TokenKind,
    TriggerSet,
    tokenize,
)

MASK_SENTINEL = "<|mask|>"

DEFAULT_BUDGET = 2048
DEFAULT_SPLIT = 0.7
DEFAULT_MAX_TARGET_TOKENS = 100
DEFAULT_METADATA_FIELDS = ("language", "path", "kernel")

_NEWLINE_TEXTS = ("\n", "\r\n", "\r")


class BudgetTooSmall(ValueError):
    """Budget cannot hold the metadata plus the two mask sentinels."""


class NoMaskableSpan(ValueError):
    """No span satisfies the mask placement constraints."""


@dataclass(frozen=True)
class CursorContext:
    """Everything known at the cursor when a completion is requested."""

    file_path: str
    language: str
    before: str
    after: str
    kernel: Optional[str] = None

    def __post_init__(self):
        if not self.language:
            raise ValueError("language must be non-empty")


def render_metadata(ctx: CursorContext, fields=DEFAULT_METADATA_FIELDS) -> str:
    values = {"language": ctx.language, "path": ctx.file_path, "kernel": ctx.kernel}
    lines = []
    for name in fields:
        if name not in values:
            raise ValueError(f"unknown metadata field: {name}")
        if values[name] is not None:
            lines.append(f"# {name}: {values[name]}\n")
    return "".join(lines)


@dataclass(frozen=True)
class PromptInput:
    """Tokenized, budgeted, mask-framed model input."""

    metadata_tokens: tuple[str, ...]
    before_tokens: tuple[str, ...]
    after_tokens: tuple[str, ...]
    mask_sentinel: str = MASK_SENTINEL
    total_budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        object.__setattr__(self, "metadata_tokens", tuple(self.metadata_tokens))
        object.__setattr__(self, "before_tokens", tuple(self.before_tokens))
        object.__setattr__(self, "after_tokens", tuple(self.after_tokens))
        if not self.mask_sentinel:
            raise ValueError("mask sentinel must be non-empty")
        if self.input_token_count > self.total_budget:
            raise BudgetTooSmall(
                f"input needs {self.input_token_count} tokens, budget is {self.total_budget}"
            )
        for seg in (self.metadata_tokens, self.before_tokens, self.after_tokens):
            if self.mask_sentinel in seg:
                raise ValueError("mask sentinel must not occur in the context")

    @property
    def input_token_count(self) -> int:
        # two sentinels frame the mask position
        return (
            len(self.metadata_tokens)
            + len(self.before_tokens)
            + len(self.after_tokens)
            + 2
        )

    def render(self) -> list[str]:
        """Flat token sequence the model consumes."""
        return [
            *self.metadata_tokens,
            *self.before_tokens,
            self.mask_sentinel,
            *self.after_tokens,
            self.mask_sentinel,
        ]

    def cache_key(self) -> str:
        payload = json.dumps(
            [
                list(self.metadata_tokens),
                list(self.before_tokens),
                list(self.after_tokens),
            ],
            ensure_ascii=False,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _allocate(n_before: int, n_after: int, room: int, split: float) -> tuple[int, int]:
    """Token counts each side keeps inside `room`, using the before/after split."""
    if n_before + n_after <= room:
        return n_before, n_after
    want_before = math.ceil(split * room)
    want_after = room - want_before
    keep_before = min(n_before, want_before)
    keep_after = min(n_after, want_after)
    spare = room - keep_before - keep_after
    if spare > 0:
        grow = min(n_before - keep_before, spare)
        keep_before += grow
        spare -= grow
        keep_after += min(n_after - keep_after, spare)
    return keep_before, keep_after


def build_inference_input(
    ctx: CursorContext,
    budget: int = DEFAULT_BUDGET,
    split: float = DEFAULT_SPLIT,
    triggers: TriggerSet = DEFAULT_TRIGGERS,
    metadata_fields=DEFAULT_METADATA_FIELDS,
    mask_sentinel: str = MASK_SENTINEL,
) -> PromptInput:
    """Build the model input for a cursor context, truncating to budget."""
    if not 0.0 < split < 1.0:
        raise ValueError(f"split must be in (0, 1): {split}")
    metadata_tokens = [t.text for t in tokenize(render_metadata(ctx, metadata_fields), triggers)]
    room = budget - len(metadata_tokens) - 2
    if room < 0:
        raise BudgetTooSmall(
            f"budget {budget} cannot hold {len(metadata_tokens)} metadata tokens plus sentinels"
        )
    before = tokenize(ctx.before, triggers)
    after = tokenize(ctx.after, triggers)
    keep_before, keep_after = _allocate(len(before), len(after), room, split)
    return PromptInput(
        metadata_tokens=tuple(metadata_tokens),
        before_tokens=tuple(t.text for t in before[len(before) - keep_before :]),
        after_tokens=tuple(t.text for t in after[:keep_after]),
        mask_sentinel=mask_sentinel,
        total_budget=budget,
    )


@dataclass(frozen=True)
class MaskSpan:
    """Token-index range [start, end) of a masked target."""

    start: int
    end: int


def _is_content(token: CodeToken) -> bool:
    return token.kind not in (TokenKind.WHITESPACE, TokenKind.NEWLINE)


def select_training_mask(
    tokens: list[CodeToken],
    rng_seed: int,
    max_target_tokens: int = DEFAULT_MAX_TARGET_TOKENS,
) -> MaskSpan:
    """Pick a random maskable span: starts at a trigger boundary or line
    start, ends at a line end, spans at most max_target_tokens, and contains
    at least one non-whitespace token. Deterministic for a given seed."""
    if not tokens:
        raise NoMaskableSpan("empty token stream")
    if max_target_tokens < 1:
        raise ValueError("max_target_tokens must be >= 1")

    starts = [
        i
        for i in range(len(tokens))
        if i == 0 or tokens[i - 1].kind in (TokenKind.TRIGGER, TokenKind.NEWLINE)
    ]
    rng = random.Random(rng_seed)
    rng.shuffle(starts)
    for start in starts:
        ends = []
        content_seen = False
        for j in range(start, min(start + max_target_tokens, len(tokens))):
            content_seen = content_seen or _is_content(tokens[j])
            if tokens[j].kind is TokenKind.NEWLINE and content_seen:
                ends.append(j + 1)
        if ends:
            return MaskSpan(start, rng.choice(ends))
    raise NoMaskableSpan("no span starts at a trigger/line boundary and ends at a line end")


@dataclass(frozen=True)
class TrainingExample:
    """A model input plus the masked target it should reproduce."""

    input: PromptInput
    target_tokens: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "target_tokens", tuple(self.target_tokens))
        if not self.target_tokens:
            raise ValueError("target must be non-empty")
        if self.target_tokens[-1] not in _NEWLINE_TEXTS:
            raise ValueError("target must end at a line boundary")
        if all(t.isspace() for t in self.target_tokens):
            raise ValueError("target must contain a non-whitespace token")


def build_training_example(
    ctx_path: str,
    language: str,
    tokens: list[CodeToken],
    span: MaskSpan,
    budget: int = DEFAULT_BUDGET,
    split: float = DEFAULT_SPLIT,
    triggers: TriggerSet = DEFAULT_TRIGGERS,
    kernel: Optional[str] = None,
    max_target_tokens: int = DEFAULT_MAX_TARGET_TOKENS,
) -> TrainingExample:
    """Assemble a training example around a mask span chosen on `tokens`."""
    if span.end - span.start > max_target_tokens:
        raise ValueError("target exceeds max_target_tokens")
    ctx = CursorContext(
        file_path=ctx_path,
        language=language,
        before="".join(t.text for t in tokens[: span.start]),
        after="".join(t.text for t in tokens[span.end :]),
        kernel=kernel,
    )
    prompt = build_inference_input(ctx, budget=budget, split=split, triggers=triggers)
    return TrainingExample(
        input=prompt,
        target_tokens=tuple(t.text for t in tokens[span.start : span.end]),
    )


def render_training_example(example: TrainingExample) -> list[str]:
    """Flat training sequence: input segments, sentinels, then the target."""
    if example.input.input_token_count > example.input.total_budget:
        raise BudgetTooSmall("input exceeds its budget")
    return example.input.render() + list(example.target_tokens)
