"""Prompt construction tests: budgets, splits, mask selection, rendering."""

import math
import random
import re

import pytest

from ghostwriter.prompt import (
    MASK_SENTINEL,
    BudgetTooSmall,
    CursorContext,
    MaskSpan,
    NoMaskableSpan,
    PromptInput,
    TrainingExample,
    build_inference_input,
    build_training_example,
    render_metadata,
    render_training_example,
    select_training_mask,
)
from ghostwriter.tokenization import TokenKind, tokenize

METADATA_LINE = re.compile(r"# (?:language|path|kernel): [^\n]*\n")


def parse_rendered(sequence, sentinel=MASK_SENTINEL):
    """Segment-parser oracle: recover (metadata, before, after, target) strings
    from a rendered token sequence."""
    first = sequence.index(sentinel)
    second = sequence.index(sentinel, first + 1)
    head = "".join(sequence[:first])
    after = "".join(sequence[first + 1 : second])
    target = "".join(sequence[second + 1 :])
    metadata = ""
    rest = head
    while True:
        m = METADATA_LINE.match(rest)
        if not m:
            break
        metadata += m.group()
        rest = rest[m.end() :]
    return metadata, rest, after, target


def enumerate_legal_spans(tokens, max_target_tokens=100):
    """Brute-force oracle: every (start, end) satisfying the mask rules."""
    spans = []
    for start in range(len(tokens)):
        if not (
            start == 0
            or tokens[start - 1].kind in (TokenKind.TRIGGER, TokenKind.NEWLINE)
        ):
            continue
        for end in range(start + 1, min(start + max_target_tokens, len(tokens)) + 1):
            span = tokens[start:end]
            if span[-1].kind is not TokenKind.NEWLINE:
                continue
            if all(
                t.kind in (TokenKind.WHITESPACE, TokenKind.NEWLINE) for t in span
            ):
                continue
            spans.append((start, end))
    return spans


def ctx_with_token_counts(n_before, n_after, language="python"):
    # "a\n" tokenizes to exactly two tokens
    def text_with(n):
        return "a\n" * (n // 2) + ("a" if n % 2 else "")

    before, after = text_with(n_before), text_with(n_after)
    assert len(tokenize(before)) == n_before
    assert len(tokenize(after)) == n_after
    return CursorContext("dir/mod.py", language, before, after)


def metadata_token_count(ctx):
    return len(tokenize(render_metadata(ctx)))


class TestBuildInferenceInput:
    def test_seventy_thirty_split_when_both_sides_overflow(self):
        ctx = ctx_with_token_counts(5000, 5000)
        room = 2000
        budget = metadata_token_count(ctx) + 2 + room
        prompt = build_inference_input(ctx, budget=budget)
        assert len(prompt.before_tokens) == 1400
        assert len(prompt.after_tokens) == 600

    def test_empty_after_gives_room_to_before(self):
        ctx = CursorContext("f.py", "python", "a\n" * 3000, "")
        room = 2000
        budget = metadata_token_count(ctx) + 2 + room
        prompt = build_inference_input(ctx, budget=budget)
        assert len(prompt.before_tokens) == 2000
        assert len(prompt.after_tokens) == 0

    def test_surplus_transfers_from_short_before(self):
        ctx = ctx_with_token_counts(100, 5000)
        room = 2000
        budget = metadata_token_count(ctx) + 2 + room
        prompt = build_inference_input(ctx, budget=budget)
        assert len(prompt.before_tokens) == 100
        assert len(prompt.after_tokens) == 1900

    def test_no_truncation_when_context_fits(self):
        ctx = ctx_with_token_counts(40, 40)
        prompt = build_inference_input(ctx, budget=2048)
        assert len(prompt.before_tokens) == 40
        assert len(prompt.after_tokens) == 40

    def test_budget_too_small_for_metadata(self):
        ctx = CursorContext("a/very/long/path/that/will/not/fit.py", "python", "x", "y")
        with pytest.raises(BudgetTooSmall):
            build_inference_input(ctx, budget=3)

    def test_metadata_comes_first_and_is_verbatim(self):
        ctx = CursorContext("pkg/m.py", "python", "x = 1\n", "y = 2\n", kernel="k1")
        prompt = build_inference_input(ctx)
        rendered = "".join(prompt.metadata_tokens)
        assert rendered == "# language: python\n# path: pkg/m.py\n# kernel: k1\n"
        assert prompt.render()[: len(prompt.metadata_tokens)] == list(
            prompt.metadata_tokens
        )

    def test_kernel_omitted_when_absent(self):
        ctx = CursorContext("pkg/m.py", "python", "", "")
        assert "kernel" not in "".join(
            build_inference_input(ctx).metadata_tokens
        )

    def test_metadata_field_order_is_configurable(self):
        ctx = CursorContext("pkg/m.py", "go", "", "")
        prompt = build_inference_input(ctx, metadata_fields=("path", "language"))
        assert "".join(prompt.metadata_tokens) == "# path: pkg/m.py\n# language: go\n"

    def test_invalid_split_rejected(self):
        ctx = ctx_with_token_counts(5, 5)
        for split in (0.0, 1.0, -0.2, 1.5):
            with pytest.raises(ValueError):
                build_inference_input(ctx, split=split)

    def test_rendered_has_exactly_one_sentinel_pair(self):
        ctx = ctx_with_token_counts(30, 30)
        rendered = build_inference_input(ctx).render()
        assert rendered.count(MASK_SENTINEL) == 2

    def test_budget_safety_and_recency_randomized(self):
        rng = random.Random(7)
        for _ in range(50):
            n_before, n_after = rng.randint(0, 400), rng.randint(0, 400)
            ctx = ctx_with_token_counts(n_before, n_after)
            meta = metadata_token_count(ctx)
            budget = meta + 2 + rng.randint(0, 300)
            prompt = build_inference_input(ctx, budget=budget)
            assert len(prompt.render()) <= budget
            full_before = [t.text for t in tokenize(ctx.before)]
            full_after = [t.text for t in tokenize(ctx.after)]
            n_kept = len(prompt.before_tokens)
            assert list(prompt.before_tokens) == full_before[len(full_before) - n_kept :]
            assert list(prompt.after_tokens) == full_after[: len(prompt.after_tokens)]

    def test_split_fidelity_when_both_sides_overflow(self):
        rng = random.Random(11)
        for _ in range(30):
            room = rng.randint(20, 400)
            ctx = ctx_with_token_counts(room + rng.randint(1, 50), room + rng.randint(1, 50))
            budget = metadata_token_count(ctx) + 2 + room
            prompt = build_inference_input(ctx, budget=budget, split=0.7)
            kept_b, kept_a = len(prompt.before_tokens), len(prompt.after_tokens)
            ratio = kept_b / (kept_b + kept_a)
            assert 0.7 - 1.0 / room <= ratio <= 0.7 + 1.0 / room


class TestSelectTrainingMask:
    def test_selected_span_is_a_legal_span(self):
        tokens = tokenize("x = foo(y)\n")
        spans = enumerate_legal_spans(tokens)
        for seed in range(20):
            span = select_training_mask(tokens, rng_seed=seed)
            assert (span.start, span.end) in spans

    def test_single_line_starts_follow_trigger_or_line_start(self):
        tokens = tokenize("x = foo(y)\n")
        for seed in range(20):
            span = select_training_mask(tokens, rng_seed=seed)
            assert span.start == 0 or tokens[span.start - 1].kind in (
                TokenKind.TRIGGER,
                TokenKind.NEWLINE,
            )
            assert tokens[span.end - 1].kind is TokenKind.NEWLINE

    def test_all_whitespace_has_no_maskable_span(self):
        with pytest.raises(NoMaskableSpan):
            select_training_mask(tokenize("   \n\t\n  \n"), rng_seed=1)
        with pytest.raises(NoMaskableSpan):
            select_training_mask([], rng_seed=1)

    def test_deterministic_for_seed(self):
        tokens = tokenize("def f():\n    return g(1, 2)\n\nx = f()\n")
        for seed in range(10):
            assert select_training_mask(tokens, seed) == select_training_mask(tokens, seed)

    def test_respects_max_target_tokens(self):
        source = "".join(f"line{i} = value{i}\n" for i in range(100))
        tokens = tokenize(source)
        for seed in range(30):
            span = select_training_mask(tokens, seed, max_target_tokens=12)
            assert span.end - span.start <= 12

    def test_mask_alignment_over_random_sources(self):
        rng = random.Random(3)
        words = ["foo", "bar", "baz", "qux", "val"]
        for trial in range(25):
            source = "".join(
                f"{rng.choice(words)} = {rng.choice(words)}({rng.choice(words)})\n"
                for _ in range(rng.randint(1, 12))
            )
            tokens = tokenize(source)
            spans = enumerate_legal_spans(tokens)
            span = select_training_mask(tokens, rng_seed=trial)
            assert (span.start, span.end) in spans


class TestTrainingExample:
    def test_empty_target_rejected(self):
        prompt = build_inference_input(CursorContext("f.py", "python", "", ""))
        with pytest.raises(ValueError):
            TrainingExample(input=prompt, target_tokens=())

    def test_target_must_end_at_newline(self):
        prompt = build_inference_input(CursorContext("f.py", "python", "", ""))
        with pytest.raises(ValueError):
            TrainingExample(input=prompt, target_tokens=("x", " ", "=", " ", "1"))

    def test_whitespace_only_target_rejected(self):
        prompt = build_inference_input(CursorContext("f.py", "python", "", ""))
        with pytest.raises(ValueError):
            TrainingExample(input=prompt, target_tokens=("  ", "\n"))

    def test_rendered_structure(self):
        source = "import os\n\npath = os.getcwd()\nprint(path)\n"
        tokens = tokenize(source)
        span = select_training_mask(tokens, rng_seed=5)
        example = build_training_example("pkg/f.py", "python", tokens, span)
        rendered = render_training_example(example)
        assert rendered.count(MASK_SENTINEL) == 2
        assert rendered[-len(example.target_tokens) :] == list(example.target_tokens)
        # the input part never exceeds the budget
        assert len(rendered) - len(example.target_tokens) <= example.input.total_budget

    def test_round_trip_recovers_segments(self):
        source = "import os\n\npath = os.getcwd()\nprint(path)\nvalue = compute(path)\n"
        tokens = tokenize(source)
        for seed in range(15):
            span = select_training_mask(tokens, rng_seed=seed)
            example = build_training_example("pkg/f.py", "python", tokens, span)
            metadata, before, after, target = parse_rendered(
                render_training_example(example)
            )
            assert metadata == "# language: python\n# path: pkg/f.py\n"
            assert before == "".join(example.input.before_tokens)
            assert after == "".join(example.input.after_tokens)
            assert target == "".join(example.target_tokens)
            # segments stitch back into the original source when untruncated
            assert before + target + after == source


class TestPromptInput:
    def test_over_budget_rejected(self):
        with pytest.raises(BudgetTooSmall):
            PromptInput(
                metadata_tokens=("#",),
                before_tokens=("a", "b", "c"),
                after_tokens=(),
                total_budget=5,
            )

    def test_sentinel_collision_rejected(self):
        with pytest.raises(ValueError):
            PromptInput(
                metadata_tokens=(),
                before_tokens=(MASK_SENTINEL,),
                after_tokens=(),
                total_budget=10,
            )

    def test_cache_key_depends_on_all_segments(self):
        base = dict(
            metadata_tokens=("# lang\n",),
            before_tokens=("a",),
            after_tokens=("b",),
            total_budget=100,
        )
        key = PromptInput(**base).cache_key()
        for field, value in [
            ("metadata_tokens", ("# other\n",)),
            ("before_tokens", ("z",)),
            ("after_tokens", ("z",)),
        ]:
            changed = PromptInput(**{**base, field: value})
            assert changed.cache_key() != key

    def test_cache_key_stable(self):
        prompt = build_inference_input(CursorContext("f.py", "python", "x = 1\n", "y\n"))
        assert prompt.cache_key() == prompt.cache_key()
