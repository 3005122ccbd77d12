"""Masked-line backtest: sample corpus files, hide a target, score a backend.

Each sampled file contributes one sample: a target span that starts at a
trigger character or line start and ends at a line end (at most 100 tokens),
plus a hidden gap of random length right after the target standing in for
the code the developer has not written yet. The context handed to the
backend is assembled with the same budget and before/after split used for
inference. Scores: Exact Match and sentence BLEU, aggregated per language.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .backends import CompletionBackend, DecodeParams
from .prompt import (
    DEFAULT_BUDGET,
    DEFAULT_MAX_TARGET_TOKENS,
    DEFAULT_SPLIT,
    CursorContext,
    NoMaskableSpan,
    build_inference_input,
    select_training_mask,
)
from .scoring import EmptyReference, bleu, exact_match
from .tokenization import DEFAULT_TRIGGERS, TriggerSet, tokenize

logger = logging.getLogger(__name__)

SCHEMA = "gw-backtest/1"
DEFAULT_GAP_MAX = 50

LANGUAGE_EXTENSIONS = {
    "python": (".py",),
    "cpp": (".cpp", ".cc", ".cxx", ".hpp", ".hh", ".h"),
    "c": (".c",),
    "javascript": (".js", ".jsx"),
    "typescript": (".ts", ".tsx"),
    "rust": (".rs",),
    "go": (".go",),
    "java": (".java",),
}

_LANGUAGE_ALIASES = {
    "py": "python",
    "js": "javascript",
    "ts": "typescript",
    "rs": "rust",
    "c++": "cpp",
}


class CorpusTooSmall(ValueError):
    """Not enough usable files to draw the requested sample count."""


def normalize_language(name: str) -> str:
    lang = _LANGUAGE_ALIASES.get(name.strip().lower(), name.strip().lower())
    if lang not in LANGUAGE_EXTENSIONS:
        raise ValueError(f"unknown language: {name}")
    return lang


def path_hash_fraction(rel_path: str) -> float:
    """Stable in [0, 1); used for the filepath-hash holdout split."""
    digest = hashlib.sha256(rel_path.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") / 2**64


def in_holdout(rel_path: str, holdout_frac: float) -> bool:
    return path_hash_fraction(rel_path) < holdout_frac


@dataclass(frozen=True)
class MaskedSample:
    sample_id: str
    file_path: str
    language: str
    before: str
    target: str
    hidden_gap: str
    after: str
    seed: int

    def reconstruct(self) -> str:
        return self.before + self.target + self.hidden_gap + self.after


def _stable_seed(*parts) -> int:
    joined = ":".join(str(p) for p in parts)
    return int.from_bytes(hashlib.sha256(joined.encode("utf-8")).digest()[:8], "big")


def make_samples(
    corpus_dir: str,
    languages: Iterable[str],
    n_per_language: int,
    seed: int,
    gap_max: int = DEFAULT_GAP_MAX,
    max_target_tokens: int = DEFAULT_MAX_TARGET_TOKENS,
    triggers: TriggerSet = DEFAULT_TRIGGERS,
    holdout_frac: float = 0.0,
) -> list[MaskedSample]:
    """Deterministic sample set: same (corpus, seed) -> same samples."""
    if n_per_language < 1:
        raise ValueError("n_per_language must be >= 1")
    root = Path(corpus_dir)
    if not root.is_dir():
        raise CorpusTooSmall(f"{corpus_dir} is not a readable directory")
    samples: list[MaskedSample] = []
    for raw_language in languages:
        language = normalize_language(raw_language)
        extensions = LANGUAGE_EXTENSIONS[language]
        files = sorted(
            str(p.relative_to(root))
            for p in root.rglob("*")
            if p.is_file() and p.suffix in extensions
        )
        if holdout_frac > 0.0:
            files = [f for f in files if in_holdout(f, holdout_frac)]
        if len(files) < n_per_language:
            raise CorpusTooSmall(
                f"{language}: {len(files)} candidate files < n={n_per_language}"
            )
        order = list(files)
        random.Random(_stable_seed(seed, language)).shuffle(order)
        collected = 0
        skipped = 0
        for rel in order:
            if collected >= n_per_language:
                break
            text = (root / rel).read_text(encoding="utf-8", errors="replace")
            tokens = tokenize(text, triggers)
            file_seed = _stable_seed(seed, language, rel)
            try:
                span = select_training_mask(tokens, file_seed, max_target_tokens)
            except NoMaskableSpan:
                skipped += 1
                logger.warning("no maskable span in %s; skipping", rel)
                continue
            gap_rng = random.Random(_stable_seed(seed, language, rel, "gap"))
            gap_len = min(gap_rng.randint(0, gap_max), len(tokens) - span.end)
            samples.append(
                MaskedSample(
                    sample_id=f"{language}-{collected:05d}",
                    file_path=rel,
                    language=language,
                    before="".join(t.text for t in tokens[: span.start]),
                    target="".join(t.text for t in tokens[span.start : span.end]),
                    hidden_gap="".join(
                        t.text for t in tokens[span.end : span.end + gap_len]
                    ),
                    after="".join(t.text for t in tokens[span.end + gap_len :]),
                    seed=seed,
                )
            )
            collected += 1
        if collected < n_per_language:
            raise CorpusTooSmall(
                f"{language}: only {collected} maskable files of {n_per_language} requested"
                f" ({skipped} skipped)"
            )
    _target_length_sanity(samples)
    return samples


def _target_length_sanity(samples: list[MaskedSample]) -> None:
    if not samples:
        return
    mean_target = sum(len(s.target) for s in samples) / len(samples)
    mean_context = sum(len(s.before) + len(s.after) for s in samples) / len(samples)
    if mean_context <= 0:
        return
    ratio = mean_target / mean_context
    if not 0.005 <= ratio <= 0.15:
        logger.warning(
            "mean target length is %.1f%% of context; corpus may be unrepresentative",
            100 * ratio,
        )


@dataclass(frozen=True)
class LanguageScore:
    n: int
    exact_match_pct: float
    bleu_pct: float


@dataclass(frozen=True)
class EvalReport:
    languages: dict[str, LanguageScore]
    overall: LanguageScore
    config: dict
    failures: list[tuple[str, str]] = field(default_factory=list)

    def to_json(self) -> str:
        body = {
            "schema": SCHEMA,
            "config": self.config,
            "languages": {
                lang: {
                    "n": s.n,
                    "exact_match_pct": round(s.exact_match_pct, 4),
                    "bleu_pct": round(s.bleu_pct, 4),
                }
                for lang, s in sorted(self.languages.items())
            },
            "overall": {
                "n": self.overall.n,
                "exact_match_pct": round(self.overall.exact_match_pct, 4),
                "bleu_pct": round(self.overall.bleu_pct, 4),
            },
            "failures": {
                "count": len(self.failures),
                "examples": [list(f) for f in self.failures[:20]],
            },
        }
        return json.dumps(body, indent=2, sort_keys=True)

    def render_table(self) -> str:
        lines = [
            "{:<14} {:>6} {:>16} {:>10}".format("Language", "N", "Exact Match %", "BLEU %")
        ]
        for lang, s in sorted(self.languages.items()):
            lines.append(
                "{:<14} {:>6} {:>16.1f} {:>10.1f}".format(
                    lang, s.n, s.exact_match_pct, s.bleu_pct
                )
            )
        lines.append(
            "{:<14} {:>6} {:>16.1f} {:>10.1f}".format(
                "overall", self.overall.n, self.overall.exact_match_pct, self.overall.bleu_pct
            )
        )
        if self.failures:
            lines.append(f"failures: {len(self.failures)}")
        return "\n".join(lines)


def run_backtest(
    samples: list[MaskedSample],
    backend: CompletionBackend,
    params: DecodeParams = DecodeParams(),
    budget: int = DEFAULT_BUDGET,
    split: float = DEFAULT_SPLIT,
    strict_em: bool = False,
    workers: int = 4,
    triggers: TriggerSet = DEFAULT_TRIGGERS,
    config_echo: Optional[dict] = None,
) -> EvalReport:
    """Score every sample independently; aggregation is order-independent."""

    def score(sample: MaskedSample) -> tuple[int, float]:
        ctx = CursorContext(
            file_path=sample.file_path,
            language=sample.language,
            before=sample.before,
            after=sample.after,
        )
        prompt = build_inference_input(ctx, budget=budget, split=split, triggers=triggers)
        completion = backend.generate(
            prompt, params, ctx=ctx, request_id=sample.sample_id
        )
        em = exact_match(completion.text, sample.target, strict=strict_em)
        try:
            bl = bleu(completion.text, sample.target, triggers)
        except EmptyReference:
            bl = float(em)
        return em, bl

    results: list[Optional[tuple[int, float]]] = [None] * len(samples)
    failures: list[tuple[str, str]] = []
    with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = {pool.submit(score, s): i for i, s in enumerate(samples)}
        for future in concurrent.futures.as_completed(futures):
            index = futures[future]
            try:
                results[index] = future.result()
            except Exception as exc:
                failures.append((samples[index].sample_id, f"{type(exc).__name__}: {exc}"))
    failures.sort()

    def aggregate(indices: list[int]) -> LanguageScore:
        scored = [results[i] for i in indices if results[i] is not None]
        if not scored:
            return LanguageScore(0, 0.0, 0.0)
        # fixed summation order keeps reports byte-identical across runs
        em_sum = sum(em for em, _ in scored)
        bleu_sum = sum(bl for _, bl in scored)
        return LanguageScore(
            n=len(scored),
            exact_match_pct=100.0 * em_sum / len(scored),
            bleu_pct=100.0 * bleu_sum / len(scored),
        )

    by_language: dict[str, list[int]] = {}
    for i, sample in enumerate(samples):
        by_language.setdefault(sample.language, []).append(i)
    echo = {
        "backend_id": backend.backend_id,
        "budget": budget,
        "split": split,
        "strict_em": strict_em,
    }
    echo.update(config_echo or {})
    return EvalReport(
        languages={lang: aggregate(ix) for lang, ix in by_language.items()},
        overall=aggregate(list(range(len(samples)))),
        config=echo,
        failures=failures,
    )
