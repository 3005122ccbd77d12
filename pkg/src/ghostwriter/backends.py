"""Completion backend contract and the built-in non-model backends.

A backend turns a prompt input into exactly one completion. Decoding uses
beam search (width 3 by default) when the input is shorter than the beam
threshold and greedy decoding otherwise; generation stops at the first
newline token so suggestions stay single-line.

Built-ins here: an oracle backend that replays stored targets (harness
self-tests) and a remote backend that forwards to an inference service over
HTTP. The n-gram reference model lives in `ngram`.
"""

from __future__ import annotations

import abc
import hashlib
import json
from dataclasses import dataclass
from typing import Optional

import requests

from .prompt import CursorContext, PromptInput
from .tokenization import tokenize

DEFAULT_MAX_NEW_TOKENS = 100
DEFAULT_BEAM_THRESHOLD = 1500
DEFAULT_BEAM_WIDTH = 3


class BackendUnavailable(RuntimeError):
    """Transport or backing-model failure."""


class EmptyVocabulary(RuntimeError):
    """The n-gram model was built from an empty corpus."""


class UnknownSample(KeyError):
    """Oracle backend queried for an id it has no target for."""


class GenerationTimeout(RuntimeError):
    """Generation exceeded the configured deadline."""


@dataclass(frozen=True)
class DecodeParams:
    max_new_tokens: int = DEFAULT_MAX_NEW_TOKENS
    beam_threshold_tokens: int = DEFAULT_BEAM_THRESHOLD
    beam_width: int = DEFAULT_BEAM_WIDTH

    def __post_init__(self):
        if self.max_new_tokens < 1 or self.beam_threshold_tokens < 1 or self.beam_width < 1:
            raise ValueError("decode parameters must be positive")


def choose_strategy(input_token_count: int, params: DecodeParams) -> str:
    """Beam below the threshold, greedy at or above it."""
    if input_token_count < params.beam_threshold_tokens:
        return f"beam({params.beam_width})"
    return "greedy"


@dataclass(frozen=True)
class Completion:
    """One generated suggestion; single-line for generative backends."""

    text: str
    strategy: str
    generated_tokens: int
    backend_id: str


class CompletionBackend(abc.ABC):
    """Construct from config, then serve any number of concurrent calls."""

    backend_id: str = "backend"

    @abc.abstractmethod
    def generate(
        self,
        input: PromptInput,
        params: DecodeParams,
        *,
        ctx: Optional[CursorContext] = None,
        request_id: Optional[str] = None,
        deadline_s: Optional[float] = None,
    ) -> Completion:
        raise NotImplementedError

    def fingerprint(self) -> str:
        return self.backend_id


class OracleBackend(CompletionBackend):
    """Replays stored targets verbatim, keyed by request id.

    Test fixture for the backtest harness: the returned text is the stored
    target even when it spans multiple lines, bypassing the single-line rule
    generative backends obey.
    """

    backend_id = "oracle"

    def __init__(self, truth: dict[str, str]):
        self._truth = dict(truth)

    @classmethod
    def from_file(cls, path: str) -> "OracleBackend":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))

    def generate(self, input, params, *, ctx=None, request_id=None, deadline_s=None):
        if request_id is None or request_id not in self._truth:
            raise UnknownSample(request_id)
        target = self._truth[request_id]
        return Completion(
            text=target,
            strategy=choose_strategy(input.input_token_count, params),
            generated_tokens=len(tokenize(target)),
            backend_id=self.backend_id,
        )

    def fingerprint(self) -> str:
        digest = hashlib.sha256(
            json.dumps(self._truth, sort_keys=True, ensure_ascii=False).encode("utf-8")
        ).hexdigest()
        return f"oracle:{digest[:12]}"


class RemoteBackend(CompletionBackend):
    """Forwards requests to an inference service over HTTP/JSON.

    Needs the raw cursor context; decode parameters are governed by the
    remote service's own configuration.
    """

    def __init__(self, base_url: str, timeout_s: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s
        self.backend_id = f"remote:{self.base_url}"
        self._session = requests.Session()

    def generate(self, input, params, *, ctx=None, request_id=None, deadline_s=None):
        if ctx is None:
            raise ValueError("remote backend requires the raw cursor context")
        payload = {
            "file_path": ctx.file_path,
            "language": ctx.language,
            "before": ctx.before,
            "after": ctx.after,
            "request_id": request_id or "",
        }
        if ctx.kernel is not None:
            payload["kernel"] = ctx.kernel
        try:
            resp = self._session.post(
                f"{self.base_url}/v1/completion", json=payload, timeout=self.timeout_s
            )
        except requests.RequestException as exc:
            raise BackendUnavailable(str(exc)) from exc
        if resp.status_code != 200:
            raise BackendUnavailable(f"service returned {resp.status_code}: {resp.text[:200]}")
        body = resp.json()
        text = body["completion_text"]
        return Completion(
            text=text,
            strategy=body["strategy"],
            generated_tokens=len(tokenize(text)) if text else 0,
            backend_id=self.backend_id,
        )

    def fingerprint(self) -> str:
        try:
            resp = self._session.get(f"{self.base_url}/healthz", timeout=self.timeout_s)
            return resp.json().get("model_fingerprint", self.backend_id)
        except requests.RequestException:
            return self.backend_id


def backend_from_config(
    kind: str,
    model_path: Optional[str] = None,
    url: Optional[str] = None,
) -> CompletionBackend:
    """Build a backend from CLI/config values."""
    if kind == "ngram":
        from . import ngram

        if not model_path:
            raise ValueError("ngram backend requires a model path")
        return ngram.NGramBackend(ngram.NGramModel.load(model_path))
    if kind == "oracle":
        if not model_path:
            raise ValueError("oracle backend requires a truth file path")
        return OracleBackend.from_file(model_path)
    if kind == "remote":
        target = url or model_path
        if not target:
            raise ValueError("remote backend requires a service url")
        return RemoteBackend(target)
    raise ValueError(f"unknown backend kind: {kind}")
