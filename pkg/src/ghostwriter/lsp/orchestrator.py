"""Completion orchestration: debounce, cache, suppression, telemetry.

Deterministic core behind the JSON-RPC server. Callers feed it editor
events and drive time explicitly: `poll()` hands back backend dispatch
orders once a request's quiet window has elapsed, and `deliver()` resolves
a dispatched request, refusing to surface results that were superseded
while in flight. All timestamps come from the injected clock, so tests run
it against simulated time.

Per document there is at most one live request: a newer request cancels the
older one, a document change resets a waiting request's quiet window and
cancels an in-flight one (its context is stale). Suggestions are suppressed
when anything other than closing brackets sits right of the cursor.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from ..prompt import (
    DEFAULT_METADATA_FIELDS,
    BudgetTooSmall,
    CursorContext,
    build_inference_input,
)
from ..telemetry import EventLog, SuggestionEvent
from ..tokenization import DEFAULT_TRIGGERS, TriggerSet
from .cache import DEFAULT_CAPACITY, CompletionCache
from .clock import MonotonicClock
from .debounce import DEFAULT_WINDOW_MS
from .documents import DocumentState, VersionRegression

logger = logging.getLogger(__name__)

ALLOWED_CLOSERS = frozenset((")", "]", "}"))

WAITING = "waiting"
IN_FLIGHT = "in_flight"
CANCELLED = "cancelled"
COMPLETED = "completed"


@dataclass
class OrchestratorConfig:
    debounce_ms: int = DEFAULT_WINDOW_MS
    cache_capacity: int = DEFAULT_CAPACITY
    min_display_ms: int = 750
    paste_threshold_chars: int = 50
    budget: int = 2048
    split: float = 0.7
    session_id: str = "local"
    triggers: TriggerSet = DEFAULT_TRIGGERS
    metadata_fields: tuple = DEFAULT_METADATA_FIELDS


@dataclass
class PendingRequest:
    request_id: str
    uri: str
    line: int
    character: int
    version: int
    deadline_ms: int
    state: str = WAITING
    cache_key: Optional[str] = None


@dataclass
class _Outstanding:
    request_id: str
    uri: str
    language: str
    text: str
    anchor_offset: int
    shown_at_ms: int
    accepted_emitted: bool = False


@dataclass(frozen=True)
class DispatchOrder:
    request_id: str
    payload: dict


@dataclass(frozen=True)
class InlineDecision:
    """Immediate items, or a deadline the server should poll at."""

    request_id: str
    items: Optional[list] = None
    deadline_ms: Optional[int] = None
    cancelled: tuple = ()

    @property
    def resolved(self) -> bool:
        return self.items is not None


@dataclass(frozen=True)
class PollResult:
    dispatches: list[DispatchOrder] = field(default_factory=list)
    resolved: list[tuple[str, list]] = field(default_factory=list)


def uri_to_path(uri: str) -> str:
    return uri[len("file://") :] if uri.startswith("file://") else uri


def suppression_allows(right_of_cursor: str) -> bool:
    """Suggest only when the rest of the line is closers (or blank)."""
    trimmed = right_of_cursor.strip()
    return all(ch in ALLOWED_CLOSERS for ch in trimmed)


class Orchestrator:
    def __init__(
        self,
        clock=None,
        telemetry: Optional[EventLog] = None,
        config: Optional[OrchestratorConfig] = None,
    ):
        self.clock = clock or MonotonicClock()
        self.telemetry = telemetry or EventLog()
        self.config = config or OrchestratorConfig()
        self.cache = CompletionCache(self.config.cache_capacity)
        self._docs: dict[str, DocumentState] = {}
        self._pending: dict[str, PendingRequest] = {}
        self._requests: dict[str, PendingRequest] = {}
        self._outstanding: dict[str, _Outstanding] = {}
        self._sent: dict[str, tuple[int, int, str, str]] = {}
        self._accepted_ids: set[str] = set()

    # -- document lifecycle -------------------------------------------------

    def did_open(self, uri: str, language: str, text: str, version: int) -> None:
        self._docs[uri] = DocumentState(uri, language or "plaintext", text, version)

    def did_close(self, uri: str) -> list[str]:
        self._docs.pop(uri, None)
        self._outstanding.pop(uri, None)
        return self._cancel_pending(uri)

    def did_change(self, uri: str, changes: list[dict], version: int) -> list[str]:
        """Apply edits; returns request ids cancelled by the change."""
        doc = self._docs.get(uri)
        if doc is None:
            logger.warning("didChange for unopened document %s", uri)
            return []
        now = self.clock.now_ms()
        insertions = doc.apply(changes, version)

        outstanding = self._outstanding.get(uri)
        consumed = False
        for ins in insertions:
            if (
                outstanding is not None
                and not consumed
                and ins.text == outstanding.text
                and ins.offset == outstanding.anchor_offset
            ):
                if not outstanding.accepted_emitted:
                    self._emit_accepted(outstanding, now)
                consumed = True
                continue
            if ins.text:
                kind = (
                    "pasted"
                    if len(ins.text) > self.config.paste_threshold_chars
                    else "typed"
                )
                self._record(
                    kind, uri, doc.language, now, char_count=len(ins.text)
                )
        if outstanding is not None:
            if not consumed and not outstanding.accepted_emitted:
                self._record(
                    "dismissed",
                    uri,
                    outstanding.language,
                    now,
                    suggestion_id=outstanding.request_id,
                    display_duration_ms=now - outstanding.shown_at_ms,
                )
            self._outstanding.pop(uri, None)

        cancelled = []
        pending = self._pending.get(uri)
        if pending is not None:
            if pending.state == WAITING:
                pending.deadline_ms = now + self.config.debounce_ms
                pending.version = version
            elif pending.state == IN_FLIGHT:
                pending.state = CANCELLED
                cancelled.append(pending.request_id)
                del self._pending[uri]
        return cancelled

    # -- completion requests ------------------------------------------------

    def inline_completions(self, request_id: str, uri: str, line: int, character: int) -> InlineDecision:
        now = self.clock.now_ms()
        cancelled = tuple(self._cancel_pending(uri))
        doc = self._docs.get(uri)
        if doc is None:
            return InlineDecision(request_id, items=[], cancelled=cancelled)
        if not suppression_allows(doc.right_of(line, character)):
            return InlineDecision(request_id, items=[], cancelled=cancelled)
        key = self._context_key(doc, line, character)
        if key is None:
            return InlineDecision(request_id, items=[], cancelled=cancelled)
        response = self.cache.lookup(key)
        if response is not None:
            self._note_sent(request_id, now, uri, doc.language)
            items = self._surface(request_id, uri, line, character, response, now)
            return InlineDecision(request_id, items=items, cancelled=cancelled)
        pending = PendingRequest(
            request_id=request_id,
            uri=uri,
            line=line,
            character=character,
            version=doc.version,
            deadline_ms=now + self.config.debounce_ms,
        )
        self._pending[uri] = pending
        self._requests[request_id] = pending
        return InlineDecision(request_id, deadline_ms=pending.deadline_ms, cancelled=cancelled)

    def next_deadline(self) -> Optional[int]:
        deadlines = [p.deadline_ms for p in self._pending.values() if p.state == WAITING]
        return min(deadlines) if deadlines else None

    def poll(self) -> PollResult:
        """Dispatch requests whose quiet window has elapsed."""
        now = self.clock.now_ms()
        result = PollResult()
        for uri, pending in list(self._pending.items()):
            if pending.state != WAITING or pending.deadline_ms > now:
                continue
            doc = self._docs.get(uri)
            if doc is None:
                self._finish_waiting(pending, CANCELLED)
                result.resolved.append((pending.request_id, []))
                continue
            if not suppression_allows(doc.right_of(pending.line, pending.character)):
                self._finish_waiting(pending, COMPLETED)
                result.resolved.append((pending.request_id, []))
                continue
            key = self._context_key(doc, pending.line, pending.character)
            if key is None:
                self._finish_waiting(pending, COMPLETED)
                result.resolved.append((pending.request_id, []))
                continue
            response = self.cache.lookup(key)
            if response is not None:
                self._finish_waiting(pending, COMPLETED)
                self._note_sent(pending.request_id, now, uri, doc.language)
                items = self._surface(
                    pending.request_id, uri, pending.line, pending.character, response, now
                )
                result.resolved.append((pending.request_id, items))
                continue
            before, after = doc.split_at(pending.line, pending.character)
            pending.state = IN_FLIGHT
            pending.cache_key = key
            self._note_sent(pending.request_id, now, uri, doc.language)
            result.dispatches.append(
                DispatchOrder(
                    request_id=pending.request_id,
                    payload={
                        "file_path": uri_to_path(uri),
                        "language": doc.language,
                        "before": before,
                        "after": after,
                        "request_id": pending.request_id,
                    },
                )
            )
        return result

    def deliver(
        self, request_id: str, response: Optional[dict], error: bool = False
    ) -> Optional[tuple[str, list]]:
        """Resolve a dispatched request; None if it was superseded."""
        pending = self._requests.pop(request_id, None)
        if pending is None:
            return None
        usable = not error and response is not None
        if usable and pending.cache_key is not None:
            # even a superseded response is a valid cache entry for its context
            self.cache.insert(pending.cache_key, response)
        if pending.state != IN_FLIGHT:
            return None
        pending.state = COMPLETED
        if self._pending.get(pending.uri) is pending:
            del self._pending[pending.uri]
        if not usable:
            return (request_id, [])
        now = self.clock.now_ms()
        items = self._surface(
            request_id, pending.uri, pending.line, pending.character, response, now
        )
        return (request_id, items)

    # -- client notifications -----------------------------------------------

    def cc_received(self, request_id: str, client_timestamp_ms: int) -> None:
        sent = self._sent.get(request_id)
        if sent is None:
            logger.warning("cc/received for unknown request %s", request_id)
            return
        _mono, wall, uri, language = sent
        self._record(
            "received",
            uri,
            language,
            self.clock.now_ms(),
            suggestion_id=request_id,
            latency_ms=max(0, client_timestamp_ms - wall),
        )

    def cc_accepted(self, request_id: str) -> None:
        for outstanding in self._outstanding.values():
            if outstanding.request_id == request_id:
                if not outstanding.accepted_emitted:
                    self._emit_accepted(outstanding, self.clock.now_ms())
                return
        if request_id in self._accepted_ids:
            return  # edit-derived acceptance already counted it
        logger.warning("cc/accepted for unknown suggestion %s", request_id)

    # -- internals ------------------------------------------------------------

    def _note_sent(self, request_id: str, now: int, uri: str, language: str) -> None:
        self._sent[request_id] = (now, self.clock.wall_ms(), uri, language)
        if len(self._sent) > 10_000:
            for stale in list(self._sent)[:5_000]:
                del self._sent[stale]

    def _finish_waiting(self, pending: PendingRequest, state: str) -> None:
        pending.state = state
        self._pending.pop(pending.uri, None)
        self._requests.pop(pending.request_id, None)

    def _cancel_pending(self, uri: str) -> list[str]:
        pending = self._pending.pop(uri, None)
        if pending is None or pending.state not in (WAITING, IN_FLIGHT):
            return []
        if pending.state == WAITING:
            # no worker holds it; in-flight entries are reaped by deliver()
            self._requests.pop(pending.request_id, None)
        pending.state = CANCELLED
        return [pending.request_id]

    def _context_key(self, doc: DocumentState, line: int, character: int) -> Optional[str]:
        before, after = doc.split_at(line, character)
        ctx = CursorContext(
            file_path=uri_to_path(doc.uri),
            language=doc.language,
            before=before,
            after=after,
        )
        try:
            prompt = build_inference_input(
                ctx,
                budget=self.config.budget,
                split=self.config.split,
                triggers=self.config.triggers,
                metadata_fields=self.config.metadata_fields,
            )
        except BudgetTooSmall:
            logger.warning("context for %s does not fit budget %d", doc.uri, self.config.budget)
            return None
        return prompt.cache_key()

    def _surface(
        self, request_id: str, uri: str, line: int, character: int, response: dict, now: int
    ) -> list:
        text = response.get("completion_text", "")
        if not text:
            return []
        doc = self._docs.get(uri)
        language = doc.language if doc else "plaintext"
        previous = self._outstanding.get(uri)
        if previous is not None and not previous.accepted_emitted:
            self._record(
                "dismissed",
                uri,
                previous.language,
                now,
                suggestion_id=previous.request_id,
                display_duration_ms=now - previous.shown_at_ms,
            )
        self._record(
            "shown", uri, language, now, suggestion_id=request_id, char_count=len(text)
        )
        anchor = doc.offset_at(line, character) if doc else 0
        self._outstanding[uri] = _Outstanding(
            request_id=request_id,
            uri=uri,
            language=language,
            text=text,
            anchor_offset=anchor,
            shown_at_ms=now,
        )
        position = {"line": line, "character": character}
        return [
            {
                "insertText": text,
                "range": {"start": position, "end": position},
                "requestId": request_id,
            }
        ]

    def _emit_accepted(self, outstanding: _Outstanding, now: int) -> None:
        self._record(
            "accepted",
            outstanding.uri,
            outstanding.language,
            now,
            suggestion_id=outstanding.request_id,
            char_count=len(outstanding.text),
            display_duration_ms=now - outstanding.shown_at_ms,
        )
        outstanding.accepted_emitted = True
        self._accepted_ids.add(outstanding.request_id)

    def _record(self, kind: str, uri: str, language: str, now: int, **fields) -> None:
        self.telemetry.record(
            SuggestionEvent(
                kind=kind,
                uri=uri,
                language=language,
                timestamp_ms=now,
                session_id=self.config.session_id,
                **fields,
            )
        )
