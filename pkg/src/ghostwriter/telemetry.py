"""Suggestion lifecycle event log and adoption metrics.

Events are appended as newline-delimited JSON, one object per line. The two
headline measures: acceptance rate over suggestions displayed at least
min_display_ms (shorter displays drop out of numerator and denominator),
and the share of inserted characters that came from accepted suggestions
(large copy-pastes excluded from both terms).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

EVENT_KINDS = ("shown", "received", "accepted", "dismissed", "typed", "pasted")
_COUNTED_KINDS = ("shown", "accepted", "typed", "pasted")
_TERMINAL_KINDS = ("accepted", "dismissed")

DEFAULT_MIN_DISPLAY_MS = 750

OVERALL = "overall"


class StorageFull(OSError):
    """Event log could not be appended to durable storage."""


class MalformedEvent(ValueError):
    """Event violates the lifecycle or field rules."""


@dataclass(frozen=True)
class SuggestionEvent:
    kind: str
    uri: str
    language: str
    timestamp_ms: int
    suggestion_id: Optional[str] = None
    char_count: Optional[int] = None
    display_duration_ms: Optional[int] = None
    latency_ms: Optional[int] = None
    session_id: str = "local"

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise MalformedEvent(f"unknown event kind: {self.kind}")
        if self.kind in _COUNTED_KINDS:
            if self.char_count is None or self.char_count < 0:
                raise MalformedEvent(f"{self.kind} event needs char_count >= 0")
        if self.kind in _TERMINAL_KINDS:
            if self.display_duration_ms is None or self.display_duration_ms < 0:
                raise MalformedEvent(f"{self.kind} event needs display_duration_ms >= 0")
        if self.kind in ("shown", "received", "accepted", "dismissed"):
            if not self.suggestion_id:
                raise MalformedEvent(f"{self.kind} event needs a suggestion_id")

    def to_json(self) -> dict:
        record = {
            "kind": self.kind,
            "uri": self.uri,
            "language": self.language,
            "timestamp_ms": self.timestamp_ms,
            "session_id": self.session_id,
        }
        for name in ("suggestion_id", "char_count", "display_duration_ms", "latency_ms"):
            value = getattr(self, name)
            if value is not None:
                record[name] = value
        return record

    @classmethod
    def from_json(cls, record: dict) -> "SuggestionEvent":
        return cls(
            kind=record["kind"],
            uri=record.get("uri", ""),
            language=record.get("language", ""),
            timestamp_ms=record["timestamp_ms"],
            suggestion_id=record.get("suggestion_id"),
            char_count=record.get("char_count"),
            display_duration_ms=record.get("display_duration_ms"),
            latency_ms=record.get("latency_ms"),
            session_id=record.get("session_id", "local"),
        )


class EventLog:
    """Append-only event sink; validates the per-suggestion lifecycle."""

    def __init__(self, path: Optional[str] = None):
        self._path = path
        self._fh = open(path, "a", encoding="utf-8") if path else None
        self._events: list[SuggestionEvent] = []
        self._shown: dict[str, SuggestionEvent] = {}
        self._closed_ids: set[str] = set()

    def record(self, event: SuggestionEvent) -> None:
        if event.kind == "shown":
            if event.suggestion_id in self._shown or event.suggestion_id in self._closed_ids:
                raise MalformedEvent(f"duplicate shown for {event.suggestion_id}")
            self._shown[event.suggestion_id] = event
        elif event.kind in _TERMINAL_KINDS:
            shown = self._shown.get(event.suggestion_id)
            if shown is None:
                raise MalformedEvent(
                    f"{event.kind} for {event.suggestion_id} without a prior shown"
                )
            if event.kind == "accepted" and event.char_count != shown.char_count:
                raise MalformedEvent(
                    "accepted char_count must equal the shown char_count"
                )
            del self._shown[event.suggestion_id]
            self._closed_ids.add(event.suggestion_id)
        self._events.append(event)
        if self._fh is not None:
            try:
                self._fh.write(json.dumps(event.to_json(), ensure_ascii=False) + "\n")
                self._fh.flush()
            except OSError as exc:
                raise StorageFull(str(exc)) from exc

    def events(self) -> list[SuggestionEvent]:
        return list(self._events)

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def read_events(path: str) -> list[SuggestionEvent]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(SuggestionEvent.from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError) as exc:
                raise MalformedEvent(f"{path}:{lineno}: {exc}") from exc
    return out


def _display_durations(events: Iterable[SuggestionEvent]) -> list[tuple[str, int, bool]]:
    """(language, display_duration_ms, accepted) per terminally-resolved suggestion."""
    resolved = []
    for event in events:
        if event.kind in _TERMINAL_KINDS:
            resolved.append(
                (event.language, event.display_duration_ms, event.kind == "accepted")
            )
    return resolved


def acceptance_rate(
    events: Iterable[SuggestionEvent], min_display_ms: int = DEFAULT_MIN_DISPLAY_MS
) -> dict[str, float]:
    """Accepted over displayed, counting only displays >= min_display_ms."""
    eligible: dict[str, list[bool]] = {}
    for language, duration, accepted in _display_durations(events):
        if duration >= min_display_ms:
            eligible.setdefault(language, []).append(accepted)
            eligible.setdefault(OVERALL, []).append(accepted)
    return {
        language: (sum(flags) / len(flags)) if flags else 0.0
        for language, flags in eligible.items()
    }


def pct_chars_from_ai(events: Iterable[SuggestionEvent]) -> dict[str, float]:
    """accepted_chars / (typed_chars + accepted_chars); pastes excluded."""
    typed: dict[str, int] = {}
    accepted: dict[str, int] = {}
    for event in events:
        if event.kind == "typed":
            for key in (event.language, OVERALL):
                typed[key] = typed.get(key, 0) + event.char_count
        elif event.kind == "accepted":
            for key in (event.language, OVERALL):
                accepted[key] = accepted.get(key, 0) + event.char_count
    out = {}
    for language in set(typed) | set(accepted):
        a = accepted.get(language, 0)
        t = typed.get(language, 0)
        out[language] = a / (t + a) if (t + a) else 0.0
    return out


@dataclass(frozen=True)
class MetricsRow:
    suggestions_shown: int
    acceptance_rate: float
    pct_chars_from_ai: float
    users: int


@dataclass(frozen=True)
class MetricsReport:
    rows: dict[str, MetricsRow] = field(default_factory=dict)
    overall: Optional[MetricsRow] = None
    min_display_ms: int = DEFAULT_MIN_DISPLAY_MS

    def to_json(self) -> dict:
        def row_dict(row):
            return {
                "suggestions_shown": row.suggestions_shown,
                "acceptance_rate": round(row.acceptance_rate, 6),
                "pct_chars_from_ai": round(row.pct_chars_from_ai, 6),
                "users": row.users,
            }

        return {
            "min_display_ms": self.min_display_ms,
            "languages": {lang: row_dict(row) for lang, row in sorted(self.rows.items())},
            "overall": row_dict(self.overall) if self.overall else None,
        }


def build_report(
    events: Iterable[SuggestionEvent], min_display_ms: int = DEFAULT_MIN_DISPLAY_MS
) -> MetricsReport:
    events = list(events)
    if not events:
        return MetricsReport(min_display_ms=min_display_ms)
    rates = acceptance_rate(events, min_display_ms)
    pcts = pct_chars_from_ai(events)
    shown: dict[str, int] = {}
    users: dict[str, set] = {}
    for event in events:
        keys = (event.language, OVERALL)
        for key in keys:
            users.setdefault(key, set()).add(event.session_id)
        if event.kind == "shown":
            for key in keys:
                shown[key] = shown.get(key, 0) + 1

    def row(language):
        return MetricsRow(
            suggestions_shown=shown.get(language, 0),
            acceptance_rate=rates.get(language, 0.0),
            pct_chars_from_ai=pcts.get(language, 0.0),
            users=len(users.get(language, set())),
        )

    languages = sorted(
        {e.language for e in events if e.language}
    )
    return MetricsReport(
        rows={lang: row(lang) for lang in languages},
        overall=row(OVERALL),
        min_display_ms=min_display_ms,
    )


def render_table(report: MetricsReport) -> str:
    headers = ("Language", "Shown", "Acceptance rate", "Chars from AI", "Users")
    lines = ["{:<14} {:>8} {:>16} {:>14} {:>7}".format(*headers)]
    entries = list(report.rows.items())
    if report.overall is not None:
        entries.append((OVERALL, report.overall))
    for language, row in entries:
        lines.append(
            "{:<14} {:>8} {:>15.1%} {:>13.1%} {:>7}".format(
                language,
                row.suggestions_shown,
                row.acceptance_rate,
                row.pct_chars_from_ai,
                row.users,
            )
        )
    return "\n".join(lines)


def render_csv(report: MetricsReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["language", "suggestions_shown", "acceptance_rate", "pct_chars_from_ai", "users"])
    entries = list(sorted(report.rows.items()))
    if report.overall is not None:
        entries.append((OVERALL, report.overall))
    for language, row in entries:
        writer.writerow(
            [language, row.suggestions_shown, round(row.acceptance_rate, 6), round(row.pct_chars_from_ai, 6), row.users]
        )
    return buf.getvalue()
