"""Editor document mirror: versioned text with line-indexed positions.

Applies full and incremental (range-based) content changes in order and
reports each insertion so telemetry can classify it. Positions use
(line, character) with character counted in code points.
"""

from __future__ import annotations

from dataclasses import dataclass


class VersionRegression(ValueError):
    """didChange carried a version not newer than the current one."""


@dataclass(frozen=True)
class Insertion:
    offset: int
    deleted: int
    text: str


class DocumentState:
    def __init__(self, uri: str, language: str, text: str, version: int):
        self.uri = uri
        self.language = language
        self.text = text
        self.version = version
        self._line_starts: list[int] | None = None

    def _lines(self) -> list[int]:
        if self._line_starts is None:
            starts = [0]
            for i, ch in enumerate(self.text):
                if ch == "\n":
                    starts.append(i + 1)
            self._line_starts = starts
        return self._line_starts

    def offset_at(self, line: int, character: int) -> int:
        starts = self._lines()
        if line < 0:
            return 0
        if line >= len(starts):
            return len(self.text)
        start = starts[line]
        end = starts[line + 1] - 1 if line + 1 < len(starts) else len(self.text)
        return min(start + max(0, character), end)

    def line_end(self, line: int) -> int:
        """Offset of the end of the line, excluding its newline."""
        starts = self._lines()
        if line + 1 < len(starts):
            end = starts[line + 1] - 1
            if end > 0 and self.text[end - 1 : end + 1] == "\r\n":
                end -= 1
            return end
        return len(self.text)

    def right_of(self, line: int, character: int) -> str:
        """Text from the position to the end of its line."""
        start = self.offset_at(line, character)
        return self.text[start : max(start, self.line_end(line))]

    def split_at(self, line: int, character: int) -> tuple[str, str]:
        offset = self.offset_at(line, character)
        return self.text[:offset], self.text[offset:]

    def apply(self, changes: list[dict], version: int) -> list[Insertion]:
        """Apply a didChange batch; returns effective insertions in order."""
        if version <= self.version:
            raise VersionRegression(
                f"{self.uri}: version {version} <= current {self.version}"
            )
        insertions = []
        for change in changes:
            text = change.get("text", "")
            rng = change.get("range")
            if rng is None:
                # full-document sync carries no edit deltas to classify
                self.text = text
                self._line_starts = None
                continue
            start = self.offset_at(rng["start"]["line"], rng["start"]["character"])
            end = self.offset_at(rng["end"]["line"], rng["end"]["character"])
            if end < start:
                start, end = end, start
            self.text = self.text[:start] + text + self.text[end:]
            self._line_starts = None
            insertions.append(Insertion(offset=start, deleted=end - start, text=text))
        self.version = version
        return insertions
