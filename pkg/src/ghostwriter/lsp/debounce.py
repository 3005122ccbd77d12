"""Debounce scheduling: a dispatch fires only after a quiet input window.

A keystroke burst coalesces into one dispatch at last_keystroke + window;
any keystroke arriving inside the window pushes the dispatch out.
"""

from __future__ import annotations

from typing import Iterable

DEFAULT_WINDOW_MS = 20


def dispatch_times(event_times_ms: Iterable[int], window_ms: int = DEFAULT_WINDOW_MS) -> list[int]:
    """Dispatch times for a keystroke trace: one per maximal quiet gap."""
    if window_ms <= 0:
        raise ValueError("window_ms must be positive")
    times = sorted(event_times_ms)
    out = []
    for i, t in enumerate(times):
        if i + 1 == len(times) or times[i + 1] - t >= window_ms:
            out.append(t + window_ms)
    return out
