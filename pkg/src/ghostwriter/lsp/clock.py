"""Injectable time source so orchestration logic is testable with fake time."""

import time


class MonotonicClock:
    """now_ms for scheduling decisions, wall_ms for cross-process latency math."""

    def now_ms(self) -> int:
        return time.monotonic_ns() // 1_000_000

    def wall_ms(self) -> int:
        return time.time_ns() // 1_000_000
