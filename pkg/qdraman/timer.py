"""Wall-clock timing of scenario phases."""

from __future__ import annotations

import time


class Timer:
    """Phase timer based on `time.perf_counter`.

    The timer starts on creation. Each call to `lap()` closes the current
    phase under a name and opens the next one.
    """

    def __init__(self) -> None:
        self._created = time.perf_counter()
        self._mark = self._created
        self._phases: list[tuple[str, float]] = []

    def lap(self, name: str) -> float:
        """Close the current phase and return its duration in seconds."""
        now = time.perf_counter()
        duration = now - self._mark
        self._phases.append((name, duration))
        self._mark = now
        return duration

    def stop(self) -> float:
        """Return the seconds elapsed since the timer was created."""
        return time.perf_counter() - self._created

    @property
    def phases(self) -> tuple[tuple[str, float], ...]:
        return tuple(self._phases)

    def report(self) -> str:
        """Render the recorded phases as `name: seconds` pairs."""
        return ' | '.join(f'{name}: {t:.3f} s' for name, t in self._phases)
