from __future__ import annotations

import threading
import time


class VirtualClock:
    """Monotonic simulated time in seconds.

    ``scale`` converts virtual to wall-clock waiting: 0 makes every delay
    instantaneous, 1 waits in real time.
    """

    def __init__(self, scale: float = 0.0, start: float = 0.0):
        if scale < 0:
            raise ValueError("clock scale must be non-negative")
        self.scale = scale
        self._now = float(start)
        self._lock = threading.Lock()

    def now(self) -> float:
        with self._lock:
            return self._now

    def advance_to(self, t: float) -> float:
        with self._lock:
            if t > self._now:
                self._now = float(t)
            return self._now

    def wait(self, seconds: float) -> None:
        """Block the caller for ``seconds`` of virtual time (real time x scale)."""
        if self.scale > 0 and seconds > 0:
            time.sleep(seconds * self.scale)
