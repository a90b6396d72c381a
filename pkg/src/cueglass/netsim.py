"""Loss and latency injection for loopback experiments.

ImpairedSender wraps a UDP socket's sendto: each datagram is dropped with
probability loss (seeded, so counts are reproducible) or held in a delay
queue for latency_ms before going out.  pump() must be called from the
owner's loop to flush due packets; it never blocks.
"""

from __future__ import annotations

import heapq
import random
import socket
import time


class ImpairedSender:
    def __init__(self, sock: socket.socket, loss: float = 0.0,
                 latency_ms: float = 0.0, seed: int = 0):
        if not 0.0 <= loss < 1.0:
            raise ValueError(f"loss {loss}")
        if latency_ms < 0.0:
            raise ValueError(f"latency_ms {latency_ms}")
        self.sock = sock
        self.loss = loss
        self.latency_s = latency_ms / 1000.0
        self.rng = random.Random(seed)
        self.dropped = 0
        self.sent = 0
        self._queue: list[tuple[float, int, bytes, tuple]] = []
        self._tie = 0

    def sendto(self, data: bytes, addr: tuple) -> None:
        if self.loss and self.rng.random() < self.loss:
            self.dropped += 1
            return
        if self.latency_s <= 0.0:
            self.sock.sendto(data, addr)
            self.sent += 1
            return
        due = time.monotonic() + self.latency_s
        self._tie += 1
        heapq.heappush(self._queue, (due, self._tie, data, addr))

    def pump(self) -> None:
        now = time.monotonic()
        while self._queue and self._queue[0][0] <= now:
            _, _, data, addr = heapq.heappop(self._queue)
            self.sock.sendto(data, addr)
            self.sent += 1

    def drain(self, timeout_s: float = 0.5) -> None:
        """Flush whatever is still queued, waiting for due times."""
        deadline = time.monotonic() + timeout_s
        while self._queue and time.monotonic() < deadline:
            self.pump()
            time.sleep(0.001)
        self.pump()
