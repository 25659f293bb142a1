"""
Seeded random streams.

Each stream is a PCG64 generator keyed by (seed, stream_id). Draws are plain
uniforms, one 64-bit output each, so `counter` is an exact position in the
stream and RngStream(seed, stream_id, counter) resumes it.
"""

import hashlib

import numpy as np


def _stream_key(stream_id: str) -> int:
    digest = hashlib.blake2b(stream_id.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class RngStream:
    """Reproducible uniform stream identified by (seed, stream_id, counter)"""

    def __init__(self, seed: int, stream_id: str = "root", counter: int = 0):
        self.seed = int(seed) % (1 << 64)
        self.stream_id = stream_id
        self.counter = 0
        sequence = np.random.SeedSequence(self.seed, spawn_key=(_stream_key(stream_id),))
        self._bit_generator = np.random.PCG64(sequence)
        self._generator = np.random.Generator(self._bit_generator)
        if counter:
            self._bit_generator.advance(int(counter))
            self.counter = int(counter)

    def child(self, label) -> "RngStream":
        """Independent stream for a sub-task (phase, repetition, element...)."""
        return RngStream(self.seed, f"{self.stream_id}/{label}")

    def uniform(self) -> float:
        self.counter += 1
        return float(self._generator.random())

    def uniforms(self, size: int) -> np.ndarray:
        self.counter += int(size)
        return self._generator.random(int(size))

    def index(self, m: int) -> int:
        """Uniform index in [0, m)."""
        return min(int(self.uniform() * m), m - 1)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id!r}, counter={self.counter})"
