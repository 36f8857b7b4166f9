"""Seeded, platform-independent shuffling.

The bit stream is numpy's PCG64 (PCG XSL RR 128/64) seeded through
``SeedSequence(seed)``; raw 64-bit outputs of a bit generator are stable
across numpy releases and platforms, unlike ``Generator`` methods. On top of
that stream the shuffle is a plain Fisher-Yates with rejection sampling for
unbiased bounded integers, so the permutation depends only on (seed, n).
"""

from __future__ import annotations

import numpy as np

_TWO64 = 1 << 64


class SeededStream:
    def __init__(self, seed: int):
        self._bits = np.random.PCG64(np.random.SeedSequence(int(seed)))

    def next_u64(self) -> int:
        return int(self._bits.random_raw())

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = _TWO64 - _TWO64 % bound
        while True:
            r = self.next_u64()
            if r < limit:
                return r % bound


def shuffled(items, seed: int) -> list:
    out = list(items)
    stream = SeededStream(seed)
    for i in range(len(out) - 1, 0, -1):
        j = stream.below(i + 1)
        out[i], out[j] = out[j], out[i]
    return out
