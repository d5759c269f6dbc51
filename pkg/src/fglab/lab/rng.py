"""Seeded generator shared by every experiment.

The algorithm is SplitMix64, so witnesses can be reproduced in any language:

    state = (state + 0x9E3779B97F4A7C15) mod 2^64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2^64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2^64
    output z ^ (z >> 31)

``below(n)`` returns ``next() % n``.  The initial state is the seed.
"""
from __future__ import annotations

_MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next() % n

    def element(self, spec, nonzero: bool = False):
        """Uniform element of a field, coordinates drawn low to high."""
        while True:
            a = spec([self.below(spec.p) for _ in range(spec.n)])
            if not (nonzero and a.is_zero()):
                return a
