"""SplitMix64 generator used for all in-session randomness.

The algorithm is part of the replay contract: a play log stores only the
seed, so every consumer of randomness must draw from this exact sequence
in brick execution order.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """Deterministic 64-bit generator with a single u64 of state."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ValueError("seed must be an integer")
        if not 0 <= seed <= _MASK64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        self.state = seed

    def next_u64(self) -> int:
        """Advance the state and return the next 64-bit output."""
        self.state = (self.state + _GAMMA) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def next_int(self, lo: int, hi: int) -> int:
        """Uniform-ish integer in [lo, hi]; always consumes exactly one output."""
        if lo > hi:
            raise ValueError(f"empty range: lo={lo} > hi={hi}")
        z = self.next_u64()
        return lo + z % (hi - lo + 1)
