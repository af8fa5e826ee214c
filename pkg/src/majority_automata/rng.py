"""splitmix64 streams.

The generator is fixed bit-exactly so that colorings, trial seeds and tie
draws are reproducible across runs and machines.
"""

from __future__ import annotations

import struct

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    """The splitmix64 output finalizer applied to a 64-bit word."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & MASK64
    return z ^ (z >> 31)


def splitmix64(x: int) -> int:
    """First output of a splitmix64 stream seeded with ``x``."""
    return mix64((x + GOLDEN_GAMMA) & MASK64)


def to_unit(word: int) -> float:
    """Map a 64-bit output to [0, 1) through its top 53 bits."""
    return (word >> 11) * _INV_2_53


class SplitMix64:
    """Sequential splitmix64 generator.

    >>> rng = SplitMix64(0)
    >>> hex(rng.next())
    '0xe220a8397b1dcdaf'
    """

    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return mix64(self.state)

    def random(self) -> float:
        return to_unit(self.next())

    def block(self, count: int) -> np.ndarray:
        """The next ``count`` outputs as a uint64 array; advances the state."""
        out = outputs(self.state, count)
        self.state = (self.state + count * GOLDEN_GAMMA) & MASK64
        return out

    def uniforms(self, count: int) -> np.ndarray:
        return (self.block(count) >> np.uint64(11)).astype(np.float64) * _INV_2_53


def outputs(state: int, count: int) -> np.ndarray:
    """Outputs 1..count of a stream whose current state is ``state``.

    Vectorized: output k only depends on ``state + k * gamma``.
    """
    k = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(state & MASK64) + k * np.uint64(GOLDEN_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MUL1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MUL2)
        z = z ^ (z >> np.uint64(31))
    return z


def float_bits(x: float) -> int:
    """IEEE-754 binary64 bit pattern of ``x`` as an unsigned integer."""
    return struct.unpack("<Q", struct.pack("<d", float(x)))[0]


def trial_seed(base_seed: int, trial_index: int, p_b: float) -> int:
    """Seed of one Monte-Carlo trial.

    ``splitmix64(base_seed ^ trial_index ^ bits(p_b))``; every trial is
    replayable on its own without advancing a shared stream.
    """
    return splitmix64((base_seed ^ trial_index ^ float_bits(p_b)) & MASK64)
