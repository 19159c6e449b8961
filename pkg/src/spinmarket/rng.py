"""Deterministic pseudo-random streams for reproducible simulations.

The generator is xoshiro256** (64-bit xor/shift/rotate family). State is
seeded from a single 64-bit integer by iterating splitmix64, the standard
mixing function for this family, so identical seeds reproduce identical
streams on any build. Per-replicate sub-streams are derived with
`derive_seed`, which chains the splitmix64 finalizer over (seed, index)
pairs.

Hot loops (the dynamics kernel) consume the stream through the numba
kernels `next_u64` / `next_uniform`; the `Xoshiro256` wrapper drives the
same kernels from Python so both paths see bit-identical sequences.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# uint64 constants for the numba kernels
_U5 = np.uint64(5)
_U7 = np.uint64(7)
_U9 = np.uint64(9)
_U11 = np.uint64(11)
_U17 = np.uint64(17)
_U19 = np.uint64(19)
_U45 = np.uint64(45)
_U57 = np.uint64(57)

# 2**-53: maps the top 53 bits of a draw onto [0, 1)
_INV_2_53 = 1.0 / 9007199254740992.0


def mix64(x: int) -> int:
    """splitmix64 finalizer: a 64-bit avalanche mix of x."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def splitmix64_next(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state; returns (new_state, output)."""
    state = (state + _GOLDEN) & _MASK64
    return state, mix64(state)


def derive_seed(master: int, *indices: int) -> int:
    """Derive a sub-stream seed from a master seed and integer indices.

    Chained so derive_seed(s, a, b) differs from derive_seed(s, b, a).
    """
    s = master & _MASK64
    for ix in indices:
        s = mix64((s + _GOLDEN * (ix + 1)) & _MASK64)
    return s


def seed_state(seed: int) -> np.ndarray:
    """Expand a 64-bit seed into the four xoshiro256** state words."""
    state = np.empty(4, dtype=np.uint64)
    s = seed & _MASK64
    for i in range(4):
        s, out = splitmix64_next(s)
        state[i] = out
    return state


@njit(cache=True, nogil=True)
def next_u64(s):
    """One xoshiro256** step; mutates the 4-word state array."""
    x = s[1] * _U5
    result = ((x << _U7) | (x >> _U57)) * _U9
    t = s[1] << _U17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = (s[3] << _U45) | (s[3] >> _U19)
    return result


@njit(cache=True, nogil=True)
def next_uniform(s):
    """Uniform double in [0, 1) from the top 53 bits of one draw."""
    return (next_u64(s) >> _U11) * _INV_2_53


class Xoshiro256:
    """Python-side view of a xoshiro256** stream.

    Wraps the same jitted step function the simulation kernel uses, so a
    wrapper seeded identically to a kernel run consumes the identical
    sequence of words.
    """

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        self._state = seed_state(seed)

    def next_u64(self) -> int:
        return int(next_u64(self._state))

    def random(self) -> float:
        """Uniform double in [0, 1)."""
        return float(next_uniform(self._state))

    def randbelow(self, n: int) -> int:
        """Unbiased uniform integer in [0, n) by rejection sampling."""
        if n <= 0:
            raise ValueError("randbelow needs n >= 1")
        limit = ((1 << 64) // n) * n
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def state(self) -> np.ndarray:
        """The raw 4-word state (shared, not copied)."""
        return self._state
