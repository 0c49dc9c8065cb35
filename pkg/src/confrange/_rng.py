"""Seeded 64-bit LCG with vectorised jump-ahead.

The generator is deliberately simple so the same streams can be
reproduced outside Python: state update ``s <- a*s + c (mod 2**64)``,
uniforms from the top 53 bits, normals by Box-Muller.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
LCG_A = 6364136223846793005
LCG_C = 1442695040888963407

_TWO_NEG_53 = 2.0**-53

# jump tables: _MULT[k] = a**(k+1), _INCR[k] = c * (1 + a + ... + a**k)
_MULT = np.empty(0, dtype=np.uint64)
_INCR = np.empty(0, dtype=np.uint64)


def _tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    global _MULT, _INCR
    if n > _MULT.size:
        size = max(n, 2 * _MULT.size, 1024)
        mult = np.cumprod(np.full(size, LCG_A, dtype=np.uint64), dtype=np.uint64)
        powers = np.empty(size, dtype=np.uint64)
        powers[0] = 1
        powers[1:] = mult[:-1]
        incr = np.cumsum(powers, dtype=np.uint64) * np.uint64(LCG_C)
        _MULT, _INCR = mult, incr
    return _MULT[:n], _INCR[:n]


def splitmix64(x: int) -> int:
    """SplitMix64 finaliser; used to derive well-mixed sub-seeds."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def sub_seed(seed: int, index: int) -> int:
    """Per-item seed, independent of the order items are generated in."""
    return splitmix64((seed & MASK64) ^ splitmix64(index & MASK64))


class LCG:
    """64-bit linear congruential generator.

    Parameters
    ----------
    seed : int
        Any integer; reduced modulo 2**64 and used directly as the state.
    """

    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (LCG_A * self.state + LCG_C) & MASK64
        return self.state

    def random(self) -> float:
        """One uniform draw in the open interval (0, 1)."""
        return ((self.next_u64() >> 11) + 0.5) * _TWO_NEG_53

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        return min(int(self.random() * n), n - 1)

    def _raw(self, n: int) -> np.ndarray:
        mult, incr = _tables(n)
        states = mult * np.uint64(self.state) + incr
        self.state = int(states[-1])
        return states

    def uniform(self, size: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        """``size`` uniforms in (low, high), identical to repeated :meth:`random`."""
        if size <= 0:
            return np.empty(0)
        u = ((self._raw(size) >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_NEG_53
        if low != 0.0 or high != 1.0:
            u = low + (high - low) * u
        return u

    def normal(self, size: int, scale: float = 1.0) -> np.ndarray:
        """Standard normals by Box-Muller, two per pair of uniforms."""
        if size <= 0:
            return np.empty(0)
        pairs = (size + 1) // 2
        u = self.uniform(2 * pairs)
        radius = np.sqrt(-2.0 * np.log(u[0::2]))
        angle = 2.0 * np.pi * u[1::2]
        z = np.empty(2 * pairs)
        z[0::2] = radius * np.cos(angle)
        z[1::2] = radius * np.sin(angle)
        z = z[:size]
        if scale != 1.0:
            z *= scale
        return z

    def shuffle(self, items: list) -> list:
        """Fisher-Yates shuffle, returns a new list."""
        out = list(items)
        for i in range(len(out) - 1, 0, -1):
            j = self.below(i + 1)
            out[i], out[j] = out[j], out[i]
        return out
