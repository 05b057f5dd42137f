"""Portable, seedable Gaussian generator for layout jitter.

The algorithm is fixed so jitter studies reproduce bit-for-bit in any
language:

* State: one unsigned 64-bit integer, initialised to ``seed mod 2**64``.
* Step (SplitMix64)::

      state += 0x9E3779B97F4A7C15
      z = state
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
      z = (z ^ (z >> 27)) * 0x94D049BB133111EB
      return z ^ (z >> 31)

  all arithmetic modulo 2**64.
* Uniform double in [0, 1): ``(next() >> 11) * 2**-53``.
* Normal pairs (Box-Muller): draw ``u1, u2``; with ``r = sqrt(-2 ln(1 - u1))``
  emit ``r cos(2 pi u2)`` then ``r sin(2 pi u2)``.
"""

import math

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
NAME = "splitmix64-boxmuller"


class SplitMix64:
    def __init__(self, seed: int):
        self.state = int(seed) & _MASK
        self._spare = None

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def normal(self) -> float:
        if self._spare is not None:
            z, self._spare = self._spare, None
            return z
        u1 = self.uniform()
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(1.0 - u1))
        self._spare = r * math.sin(2.0 * math.pi * u2)
        return r * math.cos(2.0 * math.pi * u2)

    def normals(self, shape) -> np.ndarray:
        n = int(np.prod(shape))
        return np.array([self.normal() for _ in range(n)], dtype=float).reshape(shape)
