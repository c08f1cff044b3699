"""A tiny, fully specified generator so runs are reproducible in any language.

Lcg64 is the 64-bit linear congruential generator

    state <- (6364136223846793005 * state + 1442695040888963407) mod 2**64

seeded with ``state = seed mod 2**64`` followed by one step.  A uniform
double in [0, 1) is the top 53 bits of the new state times 2**-53.
``shuffle`` is the Fisher-Yates shuffle run from the last position down,
drawing ``floor(u * (i + 1))`` for position i.
"""

from __future__ import annotations

import numpy as np

_MUL = 6364136223846793005
_INC = 1442695040888963407
_MASK = (1 << 64) - 1


class Lcg64:
    def __init__(self, seed: int = 0):
        self.state = int(seed) & _MASK
        self.next_u64()

    def next_u64(self) -> int:
        self.state = (_MUL * self.state + _INC) & _MASK
        return self.state

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        return min(int(self.random() * n), n - 1)

    def uniform(self, low=0.0, high=1.0, size=None):
        if size is None:
            return low + (high - low) * self.random()
        count = int(np.prod(size))
        u = np.array([self.random() for _ in range(count)], dtype=np.float64)
        return (low + (high - low) * u).reshape(size)

    def shuffle(self, items: list) -> list:
        """Shuffle in place and return the list."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
        return items

    def permutation(self, n: int) -> list[int]:
        return self.shuffle(list(range(n)))
