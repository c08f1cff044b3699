"""Base-p digit expansion of [0, 1] and its image in the ring of integers.

x = sum_i x_i p**-(i+1) is sent to the element sum_i x_i u**i of O_K;
truncating after d digits gives a vertex of G_d.  The cell of the
vertex b = (b_0, ..., b_{d-1}) is the interval
[sum_i b_i p**-(i+1), that + p**-d), of Lebesgue measure p**-d, which
matches the Haar mass of the ball b + u**d O_K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .localfield import FieldConfig, TreeIndex, digit_table, group_size
from .testfn import TestFunction


@dataclass(frozen=True)
class UnitDigits:
    p: int
    digits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        if any(not 0 <= d < self.p for d in self.digits):
            raise ValueError(f"digits must lie in 0..{self.p - 1}")

    @property
    def depth(self) -> int:
        return len(self.digits)

    def __str__(self) -> str:
        return TreeIndex(self.digits).to_text()


def _check_unit(x: float) -> None:
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"x must lie in [0, 1], got {x}")


def rho_encode(x: float | Fraction, p: int, depth: int) -> UnitDigits:
    """First ``depth`` digits of x, extracted exactly from floor(x * p**depth)."""
    _check_unit(x)
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if x == 1:
        return UnitDigits(p, (p - 1,) * depth)
    n = math.floor(Fraction(x) * p**depth)
    digits = []
    for _ in range(depth):
        n, d = divmod(n, p)
        digits.append(d)
    return UnitDigits(p, tuple(reversed(digits)))


def rho_encode_recursive(x: float | Fraction, p: int, depth: int) -> UnitDigits:
    """Digit-by-digit interval search on the remainder, in exact rational arithmetic."""
    _check_unit(x)
    if x == 1:
        return UnitDigits(p, (p - 1,) * depth)
    x = Fraction(x)
    partial = Fraction(0)
    digits = []
    for n in range(depth):
        width = Fraction(1, p ** (n + 1))
        rest = x - partial
        i = 0
        while i < p - 1 and not (i * width <= rest < (i + 1) * width):
            i += 1
        digits.append(i)
        partial += i * width
    return UnitDigits(p, tuple(digits))


def encode_array(xs: np.ndarray, p: int, depth: int) -> np.ndarray:
    """Vectorized ranks of to_field(rho_encode(x)) for float arrays (float rounding applies)."""
    xs = np.asarray(xs, dtype=np.float64)
    if np.any((xs < 0) | (xs > 1)):
        raise ValueError("all x must lie in [0, 1]")
    n = group_size(p, depth)
    top = np.minimum(np.floor(xs * n).astype(np.int64), n - 1)
    ranks = np.zeros_like(top)
    # top = sum_i x_i p**(depth-1-i); rank = sum_i x_i p**i
    for i in range(depth):
        top, d = np.divmod(top, p)
        ranks += d * p ** (depth - 1 - i)
    return ranks


def rho_decode_exact(u: UnitDigits) -> Fraction:
    """sum_i x_i p**-(i+1) as an exact rational."""
    n = 0
    for d in u.digits:
        n = n * u.p + d
    return Fraction(n, u.p**u.depth)


def rho_decode(u: UnitDigits) -> float:
    """sum_i x_i p**-(i+1), accumulated exactly and rounded once to a double."""
    n = 0
    for d in u.digits:
        n = n * u.p + d
    return n / u.p**u.depth


def to_field(u: UnitDigits) -> TreeIndex:
    return TreeIndex(u.digits)


def from_field(x: TreeIndex, p: int) -> UnitDigits:
    """Left endpoint digits of the cell of x."""
    return UnitDigits(p, x.check(p).digits)


def cell(x: TreeIndex, p: int) -> tuple[float, float]:
    """The interval [a, b) of [0, 1] mapped into the ball of x."""
    a = rho_decode(from_field(x, p))
    return a, a + float(p) ** (-x.level)


def left_endpoints(p: int, level: int) -> np.ndarray:
    """Left endpoint of the cell of every rank of G_level."""
    d = digit_table(p, level).astype(np.float64)
    return d @ (float(p) ** -np.arange(1, level + 1))


def sample_function(
    f: Callable,
    cfg: FieldConfig,
    level: int,
    mode: str = "left",
    subsamples: int = 8,
) -> TestFunction:
    """Turn f: [0, 1] -> R into a test function of the given level.

    ``mode="left"`` takes f at each cell's left endpoint; ``mode="average"``
    uses the midpoint rule with ``subsamples`` points per cell.  Left
    endpoints such as 1/3 are not representable in binary, so a step
    function that jumps exactly there is better sampled with "average".
    """
    p = cfg.p
    left = left_endpoints(p, level)
    width = float(p) ** (-level)
    if mode == "left":
        values = np.array([f(float(a)) for a in left], dtype=np.float64)
    elif mode == "average":
        if subsamples < 1:
            raise ValueError("subsamples must be >= 1")
        offsets = (np.arange(subsamples) + 0.5) * (width / subsamples)
        values = np.array(
            [np.mean([f(float(a + o)) for o in offsets]) for a in left], dtype=np.float64
        )
    else:
        raise ValueError(f"unknown sampling mode {mode!r}; use 'left' or 'average'")
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        r = int(bad[0])
        raise ValueError(
            f"f is not finite on the cell [{left[r]}, {left[r] + width}) of rank {r}"
        )
    return TestFunction(cfg, level, values)

