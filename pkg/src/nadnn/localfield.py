"""Arithmetic on the finite quotient rings G_l = O_K / P^l O_K.

An element of G_l is a digit sequence (a_0, ..., a_{l-1}) standing for
a_0 + a_1 u + ... + a_{l-1} u^{l-1}, where the uniformizer u is T for
F_p[[T]] (positive characteristic) and p for Z_p (characteristic zero).

Everything downstream indexes G_l by the little-endian rank
sum(a_i p^i).  In both characteristics the projection G_l -> G_{l-1}
drops the last digit, which under this layout is ``rank % p**(l-1)``.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

MAX_PRIME = 251
CAPACITY = 2**32
# largest level size for which per-element tables are materialized
TABLE_CAPACITY = 2**24


class CapacityError(ValueError):
    """Raised when p**l does not fit the supported index range."""


class Characteristic(enum.Enum):
    POSITIVE = "pos"
    ZERO = "zero"

    @classmethod
    def parse(cls, value: "str | Characteristic") -> "Characteristic":
        if isinstance(value, Characteristic):
            return value
        aliases = {"pos": cls.POSITIVE, "positive": cls.POSITIVE,
                   "zero": cls.ZERO, "char0": cls.ZERO}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"unknown characteristic {value!r}; use 'pos' or 'zero'") from None


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


@dataclass(frozen=True)
class FieldConfig:
    """Prime p and the characteristic of the ambient local field."""

    p: int
    char: Characteristic = Characteristic.POSITIVE

    def __post_init__(self):
        if not isinstance(self.p, (int, np.integer)) or not is_prime(int(self.p)):
            raise ValueError(f"p must be a prime, got {self.p!r}")
        if self.p > MAX_PRIME:
            raise ValueError(f"p must be at most {MAX_PRIME} (digits are stored as uint8)")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "char", Characteristic.parse(self.char))

    @property
    def positive(self) -> bool:
        return self.char is Characteristic.POSITIVE

    def size(self, level: int) -> int:
        """Number of elements of G_level, i.e. p**level."""
        return group_size(self.p, level)


def group_size(p: int, level: int) -> int:
    if level < 0:
        raise ValueError(f"level must be non-negative, got {level}")
    n = p**level
    if n > CAPACITY:
        raise CapacityError(f"p**l = {p}**{level} exceeds the capacity 2**32")
    return n


@dataclass(frozen=True)
class TreeIndex:
    """A vertex of the depth-l tree, i.e. an element of G_l.

    ``digits[0]`` is the coarsest digit (closest to the root).
    """

    digits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        if any(d < 0 for d in self.digits):
            raise ValueError(f"negative digit in {self.digits}")

    @property
    def level(self) -> int:
        return len(self.digits)

    def rank(self, p: int) -> int:
        self.check(p)
        r = 0
        for d in reversed(self.digits):
            r = r * p + d
        return r

    def check(self, p: int) -> "TreeIndex":
        if any(d >= p for d in self.digits):
            raise ValueError(f"digits {self.digits} are not all in 0..{p - 1}")
        return self

    @classmethod
    def from_rank(cls, rank: int, p: int, level: int) -> "TreeIndex":
        n = group_size(p, level)
        if not 0 <= rank < n:
            raise ValueError(f"rank {rank} outside [0, {n})")
        digits = []
        for _ in range(level):
            rank, d = divmod(rank, p)
            digits.append(d)
        return cls(tuple(digits))

    @classmethod
    def parse(cls, text: str, p: int | None = None) -> "TreeIndex":
        """Read the little-endian digit string form, e.g. "110" = 1 + 1*p."""
        text = text.strip()
        if p is not None and p > 10:
            parts = text.split(",") if text else []
            idx = cls(tuple(int(s) for s in parts))
        else:
            if not text.isdigit() and text != "":
                raise ValueError(f"not a digit string: {text!r}")
            idx = cls(tuple(int(c) for c in text))
        if p is not None:
            idx.check(p)
        return idx

    def to_text(self) -> str:
        if any(d > 9 for d in self.digits):
            return ",".join(str(d) for d in self.digits)
        return "".join(str(d) for d in self.digits)

    def __str__(self) -> str:
        return self.to_text()


@dataclass(frozen=True)
class BallId:
    """The ball center + u**level O_K, identified by its center in G_level."""

    center: TreeIndex

    @property
    def level(self) -> int:
        return self.center.level

    def measure(self, p: int) -> Fraction:
        """Normalized Haar measure of the ball, exactly p**-level."""
        return Fraction(1, p**self.level)

    def contains(self, x: TreeIndex) -> bool:
        return x.digits[: self.level] == self.center.digits and x.level >= self.level


def _same_level(x: TreeIndex, y: TreeIndex) -> int:
    if x.level != y.level:
        raise ValueError(f"level mismatch: {x.level} vs {y.level}")
    return x.level


def enumerate_level(cfg: FieldConfig, level: int) -> list[TreeIndex]:
    """All p**level elements of G_level in rank order."""
    n = cfg.size(level)
    return [TreeIndex.from_rank(r, cfg.p, level) for r in range(n)]


def iter_level(cfg: FieldConfig, level: int) -> Iterator[TreeIndex]:
    n = cfg.size(level)
    for r in range(n):
        yield TreeIndex.from_rank(r, cfg.p, level)


def project(cfg: FieldConfig, x: TreeIndex) -> TreeIndex:
    """The homomorphism G_l -> G_{l-1}: drop the last digit."""
    x.check(cfg.p)
    if x.level == 0:
        raise ValueError("cannot project a level-0 index")
    return TreeIndex(x.digits[:-1])


def project_to(cfg: FieldConfig, x: TreeIndex, level: int) -> TreeIndex:
    x.check(cfg.p)
    if level > x.level or level < 0:
        raise ValueError(f"cannot project level {x.level} down to {level}")
    return TreeIndex(x.digits[:level])


def lifts(cfg: FieldConfig, j: TreeIndex) -> list[TreeIndex]:
    """The p elements k of G_{l+1} whose projection is j."""
    j.check(cfg.p)
    cfg.size(j.level + 1)
    return [TreeIndex(j.digits + (d,)) for d in range(cfg.p)]


def add(cfg: FieldConfig, x: TreeIndex, y: TreeIndex) -> TreeIndex:
    level = _same_level(x, y)
    p = cfg.p
    if cfg.positive:
        x.check(p), y.check(p)
        return TreeIndex(tuple((a + b) % p for a, b in zip(x.digits, y.digits)))
    return TreeIndex.from_rank((x.rank(p) + y.rank(p)) % p**level, p, level)


def neg(cfg: FieldConfig, x: TreeIndex) -> TreeIndex:
    p = cfg.p
    if cfg.positive:
        x.check(p)
        return TreeIndex(tuple((-a) % p for a in x.digits))
    return TreeIndex.from_rank((-x.rank(p)) % p**x.level, p, x.level)


def sub(cfg: FieldConfig, x: TreeIndex, y: TreeIndex) -> TreeIndex:
    _same_level(x, y)
    return add(cfg, x, neg(cfg, y))


def multiply(cfg: FieldConfig, x: TreeIndex, y: TreeIndex) -> TreeIndex:
    level = _same_level(x, y)
    p = cfg.p
    if cfg.positive:
        x.check(p), y.check(p)
        out = [0] * level
        for s, a in enumerate(x.digits):
            if a == 0:
                continue
            for t in range(level - s):
                out[s + t] = (out[s + t] + a * y.digits[t]) % p
        return TreeIndex(tuple(out))
    return TreeIndex.from_rank((x.rank(p) * y.rank(p)) % p**level, p, level)


def zero(level: int) -> TreeIndex:
    return TreeIndex((0,) * level)


def one(level: int) -> TreeIndex:
    if level == 0:
        return TreeIndex(())
    return TreeIndex((1,) + (0,) * (level - 1))


# -- vectorized tables indexed by rank ---------------------------------------


@functools.lru_cache(maxsize=64)
def digit_table(p: int, level: int) -> np.ndarray:
    """Array of shape (p**level, level); row r holds the digits of rank r."""
    n = group_size(p, level)
    if n > TABLE_CAPACITY:
        raise CapacityError(f"digit table for {n} elements is too large")
    ranks = np.arange(n, dtype=np.int64)
    out = np.empty((n, level), dtype=np.uint8)
    for i in range(level):
        out[:, i] = ranks % p
        ranks //= p
    out.flags.writeable = False
    return out


def ranks_from_digits(p: int, digits: np.ndarray) -> np.ndarray:
    digits = np.asarray(digits, dtype=np.int64)
    weights = p ** np.arange(digits.shape[-1], dtype=np.int64)
    return digits @ weights


def parent_ranks(p: int, level: int) -> np.ndarray:
    """rank of project(k) for every k in G_level (requires level >= 1)."""
    if level < 1:
        raise ValueError("level must be >= 1")
    return np.arange(group_size(p, level), dtype=np.int64) % p ** (level - 1)


@functools.lru_cache(maxsize=32)
def add_table(cfg: FieldConfig, level: int) -> np.ndarray:
    """table[i, j] = rank(add(i, j)) for ranks i, j of G_level."""
    n = cfg.size(level)
    if n * n > 2**26:
        raise CapacityError(f"addition table for {n} elements is too large")
    if cfg.positive:
        d = digit_table(cfg.p, level).astype(np.int64)
        summed = (d[:, None, :] + d[None, :, :]) % cfg.p
        table = ranks_from_digits(cfg.p, summed)
    else:
        r = np.arange(n, dtype=np.int64)
        table = (r[:, None] + r[None, :]) % n
    table.flags.writeable = False
    return table


@functools.lru_cache(maxsize=32)
def sub_table(cfg: FieldConfig, level: int) -> np.ndarray:
    """table[j, k] = rank(sub(j, k)) for ranks j, k of G_level."""
    n = cfg.size(level)
    if n * n > 2**26:
        raise CapacityError(f"subtraction table for {n} elements is too large")
    if cfg.positive:
        d = digit_table(cfg.p, level).astype(np.int64)
        diff = (d[:, None, :] - d[None, :, :]) % cfg.p
        table = ranks_from_digits(cfg.p, diff)
    else:
        r = np.arange(n, dtype=np.int64)
        table = (r[:, None] - r[None, :]) % n
    table.flags.writeable = False
    return table
