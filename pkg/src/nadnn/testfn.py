"""Locally constant test functions on the unit ball.

A function in D^l is stored as its vector of values on the p**l balls
of radius p**-l, in rank order.  The Haar measure is normalized so the
unit ball has mass one, hence every level-l ball weighs p**-l.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .localfield import (
    Characteristic,
    FieldConfig,
    TreeIndex,
    add_table,
    group_size,
)


@dataclass(frozen=True, eq=False)
class TestFunction:
    __test__ = False  # keep pytest from collecting this class

    cfg: FieldConfig
    level: int
    coeffs: np.ndarray

    def __post_init__(self):
        n = group_size(self.cfg.p, self.level)
        c = np.array(self.coeffs)
        if not np.iscomplexobj(c):
            c = c.astype(np.float64)
        c = c.reshape(-1)
        if c.shape[0] != n:
            raise ValueError(f"expected {n} coefficients for level {self.level}, got {c.shape[0]}")
        if not np.all(np.isfinite(c)):
            raise ValueError("test function coefficients must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def p(self) -> int:
        return self.cfg.p

    def __call__(self, x: TreeIndex):
        return evaluate(self, x)

    def __repr__(self) -> str:
        return f"TestFunction(p={self.p}, char={self.cfg.char.value}, level={self.level})"

    @classmethod
    def constant(cls, cfg: FieldConfig, level: int, value: float) -> "TestFunction":
        return cls(cfg, level, np.full(cfg.size(level), float(value)))

    @classmethod
    def indicator(cls, cfg: FieldConfig, center: TreeIndex) -> "TestFunction":
        """Characteristic function of the ball center + u**l O_K."""
        c = np.zeros(cfg.size(center.level))
        c[center.rank(cfg.p)] = 1.0
        return cls(cfg, center.level, c)

    def to_json(self) -> dict:
        if np.iscomplexobj(self.coeffs):
            raise TypeError("only real test functions have a JSON form")
        return {
            "p": self.p,
            "char": self.cfg.char.value,
            "level": self.level,
            "coeffs": [float(v) for v in self.coeffs],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TestFunction":
        cfg = FieldConfig(int(obj["p"]), Characteristic.parse(obj["char"]))
        return cls(cfg, int(obj["level"]), np.asarray(obj["coeffs"], dtype=np.float64))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load(cls, path: str | Path) -> "TestFunction":
        return cls.from_json(json.loads(Path(path).read_text()))


def evaluate(phi: TestFunction, x: TreeIndex):
    """Value of phi on the ball containing x (x must be at least as fine as phi)."""
    if x.level < phi.level:
        raise ValueError(
            f"point of level {x.level} does not determine a ball of level {phi.level}"
        )
    r = TreeIndex(x.digits[: phi.level]).rank(phi.p)
    return phi.coeffs[r]


def embed(phi: TestFunction, level: int) -> TestFunction:
    """The same function written at a finer level."""
    if level < phi.level:
        raise ValueError(f"cannot embed level {phi.level} into coarser level {level}")
    if level == phi.level:
        return phi
    n = group_size(phi.p, level)
    parents = np.arange(n, dtype=np.int64) % group_size(phi.p, phi.level)
    return TestFunction(phi.cfg, level, phi.coeffs[parents])


def coarsen(phi: TestFunction, level: int) -> TestFunction:
    """Average phi over the balls of a coarser level (the L^2 projection onto D^level)."""
    if level > phi.level:
        raise ValueError(f"cannot coarsen level {phi.level} to finer level {level}")
    m = group_size(phi.p, level)
    # ranks k and k + m*t share their first `level` digits
    blocks = phi.coeffs.reshape(-1, m)
    return TestFunction(phi.cfg, level, blocks.mean(axis=0))


def translate(phi: TestFunction, a: TreeIndex) -> TestFunction:
    """x -> phi(x + a), using the group law of the field's characteristic."""
    if a.level != phi.level:
        raise ValueError(f"shift must have level {phi.level}, got {a.level}")
    table = add_table(phi.cfg, phi.level)
    return TestFunction(phi.cfg, phi.level, phi.coeffs[table[:, a.rank(phi.p)]])


def lp_norm(phi: TestFunction, rho: float) -> float:
    """L^rho norm with respect to the normalized Haar measure; rho may be math.inf."""
    rho = float(rho)
    if math.isnan(rho) or rho < 1:
        raise ValueError(f"rho must be >= 1, got {rho}")
    a = np.abs(phi.coeffs)
    if math.isinf(rho):
        return float(a.max())
    weight = float(phi.p) ** (-phi.level)
    if rho == 1:
        return float(a.sum() * weight)
    # scale by the largest entry so tiny or huge values neither underflow nor overflow
    top = float(a.max())
    if top == 0.0:
        return 0.0
    a = a / top
    if rho == 2:
        return top * math.sqrt(float(np.dot(a, a)) * weight)
    return top * float(np.sum(a**rho) * weight) ** (1.0 / rho)


def _common(phi: TestFunction, psi: TestFunction) -> tuple[TestFunction, TestFunction]:
    if phi.cfg != psi.cfg:
        raise ValueError(f"field mismatch: {phi.cfg} vs {psi.cfg}")
    level = max(phi.level, psi.level)
    return embed(phi, level), embed(psi, level)


def inner_product(phi: TestFunction, psi: TestFunction):
    """<phi, psi> = integral of phi * conj(psi) over the unit ball."""
    a, b = _common(phi, psi)
    s = np.sum(a.coeffs * np.conj(b.coeffs)) * float(a.p) ** (-a.level)
    if np.iscomplexobj(s):
        return complex(s)
    return float(s)


def distance(phi: TestFunction, psi: TestFunction, rho: float) -> float:
    """||phi - psi||_rho after embedding both at the finer level."""
    a, b = _common(phi, psi)
    return lp_norm(TestFunction(a.cfg, a.level, a.coeffs - b.coeffs), rho)
