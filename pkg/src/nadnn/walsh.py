"""Additive characters of the unit ball and Fourier-Walsh expansions.

A nontrivial character is x -> chi(u**-l a x) for a in G_l with leading
digit a_0 != 0 (other a repeat a character of a lower level).  Its value
only depends on the first l digits of x:

* positive characteristic: exp(2 pi i c / p) with c = sum_{s+t=l-1} a_s x_t mod p,
  the T**-1 coefficient of T**-l a x (no carries);
* characteristic zero: exp(2 pi i (rank(a) rank(x) mod p**l) / p**l).

The p**l characters of level <= l form an orthonormal basis of D^l (x) C.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .encoding import sample_function
from .localfield import Characteristic, FieldConfig, TreeIndex, digit_table, group_size
from .testfn import TestFunction, inner_product


@dataclass(frozen=True)
class Character:
    """Trivial character when ``a`` is empty, otherwise chi(u**-level a x)."""

    a: TreeIndex = TreeIndex(())

    def __post_init__(self):
        if self.a.level and self.a.digits[0] == 0:
            raise ValueError("a nontrivial character needs a leading digit a_0 != 0")

    @property
    def level(self) -> int:
        return self.a.level

    @property
    def trivial(self) -> bool:
        return self.a.level == 0

    def label(self, p: int) -> int:
        """Integer label n = sum_i a_i p**i (0 for the trivial character)."""
        return self.a.rank(p)

    def __str__(self) -> str:
        return "triv" if self.trivial else f"{self.level}:{self.a.to_text()}"


TRIVIAL = Character()


@functools.lru_cache(maxsize=32)
def _roots(n: int) -> np.ndarray:
    k = np.arange(n)
    table = np.exp(2j * np.pi * k / n)
    # snap the exactly known values
    table.real[np.isclose(table.real, 0, atol=1e-15)] = 0.0
    table.imag[np.isclose(table.imag, 0, atol=1e-15)] = 0.0
    table.flags.writeable = False
    return table


def _phase_numerators(cfg: FieldConfig, chi: Character, level: int) -> tuple[np.ndarray, int]:
    """For every rank x of G_level, an integer m with chi(x) = exp(2 pi i m / modulus)."""
    n = group_size(cfg.p, level)
    if chi.trivial:
        return np.zeros(n, dtype=np.int64), 1
    l, p = chi.level, cfg.p
    if l > level:
        raise ValueError(f"character of level {l} is not constant on level-{level} balls")
    a = np.array(chi.a.check(p).digits, dtype=np.int64)
    x = digit_table(p, level)[:, :l].astype(np.int64)
    if cfg.positive:
        # coefficient of T**-1 in T**-l * a * x: pairs s + t = l - 1
        c = x @ a[::-1] % p
        return c, p
    weights = p ** np.arange(l, dtype=np.int64)
    ra = int(a @ weights)
    rx = x @ weights
    return (ra * rx) % p**l, p**l


def character_values(cfg: FieldConfig, chi: Character, level: int) -> np.ndarray:
    """Values of chi on all ranks of G_level (level >= chi.level)."""
    m, modulus = _phase_numerators(cfg, chi, level)
    return _roots(modulus)[m]


def char_eval(cfg: FieldConfig, chi: Character, x: TreeIndex) -> complex:
    if x.level < chi.level:
        raise ValueError(f"point of level {x.level} is too coarse for a level-{chi.level} character")
    if chi.trivial:
        return 1.0 + 0.0j
    m, modulus = _phase_numerators(cfg, chi, chi.level)
    r = TreeIndex(x.digits[: chi.level]).rank(cfg.p)
    return complex(_roots(modulus)[m[r]])


def enumerate_characters(cfg: FieldConfig, max_level: int) -> list[Character]:
    """The trivial character followed by the canonical characters of levels 1..max_level."""
    group_size(cfg.p, max_level)
    out = [TRIVIAL]
    for l in range(1, max_level + 1):
        for r in range(group_size(cfg.p, l)):
            a = TreeIndex.from_rank(r, cfg.p, l)
            if a.digits[0] != 0:
                out.append(Character(a))
    return out


def gram_matrix(cfg: FieldConfig, characters: Sequence[Character], level: int) -> np.ndarray:
    """<chi, chi'> = p**-level sum over G_level of chi * conj(chi')."""
    if any(chi.level > level for chi in characters):
        raise ValueError(f"level {level} is below the level of some character")
    values = np.array([character_values(cfg, chi, level) for chi in characters])
    return values @ values.conj().T * float(cfg.p) ** (-level)


_BASIS_CHAR = {"theta": Characteristic.POSITIVE, "gamma": Characteristic.ZERO}


def _check_basis(cfg: FieldConfig, basis: str) -> None:
    basis = basis.lower()
    if basis == "raw":
        return
    if basis not in _BASIS_CHAR:
        raise ValueError(f"unknown basis {basis!r}; use 'theta', 'gamma' or 'raw'")
    if cfg.char is not _BASIS_CHAR[basis]:
        raise ValueError(
            f"the {basis} basis needs characteristic {_BASIS_CHAR[basis].value!r}, "
            f"got {cfg.char.value!r}"
        )


@dataclass(frozen=True)
class WalshCoefficient:
    character: Character
    value: complex


def walsh_expand(phi: TestFunction, basis: str = "raw") -> list[WalshCoefficient]:
    """Coefficients <phi, chi> for every character of level <= phi.level."""
    _check_basis(phi.cfg, basis)
    out = []
    for chi in enumerate_characters(phi.cfg, phi.level):
        psi = TestFunction(phi.cfg, phi.level, character_values(phi.cfg, chi, phi.level))
        out.append(WalshCoefficient(chi, complex(inner_product(phi, psi))))
    return out


def walsh_reconstruct(
    cfg: FieldConfig, coeffs: Sequence[WalshCoefficient], level: int | None = None
) -> TestFunction:
    """sum_chi C_chi chi, as a complex test function."""
    if level is None:
        level = max((c.character.level for c in coeffs), default=0)
    total = np.zeros(group_size(cfg.p, level), dtype=np.complex128)
    for c in coeffs:
        total += c.value * character_values(cfg, c.character, level)
    return TestFunction(cfg, level, total)


def real_part(phi: TestFunction) -> TestFunction:
    return TestFunction(phi.cfg, phi.level, np.real(phi.coeffs))


def walsh_on_unit_interval(
    f: Callable, cfg: FieldConfig, level: int, basis: str = "raw", subsamples: int = 8
) -> list[WalshCoefficient]:
    """Expand f: [0, 1] -> R in the characters pulled back to [0, 1], up to the given level."""
    _check_basis(cfg, basis)
    phi = sample_function(f, cfg, level, mode="average", subsamples=subsamples)
    return walsh_expand(phi, basis)


def truncation_errors(phi: TestFunction, coeffs: Sequence[WalshCoefficient]) -> list[float]:
    """L^2 distance from phi to its expansion truncated at level 0, 1, ..., phi.level.

    Uses the Parseval tail ||phi||^2 - sum_{level(chi) <= l} |C_chi|^2.
    """
    total = float(np.real(inner_product(phi, phi)))
    energy = np.zeros(phi.level + 1)
    for c in coeffs:
        energy[c.character.level] += abs(c.value) ** 2
    kept = np.cumsum(energy)
    return [float(np.sqrt(max(total - k, 0.0))) for k in kept]


def theta_value(n_digits: Sequence[int], x_digits: Sequence[int], p: int) -> complex:
    """exp(2 pi i / p * sum_{i<l} n_{l-1-i} x_i), the theta basis in digit form."""
    l = len(n_digits)
    s = sum(n_digits[l - 1 - i] * x_digits[i] for i in range(l)) % p
    return complex(_roots(p)[s])


def gamma_value(n_digits: Sequence[int], x_digits: Sequence[int], p: int) -> complex:
    """exp(2 pi i / p**l * n x) with n, x read as integers mod p**l."""
    l = len(n_digits)
    n = sum(d * p**i for i, d in enumerate(n_digits))
    x = sum(d * p**i for i, d in enumerate(x_digits[:l]))
    return complex(_roots(p**l)[(n * x) % p**l])


def to_real_test_function(phi: TestFunction, tol: float = 1e-9) -> TestFunction:
    """Drop a negligible imaginary part, e.g. after reconstructing a real function."""
    if np.iscomplexobj(phi.coeffs):
        if np.max(np.abs(phi.coeffs.imag), initial=0.0) > tol:
            raise ValueError("function has a non-negligible imaginary part")
        return real_part(phi)
    return phi

