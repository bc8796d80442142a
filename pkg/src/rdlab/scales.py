"""Supernatural scales, exact characters of the dual odometer group, and length sequences.

A scale ``s = (1, s_1, ..., s_M)`` is a divisibility chain.  The finite groups
``G_m`` of ``s_m``-th roots of unity exhaust the dual group; a :class:`Character`
stores a root of unity exactly as ``e^{2 pi i num / s_level}`` with ``level``
minimal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

__all__ = [
    "SupernaturalScale",
    "Character",
    "LengthSequence",
    "canonicalize",
    "char_mul",
    "char_inv",
    "shell",
    "length_of",
]


@dataclass(frozen=True, order=True)
class Character:
    """The root of unity ``e^{2 pi i num / s_level}`` in canonical (lowest-level) form."""

    num: int
    level: int

    def value(self, scale: SupernaturalScale) -> complex:
        return complex(np.exp(2j * np.pi * self.num / scale[self.level]))

    def power(self, x: int, scale: SupernaturalScale) -> complex:
        """``z**x`` evaluated after exact reduction of the exponent."""
        s = scale[self.level]
        return complex(np.exp(2j * np.pi * ((self.num * x) % s) / s))

    def index_at(self, m: int, scale: SupernaturalScale) -> int:
        """Position ``j`` of this character inside ``G_m`` (``z = e^{2 pi i j / s_m}``)."""
        if self.level > m:
            raise ValueError(f"character of level {self.level} is not in G_{m}")
        return self.num * (scale[m] // scale[self.level])


@dataclass(frozen=True)
class SupernaturalScale:
    """Truncated divisibility chain ``s_0 = 1 | s_1 | ... | s_M``."""

    s: tuple[int, ...]

    def __post_init__(self):
        s = tuple(int(v) for v in self.s)
        object.__setattr__(self, "s", s)
        if not s or s[0] != 1:
            raise ValueError("a scale must start with s_0 = 1")
        for a, b in zip(s, s[1:]):
            if b <= a or b % a:
                raise ValueError(f"scale entries must strictly increase by divisibility: {a} -> {b}")

    @classmethod
    def geometric(cls, ratio: int, depth: int) -> SupernaturalScale:
        return cls(tuple(ratio**m for m in range(depth + 1)))

    @classmethod
    def dyadic(cls, depth: int = 5) -> SupernaturalScale:
        return cls.geometric(2, depth)

    @property
    def M(self) -> int:
        return len(self.s) - 1

    def __getitem__(self, m: int) -> int:
        if not 0 <= m <= self.M:
            raise IndexError(f"stage {m} out of range 0..{self.M}")
        return self.s[m]

    def __len__(self) -> int:
        return len(self.s)

    def ratio(self, n: int) -> int:
        """``s_{n+1} / s_n``."""
        return self[n + 1] // self[n]

    def check_stage(self, m: int) -> None:
        if not 0 <= m <= self.M:
            raise ValueError(f"stage {m} out of range 0..{self.M}")

    @cached_property
    def _levels(self) -> tuple[np.ndarray, ...]:
        out = []
        for m in range(self.M + 1):
            sm = self.s[m]
            lev = np.empty(sm, dtype=np.int64)
            for j in range(sm):
                lev[j] = _canonical_level(j, m, self.s)
            lev.setflags(write=False)
            out.append(lev)
        return tuple(out)

    def levels(self, m: int) -> np.ndarray:
        """Canonical level of ``e^{2 pi i j / s_m}`` for every ``j`` in ``0..s_m-1``."""
        self.check_stage(m)
        return self._levels[m]


def _canonical_level(j: int, m: int, s: Sequence[int]) -> int:
    q = s[m] // math.gcd(j, s[m])  # order of the root of unity
    for lev in range(m + 1):
        if s[lev] % q == 0:
            return lev
    raise AssertionError("unreachable: q divides s_m")


def canonicalize(j: int, m: int, scale: SupernaturalScale) -> Character:
    """Return the character ``e^{2 pi i j / s_m}`` at its lowest level."""
    scale.check_stage(m)
    sm = scale[m]
    if not 0 <= j < sm:
        raise ValueError(f"index {j} outside 0..{sm - 1}")
    lev = _canonical_level(j, m, scale.s)
    return Character(j // (sm // scale[lev]), lev)


def _validate(z: Character, scale: SupernaturalScale) -> None:
    if not 0 <= z.level <= scale.M or not 0 <= z.num < scale[z.level]:
        raise ValueError(f"{z} does not belong to scale {scale.s}")
    if canonicalize(z.num, z.level, scale) != z:
        raise ValueError(f"{z} is not in canonical form for scale {scale.s}")


def char_mul(z1: Character, z2: Character, scale: SupernaturalScale) -> Character:
    _validate(z1, scale)
    _validate(z2, scale)
    m = max(z1.level, z2.level)
    j = (z1.index_at(m, scale) + z2.index_at(m, scale)) % scale[m]
    return canonicalize(j, m, scale)


def char_inv(z: Character, scale: SupernaturalScale) -> Character:
    _validate(z, scale)
    return Character((-z.num) % scale[z.level], z.level)


def shell(n: int, scale: SupernaturalScale) -> list[Character]:
    """Characters of canonical level exactly ``n``, i.e. ``G_n \\ G_{n-1}``."""
    scale.check_stage(n)
    lev = scale.levels(n)
    return [Character(int(j), n) for j in np.flatnonzero(lev == n)]


@dataclass(frozen=True)
class LengthSequence:
    """Increasing weights ``lam[n]`` together with the constants they are tested against.

    ``omega`` is the bound on the iterated projections, and ``(c, beta)`` is the
    certificate claimed for ``s_m <= c * lam[m]**beta``.  Both hypothesis flags
    are recomputed from the numbers on every access.
    """

    lam: tuple[float, ...]
    omega: float = 1.0
    c: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        lam = tuple(float(v) for v in self.lam)
        object.__setattr__(self, "lam", lam)
        if not lam:
            raise ValueError("empty length sequence")
        if any(b <= a for a, b in zip(lam, lam[1:])):
            raise ValueError("length sequence must be strictly increasing")
        if lam[0] < 1.0:
            raise ValueError("lengths take values in [1, inf)")
        if self.omega < 1.0:
            raise ValueError("omega >= 1 for any family of projections")
        if self.c <= 0 or self.beta <= 0:
            raise ValueError("growth certificate needs c > 0 and beta > 0")

    @classmethod
    def geometric(cls, ratio: float, depth: int, omega: float = 1.0, lam0: float | None = None,
                  c: float = 1.0, beta: float = 1.0) -> LengthSequence:
        """``lam[n] = lam0 * ratio**n`` with ``lam0 = 2*omega`` by default."""
        lam0 = 2.0 * omega if lam0 is None else lam0
        return cls(tuple(lam0 * ratio**n for n in range(depth + 1)), omega, c, beta)

    @classmethod
    def default(cls, depth: int, omega: float = 1.0) -> LengthSequence:
        return cls.geometric(2.0, depth, omega=omega)

    def __len__(self) -> int:
        return len(self.lam)

    def __getitem__(self, n: int) -> float:
        return self.lam[n]

    def weights(self, N: float, upto: int | None = None) -> np.ndarray:
        lam = np.asarray(self.lam if upto is None else self.lam[: upto + 1])
        return lam**N

    @property
    def rd_admissible(self) -> bool:
        return all(l >= 2.0 * self.omega * (n + 1) for n, l in enumerate(self.lam))

    def fast_growth(self, scale: SupernaturalScale) -> bool:
        depth = min(scale.M, len(self.lam) - 1)
        return all(scale[m] <= self.c * self.lam[m] ** self.beta * (1 + 1e-12) for m in range(depth + 1))


def length_of(z: Character, L: LengthSequence) -> float:
    return L.lam[z.level]
