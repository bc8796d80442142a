"""Sequences converging to a constant: the unitization of finitely supported sequences.

Used as the smallest reference fixture for the generic machinery.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..scales import LengthSequence
from .contract import FilteredAlgebra

__all__ = ["SequenceElement", "SequenceAlgebra"]


@dataclass(frozen=True, eq=False)
class SequenceElement:
    """``mu 1 + sum_k x_k delta_k`` with ``k = 0..m``; coordinatewise operations.

    The sequence takes the value ``mu + x_k`` at ``k <= m`` and ``mu`` beyond.
    """

    x: np.ndarray
    mu: complex = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=complex).ravel())
        object.__setattr__(self, "mu", complex(self.mu))

    @property
    def stage(self) -> int:
        return len(self.x) - 1

    @property
    def values(self) -> np.ndarray:
        """Coordinates ``0..m`` followed by the limit value."""
        return np.append(self.x + self.mu, self.mu)

    def _lift(self, other: SequenceElement):
        n = max(len(self.x), len(other.x))
        return np.pad(self.x, (0, n - len(self.x))), np.pad(other.x, (0, n - len(other.x)))

    def __add__(self, other):
        a, b = self._lift(other)
        return SequenceElement(a + b, self.mu + other.mu)

    def __sub__(self, other):
        a, b = self._lift(other)
        return SequenceElement(a - b, self.mu - other.mu)

    def __neg__(self):
        return SequenceElement(-self.x, -self.mu)

    def __mul__(self, other):
        if isinstance(other, SequenceElement):
            a, b = self._lift(other)
            return SequenceElement(a * b + self.mu * b + other.mu * a, self.mu * other.mu)
        return SequenceElement(self.x * other, self.mu * other)

    def __rmul__(self, c):
        return SequenceElement(self.x * c, self.mu * c)

    def adjoint(self) -> SequenceElement:
        return SequenceElement(self.x.conj(), self.mu.conjugate())

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


class SequenceAlgebra(FilteredAlgebra):
    """``A_n = C 1 + span{delta_0..delta_n}``; ``E_n`` truncates and keeps the constant."""

    name = "sequences"
    omega = 1.0

    def __init__(self, stage: int):
        super().__init__(None, stage)

    def unit(self) -> SequenceElement:
        return SequenceElement(np.zeros(self.stage + 1), 1.0)

    def zero(self) -> SequenceElement:
        return SequenceElement(np.zeros(self.stage + 1))

    def coerce(self, a: SequenceElement) -> SequenceElement:
        if a.stage > self.stage:
            raise ValueError(f"element of stage {a.stage} above working stage {self.stage}")
        return SequenceElement(np.pad(a.x, (0, self.stage - a.stage)), a.mu)

    def expectation(self, a: SequenceElement, n: int) -> SequenceElement:
        a = self.coerce(a)
        x = a.x.copy()
        x[n + 1:] = 0
        return SequenceElement(x, a.mu)

    def norm(self, a: SequenceElement) -> float:
        return a.sup_norm()

    def exp_i(self, a: SequenceElement, t: float) -> SequenceElement:
        a = self.coerce(a)
        v = a.values
        if np.max(np.abs(v.imag), initial=0.0) > 1e-10:
            raise ValueError("exp_i needs a real (self-adjoint) sequence")
        e = np.exp(1j * t * v.real)
        return SequenceElement(e[:-1] - e[-1], e[-1])

    def random(self, rng, self_adjoint=False, lengths: LengthSequence | None = None) -> SequenceElement:
        m = self.stage + 1
        x = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        if lengths is not None:
            x = x / lengths.weights(2, upto=self.stage)
        if self_adjoint:
            x = x.real.astype(complex)
        return SequenceElement(x)
