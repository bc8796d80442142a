"""What a concrete filtered algebra must provide to the generic machinery."""
from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any, Sequence

import numpy as np

from ..scales import LengthSequence, SupernaturalScale

__all__ = ["FilteredAlgebra", "ContractViolation"]


class ContractViolation(RuntimeError):
    """Raised when two implementations of the same map disagree beyond tolerance."""


class FilteredAlgebra(ABC):
    """A finite truncation ``A_0 ⊂ A_1 ⊂ ... ⊂ A_m`` with projections ``E_n``.

    Every element handed to the generic code is represented at the working
    stage ``m`` (``self.stage``); ``expectation(a, n)`` returns the projection
    onto ``A_n`` still represented at stage ``m``.  Elements support ``+``,
    ``-``, scalar multiplication, the algebra product ``*`` and ``.adjoint()``.

    Attributes
    ----------
    name : str
        Selector used by the CLI.
    omega : float
        Uniform bound on ``||E_{m,n}||``.
    approx : bool
        True when norms are grid estimates rather than exact.
    """

    name = "abstract"
    omega = 1.0
    approx = False

    def __init__(self, scale: SupernaturalScale | None, stage: int):
        if scale is not None:
            scale.check_stage(stage)
        self.scale = scale
        self.stage = stage

    @abstractmethod
    def unit(self) -> Any: ...

    @abstractmethod
    def zero(self) -> Any: ...

    @abstractmethod
    def coerce(self, a: Any) -> Any:
        """Lift ``a`` to the working stage (identity when already there)."""

    @abstractmethod
    def expectation(self, a: Any, n: int) -> Any:
        """``E_{m,n}(a)``, represented at the working stage."""

    @abstractmethod
    def norm(self, a: Any) -> float:
        """C*-norm (or its grid estimate when ``approx``)."""

    @abstractmethod
    def exp_i(self, a: Any, t: float) -> Any:
        """``exp(i t a)`` for self-adjoint ``a``."""

    @abstractmethod
    def random(self, rng: np.random.Generator, self_adjoint: bool = False,
               lengths: LengthSequence | None = None) -> Any:
        """Seeded random element of ``A_m``.

        Coefficients are standard complex Gaussians; when ``lengths`` is given
        the level-``n`` coefficients are damped by ``lengths[n]**-2``.
        """

    def mul(self, a, b):
        return a * b

    def adjoint(self, a):
        return a.adjoint()

    def norms(self, elements: Sequence[Any]) -> list[float]:
        return [self.norm(x) for x in elements]

    def is_self_adjoint(self, a, tol: float = 1e-10) -> bool:
        return self.norm(a - a.adjoint()) <= tol * max(self.norm(a), 1.0)

    def hermitian_part(self, a):
        return 0.5 * (a + a.adjoint())

    def describe(self) -> dict:
        out = {"algebra": self.name, "stage": self.stage, "omega": self.omega, "approx": self.approx}
        if self.scale is not None:
            out["scale"] = list(self.scale.s)
        return out
