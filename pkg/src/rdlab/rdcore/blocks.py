"""Block decomposition ``a = a_0 + a_1 + ... + a_m`` and the RD norms built on it."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..scales import LengthSequence
from .contract import FilteredAlgebra

__all__ = ["BlockVector", "RdNormTable", "block_decompose", "rd_norm", "rd_norm_table",
           "head_tail", "random_block"]

log = logging.getLogger(__name__)


@dataclass
class BlockVector:
    """Blocks ``a_n = E_n(a) - E_{n-1}(a)`` with cached C*-norms.

    ``diagnostics`` is filled by ``block_decompose(..., check=True)`` with the
    worst membership residual ``||E_{n-1}(a_n)||`` and the reconstruction
    residual, both relative to ``||a||``.
    """

    stage: int
    blocks: list[Any]
    block_norms: np.ndarray
    element: Any = None
    diagnostics: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.blocks)


@dataclass(frozen=True)
class RdNormTable:
    values: tuple[float, ...]
    lengths: LengthSequence

    def __getitem__(self, N: int) -> float:
        return self.values[N]

    @property
    def nondecreasing(self) -> bool:
        return all(b >= a * (1 - 1e-12) for a, b in zip(self.values, self.values[1:]))


def block_decompose(alg: FilteredAlgebra, a, check: bool = False, tol: float = 1e-9) -> BlockVector:
    a = alg.coerce(a)
    m = alg.stage
    heads = [alg.expectation(a, n) for n in range(m)] + [a]
    blocks = [heads[0]] + [heads[n] - heads[n - 1] for n in range(1, m + 1)]
    bv = BlockVector(m, blocks, np.asarray(alg.norms(blocks), dtype=float), element=a)
    if check:
        na = max(alg.norm(a), 1e-300)
        member = max((alg.norm(alg.expectation(blocks[n], n - 1)) for n in range(1, m + 1)), default=0.0)
        total = blocks[0]
        for b in blocks[1:]:
            total = total + b
        recon = alg.norm(total - a)
        idem = max((alg.norm(alg.expectation(heads[n], n) - heads[n]) for n in range(m)), default=0.0)
        bv.diagnostics = {"membership": member / na, "reconstruction": recon / na, "idempotence": idem / na}
        bad = {k: v for k, v in bv.diagnostics.items() if v > tol}
        if bad:
            log.warning("%s: block decomposition contract residuals above %g: %s", alg.name, tol, bad)
    return bv


def rd_norm(bv: BlockVector, N: float, L: LengthSequence) -> float:
    """``sum_n ||a_n|| lam_n**N``."""
    if N < 0:
        raise ValueError("RD norms are indexed by N >= 0")
    if len(L) < len(bv.block_norms):
        raise ValueError(f"length sequence has {len(L)} entries, need {len(bv.block_norms)}")
    return float(np.dot(bv.block_norms, L.weights(N, upto=len(bv.block_norms) - 1)))


def rd_norm_table(bv: BlockVector, N_max: int, L: LengthSequence) -> RdNormTable:
    return RdNormTable(tuple(rd_norm(bv, N, L) for N in range(N_max + 1)), L)


def head_tail(bv: BlockVector, n: int):
    """Split into ``a_{<=n}`` and ``a_{>n}``."""
    if not 0 <= n <= bv.stage:
        raise ValueError(f"split point {n} outside 0..{bv.stage}")
    head = bv.blocks[0]
    for b in bv.blocks[1:n + 1]:
        head = head + b
    tail = 0 * bv.blocks[0]
    for b in bv.blocks[n + 1:]:
        tail = tail + b
    return head, tail


def sub_blockvector(bv: BlockVector, keep) -> BlockVector:
    """Block vector of ``sum_{n in keep} a_n`` without recomputing norms."""
    keep = set(keep)
    blocks = [b if n in keep else 0 * b for n, b in enumerate(bv.blocks)]
    norms = np.array([x if n in keep else 0.0 for n, x in enumerate(bv.block_norms)])
    return BlockVector(bv.stage, blocks, norms)


def random_block(alg: FilteredAlgebra, rng: np.random.Generator, n: int, self_adjoint: bool = False,
                 lengths: LengthSequence | None = None):
    """Random element of ``B_n = ker E_{n-1}`` (of ``A_0`` when ``n == 0``)."""
    a = alg.random(rng, self_adjoint=self_adjoint, lengths=lengths)
    if n == alg.stage:
        top = a
    else:
        top = alg.expectation(a, n)
    if n == 0:
        return top
    return top - alg.expectation(a, n - 1)
