"""Dense linear-algebra kernels shared by every algebra.

Matrices are plain complex ``numpy`` arrays.  Functions accept a single matrix
or a stack of matrices along the leading axes where noted.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

__all__ = [
    "CircleGrid",
    "as_matrix",
    "spectral_norm",
    "spectral_norms",
    "hermitian_defect",
    "exp_i_hermitian",
    "dft_cyclic",
    "circle_sup",
    "laurent_degree",
]


def as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def spectral_norm(A) -> float:
    """Largest singular value (``0.0`` for an empty matrix)."""
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return 0.0
    return float(np.linalg.svd(A, compute_uv=False)[0])


def spectral_norms(stack: np.ndarray) -> np.ndarray:
    """Spectral norms of a stack of matrices, shape ``(..., n, k) -> (...)``."""
    stack = np.asarray(stack, dtype=complex)
    if stack.shape[-1] == 0 or stack.shape[-2] == 0:
        return np.zeros(stack.shape[:-2])
    return np.linalg.svd(stack, compute_uv=False)[..., 0]


def hermitian_defect(H: np.ndarray) -> float:
    """``||H - H*|| / max(||H||, 1)`` for one matrix or the worst over a stack."""
    H = np.asarray(H, dtype=complex)
    D = H - np.swapaxes(H.conj(), -1, -2)
    scale = max(float(np.max(spectral_norms(H))) if H.size else 0.0, 1.0)
    return float(np.max(spectral_norms(D))) / scale if H.size else 0.0


def exp_i_hermitian(H: np.ndarray, t: float = 1.0, tol: float = 1e-10) -> np.ndarray:
    """``exp(i t H)`` through the eigendecomposition of a Hermitian ``H``.

    Works on stacks ``(..., n, n)``.  Raises ``ValueError`` when ``H`` is not
    Hermitian to relative accuracy ``tol``.
    """
    H = np.asarray(H, dtype=complex)
    if hermitian_defect(H) > tol:
        raise ValueError("exp_i_hermitian needs a Hermitian matrix")
    H = 0.5 * (H + np.swapaxes(H.conj(), -1, -2))
    w, V = np.linalg.eigh(H)
    phase = np.exp(1j * t * w)
    return (V * phase[..., None, :]) @ np.swapaxes(V.conj(), -1, -2)


def dft_cyclic(values, forward: bool = True) -> np.ndarray:
    """Fourier transform on ``Z/s`` with the Haar-normalised convention.

    forward:  ``fhat[j] = (1/s) sum_x f[x] exp(-2 pi i j x / s)``
    inverse:  ``f[x] = sum_j fhat[j] exp(2 pi i j x / s)``

    The transform acts along the last axis.
    """
    v = np.asarray(values, dtype=complex)
    if v.shape[-1] == 0:
        raise ValueError("dft_cyclic of an empty sequence")
    s = v.shape[-1]
    if forward:
        return np.fft.fft(v, axis=-1) / s
    return np.fft.ifft(v, axis=-1) * s


@dataclass(frozen=True)
class CircleGrid:
    """``count`` equally spaced angles ``2 pi k / count``."""

    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("CircleGrid needs count >= 1")

    @property
    def values(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.count) / self.count

    @classmethod
    def for_degree(cls, d: int) -> CircleGrid:
        return cls(64 * (d + 1))


def laurent_degree(coeffs: Mapping[int, complex]) -> int:
    ks = [k for k, c in coeffs.items() if c != 0]
    return max((abs(k) for k in ks), default=0)


def circle_sup(coeffs: Mapping[int, complex], grid: CircleGrid | None = None) -> tuple[float, float]:
    """Bracket the sup norm of ``sum_k c_k e^{ik theta}``.

    Returns ``(estimate, upper_bound)``: the maximum modulus over the grid and
    the l1 envelope ``sum |c_k|``.  The true supremum lies between them.
    """
    if grid is None:
        grid = CircleGrid.for_degree(laurent_degree(coeffs))
    if not coeffs:
        return 0.0, 0.0
    ks = np.fromiter(coeffs.keys(), dtype=float)
    cs = np.fromiter(coeffs.values(), dtype=complex)
    vals = np.exp(1j * np.outer(grid.values, ks)) @ cs
    est = float(np.max(np.abs(vals)))
    ub = float(np.sum(np.abs(cs)))
    return min(est, ub), ub
