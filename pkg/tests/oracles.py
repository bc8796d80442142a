"""Independent reference computations used to cross-check the package."""
from __future__ import annotations

from fractions import Fraction

import numpy as np


def power_iteration_norm(A: np.ndarray, iters: int = 5000, tol: float = 1e-15, seed: int = 7) -> float:
    """Largest singular value from power iteration on ``A* A``."""
    A = np.asarray(A, dtype=complex)
    B = A.conj().T @ A
    v = np.random.default_rng(seed).standard_normal(B.shape[0]) + 0j
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = B @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(nw - lam) <= tol * nw:
            lam = nw
            break
        lam = nw
    return float(np.sqrt(np.real(v.conj() @ B @ v)))


def naive_dft(values, forward: bool = True) -> np.ndarray:
    v = np.asarray(values, dtype=complex)
    s = len(v)
    out = np.zeros(s, dtype=complex)
    for j in range(s):
        for x in range(s):
            if forward:
                out[j] += v[x] * np.exp(-2j * np.pi * j * x / s) / s
            else:
                out[j] += v[x] * np.exp(2j * np.pi * j * x / s)
    return out


def taylor_expm(A: np.ndarray, terms: int = 30) -> np.ndarray:
    """``exp(A)`` by scaling and squaring a truncated Taylor series."""
    A = np.asarray(A, dtype=complex)
    nrm = np.linalg.norm(A, 1)
    k = max(0, int(np.ceil(np.log2(nrm))) + 1) if nrm > 0.5 else 0
    B = A / 2**k
    out = np.eye(A.shape[0], dtype=complex)
    term = np.eye(A.shape[0], dtype=complex)
    for n in range(1, terms):
        term = term @ B / n
        out = out + term
    for _ in range(k):
        out = out @ out
    return out


def root_fraction(num: int, den: int) -> Fraction:
    """The angle of ``e^{2 pi i num/den}`` as a reduced fraction of a turn."""
    return Fraction(num, den) % 1


def brute_level(frac: Fraction, scale_s) -> int:
    for lev, s in enumerate(scale_s):
        if (frac * s).denominator == 1:
            return lev
    raise ValueError("not in the scale")


def shift_operator_window(W: int) -> np.ndarray:
    """``U E_l = E_{l+1}`` compressed to ``l = -W..W``."""
    n = 2 * W + 1
    U = np.zeros((n, n))
    for i in range(n - 1):
        U[i + 1, i] = 1.0
    return U


def multiplication_window(f_values: np.ndarray, W: int) -> np.ndarray:
    """``M_f`` for an ``s``-periodic ``f`` compressed to ``l = -W..W``."""
    s = len(f_values)
    return np.diag([f_values[l % s] for l in range(-W, W + 1)])
