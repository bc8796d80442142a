from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import naive_dft, power_iteration_norm, taylor_expm
from rdlab.numerics import (CircleGrid, circle_sup, dft_cyclic, exp_i_hermitian, hermitian_defect,
                            laurent_degree, spectral_norm, spectral_norms)


def rand_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def rand_hermitian(rng, n):
    A = rand_complex(rng, n, n)
    return (A + A.conj().T) / 2


class TestSpectralNorm:
    def test_identity(self):
        assert spectral_norm(np.eye(4)) == pytest.approx(1.0, rel=1e-12)

    def test_permutation(self):
        assert spectral_norm(np.array([[0, 1], [1, 0]])) == pytest.approx(1.0, rel=1e-12)

    def test_empty(self):
        assert spectral_norm(np.zeros((0, 0))) == 0.0

    def test_power_iteration_oracle(self, rng):
        for _ in range(5):
            A = rand_complex(rng, 8, 8)
            assert spectral_norm(A) == pytest.approx(power_iteration_norm(A), rel=1e-8)

    def test_cstar_identity(self, rng):
        A = rand_complex(rng, 7, 7)
        assert spectral_norm(A.conj().T @ A) == pytest.approx(spectral_norm(A) ** 2, rel=1e-9)

    def test_batched(self, rng):
        stack = rand_complex(rng, 4, 5, 5)
        np.testing.assert_allclose(spectral_norms(stack), [spectral_norm(A) for A in stack], rtol=1e-12)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            spectral_norm(np.array([[np.nan]]))

    @given(st.integers(0, 2**31 - 1), st.integers(1, 6))
    def test_submultiplicative_and_adjoint(self, seed, n):
        rng = np.random.default_rng(seed)
        A, B = rand_complex(rng, n, n), rand_complex(rng, n, n)
        assert spectral_norm(A @ B) <= spectral_norm(A) * spectral_norm(B) + 1e-9
        assert abs(spectral_norm(A.conj().T) - spectral_norm(A)) <= 1e-10 * max(1.0, spectral_norm(A))


class TestHermitianExp:
    def test_zero(self):
        np.testing.assert_allclose(exp_i_hermitian(np.zeros((3, 3)), 2.0), np.eye(3), atol=1e-15)

    def test_diagonal(self):
        U = exp_i_hermitian(np.diag([1.0, 2.0]), np.pi)
        np.testing.assert_allclose(U, np.diag([np.exp(1j * np.pi), np.exp(2j * np.pi)]), atol=1e-14)

    def test_group_law(self, rng):
        H = rand_hermitian(rng, 6)
        np.testing.assert_allclose(exp_i_hermitian(H, 0.7) @ exp_i_hermitian(H, -0.7), np.eye(6), atol=1e-9)

    def test_matches_taylor_oracle(self, rng):
        H = rand_hermitian(rng, 5)
        np.testing.assert_allclose(exp_i_hermitian(H, 1.3), taylor_expm(1.3j * H), atol=1e-10)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            exp_i_hermitian(np.array([[0, 1], [0, 0]]), 1.0)

    @given(st.integers(0, 2**31 - 1), st.floats(-50, 50))
    def test_unitary(self, seed, t):
        H = rand_hermitian(np.random.default_rng(seed), 4)
        U = exp_i_hermitian(H, t)
        assert spectral_norm(U.conj().T @ U - np.eye(4)) <= 1e-9
        assert hermitian_defect(H) == 0.0


class TestDFT:
    def test_constant(self):
        np.testing.assert_allclose(dft_cyclic(np.ones(4)), [1, 0, 0, 0], atol=1e-15)

    def test_two_point(self):
        np.testing.assert_allclose(dft_cyclic([1, 0]), [0.5, 0.5], atol=1e-15)

    def test_round_trip(self, rng):
        f = rand_complex(rng, 8)
        np.testing.assert_allclose(dft_cyclic(dft_cyclic(f), forward=False), f, atol=1e-12)

    def test_naive_oracle(self, rng):
        f = rand_complex(rng, 12)
        np.testing.assert_allclose(dft_cyclic(f), naive_dft(f), atol=1e-12)
        np.testing.assert_allclose(dft_cyclic(f, forward=False), naive_dft(f, forward=False), atol=1e-11)

    def test_empty(self):
        with pytest.raises(ValueError):
            dft_cyclic([])

    @pytest.mark.parametrize("s", [2, 6, 8, 24])
    def test_characters_one_hot(self, s):
        x = np.arange(s)
        for j in range(s):
            fhat = dft_cyclic(np.exp(2j * np.pi * j * x / s))
            e = np.zeros(s)
            e[j] = 1
            np.testing.assert_allclose(fhat, e, atol=1e-12)


class TestCircleSup:
    def test_constant(self):
        assert circle_sup({0: 3.0}) == (3.0, 3.0)

    def test_monomial(self):
        for count in (1, 5, 64):
            est, ub = circle_sup({1: 1.0}, CircleGrid(count))
            assert est == pytest.approx(1.0) and ub == 1.0

    def test_cosine(self):
        est, ub = circle_sup({-1: 1.0, 1: 1.0}, CircleGrid(64))
        assert abs(est - 2.0) < 1e-3 and ub == 2.0

    def test_empty_and_degree(self):
        assert circle_sup({}) == (0.0, 0.0)
        assert laurent_degree({-3: 1.0, 2: 1.0, 5: 0.0}) == 3
        assert CircleGrid.for_degree(3).count == 256
        with pytest.raises(ValueError):
            CircleGrid(0)

    @given(st.integers(0, 2**31 - 1), st.integers(1, 6), st.integers(1, 8))
    def test_bracket_and_nested_monotone(self, seed, d, base):
        rng = np.random.default_rng(seed)
        coeffs = {k: complex(*rng.standard_normal(2)) for k in range(-d, d + 1)}
        est_fine, ub = circle_sup(coeffs, CircleGrid(4096))
        prev = 0.0
        # nested grids: each refines the last
        for mult in (1, 2, 4, 8):
            est, ub2 = circle_sup(coeffs, CircleGrid(base * mult))
            assert ub2 == ub
            assert prev <= est + 1e-12
            assert est <= ub + 1e-12
            prev = est
        assert est_fine <= ub + 1e-12
