from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rdlab import dihedral as sd
from rdlab import odometer as odo
from rdlab.numerics import spectral_norm
from rdlab.rdcore import block_decompose, rd_norm
from rdlab.scales import Character, LengthSequence, SupernaturalScale, shell

S = SupernaturalScale.dyadic(4)
MIX = SupernaturalScale((1, 2, 6, 12))


def rand_sd(rng, scale=S, m=3):
    return sd.SDElement(odo.random_element(scale, m, rng), odo.random_element(scale, m, rng))


def close(a, b, tol=1e-10):
    a, b = a.embed(max(a.stage, b.stage)), b.embed(max(a.stage, b.stage))
    return (np.max(np.abs(a.f.values - b.f.values)) <= tol
            and np.max(np.abs(a.g.values - b.g.values)) <= tol)


V = sd.v_element(S, 3)
ONE = sd.function_element(odo.from_values(np.ones(8), 3, S))


class TestProduct:
    def test_v_squared(self):
        assert close(V * V, ONE)

    def test_v_f_v(self, rng):
        f = odo.random_element(S, 3, rng)
        assert close(V * sd.function_element(f) * V, sd.function_element(odo.flip_kappa(f)))

    def test_associative(self, rng):
        for _ in range(100):
            a, b, c = rand_sd(rng), rand_sd(rng), rand_sd(rng)
            assert close((a * b) * c, a * (b * c), 1e-10 * (1 + sd.cstar_norm(a) * sd.cstar_norm(b) * sd.cstar_norm(c)))


class TestAdjointGamma:
    def test_v_self_adjoint(self):
        assert close(V.adjoint(), V) and V.is_self_adjoint()

    def test_function_adjoint(self, rng):
        f = odo.random_element(S, 3, rng)
        assert close(sd.function_element(f).adjoint(), sd.function_element(f.conj()))

    def test_norm_of_adjoint(self, rng):
        for _ in range(20):
            a = rand_sd(rng)
            assert abs(sd.cstar_norm(a.adjoint()) - sd.cstar_norm(a)) <= 1e-10 * sd.cstar_norm(a)
            assert close(a.adjoint().adjoint(), a)

    def test_recover_components(self, rng):
        a = rand_sd(rng)
        assert close(0.5 * (a + sd.gamma(a)), sd.function_element(a.f))
        assert close(V * (0.5 * (a - sd.gamma(a))), sd.function_element(a.g))
        assert close(sd.gamma(sd.gamma(a)), a)

    def test_gamma_automorphism(self, rng):
        a, b = rand_sd(rng), rand_sd(rng)
        assert close(sd.gamma(a * b), sd.gamma(a) * sd.gamma(b))


class TestRepresentation:
    def test_v_and_unit(self):
        I = np.eye(8)
        np.testing.assert_allclose(sd.represent(V), np.block([[0 * I, I], [I, 0 * I]]))
        assert sd.cstar_norm(V) == pytest.approx(1.0)
        np.testing.assert_allclose(sd.represent(ONE), np.eye(16))

    def test_star_multiplicative(self, rng):
        for _ in range(100):
            a, b = rand_sd(rng, MIX), rand_sd(rng, MIX)
            np.testing.assert_allclose(sd.represent(a * b), sd.represent(a) @ sd.represent(b), atol=1e-10)
            np.testing.assert_allclose(sd.represent(a.adjoint()), sd.represent(a).conj().T, atol=1e-12)

    def test_from_matrix_rejects_outside(self):
        X = np.zeros((16, 16))
        X[0, 1] = 1
        with pytest.raises(ValueError):
            sd.from_matrix(X, S, 3)

    def test_records(self, rng):
        a = rand_sd(rng, MIX)
        assert close(sd.from_records(sd.to_records(a), MIX, 3), a, 1e-12)


class TestExpectation:
    def test_kills_top_shell(self):
        for z in shell(3, S):
            chi = odo.character(z, 3, S)
            a = sd.SDElement(0 * chi, chi)
            assert sd.cstar_norm(sd.expectation(a, 2)) < 1e-12

    def test_fixes_stage(self, rng):
        a = rand_sd(rng, m=2)
        assert close(sd.expectation(a.embed(3), 2), a)

    def test_bound_two(self, rng):
        alg = sd.DihedralAlgebra(S, 3)
        worst = 0.0
        for _ in range(500):
            a = alg.random(rng)
            n = int(rng.integers(0, 3))
            worst = max(worst, alg.norm(alg.expectation(a, n)) / alg.norm(a))
        assert worst <= 2 + 1e-9


class TestHashNorm:
    def test_v(self):
        L = LengthSequence.default(4, omega=2.0)
        for N in range(3):
            assert sd.hash_norm(V, N, L) == pytest.approx(L[0] ** N)

    def test_rd_below_hash(self, rng):
        L = LengthSequence.default(4, omega=2.0)
        alg = sd.DihedralAlgebra(S, 4)
        for _ in range(200):
            a = alg.random(rng)
            bv = block_decompose(alg, a)
            for N in (0, 1, 2):
                assert rd_norm(bv, N, L) <= sd.hash_norm(a, N, L) * (1 + 1e-12)
            for blk in bv.blocks:
                assert odo.sup_norm(blk.f) <= sd.cstar_norm(blk) + 1e-12


class TestExponential:
    def test_zero(self):
        assert close(sd.exp_self_adjoint(0 * V, 2.0), ONE)

    @pytest.mark.parametrize("t", [0.3, 1.0, 2.5])
    def test_v_closed_form(self, t):
        e = sd.exp_self_adjoint(V, t)
        assert close(e, np.cos(t) * ONE + 1j * np.sin(t) * V, 1e-12)

    def test_group_law(self, rng):
        alg = sd.DihedralAlgebra(S, 3)
        a = alg.random(rng, self_adjoint=True)
        assert close(sd.exp_self_adjoint(a, 1.7) * sd.exp_self_adjoint(a, -1.7), ONE, 1e-9)

    def test_rejects_non_self_adjoint(self, rng):
        with pytest.raises(ValueError):
            sd.exp_self_adjoint(sd.SDElement(odo.from_values([1j, 0], 1, S), odo.from_values([0, 0], 1, S)), 1.0)

    @given(st.integers(0, 2**31 - 1), st.floats(-30, 30))
    def test_closed_under_exponential(self, seed, t):
        alg = sd.DihedralAlgebra(MIX, 3)
        a = alg.random(np.random.default_rng(seed), self_adjoint=True)
        U = np.linalg.eigh(sd.represent(a))
        w, Q = U
        X = (Q * np.exp(1j * t * w)) @ Q.conj().T
        e = sd.from_matrix(X, MIX, 3)
        assert np.max(np.abs(sd.represent(e) - X)) <= 1e-9
        assert spectral_norm(sd.represent(e)) == pytest.approx(1.0, abs=1e-9)
