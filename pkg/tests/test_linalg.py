import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import generalized_lambda_max_3x3, random_hermitian_pd, random_hermitian_psd
from relaybeam.linalg import (
    ConvergenceError,
    DimensionError,
    NotPositiveDefiniteError,
    RankOne,
    cholesky,
    dominant_eigenpair,
    fix_phase,
    hadamard,
    outer,
    solve,
)


class TestHadamardOuter:
    def test_hadamard_examples(self):
        np.testing.assert_array_equal(hadamard([1, 2], [1, 1]), [1, 2])
        np.testing.assert_array_equal(hadamard([1, 1j], [1j, 1j]), [1j, -1])
        np.testing.assert_array_equal(hadamard([0, 5], [7, 0]), [0, 0])

    def test_hadamard_length_mismatch(self):
        with pytest.raises(DimensionError):
            hadamard([1, 2], [1, 2, 3])

    def test_outer_examples(self):
        np.testing.assert_array_equal(outer([1, 0], [1, 0]), [[1, 0], [0, 0]])
        np.testing.assert_array_equal(outer([1, 1j], [1, 1j]), [[1, -1j], [1j, 1]])
        np.testing.assert_array_equal(outer([2], [3]), [[6]])

    def test_outer_self_is_hermitian_psd(self):
        rng = np.random.default_rng(1)
        a = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        m = outer(a, a)
        np.testing.assert_allclose(m, m.conj().T)
        assert np.linalg.eigvalsh(m).min() > -1e-12


class TestCholesky:
    def test_identity(self):
        np.testing.assert_array_equal(cholesky(np.eye(3)).lower, np.eye(3))

    def test_diagonal(self):
        np.testing.assert_allclose(cholesky(np.diag([4.0, 9.0])).lower, np.diag([2.0, 3.0]))

    def test_two_by_two(self):
        a = np.array([[2.0, 1.0], [1.0, 2.0]])
        low = cholesky(a).lower
        expected = np.array([[np.sqrt(2), 0], [1 / np.sqrt(2), np.sqrt(1.5)]])
        np.testing.assert_allclose(low, expected, rtol=1e-14)
        # direct multiplication reconstructs the input
        np.testing.assert_allclose(low @ low.conj().T, a, rtol=1e-14)

    def test_not_positive_definite(self):
        with pytest.raises(NotPositiveDefiniteError):
            cholesky([[1.0, 2.0], [2.0, 1.0]])
        with pytest.raises(NotPositiveDefiniteError):
            cholesky(np.zeros((2, 2)))

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            cholesky([[1.0, 0.5], [0.0, 1.0]])

    def test_factor_is_immutable(self):
        f = cholesky(np.eye(2))
        with pytest.raises(ValueError):
            f.lower[0, 0] = 3.0


class TestSolve:
    def test_identity(self):
        b = np.array([1 + 2j, -3.0])
        np.testing.assert_array_equal(solve(cholesky(np.eye(2)), b), b)

    def test_diagonal(self):
        np.testing.assert_allclose(solve(cholesky(np.diag([2.0, 4.0])), [2.0, 4.0]), [1.0, 1.0])

    def test_matrix_rhs(self):
        rng = np.random.default_rng(3)
        a = random_hermitian_pd(rng, 4)
        b = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
        x = solve(cholesky(a), b)
        assert np.linalg.norm(a @ x - b) <= 1e-10 * np.linalg.norm(b)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            solve(cholesky(np.eye(2)), np.ones(3))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 8))
    def test_round_trip_residual(self, seed, n):
        rng = np.random.default_rng(seed)
        a = random_hermitian_pd(rng, n)
        b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        f = cholesky(a)
        rec = f.reconstruct()
        assert np.linalg.norm(rec - a) <= 1e-10 * np.linalg.norm(a)
        assert np.linalg.norm(a @ solve(f, b) - b) <= 1e-10 * np.linalg.norm(b)


class TestDominantEigenpair:
    def test_diagonal(self):
        pair = dominant_eigenpair(cholesky(np.eye(2)), np.diag([3.0, 1.0]))
        assert pair.value == pytest.approx(3.0, rel=1e-12)
        np.testing.assert_allclose(pair.vector, [1.0, 0.0], atol=1e-10)

    def test_rank_one_example(self):
        u = np.array([1.0, 1.0])
        for b in (RankOne(u), outer(u, u)):
            pair = dominant_eigenpair(cholesky(np.diag([2.0, 2.0])), b)
            assert pair.value == pytest.approx(1.0, rel=1e-12)
            np.testing.assert_allclose(pair.vector, [1 / np.sqrt(2)] * 2, rtol=1e-9)

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_cubic_oracle(self, seed):
        rng = np.random.default_rng(seed)
        a = random_hermitian_pd(rng, 3)
        b = random_hermitian_psd(rng, 3)
        pair = dominant_eigenpair(cholesky(a), b)
        expected = generalized_lambda_max_3x3(a, b)
        assert pair.value == pytest.approx(expected, rel=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.integers(1, 8))
    def test_generalized_residual_and_phase(self, seed, n, rank):
        rng = np.random.default_rng(seed)
        a = random_hermitian_pd(rng, n)
        b = random_hermitian_psd(rng, n, min(rank, n))
        pair = dominant_eigenpair(cholesky(a), b)
        v = pair.vector
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)
        assert pair.value >= 0
        assert np.linalg.norm(b @ v - pair.value * a @ v) <= 1e-8 * np.linalg.norm(b)
        k = np.argmax(np.abs(v))
        assert v[k].imag == 0 and v[k].real > 0

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 8))
    def test_rank_one_fast_path_agrees_with_iteration(self, seed, n):
        rng = np.random.default_rng(seed)
        a = random_hermitian_pd(rng, n)
        u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        f = cholesky(a)
        fast = dominant_eigenpair(f, RankOne(u))
        slow = dominant_eigenpair(f, outer(u, u))
        assert fast.iterations == 0
        assert fast.value == pytest.approx(slow.value, rel=1e-10)
        assert abs(abs(np.vdot(fast.vector, slow.vector)) - 1) <= 1e-8

    def test_zero_b(self):
        pair = dominant_eigenpair(cholesky(np.eye(3)), np.zeros((3, 3)))
        assert pair.value == 0.0
        assert np.linalg.norm(pair.vector) == pytest.approx(1.0)

    def test_start_vector_in_null_space(self):
        # all-ones start is annihilated by B; the perturbed restart must find e1 - e2
        u = np.array([1.0, -1.0, 0.0])
        pair = dominant_eigenpair(cholesky(np.eye(3)), outer(u, u))
        assert pair.value == pytest.approx(2.0, rel=1e-10)
        assert abs(abs(np.vdot(pair.vector, u / np.sqrt(2))) - 1) <= 1e-8

    def test_non_convergence_is_reported(self):
        b = np.diag([1.0, 1.0 - 1e-9, 0.0])
        with pytest.raises(ConvergenceError) as info:
            dominant_eigenpair(cholesky(np.eye(3)), b, max_iter=5)
        assert info.value.iterations == 5
        assert np.linalg.norm(info.value.vector) == pytest.approx(1.0)

    def test_shape_errors(self):
        with pytest.raises(DimensionError):
            dominant_eigenpair(cholesky(np.eye(2)), np.eye(3))
        with pytest.raises(DimensionError):
            dominant_eigenpair(cholesky(np.eye(2)), RankOne([1.0, 2.0, 3.0]))


def test_fix_phase_makes_largest_entry_real_positive():
    v = np.array([0.1j, -2.0 + 0.5j, 0.3])
    out = fix_phase(v)
    assert out[1].imag == 0 and out[1].real > 0
    assert abs(np.vdot(out, v)) == pytest.approx(np.linalg.norm(v) ** 2)
