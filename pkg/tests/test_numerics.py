import numpy as np
import pytest

from numerics.LinearAlgebra import (controllability_matrix, in_span, is_psd, normalize_column_signs,
                                    null_space_basis, range_basis, spectral_radius, svd_rank)
from numerics.NumericsError import ConfigError, InvalidMatrix, NotStabilizable, ShapeError
from numerics.RiccatiSolver import riccati_residual, solve_dare
from numerics.Tolerances import Tolerances

SCALAR_P = (0.25 + np.sqrt(4.0625)) / 2.0


class TestTolerances:
    def test_defaults(self):
        tol = Tolerances()
        assert (tol.rank_eps, tol.residual_eps, tol.dare_eps, tol.dare_max_iter) == (1e-9, 1e-7, 1e-10, 10_000)

    @pytest.mark.parametrize("kwargs", [{'rank_eps': 0.0}, {'residual_eps': -1.0}, {'dare_max_iter': 0}])
    def test_rejects_non_positive(self, kwargs):
        with pytest.raises(ConfigError):
            Tolerances(**kwargs)


class TestRank:
    def test_identity_and_zero(self):
        assert svd_rank(np.eye(3)) == 3
        assert svd_rank(np.zeros((2, 2))) == 0

    @pytest.mark.parametrize("seed", range(5))
    def test_outer_product(self, seed):
        rng = np.random.default_rng(seed)
        M = rng.standard_normal((5, 2)) @ rng.standard_normal((2, 3))
        assert svd_rank(M) == 2

    def test_non_finite(self):
        with pytest.raises(InvalidMatrix):
            svd_rank(np.array([[1.0, np.nan]]))


class TestNullSpace:
    def test_single_zero_column(self):
        basis = null_space_basis(np.array([[1.0, 0.0], [0.0, 0.0]]))
        assert basis.shape == (2, 1)
        np.testing.assert_allclose(np.abs(basis[:, 0]), [0.0, 1.0], atol=1e-14)

    def test_full_column_rank(self, rng):
        assert null_space_basis(rng.standard_normal((4, 2))).shape == (2, 0)

    def test_row_vector(self):
        M = np.array([[1.0, 1.0, 0.0]])
        basis = null_space_basis(M)
        assert basis.shape == (3, 2)
        np.testing.assert_allclose(M @ basis, 0.0, atol=1e-14)
        np.testing.assert_allclose(basis.T @ basis, np.eye(2), atol=1e-14)

    def test_dimension_matches_rank(self, rng):
        M = rng.standard_normal((6, 3)) @ rng.standard_normal((3, 7))
        assert null_space_basis(M).shape[1] == 7 - svd_rank(M)

    def test_range_basis_is_orthonormal(self, rng):
        M = rng.standard_normal((6, 2)) @ rng.standard_normal((2, 4))
        U = range_basis(M)
        assert U.shape == (6, 2)
        np.testing.assert_allclose(U @ U.T @ M, M, atol=1e-12)


class TestSpan:
    def test_collinear(self):
        assert in_span([2.0, 4.0], np.array([[1.0], [2.0]]))

    def test_independent(self):
        assert not in_span([1.0, 0.0], np.array([[0.0], [1.0]]))

    def test_tolerance_boundary(self, rng):
        w = rng.standard_normal(6)
        assert in_span(w + 1e-12 * rng.standard_normal(6), w.reshape(-1, 1))

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            in_span([1.0, 0.0, 0.0], np.eye(2))


class TestSpectralRadius:
    def test_rotation(self):
        assert spectral_radius(np.array([[0.0, -0.5], [0.5, 0.0]])) == pytest.approx(0.5)

    def test_zero_matrix(self):
        assert spectral_radius(np.zeros((3, 3))) == 0.0

    def test_power_iteration(self, rng):
        Q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        S = Q @ np.diag([4.0, 2.0, 1.0, 0.5]) @ Q.T
        x = rng.standard_normal(4)
        for _ in range(200):
            x = S @ x
            x /= np.linalg.norm(x)
        assert spectral_radius(S) == pytest.approx(x @ S @ x, rel=1e-8)
        assert spectral_radius(S) == pytest.approx(4.0, rel=1e-12)

    def test_non_square(self):
        with pytest.raises(ShapeError):
            spectral_radius(np.ones((2, 3)))


class TestHelpers:
    def test_sign_normalization_keeps_product(self, rng):
        V, M = rng.standard_normal((4, 3)), rng.standard_normal((3, 2))
        V_n, M_n = normalize_column_signs(V, M)
        np.testing.assert_allclose(V_n @ M_n, V @ M)
        assert np.all(V_n[np.argmax(np.abs(V_n), axis=0), range(3)] > 0)

    def test_controllability(self):
        A = np.array([[0.0, 1.0], [0.0, 0.0]])
        assert svd_rank(controllability_matrix(A, [[0.0], [1.0]])) == 2
        assert svd_rank(controllability_matrix(A, [[1.0], [0.0]])) == 1

    def test_psd(self):
        assert is_psd(np.eye(2))
        assert not is_psd(np.array([[1.0, 0.0], [0.0, -1.0]]))
        assert not is_psd(np.array([[1.0, 1.0], [0.0, 1.0]]))


class TestRiccati:
    def test_scalar_closed_form(self):
        solution = solve_dare([[0.5]], [[1.0]], [[1.0]], [[1.0]])
        assert solution.P[0, 0] == pytest.approx(SCALAR_P, abs=1e-9)
        assert solution.L[0, 0] == pytest.approx(0.5 * SCALAR_P / (1.0 + SCALAR_P), abs=1e-9)
        assert solution.P[0, 0] == pytest.approx(1.13278, abs=1e-5)
        assert solution.L[0, 0] == pytest.approx(0.26557, abs=1e-5)

    @pytest.mark.parametrize("seed", range(20))
    def test_random_systems(self, seed):
        rng = np.random.default_rng(seed)
        p, l = rng.integers(1, 9), rng.integers(1, 4)
        A, B = rng.standard_normal((p, p)), rng.standard_normal((p, l))
        A *= rng.uniform(0.5, 1.5) / max(spectral_radius(A), 1e-12)
        C = rng.standard_normal((2, p))
        solution = solve_dare(A, B, C.T @ C + 1e-3 * np.eye(p), np.eye(l))
        assert solution.residual <= 1e-8 * (1.0 + np.linalg.norm(solution.P))
        assert riccati_residual(A, B, C.T @ C + 1e-3 * np.eye(p), np.eye(l), solution.P) == solution.residual
        assert spectral_radius(A - B @ solution.L) < 1.0
        np.testing.assert_allclose(solution.P, solution.P.T, atol=1e-12 * (1.0 + np.abs(solution.P).max()))

    def test_unstabilizable(self):
        with pytest.raises(NotStabilizable):
            solve_dare([[2.0]], [[0.0]], [[1.0]], [[1.0]], Tolerances(dare_max_iter=200))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            solve_dare(np.eye(2), np.ones((3, 1)), np.eye(2), np.eye(1))

    def test_loose_stopping_fails_residual_bound(self):
        with pytest.raises(NotStabilizable):
            solve_dare([[0.5]], [[1.0]], [[1.0]], [[1.0]], Tolerances(dare_eps=1e-2))

    def test_zero_cost_on_unstable_plant(self):
        # P = 0 is a fixed point, but its gain does not stabilize A = 2
        with pytest.raises(NotStabilizable):
            solve_dare([[2.0]], [[1.0]], [[0.0]], [[1.0]])

    def test_zero_cost_on_stable_plant(self):
        solution = solve_dare([[0.5]], [[1.0]], [[0.0]], [[1.0]])
        assert solution.P[0, 0] == 0.0 and solution.L[0, 0] == 0.0
        assert solution.closed_loop_radius == pytest.approx(0.5)
