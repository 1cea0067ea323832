import numpy as np
import pytest

from sparsestream.errors import FactorizationFailure, InvalidInput
from sparsestream.model import SolverConfig
from sparsestream.solver import (
    GramFactorization,
    noise_norm_value,
    prox_l21_columns,
    soft_threshold,
    solve_sparse_code,
    update_Z,
)


class TestSoftThreshold:
    def test_shrinkage(self):
        np.testing.assert_allclose(soft_threshold(np.array([[1.5]]), 1.0),
                                   [[0.5]])

    def test_sub_threshold_annihilation(self):
        np.testing.assert_allclose(soft_threshold(np.array([[-0.3]]), 0.5),
                                   [[0.0]])

    def test_elementwise(self):
        M = np.array([[2.0, -2.0], [0.0, 1.0]])
        expected = np.array([[1.0, -1.0], [0.0, 0.0]])
        np.testing.assert_allclose(soft_threshold(M, 1.0), expected)

    def test_rejects_nonpositive_tau(self):
        with pytest.raises(InvalidInput):
            soft_threshold(np.zeros((2, 2)), 0.0)

    def test_is_l1_prox(self, rng):
        # subgradient optimality of tau*|t| + 0.5*(t - m)^2 at the output
        for _ in range(20):
            M = rng.normal(scale=2.0, size=(3, 3))
            tau = float(rng.uniform(0.1, 1.5))
            J = soft_threshold(M, tau)
            nz = np.abs(J) > 0
            assert np.all(np.abs(tau * np.sign(J[nz]) + J[nz] - M[nz]) < 1e-12)
            assert np.all(np.abs(M[~nz]) <= tau + 1e-12)


class TestProxL21:
    def test_column_scaling(self):
        q = np.array([[0.0], [2.0], [0.0]])
        np.testing.assert_allclose(prox_l21_columns(q, 1.0),
                                   [[0.0], [1.0], [0.0]])

    def test_small_column_zeroed(self):
        q = np.array([[0.3], [0.4]])
        np.testing.assert_allclose(prox_l21_columns(q, 1.0), [[0.0], [0.0]])

    def test_two_columns(self):
        Q = np.zeros((2, 2))
        Q[0, 0] = 4.0
        Q[1, 1] = 0.5
        out = prox_l21_columns(Q, 1.0)
        np.testing.assert_allclose(out[:, 0], [3.0, 0.0])
        np.testing.assert_allclose(out[:, 1], [0.0, 0.0])

    def test_is_column_norm_prox(self, rng):
        # per column: tau*||e|| + 0.5*||e - q||^2 stationarity
        for _ in range(20):
            Q = rng.normal(scale=2.0, size=(3, 3))
            tau = float(rng.uniform(0.1, 1.5))
            E = prox_l21_columns(Q, tau)
            for i in range(Q.shape[1]):
                e, q = E[:, i], Q[:, i]
                norm = np.linalg.norm(e)
                if norm > 0:
                    grad = tau * e / norm + e - q
                    assert np.linalg.norm(grad) < 1e-12
                else:
                    assert np.linalg.norm(q) <= tau + 1e-12


class TestUpdateZ:
    def test_zero_fixed_point(self):
        X = np.zeros((3, 4))
        fact = GramFactorization(X)
        Z = update_Z(X, np.zeros((3, 4)), np.zeros((4, 4)),
                     np.zeros((3, 4)), np.zeros((4, 4)), 1.0, fact)
        np.testing.assert_allclose(Z, np.zeros((4, 4)))

    def test_normal_equations_residual(self, rng):
        X = rng.standard_normal((3, 4))
        E = rng.standard_normal((3, 4))
        J = rng.standard_normal((4, 4))
        Y1 = rng.standard_normal((3, 4))
        Y2 = rng.standard_normal((4, 4))
        mu = 0.7
        fact = GramFactorization(X)
        Z = update_Z(X, E, J, Y1, Y2, mu, fact)
        A = np.eye(4) + X.T @ X
        rhs = X.T @ X - X.T @ E + J + (X.T @ Y1 - Y2) / mu
        rel = np.linalg.norm(A @ Z - rhs) / np.linalg.norm(rhs)
        assert rel < 1e-10

    def test_matches_pivoted_elimination(self, rng):
        # independent route: LU-based dense solve
        X = rng.standard_normal((3, 4))
        E = rng.standard_normal((3, 4))
        J = rng.standard_normal((4, 4))
        Y1 = rng.standard_normal((3, 4))
        Y2 = rng.standard_normal((4, 4))
        mu = 2.3
        fact = GramFactorization(X)
        Z = update_Z(X, E, J, Y1, Y2, mu, fact)
        A = np.eye(4) + X.T @ X
        rhs = X.T @ X - X.T @ E + J + (X.T @ Y1 - Y2) / mu
        np.testing.assert_allclose(Z, np.linalg.solve(A, rhs), atol=1e-10)

    def test_contaminated_input_raises(self):
        X = np.ones((2, 2))
        fact = GramFactorization(X)
        bad = np.full((2, 2), np.nan)
        with pytest.raises(FactorizationFailure):
            update_Z(X, bad, np.zeros((2, 2)), np.zeros((2, 2)),
                     np.zeros((2, 2)), 1.0, fact)

    def test_nan_matrix_rejected_at_factorization(self):
        with pytest.raises(FactorizationFailure):
            GramFactorization(np.array([[np.nan, 0.0], [0.0, 1.0]]))


class TestSolveSparseCode:
    def test_zero_matrix_converges_immediately(self):
        code = solve_sparse_code(np.zeros((4, 3)), SolverConfig(lam=1.0))
        assert code.converged
        assert code.iterations == 1
        np.testing.assert_allclose(code.Z, np.zeros((3, 3)))
        np.testing.assert_allclose(code.E, np.zeros((4, 3)))

    def test_rejects_nan(self):
        X = np.ones((3, 3))
        X[1, 1] = np.inf
        with pytest.raises(InvalidInput):
            solve_sparse_code(X, SolverConfig())

    def test_converged_residuals_below_tolerance(self, rng):
        cfg = SolverConfig(lam=1.0)
        X = rng.standard_normal((8, 12))
        code = solve_sparse_code(X, cfg)
        assert code.converged
        r1, r2 = code.final_residuals
        assert r1 < cfg.epsilon and r2 < cfg.epsilon
        # residuals recomputed from the returned matrices agree
        assert np.max(np.abs(X - X @ code.Z - code.E)) < cfg.epsilon

    def test_zero_diagonal_enforced(self, rng):
        X = rng.standard_normal((6, 10))
        code = solve_sparse_code(X, SolverConfig(lam=1.0, zero_diagonal=True))
        np.testing.assert_array_equal(np.diag(code.Z), np.zeros(10))

    def test_nonconvergence_reported_not_raised(self, rng):
        X = rng.standard_normal((5, 8))
        code = solve_sparse_code(X, SolverConfig(lam=1.0, max_iters=3))
        assert not code.converged
        assert code.iterations == 3

    def test_identical_columns_pair_up(self):
        u = np.array([1.0, 0.0, 0.0, 0.0])
        w = np.array([0.0, 1.0, 0.0, 0.0])
        X = np.column_stack([u, u, w])
        code = solve_sparse_code(X, SolverConfig(lam=10.0, zero_diagonal=True))
        assert abs(code.Z[0, 1]) > 0.9 and abs(code.Z[1, 0]) > 0.9
        # orthogonal column: no usable dictionary, absorbed by the noise term
        assert np.max(np.abs(code.Z[:, 2])) < 1e-6
        assert np.linalg.norm(code.E[:, 2]) == pytest.approx(1.0, abs=1e-6)

    def test_all_zero_column_percolates_to_zero_code(self, rng):
        X = rng.standard_normal((5, 6))
        X[:, 2] = 0.0
        code = solve_sparse_code(X, SolverConfig(lam=1.0))
        assert np.max(np.abs(code.Z[:, 2])) < 1e-6
        assert np.linalg.norm(code.E[:, 2]) < 1e-6

    def test_support_pattern_scale_invariant_on_exact_data(self, rng):
        # two 1-D subspaces with distinct column magnitudes: the minimum-l1
        # self-representation is unique, so its support must survive scaling
        d = 10
        u = np.linalg.qr(rng.standard_normal((d, 1)))[0][:, 0]
        v = np.linalg.qr(rng.standard_normal((d, 1)))[0][:, 0]
        a = rng.uniform(0.5, 2.0, 8) * rng.choice([-1, 1], 8)
        b = rng.uniform(0.5, 2.0, 8) * rng.choice([-1, 1], 8)
        X = np.hstack([np.outer(u, a), np.outer(v, b)])
        cfg = SolverConfig(lam=20.0)
        base = solve_sparse_code(X, cfg)
        scaled = solve_sparse_code(3.0 * X, cfg)
        assert base.converged and scaled.converged
        np.testing.assert_array_equal(np.abs(base.Z) > 1e-4,
                                      np.abs(scaled.Z) > 1e-4)

    def test_l1_noise_norm_runs(self, rng):
        X = rng.standard_normal((5, 8))
        code = solve_sparse_code(X, SolverConfig(lam=1.0, noise_norm="l1"))
        assert code.converged

    def test_fro_noise_norm_runs(self, rng):
        X = rng.standard_normal((5, 8))
        code = solve_sparse_code(X, SolverConfig(lam=1.0, noise_norm="fro"))
        assert code.converged


def test_mu_sequence_clamped():
    cfg = SolverConfig(mu0=1.0, mu_max=2.5, rho=1.5)
    mus = [cfg.mu0]
    for _ in range(5):
        mus.append(min(cfg.rho * mus[-1], cfg.mu_max))
    assert mus == [1.0, 1.5, 2.25, 2.5, 2.5, 2.5]
    assert all(b >= a for a, b in zip(mus, mus[1:]))


def test_noise_norm_value_variants():
    E = np.array([[3.0, 0.0], [4.0, 2.0]])
    assert noise_norm_value(E, "l21") == pytest.approx(7.0)
    assert noise_norm_value(E, "l1") == pytest.approx(9.0)
    assert noise_norm_value(E, "fro") == pytest.approx(29.0)
