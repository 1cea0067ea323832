"""Batch sparse self-representation solver.

Solves

    min_{Z,E}  ||Z||_1 + lam * ||E||_l   s.t.  X = X Z + E

by inexact augmented-Lagrange iteration with an auxiliary split Z = J.
Each iteration performs three closed-form updates (J by elementwise
shrinkage, Z by a cached SPD solve, E by the prox of the chosen noise
norm), followed by multiplier and penalty steps. Iteration stops when
both max-norm residuals ||X - XZ - E|| and ||Z - J|| fall below the
tolerance.
"""

from __future__ import annotations

import contextlib

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import FactorizationFailure, InvalidInput
from .model import SolverConfig, SparseCode

try:
    from threadpoolctl import threadpool_limits
except ImportError:  # pragma: no cover
    threadpool_limits = None

#: Below this column count, threaded BLAS kernels cost more in sync
#: overhead than they save; the per-iteration products are tiny.
_SINGLE_THREAD_LIMIT = 1024


def _blas_scope(n: int):
    if threadpool_limits is not None and n <= _SINGLE_THREAD_LIMIT:
        return threadpool_limits(limits=1)
    return contextlib.nullcontext()


def soft_threshold(M, tau: float) -> np.ndarray:
    """Elementwise shrinkage sign(m) * max(|m| - tau, 0).

    This is the proximal operator of tau * ||.||_1: the unique minimizer
    of tau * ||J||_1 + 0.5 * ||J - M||_F^2.
    """
    M = np.asarray(M, dtype=float)
    if tau <= 0:
        raise InvalidInput(f"tau must be positive, got {tau}")
    return np.sign(M) * np.maximum(np.abs(M) - tau, 0.0)


def prox_l21_columns(Q, tau: float) -> np.ndarray:
    """Columnwise shrinkage: the prox of tau * sum_i ||q_i||_2.

    Column i of the output is max(0, 1 - tau/||q_i||_2) * q_i; columns
    with norm at most tau collapse to exactly zero.
    """
    Q = np.asarray(Q, dtype=float)
    if tau <= 0:
        raise InvalidInput(f"tau must be positive, got {tau}")
    norms = np.linalg.norm(Q, axis=0)
    scale = np.zeros_like(norms)
    np.divide(norms - tau, norms, out=scale, where=norms > tau)
    return Q * scale


class GramFactorization:
    """Cholesky factorization of I + X'X, cached once per window.

    X is fixed while the solver iterates, so the factorization (and the
    Gram matrix X'X it needs anyway) is reused by every Z update.
    """

    def __init__(self, X):
        X = np.asarray(X, dtype=float)
        if not np.all(np.isfinite(X)):
            raise FactorizationFailure("matrix contains NaN/Inf entries")
        self.XtX = X.T @ X
        A = self.XtX + np.eye(X.shape[1])
        try:
            self._cho = cho_factor(A)
        except (LinAlgError, ValueError) as exc:
            raise FactorizationFailure(str(exc)) from exc

    def solve(self, rhs):
        return cho_solve(self._cho, rhs)


def update_Z(X, E, J, Y1, Y2, mu: float, factorization: GramFactorization) -> np.ndarray:
    """One coefficient update: (I + X'X)^-1 (X'X - X'E + J + (X'Y1 - Y2)/mu)."""
    rhs = factorization.XtX - X.T @ E + J + (X.T @ Y1 - Y2) / mu
    if not np.all(np.isfinite(rhs)):
        raise FactorizationFailure("update produced NaN/Inf entries")
    return factorization.solve(rhs)


def _prox_noise(Q, cfg: SolverConfig, mu: float) -> np.ndarray:
    """E update: argmin lam*||E||_l + mu/2 * ||Q - E||_F^2."""
    if cfg.noise_norm == "l21":
        return prox_l21_columns(Q, cfg.lam / mu)
    if cfg.noise_norm == "l1":
        return soft_threshold(Q, cfg.lam / mu)
    # squared Frobenius: ridge closed form
    return Q * (mu / (2.0 * cfg.lam + mu))


def noise_norm_value(E, noise_norm: str) -> float:
    """Value of the configured noise norm, for objective reporting."""
    E = np.asarray(E, dtype=float)
    if noise_norm == "l21":
        return float(np.sum(np.linalg.norm(E, axis=0)))
    if noise_norm == "l1":
        return float(np.sum(np.abs(E)))
    return float(np.sum(E * E))


def solve_sparse_code(X, cfg: SolverConfig) -> SparseCode:
    """Run the full ALM loop on one window matrix.

    Returns a SparseCode whose ``converged`` flag is False when the
    iteration budget ran out; the stream treats that as a reportable
    condition, not an error. With ``cfg.zero_diagonal`` the diagonals of
    both J and Z are projected to zero every iteration, so the returned
    code has an exactly zero diagonal.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise InvalidInput("window matrix must be 2-D")
    if not np.all(np.isfinite(X)):
        raise InvalidInput("window matrix contains NaN/Inf entries")
    d, n = X.shape
    if n < 1:
        raise InvalidInput("window matrix has no columns")

    with _blas_scope(n):
        fact = GramFactorization(X)
        Z = np.zeros((n, n))
        J = np.zeros((n, n))
        E = np.zeros((d, n))
        Y1 = np.zeros((d, n))
        Y2 = np.zeros((n, n))
        mu = cfg.mu0

        converged = False
        r1 = np.inf
        r2 = np.inf
        iterations = 0
        for iterations in range(1, cfg.max_iters + 1):
            J = soft_threshold(Z + Y2 / mu, 1.0 / mu)
            if cfg.zero_diagonal:
                np.fill_diagonal(J, 0.0)

            Z = update_Z(X, E, J, Y1, Y2, mu, fact)
            if cfg.zero_diagonal:
                np.fill_diagonal(Z, 0.0)

            XZ = X @ Z
            E = _prox_noise(X - XZ + Y1 / mu, cfg, mu)

            R1 = X - XZ - E
            R2 = Z - J
            Y1 = Y1 + mu * R1
            Y2 = Y2 + mu * R2
            mu = min(cfg.rho * mu, cfg.mu_max)

            r1 = float(np.max(np.abs(R1))) if R1.size else 0.0
            r2 = float(np.max(np.abs(R2)))
            if r1 < cfg.epsilon and r2 < cfg.epsilon:
                converged = True
                break

    return SparseCode(
        Z=Z,
        E=E,
        iterations=iterations,
        converged=converged,
        final_residuals=(r1, r2),
    )
