"""Small dense complex linear algebra used by the beamformer.

Vectors and matrices are plain ``numpy`` complex arrays. The only solver of
any substance is :func:`dominant_eigenpair`, which finds the principal
eigenpair of ``A^{-1} B`` for Hermitian positive-definite ``A`` and Hermitian
positive-semidefinite ``B`` by whitening with the Cholesky factor of ``A``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

HERMITIAN_RTOL = 1e-12
PIVOT_RTOL = 1e-14
RESIDUAL_RTOL = 1e-10
DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10_000


class DimensionError(ValueError):
    """Operand shapes are incompatible."""


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Cholesky met a pivot that is not safely positive."""


class ConvergenceError(RuntimeError):
    """Power iteration ran out of iterations.

    The last iterate is kept on the exception so callers can inspect it.
    """

    def __init__(self, message, value, vector, iterations):
        super().__init__(message)
        self.value = value
        self.vector = vector
        self.iterations = iterations


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def as_vector(a) -> np.ndarray:
    v = np.asarray(a, dtype=complex)
    if v.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def is_hermitian(a, rtol: float = HERMITIAN_RTOL) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    scale = np.max(np.abs(a)) if a.size else 0.0
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= rtol * scale)


def hadamard(a, b) -> np.ndarray:
    a, b = as_vector(a), as_vector(b)
    if a.shape != b.shape:
        raise DimensionError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a * b


def outer(a, b) -> np.ndarray:
    """``a b^H``: entry (i, j) is ``a_i * conj(b_j)``."""
    return np.outer(as_vector(a), as_vector(b).conj())


@dataclass(frozen=True)
class RankOne:
    """A Hermitian rank-one matrix ``u u^H`` kept in factored form."""

    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", _frozen(as_vector(self.u)))

    def dense(self) -> np.ndarray:
        return outer(self.u, self.u)

    @property
    def shape(self):
        n = self.u.shape[0]
        return (n, n)


@dataclass(frozen=True)
class CholeskyFactor:
    lower: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lower", _frozen(self.lower))

    @property
    def n(self) -> int:
        return self.lower.shape[0]

    def reconstruct(self) -> np.ndarray:
        return self.lower @ self.lower.conj().T


@dataclass(frozen=True)
class EigenPair:
    value: float
    vector: np.ndarray
    iterations: int = 0

    def __post_init__(self):
        object.__setattr__(self, "vector", _frozen(self.vector))


def cholesky(a) -> CholeskyFactor:
    """Factor a Hermitian positive-definite matrix as ``L L^H``."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"cholesky needs a square matrix, got {a.shape}")
    if not is_hermitian(a):
        raise ValueError("cholesky input is not Hermitian")
    max_diag = float(np.max(a.diagonal().real, initial=0.0))
    try:
        low = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("matrix is not positive definite") from exc
    pivots = low.diagonal().real ** 2
    if max_diag <= 0.0 or np.any(pivots <= PIVOT_RTOL * max_diag):
        raise NotPositiveDefiniteError(
            f"non-positive pivot (min {pivots.min():.3e}, max diag {max_diag:.3e})"
        )
    return CholeskyFactor(low)


def solve(factor: CholeskyFactor, b) -> np.ndarray:
    """Solve ``(L L^H) x = b`` for a vector or matrix right-hand side."""
    b = np.asarray(b, dtype=complex)
    if b.ndim not in (1, 2) or b.shape[0] != factor.n:
        raise DimensionError(f"rhs shape {b.shape} incompatible with n={factor.n}")
    low = factor.lower
    y = solve_triangular(low, b, lower=True, check_finite=False)
    return solve_triangular(low.conj().T, y, lower=False, check_finite=False)


def fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate ``v`` so its largest-magnitude entry is real and positive."""
    idx = int(np.argmax(np.abs(v)))
    pivot = v[idx]
    if pivot == 0:
        return v
    out = v * (np.conj(pivot) / abs(pivot))
    out[idx] = abs(pivot)
    return out


def _whiten(factor: CholeskyFactor, b: np.ndarray) -> np.ndarray:
    low = factor.lower
    y = solve_triangular(low, b, lower=True, check_finite=False)
    c = solve_triangular(low, y.conj().T, lower=True, check_finite=False)
    return 0.5 * (c + c.conj().T)


def _power_iteration(c: np.ndarray, tol: float, max_iter: int):
    n = c.shape[0]
    cnorm = np.linalg.norm(c)
    v = np.ones(n, dtype=complex) / np.sqrt(n)
    if cnorm == 0.0:
        return 0.0, v, 0

    theta_prev = np.inf
    theta = 0.0
    perturbed = 0
    for it in range(1, max_iter + 1):
        w = c @ v
        theta = float(np.vdot(v, w).real)
        wnorm = np.linalg.norm(w)
        if wnorm <= PIVOT_RTOL * cnorm:
            # start vector sits in the null space of C
            if perturbed >= n:
                return 0.0, v, it
            v = np.ones(n, dtype=complex)
            v[perturbed] += 1e-6
            v /= np.linalg.norm(v)
            perturbed += 1
            theta_prev = np.inf
            continue
        resid = np.linalg.norm(w - theta * v)
        if abs(theta - theta_prev) <= tol * abs(theta) and resid <= RESIDUAL_RTOL * cnorm:
            return theta, v, it
        theta_prev = theta
        v = w / wnorm
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations "
        f"(eigenvalue gap too small?)",
        value=theta,
        vector=v,
        iterations=max_iter,
    )


def dominant_eigenpair(
    a_factor: CholeskyFactor,
    b,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> EigenPair:
    """Largest eigenvalue and unit principal eigenvector of ``A^{-1} B``.

    ``a_factor`` is the Cholesky factor of ``A``. ``b`` is either a dense
    Hermitian PSD matrix or a :class:`RankOne`; the latter is solved in
    closed form as ``u^H A^{-1} u`` with eigenvector ``A^{-1} u``.

    The dense path whitens to ``C = L^{-1} B L^{-H}`` and runs power
    iteration on ``C`` from the normalized all-ones vector. Iteration stops
    once the Rayleigh quotient changes by at most ``tol`` (relative) and the
    residual ``||C v - theta v||`` is below ``1e-10 ||C||_F``.

    The returned vector has unit norm and its largest entry real positive.
    """
    if isinstance(b, RankOne):
        if b.u.shape[0] != a_factor.n:
            raise DimensionError("rank-one factor length does not match A")
        x = solve(a_factor, b.u)
        value = max(float(np.vdot(b.u, x).real), 0.0)
        xnorm = np.linalg.norm(x)
        if xnorm == 0.0:
            x = np.ones(a_factor.n, dtype=complex)
            xnorm = np.sqrt(a_factor.n)
        return EigenPair(value, fix_phase(x / xnorm), 0)

    b = as_matrix(b)
    if b.shape != (a_factor.n, a_factor.n):
        raise DimensionError(f"B has shape {b.shape}, A is {a_factor.n}x{a_factor.n}")
    if not is_hermitian(b):
        raise ValueError("B is not Hermitian")

    c = _whiten(a_factor, b)
    try:
        theta, v, iterations = _power_iteration(c, tol, max_iter)
    except ConvergenceError as exc:
        vec = solve_triangular(a_factor.lower.conj().T, exc.vector, lower=False)
        exc.vector = fix_phase(vec / np.linalg.norm(vec))
        raise
    vec = solve_triangular(a_factor.lower.conj().T, v, lower=False, check_finite=False)
    vec = fix_phase(vec / np.linalg.norm(vec))
    return EigenPair(max(theta, 0.0), vec, iterations)
