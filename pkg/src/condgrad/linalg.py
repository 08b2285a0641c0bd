"""Small dense linear-algebra kernels.

Matrices are plain ``numpy.ndarray`` objects of dtype float64. The only
non-trivial routine is :func:`power_method`, which extracts the leading
singular triple needed by the nuclear-norm oracle.
"""
from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceError, DegenerateInputError, DimensionError


@dataclass(frozen=True)
class SingularTriple:
    sigma: float
    u: np.ndarray
    v: np.ndarray


def as_matrix(M):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim == 1:
        M = M[None, :]
    if M.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {M.shape}")
    return M


def frobenius_norm(M):
    """Square root of the sum of squared entries (0 for an empty matrix)."""
    M = np.asarray(M, dtype=np.float64)
    if M.size == 0:
        return 0.0
    m = float(np.abs(M).max())
    if m == 0.0 or not np.isfinite(m):
        return m
    # scaled to avoid under/overflow of the squares
    return m * float(np.sqrt(np.sum((M / m) ** 2)))


def dot(a, b):
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise DimensionError(f"length mismatch: {a.size} vs {b.size}")
    return float(a @ b)


def power_method(M, tol=1e-12, max_iter=10_000, seed=0):
    """Leading singular triple of ``M`` by power iteration on ``M^T M``.

    Starts from a seeded random unit vector and repeats
    ``v <- normalize(M^T M v)`` until the relative change of the Rayleigh
    quotient ``||M v||^2`` drops to ``tol``.

    Parameters
    ----------
    M : array_like, shape (m, n)
    tol : float
        Relative tolerance on the Rayleigh quotient.
    max_iter : int
    seed : int
        Seed of the starting vector; the output is a deterministic function
        of ``(M, tol, max_iter, seed)``.

    Returns
    -------
    SingularTriple
        ``sigma >= 0`` with unit ``u`` (length m) and ``v`` (length n) such
        that ``M v = sigma u``.

    Raises
    ------
    DegenerateInputError
        If ``M`` is the zero matrix.
    ConvergenceError
        If ``max_iter`` is exhausted; ``err.best`` holds the last triple.
    """
    M = as_matrix(M)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not np.all(np.isfinite(M)):
        raise DegenerateInputError("matrix has non-finite entries")
    if not np.any(M):
        raise DegenerateInputError("power method needs a nonzero matrix")
    # work on a max-entry-normalized copy so tiny or huge entries cannot under/overflow
    scale = float(np.abs(M).max())
    M = M / scale

    rng = np.random.default_rng(seed)
    v = rng.standard_normal(M.shape[1])
    v /= np.linalg.norm(v)
    w = M @ v
    if not np.any(w):
        # start fell into the null space; use the heaviest column instead
        v = np.zeros(M.shape[1])
        v[int(np.argmax(np.sum(M * M, axis=0)))] = 1.0
        w = M @ v
    rho = float(w @ w)

    for _ in range(max_iter):
        z = M.T @ w
        v = z / np.linalg.norm(z)
        w = M @ v
        rho_new = float(w @ w)
        converged = abs(rho_new - rho) <= tol * rho_new
        rho = rho_new
        if converged:
            return _triple(w, v, scale)
    raise ConvergenceError(
        f"power method did not reach tol={tol} in {max_iter} iterations",
        best=_triple(w, v, scale),
    )


def _triple(w, v, scale):
    sigma = float(np.linalg.norm(w))
    return SingularTriple(sigma=sigma * scale, u=w / sigma, v=v.copy())
