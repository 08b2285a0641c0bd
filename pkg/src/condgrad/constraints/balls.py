"""Linear minimization oracles and projections for norm balls.

Every oracle solves ``min <g, s>`` over ``{s : R(s) <= lam}`` and returns an
:class:`LmoResult`.  A zero gradient is not an error: the oracle returns the
zero direction with ``degenerate=True`` so a training loop can keep going.
Ties between equal-magnitude coordinates go to the lowest index.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..linalg import frobenius_norm, power_method


class DeadPathWarning(RuntimeWarning):
    """A coordinate with zero path scaling but nonzero gradient was zeroed."""


@dataclass
class LmoResult:
    direction: object
    objective: float
    degenerate: bool = False
    notes: list = field(default_factory=list)


def _vec(g):
    return np.asarray(g, dtype=np.float64)


def _check_lam(lam):
    if not lam > 0:
        raise ValueError(f"radius must be positive, got {lam}")


def lmo_frobenius(g, lam):
    g = _vec(g)
    _check_lam(lam)
    norm = frobenius_norm(g)
    if norm == 0.0:
        return LmoResult(np.zeros_like(g), 0.0, degenerate=True)
    return LmoResult(-lam * g / norm, -lam * norm)


def project_frobenius(z, lam):
    z = _vec(z)
    _check_lam(lam)
    norm = frobenius_norm(z)
    if norm <= lam:
        return z.copy()
    return lam * z / norm


def lmo_nuclear(g, lam, tol=1e-12, seed=0, max_iter=10_000):
    """Rank-one vertex ``-lam * u v^T`` built from the top singular pair of ``g``."""
    g = _vec(g)
    _check_lam(lam)
    if g.ndim != 2:
        raise ValueError("nuclear oracle expects a matrix gradient")
    if not np.any(g):
        return LmoResult(np.zeros_like(g), 0.0, degenerate=True)
    top = power_method(g, tol=tol, max_iter=max_iter, seed=seed)
    s = -lam * np.outer(top.u, top.v)
    return LmoResult(s, float(np.sum(g * s)))


def lmo_l1(g, lam):
    g = _vec(g)
    _check_lam(lam)
    flat = g.ravel()
    j = int(np.argmax(np.abs(flat)))
    if flat[j] == 0.0:
        return LmoResult(np.zeros_like(g), 0.0, degenerate=True)
    s = np.zeros_like(flat)
    # the literal single-vertex rule needs the sign to minimize when g_j < 0
    s[j] = -lam * np.sign(flat[j])
    return LmoResult(s.reshape(g.shape), -lam * abs(flat[j]))


def project_l1(z, lam):
    """Euclidean projection onto the l1 ball by sorting (O(d log d))."""
    z = _vec(z)
    _check_lam(lam)
    flat = z.ravel()
    a = np.abs(flat)
    if a.sum() <= lam:
        return z.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, u.size + 1)
    rho = np.nonzero(u - (css - lam) / k > 0)[0][-1]
    theta = (css[rho] - lam) / (rho + 1.0)
    return (np.sign(flat) * np.maximum(a - theta, 0.0)).reshape(z.shape)


def lmo_linf(g, lam):
    g = _vec(g)
    _check_lam(lam)
    s = np.where(g < 0, lam, -lam)
    return LmoResult(s, -lam * float(np.sum(np.abs(g))), degenerate=not np.any(g))


def project_linf(z, lam):
    _check_lam(lam)
    return np.clip(_vec(z), -lam, lam)


def lmo_group_l1_inf(G, lam):
    """Oracle for ``max_i ||W_i||_1 <= lam`` over a list of layer matrices.

    Each layer independently puts ``-lam * sign`` on its largest-magnitude
    gradient entry, so exactly one entry per nonzero layer moves.
    """
    _check_lam(lam)
    blocks, total, dead = [], 0.0, 0
    for Gi in G:
        res = lmo_l1(Gi, lam)
        blocks.append(res.direction)
        total += res.objective
        dead += res.degenerate
    return LmoResult(blocks, total, degenerate=dead == len(blocks))


def pathnorm_scaling(gammas, j):
    """Diagonal of the per-layer scaling for ``weights[j]``, flattened.

    The square root makes ``||diag(.) w||_2`` equal the path norm with every
    other layer held fixed.
    """
    return np.sqrt(gammas.gamma_edge(j)).ravel()


def lmo_pathnorm_layer(g_layer, gamma, lam):
    """Minimize ``<g, w>`` subject to ``||gamma * w||_2 <= lam`` (diagonal scaling).

    Substituting ``u = gamma * w`` turns this into the Frobenius oracle, giving
    ``w = -lam * g / gamma**2 / ||g / gamma||``.  Coordinates with zero scaling
    and nonzero gradient are unbounded; they are left at zero and reported.
    """
    _check_lam(lam)
    g = _vec(g_layer)
    shape = g.shape
    g = g.ravel()
    gamma = _vec(gamma).ravel()
    if gamma.shape != g.shape:
        raise ValueError("scaling diagonal and gradient differ in length")
    if np.any(gamma < 0):
        raise ValueError("scaling factors must be nonnegative")
    live = gamma > 0
    notes = []
    n_dead = int(np.count_nonzero(~live & (g != 0)))
    if n_dead:
        msg = f"{n_dead} dead-path coordinate(s) with nonzero gradient left at 0"
        warnings.warn(msg, DeadPathWarning, stacklevel=2)
        notes.append(msg)
    r = np.zeros_like(g)
    r[live] = g[live] / gamma[live]
    norm = float(np.linalg.norm(r))
    s = np.zeros_like(g)
    if norm == 0.0:
        return LmoResult(s.reshape(shape), 0.0, degenerate=True, notes=notes)
    s[live] = -lam * r[live] / gamma[live] / norm
    return LmoResult(s.reshape(shape), -lam * norm, notes=notes)
