"""Brute-force reference computations.

Nothing here calls the fast routines it is used to check: vertex sets are
enumerated explicitly, path norms are summed path by path, linear programs
are solved by visiting every basic solution, and eigenvalues come from a
cyclic Jacobi sweep.  Everything is exponential or cubic and meant for tiny
instances only.
"""
import itertools
import math

import numpy as np

from ..constraints import Kind, LmoResult
from ..exceptions import InfeasibleError


def l1_vertices(d, lam):
    V = np.zeros((2 * d, d))
    for i in range(d):
        V[2 * i, i] = lam
        V[2 * i + 1, i] = -lam
    return V


def linf_vertices(d, lam):
    return lam * np.array(list(itertools.product((1.0, -1.0), repeat=d)))


def _best_vertex(g, V):
    vals = [float(sum(gi * vi for gi, vi in zip(g, v))) for v in V]
    k = int(np.argmin(vals))
    return V[k], vals[k]


def _sphere_grid(d, resolution):
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        a = 2.0 * np.pi * np.arange(resolution) / resolution
        return np.column_stack([np.cos(a), np.sin(a)])
    if d == 3:
        th = np.pi * (np.arange(resolution) + 0.5) / resolution
        ph = 2.0 * np.pi * np.arange(2 * resolution) / (2 * resolution)
        T, P = np.meshgrid(th, ph, indexing="ij")
        return np.column_stack([
            (np.sin(T) * np.cos(P)).ravel(),
            (np.sin(T) * np.sin(P)).ravel(),
            np.cos(T).ravel(),
        ])
    raise ValueError("sphere grid only for dimension <= 3")


def brute_force_lmo(g, kind, lam, resolution=2000, scaling=None):
    """Reference oracle by enumeration.

    Polytopes (``L1Ball``, ``LInfBall``, ``GroupL1InfBall``) are minimized
    exactly over their vertex sets; ``g`` is a flat vector, or a list of
    layer gradients for the group ball.  Smooth balls (``FrobeniusBall``, or
    the ellipsoid ``||scaling * w|| <= lam``) are minimized over a sphere
    grid in dimension <= 3; the grid error is ``O(1/resolution**2)`` relative.
    """
    kind = Kind(kind) if not isinstance(kind, Kind) else kind
    if kind is Kind.GROUP_L1_INF:
        blocks = [np.asarray(Gi, dtype=np.float64).ravel() for Gi in g]
        if sum(b.size for b in blocks) > 6:
            raise ValueError("vertex enumeration limited to dimension <= 6")
        per_layer = [l1_vertices(b.size, lam) for b in blocks]
        best_val, best = math.inf, None
        for combo in itertools.product(*per_layer):
            val = sum(float(sum(gi * vi for gi, vi in zip(b, v))) for b, v in zip(blocks, combo))
            if val < best_val:
                best_val, best = val, [c.copy() for c in combo]
        return LmoResult(best, best_val)

    g = np.asarray(g, dtype=np.float64).ravel()
    d = g.size
    if kind in (Kind.L1, Kind.LINF):
        if d > 6:
            raise ValueError("vertex enumeration limited to dimension <= 6")
        V = l1_vertices(d, lam) if kind is Kind.L1 else linf_vertices(d, lam)
        v, val = _best_vertex(g, V)
        return LmoResult(v, val)
    if kind is Kind.FROBENIUS or scaling is not None:
        U = _sphere_grid(d, resolution)
        scale = np.ones(d) if scaling is None else np.asarray(scaling, dtype=np.float64).ravel()
        W = lam * U / scale
        vals = W @ g
        k = int(np.argmin(vals))
        return LmoResult(W[k], float(vals[k]))
    raise ValueError(f"no brute-force oracle for {kind.value}")


def brute_force_path_norm(net):
    """Squared-weight products summed over every input-to-output path, then sqrt."""
    W = net.weights
    total = 0.0
    for path in itertools.product(*[range(n) for n in net.layer_sizes]):
        prod = 1.0
        for j, Wj in enumerate(W):
            prod *= Wj[path[j + 1], path[j]]
        total += prod * prod
    return math.sqrt(total)


def count_paths(net):
    return math.prod(net.layer_sizes)


def brute_force_lp(c, A_eq, b_eq, lower, upper, tol=1e-9):
    """Minimize ``c @ x`` s.t. ``A_eq x = b_eq``, ``lower <= x <= upper``.

    Every basic solution is visited: for each choice of basic columns, the
    nonbasic variables are pinned at every combination of their bounds.  All
    bounds must be finite, which makes the polytope bounded and the optimum
    attained at one of these points.

    Returns ``(x, value)``; raises :class:`InfeasibleError` if no basic
    solution is feasible.
    """
    c = np.asarray(c, dtype=np.float64)
    A = np.atleast_2d(np.asarray(A_eq, dtype=np.float64))
    b = np.asarray(b_eq, dtype=np.float64).ravel()
    lo = np.asarray(lower, dtype=np.float64)
    hi = np.asarray(upper, dtype=np.float64)
    n = c.size
    if n > 12:
        raise ValueError("brute-force LP limited to 12 variables")
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("all bounds must be finite")
    if A.size == 0:
        A = np.zeros((0, n))
    r = np.linalg.matrix_rank(A) if A.shape[0] else 0
    scale = 1.0 + np.abs(b).max(initial=0.0) + np.abs(hi).max(initial=0.0) + np.abs(lo).max(initial=0.0)

    best_val, best_x = math.inf, None
    for basis in itertools.combinations(range(n), r):
        B = list(basis)
        N = [j for j in range(n) if j not in basis]
        AB = A[:, B]
        if r and np.linalg.matrix_rank(AB) < r:
            continue
        pins = np.array(list(itertools.product((0, 1), repeat=len(N))), dtype=bool)
        XN = np.where(pins, hi[N], lo[N]).T if N else np.zeros((0, 1))
        rhs = b[:, None] - A[:, N] @ XN
        if r:
            XB = np.linalg.lstsq(AB, rhs, rcond=None)[0]
        else:
            XB = np.zeros((0, XN.shape[1]))
        X = np.zeros((n, XN.shape[1]))
        X[B] = XB
        X[N] = XN
        resid = np.abs(A @ X - b[:, None]).max(axis=0) if A.shape[0] else np.zeros(X.shape[1])
        ok = (resid <= tol * scale) & np.all(X >= lo[:, None] - tol * scale, axis=0) \
            & np.all(X <= hi[:, None] + tol * scale, axis=0)
        if not np.any(ok):
            continue
        vals = c @ X[:, ok]
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val, best_x = float(vals[k]), X[:, ok][:, k]
    if best_x is None:
        raise InfeasibleError("no feasible basic solution")
    return np.clip(best_x, lo, hi), best_val


def tv_flow_lp(d, A):
    """``max beta s.t. A f = beta d, f in [0,1]^E`` via :func:`brute_force_lp`.

    Returns ``(f, beta*)``.  ``beta`` is boxed by the first node with nonzero
    demand: ``|beta d_v| <= deg(v)``.
    """
    d = np.asarray(d, dtype=np.float64).ravel()
    Ad = A.dense()
    n, E = Ad.shape
    deg = np.abs(Ad).sum(axis=1)
    nz = np.abs(d) > 0
    beta_max = float(np.min(deg[nz] / np.abs(d[nz]))) if np.any(nz) else 0.0
    c = np.zeros(E + 1)
    c[-1] = -1.0
    A_eq = np.hstack([Ad, -d[:, None]])
    x, val = brute_force_lp(c, A_eq, np.zeros(n), np.zeros(E + 1), np.r_[np.ones(E), beta_max])
    return x[:E], -val


def tv_lmo_lp(g, A, lam):
    """Optimal value of ``min <g, w> s.t. ||A w||_1 <= lam`` for ``g`` in the row space.

    With ``g = A^T y`` the objective is ``y . z`` over node imbalances
    ``z = A w``, i.e. ``z`` orthogonal to ``ker A^T``.  Split ``z = p - q``
    with a slack on the l1 budget and enumerate basic solutions.
    """
    Ad = A.dense()
    n = Ad.shape[0]
    y = np.linalg.lstsq(Ad.T, np.asarray(g, dtype=np.float64).ravel(), rcond=None)[0]
    # orthonormal basis of ker A^T from the SVD
    U, s, _ = np.linalg.svd(Ad)
    rank = int(np.sum(s > 1e-10 * max(s.max(initial=0.0), 1.0)))
    K = U[:, rank:]
    rows = [np.r_[K[:, i], -K[:, i], 0.0] for i in range(K.shape[1])]
    rows.append(np.r_[np.ones(2 * n), 1.0])
    A_eq = np.array(rows)
    b_eq = np.r_[np.zeros(K.shape[1]), lam]
    c = np.r_[y, -y, 0.0]
    _, val = brute_force_lp(c, A_eq, b_eq, np.zeros(2 * n + 1), np.full(2 * n + 1, lam))
    return val


def jacobi_eigenvalues(S, tol=1e-15, max_sweeps=100):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations."""
    S = np.array(S, dtype=np.float64)
    n = S.shape[0]
    for _ in range(max_sweeps):
        off = math.sqrt(float(np.sum((S - np.diag(np.diag(S))) ** 2)))
        if off <= tol * math.sqrt(float(np.sum(S * S))):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if S[p, q] == 0.0:
                    continue
                theta = (S[q, q] - S[p, p]) / (2.0 * S[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                cs = 1.0 / math.sqrt(t * t + 1.0)
                sn = t * cs
                P, Q = S[:, p].copy(), S[:, q].copy()
                S[:, p] = cs * P - sn * Q
                S[:, q] = sn * P + cs * Q
                P, Q = S[p, :].copy(), S[q, :].copy()
                S[p, :] = cs * P - sn * Q
                S[q, :] = sn * P + cs * Q
    return np.sort(np.diag(S))[::-1]


def top_singular_value(M):
    """Largest singular value from Jacobi eigenvalues of ``M^T M``."""
    M = np.asarray(M, dtype=np.float64)
    return math.sqrt(max(jacobi_eigenvalues(M.T @ M)[0], 0.0))
