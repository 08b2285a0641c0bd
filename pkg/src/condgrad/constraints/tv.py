"""Total-variation ball of a network: ``||A w||_1 <= lam`` for incidence ``A``.

``w`` is edge-indexed (canonical edge order), so ``A w`` is the net outflow
at every node.  Three pieces live here:

* :func:`tv_feasibility` decides ``exists f in [0,1]^E : A f = beta * d`` by
  max-flow on the auxiliary source/sink network;
* :func:`tv_dual_solve` approximately solves the dual of
  ``max beta s.t. A f = beta d, f in [0,1]^E`` with a first-order method and
  returns a max-flow-certified answer;
* :func:`lmo_tv` is the linear minimization oracle of the TV ball.
"""
import math
from collections import deque

import numpy as np

from ..exceptions import ConvergenceError, UnboundedError
from .balls import LmoResult, _check_lam
from .flow import route_demands


def tv_norm(w, A):
    return float(np.sum(np.abs(A.matvec(w))))


def tv_feasibility(beta, d, A, tol=1e-9):
    """True iff some ``f in [0,1]^E`` has ``A f = beta * d`` (up to ``tol``)."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    d = np.asarray(d, dtype=np.float64).ravel()
    if beta == 0 or not np.any(d):
        return True
    demand = beta * d
    scale = max(1.0, float(np.abs(demand).sum()))
    supply = float(demand[demand > 0].sum())
    sink = float(-demand[demand < 0].sum())
    if abs(supply - sink) > tol * scale:
        return False
    value, _ = route_demands(demand, A.sources, A.targets, A.n_nodes)
    return value >= supply - tol * scale


def _dual_objective(v, A):
    return float(np.sum(np.maximum(A.rmatvec(v), 0.0)))


def _round_to_cut(v, d, A):
    """Best scaled cut indicator among the prefix sets of ``v``'s ordering.

    For a node set ``S`` with ``d(S) != 0`` the vector ``1_S / d(S)`` is dual
    feasible and its objective is ``out(S)/d(S)`` (or ``in(S)/|d(S)|``).  The
    level sets of any feasible ``v`` contain a cut at least as good as ``v``.
    """
    n = A.n_nodes
    best_val, best_v = math.inf, None
    for order in (np.argsort(-v, kind="stable"), np.argsort(v, kind="stable")):
        rank = np.empty(n, dtype=np.int64)
        rank[order] = np.arange(n)
        ru, rw = rank[A.sources], rank[A.targets]
        # prefix S_k = first k nodes; edge u->w leaves S_k iff ru < k <= rw
        diff_out = np.zeros(n + 1)
        diff_in = np.zeros(n + 1)
        fw = ru < rw
        np.add.at(diff_out, ru[fw] + 1, 1.0)
        np.add.at(diff_out, rw[fw] + 1, -1.0)
        np.add.at(diff_in, rw[~fw] + 1, 1.0)
        np.add.at(diff_in, ru[~fw] + 1, -1.0)
        out_k = np.cumsum(diff_out)[1:]
        in_k = np.cumsum(diff_in)[1:]
        dS = np.cumsum(d[order])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dS > 1e-15, out_k / dS, np.where(dS < -1e-15, in_k / -dS, np.inf))
        k = int(np.argmin(ratio))
        if ratio[k] < best_val:
            best_val = float(ratio[k])
            best_v = np.zeros(n)
            best_v[order[:k + 1]] = 1.0 / dS[k]
    return best_val, best_v


def _max_degree(A):
    deg = np.bincount(A.sources, minlength=A.n_nodes) + np.bincount(A.targets, minlength=A.n_nodes)
    return max(1, int(deg.max())) if A.n_edges else 1


def tv_dual_solve(d, A, eps=1e-6, max_iter=1_000_000, rounding=True, full_output=False):
    """Solve the dual of ``max beta s.t. A f = beta d, f in [0,1]^E``.

    The dual is ``min_v sum_e max(0, (A^T v)_e)`` on the hyperplane
    ``d^T v = 1``; its optimum equals the primal optimum ``beta*``.  It is
    minimized by accelerated projected gradient on a softplus smoothing
    (smoothing width proportional to the target accuracy, warm-started
    continuation from coarse to fine accuracy).  Optionally each iterate is
    rounded to the best cut among its level sets.  Termination is certified:
    the best upper bound ``U`` is accepted once max-flow shows ``U - eps`` is
    primal feasible.

    Returns
    -------
    v : ndarray
        Dual point with ``d @ v == 1``.
    value : float
        Dual objective in the nonpositive form ``max sum_e min(0, .)`` with
        ``d^T v = -1``, i.e. ``-U``; within ``eps`` of ``-beta*``.
    info : dict, only if ``full_output``
        ``iterations``, ``upper``, ``lower``.

    Raises
    ------
    UnboundedError
        If ``d == 0`` (the primal is unbounded, the dual infeasible).
    ConvergenceError
        If ``max_iter`` runs out before certification.
    """
    d = np.asarray(d, dtype=np.float64).ravel()
    if not np.any(d):
        raise UnboundedError("zero demand vector: beta is unbounded")
    if eps <= 0:
        raise ValueError("eps must be positive")
    dd = float(d @ d)

    def project(v):
        return v - d * ((d @ v - 1.0) / dd)

    x = d / dd
    best_U, best_v = _dual_objective(x, A), x.copy()
    if rounding:
        val, cand = _round_to_cut(x, d, A)
        if val < best_U:
            best_U, best_v = val, cand

    E = max(A.n_edges, 1)
    dmax = _max_degree(A)
    target = max(eps, best_U / 10.0)
    lower = 0.0
    it = 0

    def certified(level):
        nonlocal lower
        # 1% margin so the max-flow tolerance cannot push the gap past eps
        beta = best_U - 0.99 * level
        if beta <= lower:
            return True
        if tv_feasibility(beta, d, A, tol=1e-12):
            lower = beta
            return True
        return False

    while True:
        stage_done = certified(target)
        mu = target / (2.0 * E * math.log(2.0))
        step = 2.0 * mu / dmax  # 1/L with L = ||A||^2/(4 mu) <= 2 dmax/(4 mu)
        y, t = x.copy(), 1.0
        while not stage_done:
            if it >= max_iter:
                raise ConvergenceError(
                    f"dual solve not certified to eps={eps} in {max_iter} iterations",
                    best=(best_v, -best_U),
                )
            it += 1
            s = A.rmatvec(y)
            grad = A.matvec(0.5 * (1.0 + np.tanh(s / (2.0 * mu))))
            x_new = project(y - step * grad)
            t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            y = x_new + ((t - 1.0) / t_new) * (x_new - x)
            x, t = x_new, t_new

            improved = False
            U = _dual_objective(x, A)
            if U < best_U:
                best_U, best_v, improved = U, x.copy(), True
            if rounding:
                val, cand = _round_to_cut(x, d, A)
                if val < best_U:
                    best_U, best_v, improved = val, cand, True
            if improved:
                stage_done = certified(target)
        if target <= eps:
            break
        target = max(eps, target / 10.0)

    value = -best_U
    if full_output:
        return best_v, value, {"iterations": it, "upper": best_U, "lower": lower}
    return best_v, value


def _components(A):
    adj = [[] for _ in range(A.n_nodes)]
    for u, v in zip(A.sources.tolist(), A.targets.tolist()):
        adj[u].append(v)
        adj[v].append(u)
    label = -np.ones(A.n_nodes, dtype=np.int64)
    c = 0
    for s in range(A.n_nodes):
        if label[s] >= 0:
            continue
        label[s] = c
        q = deque([s])
        while q:
            u = q.popleft()
            for v in adj[u]:
                if label[v] < 0:
                    label[v] = c
                    q.append(v)
        c += 1
    return label


def node_potential(g, A):
    """Least-squares ``y`` with ``A^T y ~= g``, and the residual ``g - A^T y``.

    Solved through the graph Laplacian ``A A^T y = A g``.
    """
    g = np.asarray(g, dtype=np.float64).ravel()
    L = np.zeros((A.n_nodes, A.n_nodes))
    np.add.at(L, (A.sources, A.sources), 1.0)
    np.add.at(L, (A.targets, A.targets), 1.0)
    np.add.at(L, (A.sources, A.targets), -1.0)
    np.add.at(L, (A.targets, A.sources), -1.0)
    y = np.linalg.lstsq(L, A.matvec(g), rcond=None)[0]
    return y, g - A.rmatvec(y)


def lmo_tv(g, A, lam, eps=1e-9):
    """Linear minimization over ``{w : ||A w||_1 <= lam}``.

    The set contains the cycle space ``ker A`` as a lineality space, so the
    oracle is bounded only for gradients in the row space ``A^T y``; a kernel
    component larger than ``eps * ||g||`` raises :class:`UnboundedError`.
    For ``g = A^T y`` the objective is ``<y, A w>`` and the optimal node
    imbalance puts ``+lam/2`` at the lowest potential and ``-lam/2`` at the
    highest (within one connected component).  The edge direction is then
    recovered from a max-flow between those two nodes on the bidirected
    graph, scaled so that ``||A w||_1 = lam`` exactly.
    """
    _check_lam(lam)
    g = np.asarray(g, dtype=np.float64)
    shape = g.shape
    g = g.ravel()
    gnorm = float(np.linalg.norm(g))
    if gnorm == 0.0:
        return LmoResult(np.zeros(shape), 0.0, degenerate=True)
    y, resid = node_potential(g, A)
    if np.linalg.norm(resid) > eps * gnorm:
        raise UnboundedError(
            "gradient has a component along a cycle of the network; the TV ball is "
            "unbounded in that direction (project the gradient onto the row space of A first)"
        )
    label = _components(A)
    best = (-1.0, 0, 0)
    for c in range(int(label.max()) + 1):
        nodes = np.nonzero(label == c)[0]
        lo = nodes[int(np.argmin(y[nodes]))]
        hi = nodes[int(np.argmax(y[nodes]))]
        spread = y[hi] - y[lo]
        if spread > best[0]:
            best = (spread, lo, hi)
    spread, lo, hi = best
    if spread <= 0:
        return LmoResult(np.zeros(shape), 0.0, degenerate=True)
    demand = np.zeros(A.n_nodes)
    demand[lo], demand[hi] = 1.0, -1.0
    # routing one unit is always possible inside a component; the max-flow
    # spreads it over parallel paths
    value, f = route_demands(demand * A.n_edges, A.sources, A.targets, A.n_nodes, bidirected=True)
    w = (0.5 * lam / value) * f
    objective = float(g @ w)
    return LmoResult(w.reshape(shape), objective, notes=[f"routing flow {value:g}"])
