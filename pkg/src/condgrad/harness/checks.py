"""Verification suites: fast oracles against the brute-force references.

Each suite returns a :class:`CheckResult` carrying the worst deviation seen
and whether it stayed within tolerance.  ``overrides`` lets a caller swap a
fast oracle for a replacement (used to confirm the suites catch bugs).
"""
import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..constraints import (
    Kind,
    lmo_frobenius,
    lmo_group_l1_inf,
    lmo_l1,
    lmo_linf,
    lmo_nuclear,
    lmo_pathnorm_layer,
    lmo_tv,
    tv_dual_solve,
)
from ..network import (
    FeedForwardNet,
    IncidenceMatrix,
    compute_gammas,
    forward,
    incidence_matrix,
    path_norm,
    rescale_node,
)
from .oracles import (
    brute_force_lmo,
    brute_force_path_norm,
    top_singular_value,
    tv_flow_lp,
    tv_lmo_lp,
)

LMO_KINDS = ("l1", "linf", "group", "frobenius", "nuclear", "pathnorm", "tv")


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float
    tol: float
    trials: int
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status}  {self.name:<12} trials={self.trials:<5} worst={self.worst:.3e} "
            f"tol={self.tol:.1e} time={self.seconds:.2f}s"
        )


def _timed(name, tol, fn):
    t0 = time.perf_counter()
    worst, trials, details = fn()
    return CheckResult(
        name, bool(worst <= tol), float(worst), tol, trials,
        time.perf_counter() - t0, details,
    )


def _dot(a, b):
    return float(np.dot(np.ravel(a), np.ravel(b)))


# -- polytopes -----------------------------------------------------------

def check_l1(trials=1000, seed=0, oracle=lmo_l1, tol=1e-12):
    rng = np.random.default_rng(seed)

    def run():
        worst = 0.0
        for _ in range(trials):
            d = int(rng.integers(1, 7))
            g, lam = rng.standard_normal(d), float(rng.uniform(0.1, 10.0))
            res = oracle(g, lam)
            ref = brute_force_lmo(g, Kind.L1, lam)
            s = np.ravel(res.direction)
            worst = max(
                worst,
                abs(res.objective - ref.objective),
                abs(_dot(g, s) - ref.objective),
                max(0.0, np.abs(s).sum() - lam),
            )
        return worst, trials, {}

    return _timed("l1", tol, run)


def check_linf(trials=1000, seed=1, oracle=lmo_linf, tol=1e-12):
    rng = np.random.default_rng(seed)

    def run():
        worst = 0.0
        for _ in range(trials):
            d = int(rng.integers(1, 7))
            g, lam = rng.standard_normal(d), float(rng.uniform(0.1, 10.0))
            res = oracle(g, lam)
            ref = brute_force_lmo(g, Kind.LINF, lam)
            s = np.ravel(res.direction)
            worst = max(
                worst,
                abs(res.objective - ref.objective),
                abs(_dot(g, s) - ref.objective),
                max(0.0, np.abs(s).max() - lam),
            )
        return worst, trials, {}

    return _timed("linf", tol, run)


def check_group(trials=1000, seed=2, oracle=lmo_group_l1_inf, tol=1e-12):
    rng = np.random.default_rng(seed)

    def run():
        worst = 0.0
        for _ in range(trials):
            n_layers = int(rng.integers(1, 4))
            sizes = [int(rng.integers(1, 3)) for _ in range(n_layers)]
            # keep the total dimension <= 6 for vertex enumeration
            G = [rng.standard_normal((k, 2 if sum(sizes) <= 3 else 1)) for k in sizes]
            lam = float(rng.uniform(0.1, 10.0))
            res = oracle(G, lam)
            ref = brute_force_lmo(G, Kind.GROUP_L1_INF, lam)
            achieved = sum(_dot(Gi, Si) for Gi, Si in zip(G, res.direction))
            excess = max(np.abs(Si).sum() - lam for Si in res.direction)
            worst = max(
                worst,
                abs(res.objective - ref.objective),
                abs(achieved - ref.objective),
                max(0.0, excess),
            )
        return worst, trials, {}

    return _timed("group", tol, run)


# -- smooth balls ----------------------------------------------------------

def _grid_tol(d, resolution):
    # angular spacing h gives a relative cosine error below h**2 / 2; the
    # 3-d grid has polar spacing pi/res and azimuthal spacing pi/res
    h = 2.0 * math.pi / resolution if d == 2 else math.pi / resolution * math.sqrt(2.0)
    return 0.5 * h * h


def check_frobenius(trials=200, seed=3, oracle=lmo_frobenius, resolution=400):
    rng = np.random.default_rng(seed)
    tol = _grid_tol(3, resolution)

    def run():
        worst = 0.0
        for _ in range(trials):
            d = int(rng.integers(1, 4))
            g, lam = rng.standard_normal(d), float(rng.uniform(0.1, 10.0))
            res = oracle(g, lam)
            ref = brute_force_lmo(g, Kind.FROBENIUS, lam, resolution=resolution)
            s = np.ravel(res.direction)
            scale = lam * np.linalg.norm(g)
            rel = (ref.objective - res.objective) / scale
            worst = max(
                worst,
                abs(rel),
                abs(_dot(g, s) - res.objective) / scale,
                max(0.0, np.linalg.norm(s) - lam) / lam,
            )
        return worst, trials, {"resolution": resolution}

    return _timed("frobenius", tol, run)


def check_pathnorm_lmo(trials=200, seed=4, oracle=lmo_pathnorm_layer, resolution=400):
    rng = np.random.default_rng(seed)
    tol = _grid_tol(3, resolution)

    def run():
        worst = 0.0
        for _ in range(trials):
            d = int(rng.integers(1, 4))
            g = rng.standard_normal(d)
            gamma = rng.uniform(0.2, 3.0, d)
            lam = float(rng.uniform(0.1, 10.0))
            res = oracle(g, gamma, lam)
            ref = brute_force_lmo(g, Kind.FROBENIUS, lam, resolution=resolution, scaling=gamma)
            s = np.ravel(res.direction)
            scale = lam * np.linalg.norm(g / gamma)
            rel = (ref.objective - res.objective) / scale
            worst = max(
                worst,
                abs(rel),
                abs(_dot(g, s) - res.objective) / scale,
                max(0.0, np.linalg.norm(gamma * s) - lam) / lam,
            )
        return worst, trials, {"resolution": resolution}

    return _timed("pathnorm", tol, run)


def check_nuclear(trials=200, seed=5, oracle=lmo_nuclear, shape=(20, 20), tol=1e-6):
    """Objective against ``-lam * sigma_1`` from Jacobi; nuclear norm and rank of the direction."""
    rng = np.random.default_rng(seed)

    def run():
        worst, worst_norm, worst_rank = 0.0, 0.0, 0
        for k in range(trials):
            g = rng.standard_normal(shape)
            lam = float(rng.uniform(0.1, 10.0))
            res = oracle(g, lam, seed=k)
            sigma = top_singular_value(g)
            S = np.asarray(res.direction)
            dev = abs(_dot(g, S) + lam * sigma) / (lam * sigma)
            sv = np.linalg.svd(S, compute_uv=False)
            norm_dev = abs(sv.sum() - lam)
            rank = int(np.sum(sv > 1e-9 * lam))
            worst = max(worst, dev)
            worst_norm = max(worst_norm, norm_dev)
            worst_rank = max(worst_rank, rank)
        # fold the two side conditions into the reported deviation
        if worst_norm > 1e-9 or worst_rank != 1:
            worst = math.inf
        return worst, trials, {"nuclear_norm_dev": worst_norm, "max_rank": worst_rank}

    return _timed("nuclear", tol, run)


# -- total variation -------------------------------------------------------

def _compositions(n):
    for k in range(2, n + 1):
        for cuts in itertools.combinations(range(1, n), k - 1):
            bounds = (0, *cuts, n)
            yield [bounds[i + 1] - bounds[i] for i in range(k)]


def tv_graph_templates(max_nodes=5, n_random=6, seed=0):
    """Connected test graphs: every layered net on <= ``max_nodes`` nodes plus seeded random DAGs.

    Random graphs take a random spanning tree on 4 or 5 nodes, add up to
    three extra edges and orient each edge from lower to higher label.
    """
    graphs = []
    for n in range(2, max_nodes + 1):
        for sizes in _compositions(n):
            net = FeedForwardNet(sizes, [np.zeros((sizes[j + 1], sizes[j])) for j in range(len(sizes) - 1)])
            graphs.append(("layered-" + "-".join(map(str, sizes)), incidence_matrix(net)))
    rng = np.random.default_rng(seed)
    for k in range(n_random):
        n = int(rng.integers(4, max_nodes + 1))
        edges = set()
        order = rng.permutation(n)
        for i in range(1, n):
            a, b = int(order[i]), int(order[rng.integers(0, i)])
            edges.add((min(a, b), max(a, b)))
        candidates = [(a, b) for a in range(n) for b in range(a + 1, n) if (a, b) not in edges]
        for idx in rng.permutation(len(candidates))[: int(rng.integers(0, 4))]:
            edges.add(candidates[idx])
        graphs.append((f"random-{k}", IncidenceMatrix.from_edges(n, sorted(edges))))
    return graphs


def check_tv_dual(graphs=None, demands_per_graph=3, seed=6, eps=1e-6, solver=tv_dual_solve):
    """Dual value of every template graph against the brute-force LP.

    Demands are ``A f0`` for ``f0`` uniform in the unit box (so ``beta* >= 1``)
    plus one generic demand per graph (usually ``beta* = 0``).
    """
    graphs = tv_graph_templates() if graphs is None else graphs
    rng = np.random.default_rng(seed)

    def run():
        worst, trials = 0.0, 0
        for _, A in graphs:
            demands = [A.matvec(rng.uniform(0.0, 1.0, A.n_edges)) for _ in range(demands_per_graph)]
            d = rng.standard_normal(A.n_nodes)
            demands.append(d - d.mean())
            for d in demands:
                if not np.any(np.abs(d) > 1e-12):
                    continue
                _, beta_star = tv_flow_lp(d, A)
                _, value = solver(d, A, eps=eps)
                worst = max(worst, abs(-value - beta_star))
                trials += 1
        return worst, trials, {"graphs": len(graphs)}

    return _timed("tv-dual", eps, run)


def check_tv_lmo(graphs=None, per_graph=3, seed=7, tol=1e-6, oracle=lmo_tv):
    """``lmo_tv`` feasibility and optimality against the node-space LP."""
    graphs = tv_graph_templates() if graphs is None else graphs
    rng = np.random.default_rng(seed)

    def run():
        worst_obj, worst_feas, trials = 0.0, 0.0, 0
        for _, A in graphs:
            for _ in range(per_graph):
                g = A.rmatvec(rng.standard_normal(A.n_nodes))
                lam = float(rng.uniform(0.1, 10.0))
                res = oracle(g, A, lam)
                w = np.ravel(res.direction)
                ref = tv_lmo_lp(g, A, lam)
                tv = float(np.abs(A.matvec(w)).sum())
                worst_feas = max(worst_feas, max(0.0, tv - lam * (1.0 + 1e-9)))
                worst_obj = max(worst_obj, abs(_dot(g, w) - ref), abs(res.objective - ref))
                trials += 1
        worst = worst_obj if worst_feas == 0.0 else math.inf
        return worst, trials, {"feasibility_excess": worst_feas}

    return _timed("tv", tol, run)


def check_tv(graphs=None, seed=6, tv_oracle=lmo_tv, solver=tv_dual_solve):
    graphs = tv_graph_templates() if graphs is None else graphs
    a = check_tv_dual(graphs, seed=seed, solver=solver)
    b = check_tv_lmo(graphs, seed=seed + 1, oracle=tv_oracle)
    worst = max(a.worst / a.tol, b.worst / b.tol)
    return CheckResult(
        "tv", a.passed and b.passed, worst, 1.0, a.trials + b.trials,
        a.seconds + b.seconds,
        {"dual_worst": a.worst, "lmo_worst": b.worst, **b.details},
    )


_SUITES = {
    "l1": lambda seed, fn: check_l1(seed=seed, **fn),
    "linf": lambda seed, fn: check_linf(seed=seed + 1, **fn),
    "group": lambda seed, fn: check_group(seed=seed + 2, **fn),
    "frobenius": lambda seed, fn: check_frobenius(seed=seed + 3, **fn),
    "pathnorm": lambda seed, fn: check_pathnorm_lmo(seed=seed + 4, **fn),
    "nuclear": lambda seed, fn: check_nuclear(seed=seed + 5, **fn),
    "tv": lambda seed, fn: check_tv(seed=seed + 6, **({"tv_oracle": fn["oracle"]} if fn else {})),
}


def check_lmo(kinds=None, seed=0, overrides=None):
    """Run the oracle-equivalence suites; returns a list of :class:`CheckResult`.

    ``kinds`` restricts the suites (names from ``LMO_KINDS``); ``overrides``
    maps a suite name to a replacement fast oracle with the same signature.
    """
    kinds = LMO_KINDS if kinds is None else list(kinds)
    unknown = [k for k in kinds if k not in _SUITES]
    if unknown:
        raise ValueError(f"unknown LMO suite {unknown[0]!r}; choose from {list(LMO_KINDS)}")
    overrides = overrides or {}
    out = []
    for k in kinds:
        fn = {"oracle": overrides[k]} if k in overrides else {}
        out.append(_SUITES[k](seed, fn))
    return out


# -- path norm ---------------------------------------------------------------

def random_small_net(rng, max_layers=4, max_width=4):
    n_weights = int(rng.integers(1, max_layers + 1))
    sizes = [int(rng.integers(1, max_width + 1)) for _ in range(n_weights + 1)]
    W = [rng.standard_normal((sizes[j + 1], sizes[j])) for j in range(n_weights)]
    return FeedForwardNet(sizes, W)


def check_pathnorm(trials=100, seed=0, tol=1e-10, rescale_tol=1e-9):
    """DP path norm vs enumeration, the per-layer gamma identity, and rescale invariance.

    ``worst`` is the largest deviation as a multiple of its own tolerance
    (``tol`` for the first two, ``rescale_tol`` for invariance), so the
    result passes iff ``worst <= 1``.
    """
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    worst_dp, worst_id, worst_rescale = 0.0, 0.0, 0.0
    for _ in range(trials):
        net = random_small_net(rng)
        pn = path_norm(net)
        ref = brute_force_path_norm(net)
        worst_dp = max(worst_dp, abs(pn - ref) / max(ref, 1e-300))
        gam = compute_gammas(net)
        for j, Wj in enumerate(net.weights):
            s = float(np.sum(gam.gamma_edge(j) * Wj * Wj))
            worst_id = max(worst_id, abs(s - ref * ref) / max(ref * ref, 1e-300))
        hidden = [(k, i) for k in range(1, len(net.layer_sizes) - 1) for i in range(net.layer_sizes[k])]
        if not hidden:
            continue
        k, i = hidden[int(rng.integers(len(hidden)))]
        X = rng.standard_normal((100, net.layer_sizes[0]))
        out0 = forward(net, X)[-1]
        scale = max(1.0, float(np.abs(out0).max()))
        for c in (0.5, 2.0, 10.0):
            moved = rescale_node(net, k, i, c)
            worst_rescale = max(
                worst_rescale,
                float(np.abs(forward(moved, X)[-1] - out0).max()) / scale,
                abs(path_norm(moved) - pn) / max(pn, 1e-300),
            )
    details = {"dp_vs_enum": worst_dp, "gamma_identity": worst_id, "rescale": worst_rescale}
    worst = max(worst_dp / tol, worst_id / tol, worst_rescale / rescale_tol)
    return CheckResult(
        "pathnorm-dp", bool(worst <= 1.0), worst, 1.0, trials,
        time.perf_counter() - t0, details,
    )


# -- gap bench ---------------------------------------------------------------

GAP_BENCH_EPS = tuple(float(e) for e in np.logspace(-1, -3, 5))


def gap_bench(eps_values=GAP_BENCH_EPS, n_graphs=6, demands_per_graph=2, seed=0):
    """Iterations of the unrounded dual solver to reach each ``eps`` on 5-node graphs.

    Iterations are summed over the instance set for every ``eps``; the
    exponent is the least-squares slope of ``log(iterations)`` against
    ``log(1/eps)``.  Returns a dict with ``eps``, ``iterations``,
    ``exponent`` and ``monotone``.
    """
    rng = np.random.default_rng(seed)
    five = [A for name, A in tv_graph_templates(seed=seed) if A.n_nodes == 5]
    pick = rng.choice(len(five), size=min(n_graphs, len(five)), replace=False)
    instances = []
    for k in sorted(pick.tolist()):
        A = five[k]
        for _ in range(demands_per_graph):
            instances.append((A, A.matvec(rng.uniform(0.0, 1.0, A.n_edges))))
    iters = []
    for eps in eps_values:
        total = 0
        for A, d in instances:
            _, _, info = tv_dual_solve(d, A, eps=eps, rounding=False, full_output=True)
            total += info["iterations"]
        iters.append(total)
    x = np.log(1.0 / np.asarray(eps_values))
    y = np.log(np.maximum(np.asarray(iters, dtype=np.float64), 1.0))
    slope = float(np.polyfit(x, y, 1)[0])
    order = np.argsort(eps_values)[::-1]
    monotone = all(iters[order[i]] <= iters[order[i + 1]] for i in range(len(order) - 1))
    return {
        "eps": list(eps_values),
        "iterations": iters,
        "exponent": slope,
        "monotone": monotone,
        "instances": len(instances),
    }
