import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from condgrad.constraints import lmo_tv, tv_dual_solve, tv_feasibility, tv_norm
from condgrad.constraints.flow import FlowNetwork, route_demands
from condgrad.exceptions import InfeasibleError, UnboundedError
from condgrad.harness.checks import tv_graph_templates
from condgrad.harness.oracles import brute_force_lp, tv_flow_lp, tv_lmo_lp
from condgrad.network import IncidenceMatrix

LINE = IncidenceMatrix.from_edges(3, [(0, 1), (1, 2)])
EDGE = IncidenceMatrix.from_edges(2, [(0, 1)])
GRAPHS = tv_graph_templates()


def test_graph_templates_are_small_and_connected():
    assert len(GRAPHS) > 20
    for _, A in GRAPHS:
        assert A.n_nodes <= 5
        L = np.diag(np.bincount(np.r_[A.sources, A.targets], minlength=A.n_nodes)).astype(float)
        np.subtract.at(L, (A.sources, A.targets), 1.0)
        np.subtract.at(L, (A.targets, A.sources), 1.0)
        # one zero eigenvalue <=> connected
        assert np.sum(np.abs(np.linalg.eigvalsh(L)) < 1e-9) == 1


# -- tv_norm -----------------------------------------------------------------------

def test_tv_norm_examples():
    np.testing.assert_array_equal(LINE.matvec([1.0, 1.0]), [1.0, 0.0, -1.0])
    assert tv_norm([1.0, 1.0], LINE) == 2.0
    assert tv_norm([0.0, 0.0], LINE) == 0.0
    w = np.array([0.3, -1.7])
    assert tv_norm(3.0 * w, LINE) == pytest.approx(3.0 * tv_norm(w, LINE))


# -- max-flow ------------------------------------------------------------------------

def test_flow_network_textbook_instance():
    net = FlowNetwork(4)
    for u, v, c in [(0, 1, 3), (0, 2, 2), (1, 2, 1), (1, 3, 2), (2, 3, 3)]:
        net.add_edge(u, v, c)
    assert net.max_flow(0, 3) == pytest.approx(5.0)


def test_route_demands_conserves_flow(rng):
    for _, A in GRAPHS[:15]:
        f0 = rng.uniform(0, 1, A.n_edges)
        d = A.matvec(f0)
        value, f = route_demands(d, A.sources, A.targets, A.n_nodes)
        assert value == pytest.approx(d[d > 0].sum(), abs=1e-9)
        np.testing.assert_allclose(A.matvec(f), d, atol=1e-9)
        assert np.all(f >= -1e-12) and np.all(f <= 1 + 1e-12)


# -- tv_feasibility -------------------------------------------------------------------

def test_tv_feasibility_examples():
    assert tv_feasibility(0.0, [1.0, 5.0, 0.0], LINE)
    assert tv_feasibility(1.0, [1.0, 0.0, -1.0], LINE)
    assert not tv_feasibility(1.5, [1.0, 0.0, -1.0], LINE)
    with pytest.raises(ValueError):
        tv_feasibility(-1.0, [1.0, 0.0, -1.0], LINE)


def test_tv_feasibility_threshold_matches_lp(rng):
    for _, A in GRAPHS[::3]:
        d = A.matvec(rng.uniform(0, 1, A.n_edges))
        _, beta = tv_flow_lp(d, A)
        assert tv_feasibility(beta * (1 - 1e-6), d, A)
        assert not tv_feasibility(beta * (1 + 1e-3) + 1e-6, d, A)


# -- brute_force_lp -------------------------------------------------------------------

def test_brute_force_lp_examples():
    _, beta = tv_flow_lp(np.array([1.0, -1.0]), EDGE)
    assert beta == pytest.approx(1.0)
    with pytest.raises(InfeasibleError):
        brute_force_lp([1.0, 1.0], [[1.0, 1.0]], [5.0], [0.0, 0.0], [1.0, 1.0])
    _, val = brute_force_lp([0.0, 0.0], [[1.0, -1.0]], [0.0], [0.0, 0.0], [1.0, 1.0])
    assert val == 0.0


def test_brute_force_lp_agrees_with_scipy(rng):
    linprog = pytest.importorskip("scipy.optimize").linprog
    for _ in range(30):
        n = int(rng.integers(2, 7))
        m = int(rng.integers(0, n))
        A = rng.standard_normal((m, n))
        x0 = rng.uniform(0, 1, n)
        c = rng.standard_normal(n)
        _, val = brute_force_lp(c, A, A @ x0, np.zeros(n), np.ones(n))
        ref = linprog(c, A_eq=A if m else None, b_eq=A @ x0 if m else None, bounds=[(0, 1)] * n)
        assert val == pytest.approx(ref.fun, abs=1e-8)


# -- tv_dual_solve ---------------------------------------------------------------------

def test_dual_single_edge():
    _, value = tv_dual_solve(np.array([1.0, -1.0]), EDGE, eps=1e-6)
    assert -value == pytest.approx(1.0, abs=1e-6)


def test_dual_line_graph_matches_lp():
    d = np.array([1.0, 0.0, -1.0])
    _, beta = tv_flow_lp(d, LINE)
    v, value = tv_dual_solve(d, LINE, eps=1e-6)
    assert abs(-value - beta) <= 1e-6
    assert d @ v == pytest.approx(1.0, abs=1e-12)


def test_dual_scaling():
    A = GRAPHS[-1][1]
    d = A.matvec(np.linspace(0.1, 0.9, A.n_edges))
    _, v1 = tv_dual_solve(d, A, eps=1e-8)
    _, v2 = tv_dual_solve(2.5 * d, A, eps=1e-8)
    assert v2 == pytest.approx(v1 / 2.5, abs=1e-7)


def test_dual_zero_demand_is_unbounded():
    with pytest.raises(UnboundedError):
        tv_dual_solve(np.zeros(3), LINE)


@pytest.mark.parametrize("rounding", [True, False])
def test_dual_matches_lp_on_templates(rounding):
    rng = np.random.default_rng(5)
    for _, A in GRAPHS:
        d = A.matvec(rng.uniform(0, 1, A.n_edges))
        _, beta = tv_flow_lp(d, A)
        _, value, info = tv_dual_solve(d, A, eps=1e-6, rounding=rounding, full_output=True)
        assert abs(-value - beta) <= 1e-6
        assert info["lower"] <= beta + 1e-9 <= info["upper"] + 2e-9


# -- lmo_tv -----------------------------------------------------------------------------

def test_lmo_tv_matches_lp_on_templates(rng):
    for _, A in GRAPHS:
        g = A.rmatvec(rng.standard_normal(A.n_nodes))
        lam = float(rng.uniform(0.5, 3.0))
        res = lmo_tv(g, A, lam)
        assert tv_norm(res.direction, A) <= lam * (1 + 1e-9)
        assert res.objective == pytest.approx(tv_lmo_lp(g, A, lam), abs=1e-6)


def test_lmo_tv_single_edge_cut():
    # y is the indicator of node 1 on the line 0 -> 1 -> 2
    y = np.array([0.0, 1.0, 0.0])
    g = LINE.rmatvec(y)
    res = lmo_tv(g, LINE, 2.0)
    z = LINE.matvec(res.direction)
    # the whole budget sits on node 1's cut: +1 at a zero-potential node, -1 at node 1
    assert z[1] == pytest.approx(-1.0)
    assert np.abs(z).sum() == pytest.approx(2.0)
    assert res.objective == pytest.approx(tv_lmo_lp(g, LINE, 2.0), abs=1e-9)


def test_lmo_tv_homogeneous_in_lambda(rng):
    A = GRAPHS[10][1]
    g = A.rmatvec(rng.standard_normal(A.n_nodes))
    assert lmo_tv(g, A, 2.0).objective == pytest.approx(2 * lmo_tv(g, A, 1.0).objective, rel=1e-12)


def test_lmo_tv_rejects_cycle_component():
    # triangle: the cycle 0->1->2 and 0->2 in reverse is in ker A
    A = IncidenceMatrix.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    with pytest.raises(UnboundedError):
        lmo_tv(np.array([1.0, 1.0, -1.0]), A, 1.0)


def test_lmo_tv_zero_gradient_is_degenerate():
    res = lmo_tv(np.zeros(2), LINE, 1.0)
    assert res.degenerate and not np.any(res.direction)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, len(GRAPHS) - 1), st.integers(0, 2**32 - 1), st.floats(0.1, 10.0))
def test_lmo_tv_feasible_and_beats_random_points(k, seed, lam):
    A = GRAPHS[k][1]
    rng = np.random.default_rng(seed)
    g = A.rmatvec(rng.standard_normal(A.n_nodes))
    res = lmo_tv(g, A, lam)
    assert tv_norm(res.direction, A) <= lam * (1 + 1e-9)
    for _ in range(200):
        p = rng.standard_normal(A.n_edges)
        p *= lam / max(tv_norm(p, A), 1e-300)
        assert res.objective <= g @ p + 1e-9
