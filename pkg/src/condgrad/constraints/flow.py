"""Dinic's max-flow with real-valued capacities."""
from collections import deque

import numpy as np


class FlowNetwork:
    def __init__(self, n_nodes, tol=1e-12):
        self.n = n_nodes
        self.tol = tol
        self.adj = [[] for _ in range(n_nodes)]
        self.to = []
        self.cap = []
        self.orig = []

    def add_edge(self, u, v, capacity):
        """Add arc ``u -> v``; returns its id (the residual twin is ``id ^ 1``)."""
        eid = len(self.to)
        self.to += [v, u]
        self.cap += [float(capacity), 0.0]
        self.orig += [float(capacity), 0.0]
        self.adj[u].append(eid)
        self.adj[v].append(eid + 1)
        return eid

    def flow(self, eid):
        return self.orig[eid] - self.cap[eid]

    def _bfs(self, s, t):
        level = [-1] * self.n
        level[s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for e in self.adj[u]:
                v = self.to[e]
                if level[v] < 0 and self.cap[e] > self.tol:
                    level[v] = level[u] + 1
                    q.append(v)
        return level if level[t] >= 0 else None

    def _augment(self, s, t, level, it):
        # iterative DFS along the level graph; returns pushed amount
        path = []
        u = s
        while True:
            if u == t:
                push = min(self.cap[e] for e in path)
                for e in path:
                    self.cap[e] -= push
                    self.cap[e ^ 1] += push
                return push
            advanced = False
            edges = self.adj[u]
            while it[u] < len(edges):
                e = edges[it[u]]
                v = self.to[e]
                if self.cap[e] > self.tol and level[v] == level[u] + 1:
                    path.append(e)
                    u = v
                    advanced = True
                    break
                it[u] += 1
            if not advanced:
                if u == s:
                    return 0.0
                level[u] = -1  # dead end, prune
                e = path.pop()
                u = self.to[e ^ 1]
                it[u] += 1

    def max_flow(self, s, t):
        total = 0.0
        while True:
            level = self._bfs(s, t)
            if level is None:
                return total
            it = [0] * self.n
            while True:
                pushed = self._augment(s, t, level, it)
                if pushed <= self.tol:
                    break
                total += pushed


def route_demands(d, sources, targets, n_nodes, bidirected=False, tol=1e-12):
    """Max-flow realisation of node demands on unit-capacity edges.

    Builds the auxiliary network (a super source feeding every node with
    ``d > 0``, a super sink draining every node with ``d < 0``) and returns
    ``(flow_value, edge_flow)``.  ``edge_flow[e]`` lies in ``[0, 1]``, or in
    ``[-1, 1]`` when ``bidirected`` lets each edge carry flow both ways.
    """
    d = np.asarray(d, dtype=np.float64)
    S, T = n_nodes, n_nodes + 1
    net = FlowNetwork(n_nodes + 2, tol=tol)
    fwd, bwd = [], []
    for u, v in zip(sources.tolist(), targets.tolist()):
        fwd.append(net.add_edge(u, v, 1.0))
        if bidirected:
            bwd.append(net.add_edge(v, u, 1.0))
    for node, dv in enumerate(d.tolist()):
        if dv > 0:
            net.add_edge(S, node, dv)
        elif dv < 0:
            net.add_edge(node, T, -dv)
    value = net.max_flow(S, T)
    f = np.array([net.flow(e) for e in fwd])
    if bidirected:
        f = f - np.array([net.flow(e) for e in bwd])
    return value, f
