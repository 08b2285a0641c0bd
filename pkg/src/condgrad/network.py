"""Bias-free feedforward ReLU networks and their path-norm machinery.

Layers are numbered ``0 .. L`` (input to output) and ``weights[j]`` has shape
``(layer_sizes[j + 1], layer_sizes[j])``: it maps the activations of layer
``j`` to the pre-activations of layer ``j + 1``.  Nodes are numbered
globally, layer by layer, and edges follow the *canonical order*: layer-major,
then ``(target, source)`` lexicographic, which is exactly the row-major
flattening of each weight matrix.  Flattened gradients, gamma diagonals and
incidence columns all share this order.
"""
import json
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError


class ParamBlock:
    """Flat float64 parameter vector with per-layer matrix views."""

    def __init__(self, flat, shapes):
        self.shapes = [tuple(int(d) for d in s) for s in shapes]
        self.flat = np.asarray(flat, dtype=np.float64).ravel()
        sizes = [int(np.prod(s)) for s in self.shapes]
        if sum(sizes) != self.flat.size:
            raise DimensionError(
                f"flat vector of length {self.flat.size} does not match shapes {self.shapes}"
            )
        self.offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)

    @classmethod
    def from_matrices(cls, matrices):
        matrices = [np.asarray(m, dtype=np.float64) for m in matrices]
        flat = np.concatenate([m.ravel() for m in matrices]) if matrices else np.zeros(0)
        return cls(flat, [m.shape for m in matrices])

    @classmethod
    def zeros_like(cls, other):
        return cls(np.zeros_like(other.flat), other.shapes)

    def layer(self, j):
        return self.flat[self.offsets[j]:self.offsets[j + 1]].reshape(self.shapes[j])

    @property
    def matrices(self):
        return [self.layer(j) for j in range(len(self.shapes))]

    def with_flat(self, flat):
        return ParamBlock(flat, self.shapes)

    def copy(self):
        return ParamBlock(self.flat.copy(), self.shapes)

    def __len__(self):
        return self.flat.size

    def __repr__(self):
        return f"ParamBlock(shapes={self.shapes})"


@dataclass(frozen=True)
class Batch:
    inputs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        inputs = np.atleast_2d(np.asarray(self.inputs, dtype=np.float64))
        labels = np.asarray(self.labels).astype(np.int64).ravel()
        if inputs.shape[0] != labels.shape[0]:
            raise DimensionError(
                f"{inputs.shape[0]} samples but {labels.shape[0]} labels"
            )
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.inputs.shape[0]

    def subset(self, idx):
        return Batch(self.inputs[idx], self.labels[idx])


class FeedForwardNet:
    """Layered ReLU network without biases.

    Treated as an immutable value: every transformation in this module
    returns a new net.
    """

    def __init__(self, layer_sizes, weights):
        layer_sizes = [int(n) for n in layer_sizes]
        if len(layer_sizes) < 2:
            raise DimensionError("a network needs at least an input and an output layer")
        if any(n < 1 for n in layer_sizes):
            raise DimensionError(f"layer sizes must be positive: {layer_sizes}")
        if isinstance(weights, ParamBlock):
            params = weights.copy()
        else:
            params = ParamBlock.from_matrices(weights)
        expected = [(layer_sizes[j + 1], layer_sizes[j]) for j in range(len(layer_sizes) - 1)]
        if params.shapes != expected:
            raise DimensionError(f"weight shapes {params.shapes} do not match {expected}")
        if not np.all(np.isfinite(params.flat)):
            raise ValueError("weights must be finite")
        self.layer_sizes = layer_sizes
        self.params = params

    @property
    def weights(self):
        return self.params.matrices

    @property
    def n_layers(self):
        """Number of weight matrices."""
        return len(self.layer_sizes) - 1

    @property
    def n_nodes(self):
        return sum(self.layer_sizes)

    @property
    def n_edges(self):
        return len(self.params)

    def with_params(self, flat):
        return FeedForwardNet(self.layer_sizes, self.params.with_flat(flat))

    def node_offsets(self):
        return np.concatenate([[0], np.cumsum(self.layer_sizes)]).astype(int)

    def __repr__(self):
        return f"FeedForwardNet({'-'.join(map(str, self.layer_sizes))})"


def init_network(layer_sizes, seed=0):
    """Gaussian initialization, mean 0, std ``1/sqrt(fan_in)``."""
    rng = np.random.default_rng(seed)
    weights = [
        rng.standard_normal((layer_sizes[j + 1], layer_sizes[j])) / np.sqrt(layer_sizes[j])
        for j in range(len(layer_sizes) - 1)
    ]
    return FeedForwardNet(layer_sizes, weights)


def _inputs(net, batch):
    X = batch.inputs if isinstance(batch, Batch) else np.atleast_2d(np.asarray(batch, dtype=np.float64))
    if X.shape[1] != net.layer_sizes[0]:
        raise DimensionError(f"input dimension {X.shape[1]} != {net.layer_sizes[0]}")
    return X


def forward(net, batch):
    """Activations of every layer; the last entry holds the raw logits."""
    a = _inputs(net, batch)
    acts = [a]
    W = net.weights
    for j, Wj in enumerate(W):
        z = a @ Wj.T
        a = np.maximum(z, 0.0) if j < len(W) - 1 else z
        acts.append(a)
    return acts


def _log_softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def predict_proba(net, X):
    return np.exp(_log_softmax(forward(net, X)[-1]))


def predict(net, X):
    return np.argmax(forward(net, X)[-1], axis=1)


def error_rate(net, batch):
    return float(np.mean(predict(net, batch.inputs) != batch.labels))


def loss(net, batch):
    logp = _log_softmax(forward(net, batch)[-1])
    return float(-np.mean(logp[np.arange(len(batch)), batch.labels]))


def loss_and_gradient(net, batch):
    """Mean softmax cross-entropy over the batch and its exact gradient.

    Returns ``(loss, grads)`` with ``grads[j]`` shaped like ``weights[j]``.
    """
    n = len(batch)
    if n == 0:
        raise ValueError("empty batch")
    if batch.labels.max() >= net.layer_sizes[-1] or batch.labels.min() < 0:
        raise DimensionError("label out of range for the output layer")
    acts = forward(net, batch)
    logp = _log_softmax(acts[-1])
    rows = np.arange(n)
    value = float(-np.mean(logp[rows, batch.labels]))

    delta = np.exp(logp)
    delta[rows, batch.labels] -= 1.0
    delta /= n
    W = net.weights
    grads = [None] * len(W)
    for j in range(len(W) - 1, -1, -1):
        grads[j] = delta.T @ acts[j]
        if j > 0:
            delta = (delta @ W[j]) * (acts[j] > 0)
    return value, grads


@dataclass(frozen=True)
class GammaTable:
    """Per-node path sums and per-edge scaling factors.

    ``gamma_in[k][i]`` is the squared path norm of all paths from the input
    layer ending at node ``i`` of layer ``k``; ``gamma_out[k][i]`` the same for
    paths from that node to the output layer.
    """

    gamma_in: list
    gamma_out: list

    def gamma_edge(self, j):
        """Matrix of ``gamma_in(u) * gamma_out(v)`` for edges of ``weights[j]``."""
        return np.outer(self.gamma_out[j + 1], self.gamma_in[j])

    def flat(self):
        return np.concatenate([self.gamma_edge(j).ravel() for j in range(len(self.gamma_in) - 1)])


def compute_gammas(net):
    W2 = [Wj * Wj for Wj in net.weights]
    g_in = [np.ones(net.layer_sizes[0])]
    for Wj2 in W2:
        g_in.append(Wj2 @ g_in[-1])
    g_out = [np.ones(net.layer_sizes[-1])]
    for Wj2 in reversed(W2):
        g_out.append(Wj2.T @ g_out[-1])
    g_out.reverse()
    return GammaTable(gamma_in=g_in, gamma_out=g_out)


def path_norm(net):
    """l2 path norm by the forward dynamic program, ``O(|E|)``."""
    g = np.ones(net.layer_sizes[0])
    for Wj in net.weights:
        g = (Wj * Wj) @ g
    return float(np.sqrt(g.sum()))


def rescale_node(net, layer, node, c):
    """Multiply a hidden node's incoming weights by ``c`` and divide its outgoing ones."""
    if not 0 < layer < len(net.layer_sizes) - 1:
        raise ValueError(f"layer {layer} is not a hidden layer")
    if not 0 <= node < net.layer_sizes[layer]:
        raise ValueError(f"node {node} out of range for layer {layer}")
    if not c > 0:
        raise ValueError("rescaling constant must be positive")
    W = [Wj.copy() for Wj in net.weights]
    W[layer - 1][node, :] *= c
    W[layer][:, node] /= c
    return FeedForwardNet(net.layer_sizes, W)


def scale_layers(net, factor):
    """Multiply every weight by ``factor``."""
    return net.with_params(net.params.flat * factor)


@dataclass(frozen=True)
class IncidenceMatrix:
    """Node-by-edge incidence in sparse endpoint form.

    Column ``e`` holds ``+1`` at ``sources[e]`` and ``-1`` at ``targets[e]``.
    """

    n_nodes: int
    sources: np.ndarray
    targets: np.ndarray

    @property
    def n_edges(self):
        return self.sources.size

    @property
    def shape(self):
        return (self.n_nodes, self.n_edges)

    def dense(self):
        A = np.zeros(self.shape)
        cols = np.arange(self.n_edges)
        A[self.sources, cols] = 1.0
        A[self.targets, cols] = -1.0
        return A

    def matvec(self, w):
        """``A @ w``: net outflow at every node."""
        w = np.asarray(w, dtype=np.float64).ravel()
        if w.size != self.n_edges:
            raise DimensionError(f"edge vector of length {w.size}, expected {self.n_edges}")
        out = np.zeros(self.n_nodes)
        np.add.at(out, self.sources, w)
        np.subtract.at(out, self.targets, w)
        return out

    def rmatvec(self, y):
        """``A.T @ y``: potential drop along every edge."""
        y = np.asarray(y, dtype=np.float64).ravel()
        if y.size != self.n_nodes:
            raise DimensionError(f"node vector of length {y.size}, expected {self.n_nodes}")
        return y[self.sources] - y[self.targets]

    @classmethod
    def from_edges(cls, n_nodes, edges):
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        return cls(int(n_nodes), edges[:, 0].copy(), edges[:, 1].copy())


def incidence_matrix(net):
    off = net.node_offsets()
    src, dst = [], []
    for j in range(net.n_layers):
        n_out, n_in = net.layer_sizes[j + 1], net.layer_sizes[j]
        t, s = np.meshgrid(np.arange(n_out), np.arange(n_in), indexing="ij")
        src.append(off[j] + s.ravel())
        dst.append(off[j + 1] + t.ravel())
    return IncidenceMatrix(net.n_nodes, np.concatenate(src), np.concatenate(dst))


def save_network(net, path):
    doc = {"layers": net.layer_sizes, "weights": [Wj.ravel().tolist() for Wj in net.weights]}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def load_network(path):
    with open(path) as fh:
        doc = json.load(fh)
    sizes = doc["layers"]
    weights = [
        np.asarray(w, dtype=np.float64).reshape(sizes[j + 1], sizes[j])
        for j, w in enumerate(doc["weights"])
    ]
    return FeedForwardNet(sizes, weights)
