"""Training loops: conditional gradient, layer-wise path-norm CG, PGD and SGD.

The CG update keeps weight ``eta`` on the current iterate::

    W_{t+1} = eta * W_t + (1 - eta) * s_t

so ``1 - eta`` is the step toward the oracle point ``s_t``.
"""
import csv
import logging
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .constraints import (
    Kind,
    constraint_value,
    lmo,
    lmo_pathnorm_layer,
    node_potential,
    pathnorm_scaling,
    project,
    PROJECTABLE,
)
from .constraints.balls import DeadPathWarning
from .exceptions import InfeasibleError, UnsupportedOperationError
from .network import (
    FeedForwardNet,
    ParamBlock,
    compute_gammas,
    error_rate,
    loss_and_gradient,
    path_norm,
    predict,
)

log = logging.getLogger(__name__)

CSV_FIELDS = ("iter", "loss", "train_err", "test_err", "constraint_value", "eta", "wall_ms")
FEASIBILITY_RTOL = 1e-8


@dataclass
class StepSchedule:
    """Weight ``eta`` kept on the current iterate.

    ``constant``: ``eta0`` forever.  ``burn_in_then_decay``: ``eta0`` for
    ``burn_in_iters`` iterations, after which the oracle weight
    ``1 - eta`` decays like ``1/t`` from where the burn-in left it.
    ``burn_in_iters=None`` means one epoch, resolved by the trainer.
    """

    mode: str = "burn_in_then_decay"
    eta0: float = 0.9
    burn_in_iters: int = None

    def __post_init__(self):
        if self.mode not in ("constant", "burn_in_then_decay"):
            raise ValueError(f"unknown schedule mode {self.mode!r}")
        if not 0.0 < self.eta0 < 1.0:
            raise ValueError("eta0 must lie in (0, 1)")

    def resolved(self, n_samples, batch_size):
        if self.burn_in_iters is not None:
            return self
        epoch = math.ceil(n_samples / batch_size)
        return StepSchedule(self.mode, self.eta0, epoch)


def step_schedule(t, schedule):
    if t < 0:
        raise ValueError("iteration index must be nonnegative")
    if schedule.mode == "constant":
        return schedule.eta0
    B = schedule.burn_in_iters
    if B is None:
        raise ValueError("burn-in length unresolved; call schedule.resolved(n, batch) first")
    if t < max(B, 1):
        return schedule.eta0
    return 1.0 - (1.0 - schedule.eta0) * max(B, 1) / t


def _clamp_eta(eta):
    if 0.0 < eta < 1.0:
        return eta
    clamped = min(max(eta, 1e-12), 1.0 - 1e-12)
    log.warning("step weight %r outside (0, 1); clamped to %r", eta, clamped)
    return clamped


def cg_step(W, s, eta):
    """Convex combination ``eta * W + (1 - eta) * s``."""
    eta = _clamp_eta(eta)
    if isinstance(W, ParamBlock):
        return W.with_flat(eta * W.flat + (1.0 - eta) * _flat(s))
    return eta * np.asarray(W, dtype=np.float64) + (1.0 - eta) * np.asarray(s, dtype=np.float64)


def sgd_step(W, g, eta):
    if isinstance(W, ParamBlock):
        return W.with_flat(W.flat - eta * _flat(g))
    return np.asarray(W, dtype=np.float64) - eta * np.asarray(g, dtype=np.float64)


def pgd_step(W, g, eta, spec):
    if spec.kind not in PROJECTABLE:
        # raises with the reason
        project(W, spec)
    return project(sgd_step(W, g, eta), spec)


def fw_gap(g, W, s):
    """Frank-Wolfe gap ``<g, W - s>``, clamped at zero."""
    return max(0.0, float(np.dot(_flat(g), _flat(W) - _flat(s))))


def _flat(x):
    return x.flat if isinstance(x, ParamBlock) else np.asarray(x, dtype=np.float64).ravel()


@dataclass
class RunMetrics:
    records: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def log(self, **rec):
        self.records.append(rec)

    def column(self, name):
        return [r.get(name) for r in self.records]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_FIELDS)
            for r in self.records:
                writer.writerow([_fmt(r.get(k)) for k in CSV_FIELDS])
        return path

    def __len__(self):
        return len(self.records)


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def minibatches(n, batch_size, rng):
    """Endless stream of index arrays, reshuffled every epoch; short tail kept."""
    while True:
        perm = rng.permutation(n)
        for start in range(0, n, batch_size):
            yield perm[start:start + batch_size]


class _Loop:
    """Shared bookkeeping for the training loops."""

    def __init__(self, train, test, T, batch_size, seed, eval_every, callback):
        if T < 0:
            raise ValueError("T must be nonnegative")
        self.train, self.test = train, test
        self.T = int(T)
        self.batch_size = int(batch_size or len(train))
        self.batches = minibatches(len(train), self.batch_size, np.random.default_rng(seed))
        self.eval_every = eval_every
        self.callback = callback
        self.metrics = RunMetrics()
        self.t0 = time.perf_counter()

    def __iter__(self):
        for t in range(self.T):
            yield t, self.train.subset(next(self.batches))

    def hook(self, t, net):
        return net if self.callback is None else self.callback(t, net)

    def record(self, t, net, batch_loss, batch, R, eta, **extra):
        test_err = None
        if self.test is not None and len(self.test) and (
            (self.eval_every and (t + 1) % self.eval_every == 0) or t == self.T - 1
        ):
            test_err = error_rate(net, self.test)
        self.metrics.log(
            iter=t + 1,
            loss=batch_loss,
            train_err=batch["err"],
            test_err=test_err,
            constraint_value=R,
            eta=eta,
            wall_ms=(time.perf_counter() - self.t0) * 1e3,
            **extra,
        )


def _batch_step(net, batch):
    value, grads = loss_and_gradient(net, batch)
    err = float(np.mean(predict(net, batch.inputs) != batch.labels))
    return value, ParamBlock.from_matrices(grads), {"err": err}


def _check_feasible(value, lam, what):
    if value > lam * (1.0 + FEASIBILITY_RTOL):
        raise InfeasibleError(
            f"initial {what} {value:.6g} exceeds the radius {lam:.6g}; rescale the "
            "initialization into the ball (see harness.experiment.rescale_into_ball)"
        )


def rowspace_projection(G, A):
    """Drop the cycle-space component of an edge gradient (TV ball)."""
    y, _ = node_potential(G.flat, A)
    return G.with_flat(A.rmatvec(y))


def train_cg(net, train, test, spec, schedule, T, batch_size=None, seed=0,
             eval_every=0, callback=None):
    """Stochastic conditional gradient over a network-level constraint.

    Each iteration draws a minibatch, takes the exact minibatch gradient,
    calls the constraint's oracle and moves by :func:`cg_step` with the
    scheduled weight.  For the TV ball the gradient is first projected onto
    the row space of the incidence matrix (the oracle is unbounded along
    cycles).  Records carry the full-step Frank-Wolfe gap as ``gap``.
    """
    if spec.kind is Kind.PATH_NORM:
        raise UnsupportedOperationError("use path_cg for the path-norm constraint")
    loop = _Loop(train, test, T, batch_size, seed, eval_every, callback)
    schedule = schedule.resolved(len(train), loop.batch_size)
    _check_feasible(constraint_value(net.params, spec), spec.lam, "constraint value")
    for t, batch in loop:
        net = loop.hook(t, net)
        W = net.params
        value, G, info = _batch_step(net, batch)
        if spec.kind is Kind.TV:
            G = rowspace_projection(G, spec.aux)
        res = lmo(G, spec)
        eta = step_schedule(t, schedule)
        gap = fw_gap(G, W, res.direction)
        W = cg_step(W, res.direction, eta)
        net = FeedForwardNet(net.layer_sizes, W)
        loop.record(t, net, value, info, constraint_value(W, spec), eta, gap=gap)
    return net, loop.metrics


def path_cg(net, train, test, lam, schedule, T, batch_size=None, seed=0,
            eval_every=0, callback=None):
    """Layer-wise conditional gradient under ``||W||_pi <= lam``.

    One minibatch gradient per iteration; the layers are then visited input
    side first.  Before each layer the gamma table is recomputed from the
    current (partly updated) weights, the per-layer ellipsoid oracle is
    solved, and only that layer moves.  With the other layers fixed the
    path norm is a weighted l2 norm of the layer, so each convex combination
    stays inside the ball.
    """
    loop = _Loop(train, test, T, batch_size, seed, eval_every, callback)
    schedule = schedule.resolved(len(train), loop.batch_size)
    _check_feasible(path_norm(net), lam, "path norm")
    for t, batch in loop:
        net = loop.hook(t, net)
        value, G, info = _batch_step(net, batch)
        eta = step_schedule(t, schedule)
        W = [Wj.copy() for Wj in net.weights]
        for j in range(len(W)):
            gammas = compute_gammas(FeedForwardNet(net.layer_sizes, W))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DeadPathWarning)
                res = lmo_pathnorm_layer(G.layer(j), pathnorm_scaling(gammas, j), lam)
            for note in res.notes:
                loop.metrics.notes.append(f"iter {t + 1} layer {j}: {note}")
            W[j] = cg_step(W[j], res.direction, eta)
        net = FeedForwardNet(net.layer_sizes, W)
        loop.record(t, net, value, info, path_norm(net), eta)
    return net, loop.metrics


def train_pgd(net, train, test, spec, lr, T, batch_size=None, seed=0,
              eval_every=0, callback=None):
    if spec.kind not in PROJECTABLE:
        project(net.params, spec)
    loop = _Loop(train, test, T, batch_size, seed, eval_every, callback)
    for t, batch in loop:
        net = loop.hook(t, net)
        value, G, info = _batch_step(net, batch)
        W = pgd_step(net.params, G, lr, spec)
        net = FeedForwardNet(net.layer_sizes, W)
        loop.record(t, net, value, info, constraint_value(W, spec), lr)
    return net, loop.metrics


def train_sgd(net, train, test, lr, T, batch_size=None, seed=0, spec=None,
              eval_every=0, callback=None):
    """Plain minibatch SGD.

    ``constraint_value`` logs ``R(W_t)`` for ``spec`` if given, otherwise the
    path norm, so an unconstrained baseline can be compared against a
    constrained run.
    """
    loop = _Loop(train, test, T, batch_size, seed, eval_every, callback)
    for t, batch in loop:
        net = loop.hook(t, net)
        value, G, info = _batch_step(net, batch)
        net = FeedForwardNet(net.layer_sizes, sgd_step(net.params, G, lr))
        R = path_norm(net) if spec is None else constraint_value(net.params, spec, net=net)
        loop.record(t, net, value, info, R, lr)
    return net, loop.metrics
