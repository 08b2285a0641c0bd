"""Constraint catalogue and network-level dispatch.

A :class:`ConstraintSpec` describes ``{W : R(W) <= lam}`` over the whole
parameter vector of a network.  The network-level meanings of ``R`` are:

==================  ====================================================
FrobeniusBall       l2 norm of all weights
NuclearBall         sum over layers of the nuclear norm of each matrix
L1Ball              l1 norm of all weights
LInfBall            largest absolute weight
GroupL1InfBall      ``max_i ||W_i||_1`` (entrywise l1 per layer)
TVBall              ``||A w||_1`` with ``A`` the network incidence matrix
PathNormBall        l2 path norm (layer-wise oracle only, see ``path_cg``)
==================  ====================================================
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..exceptions import UnsupportedOperationError
from ..network import IncidenceMatrix, ParamBlock, path_norm
from .balls import (
    DeadPathWarning,
    LmoResult,
    lmo_frobenius,
    lmo_group_l1_inf,
    lmo_l1,
    lmo_linf,
    lmo_nuclear,
    lmo_pathnorm_layer,
    pathnorm_scaling,
    project_frobenius,
    project_l1,
    project_linf,
)
from .tv import lmo_tv, node_potential, tv_dual_solve, tv_feasibility, tv_norm


class Kind(str, Enum):
    FROBENIUS = "FrobeniusBall"
    NUCLEAR = "NuclearBall"
    L1 = "L1Ball"
    LINF = "LInfBall"
    GROUP_L1_INF = "GroupL1InfBall"
    TV = "TVBall"
    PATH_NORM = "PathNormBall"


_ALIASES = {
    "frobenius": Kind.FROBENIUS,
    "nuclear": Kind.NUCLEAR,
    "l1": Kind.L1,
    "linf": Kind.LINF,
    "group": Kind.GROUP_L1_INF,
    "group_l1_inf": Kind.GROUP_L1_INF,
    "tv": Kind.TV,
    "pathnorm": Kind.PATH_NORM,
    "path_norm": Kind.PATH_NORM,
}


def parse_kind(name):
    if isinstance(name, Kind):
        return name
    try:
        return Kind(name)
    except ValueError:
        key = str(name).lower().replace("-", "_")
        if key in _ALIASES:
            return _ALIASES[key]
        raise ValueError(
            f"unknown constraint kind {name!r}; choose from {[k.value for k in Kind]}"
        ) from None


PROJECTABLE = {Kind.FROBENIUS, Kind.L1, Kind.LINF}


@dataclass
class ConstraintSpec:
    kind: Kind
    lam: float
    aux: object = None
    eps: float = 1e-9
    tol: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        self.kind = parse_kind(self.kind)
        self.lam = float(self.lam)
        if not self.lam > 0:
            raise ValueError(f"constraint radius must be positive, got {self.lam}")
        if self.kind is Kind.TV and not isinstance(self.aux, IncidenceMatrix):
            raise ValueError("TVBall needs an IncidenceMatrix as aux")


def constraint_value(W, spec, net=None):
    """``R(W)`` for a :class:`ParamBlock` ``W``.

    ``PathNormBall`` needs the layer sizes, passed through ``net``.
    """
    k = spec.kind
    if k is Kind.FROBENIUS:
        return float(np.linalg.norm(W.flat))
    if k is Kind.NUCLEAR:
        return float(sum(np.linalg.svd(m, compute_uv=False).sum() for m in W.matrices))
    if k is Kind.L1:
        return float(np.abs(W.flat).sum())
    if k is Kind.LINF:
        return float(np.abs(W.flat).max()) if len(W) else 0.0
    if k is Kind.GROUP_L1_INF:
        return float(max(np.abs(m).sum() for m in W.matrices))
    if k is Kind.TV:
        return tv_norm(W.flat, spec.aux)
    if k is Kind.PATH_NORM:
        if net is None:
            raise ValueError("path norm needs the network layout")
        return path_norm(net.with_params(W.flat))
    raise AssertionError(k)


def lmo(g, spec):
    """Network-level oracle: ``argmin <g, S>`` over the ball, as a ParamBlock."""
    k = spec.kind
    lam = spec.lam
    if k is Kind.FROBENIUS:
        res = lmo_frobenius(g.flat, lam)
    elif k is Kind.L1:
        res = lmo_l1(g.flat, lam)
    elif k is Kind.LINF:
        res = lmo_linf(g.flat, lam)
    elif k is Kind.GROUP_L1_INF:
        res = lmo_group_l1_inf(g.matrices, lam)
        res.direction = np.concatenate([b.ravel() for b in res.direction])
    elif k is Kind.NUCLEAR:
        res = _lmo_nuclear_blocks(g, spec)
    elif k is Kind.TV:
        res = lmo_tv(g.flat, spec.aux, lam, eps=max(spec.eps, 1e-12))
    else:
        raise UnsupportedOperationError(
            "the path-norm ball is unbounded jointly over all layers; only its "
            "per-layer oracle exists (use path_cg)"
        )
    res.direction = g.with_flat(np.asarray(res.direction).ravel())
    return res


def _lmo_nuclear_blocks(g, spec):
    # unit ball of sum_i ||W_i||_* has vertices u v^T inside a single layer
    best_j, best_sigma, best = None, -1.0, None
    for j, Gj in enumerate(g.matrices):
        if not np.any(Gj):
            continue
        res = lmo_nuclear(Gj, spec.lam, tol=spec.tol, seed=spec.seed + j)
        sigma = -res.objective / spec.lam
        if sigma > best_sigma:
            best_j, best_sigma, best = j, sigma, res
    flat = np.zeros_like(g.flat)
    if best is None:
        return LmoResult(flat, 0.0, degenerate=True)
    flat[g.offsets[best_j]:g.offsets[best_j + 1]] = best.direction.ravel()
    return LmoResult(flat, best.objective)


def project(z, spec):
    k = spec.kind
    if k is Kind.FROBENIUS:
        out = project_frobenius(z.flat, spec.lam)
    elif k is Kind.L1:
        out = project_l1(z.flat, spec.lam)
    elif k is Kind.LINF:
        out = project_linf(z.flat, spec.lam)
    else:
        raise UnsupportedOperationError(
            f"no projection for {k.value}: Euclidean projection onto this set needs a "
            "full SVD, a special TV solver, or has no known efficient separation oracle; "
            "use the conditional-gradient optimizer instead"
        )
    return z.with_flat(out)


__all__ = [
    "ConstraintSpec", "DeadPathWarning", "Kind", "LmoResult", "PROJECTABLE",
    "constraint_value", "lmo", "lmo_frobenius", "lmo_group_l1_inf", "lmo_l1",
    "lmo_linf", "lmo_nuclear", "lmo_pathnorm_layer", "lmo_tv", "node_potential",
    "parse_kind", "pathnorm_scaling", "project", "project_frobenius", "project_l1",
    "project_linf", "tv_dual_solve", "tv_feasibility", "tv_norm",
]
