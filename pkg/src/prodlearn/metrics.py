"""Total-variation distance in the dense, sparse and product regimes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .core import DenseDistribution, ProductDistribution, SpaceSpec, enumerate_points
from .estimators import SparseDistribution


class PointwiseDistribution(Protocol):
    """Anything that can report the mass of a point and of a finite point set."""

    def mass_many(self, points) -> np.ndarray: ...

    def set_mass(self, points) -> float: ...


def _clip(v: float) -> float:
    return min(max(v, 0.0), 1.0)


def tv_dense(P: DenseDistribution, Q: DenseDistribution) -> float:
    p = P.probs if isinstance(P, DenseDistribution) else np.asarray(P, dtype=float)
    q = Q.probs if isinstance(Q, DenseDistribution) else np.asarray(Q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"support sizes differ: {p.size} vs {q.size}")
    return _clip(0.5 * math.fsum(np.abs(p - q)))


def tv_sparse_vs_pointwise(E: SparseDistribution, D: PointwiseDistribution) -> float:
    """TV between a finitely supported ``E`` and any pointwise-evaluable ``D``.

    Off the support of ``E`` the summand is ``D(x)``, so the full sum collapses to
    ``sum_{supp E} |E - D|`` plus the mass ``D`` puts outside the support.
    """
    d = D.mass_many(E.points)
    on_support = math.fsum(np.abs(E.probs - d))
    off_support = max(1.0 - math.fsum(d), 0.0)
    return _clip(0.5 * (on_support + off_support))


def tv_sparse(E: SparseDistribution, F: SparseDistribution) -> float:
    """TV between two sparse distributions over the union of their supports."""
    pts = np.unique(np.concatenate([E.points, F.points]), axis=0)
    return _clip(0.5 * math.fsum(np.abs(E.mass_many(pts) - F.mass_many(pts))))


def tv_enumerate(P: PointwiseDistribution, Q: PointwiseDistribution, space: SpaceSpec) -> float:
    """Brute-force TV summing over every point of the space."""
    pts = enumerate_points(space)
    return _clip(0.5 * math.fsum(np.abs(P.mass_many(pts) - Q.mass_many(pts))))


def tv_product_exact(
    P: ProductDistribution, Q: ProductDistribution, space: SpaceSpec | None = None
) -> float:
    space = space or P.space
    if P.space.sizes != Q.space.sizes or P.space.sizes != space.sizes:
        raise ValueError("distributions live on different spaces")
    space.require_enumerable()
    return _clip(0.5 * math.fsum(np.abs(P.joint() - Q.joint())))


def tv_product_upper_bound(P: ProductDistribution, Q: ProductDistribution) -> float:
    """Sum of marginal TVs; never below the exact TV of the products."""
    if P.space.sizes != Q.space.sizes:
        raise ValueError("dimension or cardinality mismatch")
    return math.fsum(tv_dense(p, q) for p, q in zip(P.marginals, Q.marginals))


@dataclass(frozen=True)
class Witness:
    advantage: float
    points: np.ndarray  # supp(E) ∩ {E > D}
    E_mass: float
    D_mass: float
    off_support_mass: float  # D-mass outside supp(E); never in the witness set


def witness_advantage(E: SparseDistribution, D: PointwiseDistribution) -> Witness:
    """Advantage of the optimal distinguishing event ``{x : E(x) > D(x)}``.

    Points off the support have ``E(x) = 0 <= D(x)`` and never enter the set.
    """
    d = D.mass_many(E.points)
    e = E.probs
    sel = e > d
    e_mass = math.fsum(e[sel])
    d_mass = math.fsum(d[sel])
    adv = max(e_mass - d_mass, 0.0)
    tv = tv_sparse_vs_pointwise(E, D)
    if abs(adv - tv) > 1e-9:
        raise ArithmeticError(f"witness advantage {adv} disagrees with TV {tv}")
    return Witness(adv, E.points[sel], e_mass, d_mass, max(1.0 - math.fsum(d), 0.0))
