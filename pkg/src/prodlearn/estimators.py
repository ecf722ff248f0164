"""The two estimators under comparison: ``emp`` (ERM) and ``pemp`` (PERM)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DenseDistribution,
    EmptySampleError,
    InvalidDistributionError,
    Point,
    ProductDistribution,
    SampleSet,
    SpaceSpec,
    flatten_many,
    unflatten_many,
)


@dataclass(frozen=True, eq=False)
class SparseDistribution:
    """Finitely supported distribution with atom masses ``weights / total``.

    ``emp`` stores integer counts with ``total = m`` so atom masses are the
    exact ratios ``count / m`` until they are read.
    """

    space: SpaceSpec
    points: np.ndarray
    weights: np.ndarray
    total: float

    def __post_init__(self):
        pts = self.space.validate_points(self.points)
        w = np.asarray(self.weights)
        if w.shape != (pts.shape[0],):
            raise InvalidDistributionError("one weight per atom required")
        if (w <= 0).any():
            raise InvalidDistributionError("atom masses must be positive")
        if pts.shape[0] == 0:
            raise InvalidDistributionError("empty support")
        if abs(math.fsum(w) / self.total - 1.0) > 1e-9:
            raise InvalidDistributionError("atom masses do not sum to 1")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_atoms(cls, space: SpaceSpec, atoms: dict) -> "SparseDistribution":
        pts = np.array([tuple(p) for p in atoms], dtype=np.int64).reshape(len(atoms), space.n)
        if len(np.unique(pts, axis=0)) != len(pts):
            raise InvalidDistributionError("duplicate atoms")
        return cls(space, pts, np.array(list(atoms.values()), dtype=np.float64), 1.0)

    @property
    def support_size(self) -> int:
        return self.points.shape[0]

    @property
    def probs(self) -> np.ndarray:
        return self.weights / self.total

    @property
    def atoms(self) -> dict[Point, float]:
        return {tuple(int(c) for c in p): float(q) for p, q in zip(self.points, self.probs)}

    def mass(self, x) -> float:
        x = np.asarray(self.space.validate_point(x))
        hit = np.all(self.points == x, axis=1)
        return float(self.weights[hit][0] / self.total) if hit.any() else 0.0

    def mass_many(self, points) -> np.ndarray:
        pts = self.space.validate_points(points)
        lookup = {p: q for p, q in self.atoms.items()}
        return np.array([lookup.get(tuple(int(c) for c in row), 0.0) for row in pts])

    def set_mass(self, points) -> float:
        return math.fsum(self.mass_many(points))


def _unique_rows(arr: np.ndarray, space: SpaceSpec) -> tuple[np.ndarray, np.ndarray]:
    if space.fits_index:
        flat, cnt = np.unique(flatten_many(arr, space), return_counts=True)
        return unflatten_many(flat, space), cnt
    return np.unique(arr, axis=0, return_counts=True)


def emp(S: SampleSet, space: SpaceSpec | None = None) -> SparseDistribution:
    """Uniform distribution over the samples: atom mass = count / m."""
    space = space or S.space
    if S.m == 0:
        raise EmptySampleError("emp needs at least one sample")
    pts, cnt = _unique_rows(S.array, space)
    return SparseDistribution(space, pts, cnt.astype(np.int64), S.m)


def pemp(S: SampleSet, space: SpaceSpec | None = None) -> ProductDistribution:
    """Product of the per-coordinate empirical marginals."""
    space = space or S.space
    if S.m == 0:
        raise EmptySampleError("pemp needs at least one sample")
    marginals = []
    for j, k in enumerate(space.sizes):
        freq = np.bincount(S.array[:, j], minlength=k) / S.m
        marginals.append(DenseDistribution(freq))
    return ProductDistribution(tuple(marginals), space.enumeration_cap)
