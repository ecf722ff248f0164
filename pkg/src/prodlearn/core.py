"""Finite product spaces, distributions over them, and seeded sampling.

A point of an n-dimensional space is a tuple of coordinate indices, coordinate
``j`` in ``[0, k_j)``.  Batches of points are ``(m, n)`` integer arrays.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

MAX_INDEX = 2**63 - 1
DEFAULT_ENUMERATION_CAP = 1 << 22
NORM_TOL = 1e-9
RENORM_TOL = 1e-6


class ProdLearnError(Exception):
    """Base class for library errors."""


class InvalidPointError(ProdLearnError, ValueError):
    pass


class InvalidDistributionError(ProdLearnError, ValueError):
    pass


class EnumerationUnsupported(ProdLearnError):
    """Raised when an operation needs to enumerate a space that is too large."""


class EmptySampleError(ProdLearnError, ValueError):
    pass


Point = tuple[int, ...]


@dataclass(frozen=True)
class SpaceSpec:
    sizes: tuple[int, ...]
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP

    def __post_init__(self):
        sizes = tuple(int(k) for k in self.sizes)
        if len(sizes) < 1:
            raise ValueError("a space needs at least one dimension")
        if any(k < 1 for k in sizes):
            raise ValueError(f"every cardinality must be >= 1, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @classmethod
    def uniform(cls, n: int, k: int, **kwargs) -> "SpaceSpec":
        return cls((k,) * n, **kwargs)

    @property
    def n(self) -> int:
        return len(self.sizes)

    def total_size(self) -> int:
        # python ints do not overflow; callers compare against MAX_INDEX
        return math.prod(self.sizes)

    @property
    def fits_index(self) -> bool:
        return self.total_size() <= MAX_INDEX

    @property
    def enumerable(self) -> bool:
        return self.fits_index and self.total_size() <= self.enumeration_cap

    def require_enumerable(self) -> int:
        total = self.total_size()
        if not self.fits_index:
            raise EnumerationUnsupported(f"space of size {total} overflows a 64-bit index")
        if total > self.enumeration_cap:
            raise EnumerationUnsupported(
                f"space of size {total} exceeds enumeration cap {self.enumeration_cap}"
            )
        return total

    def validate_point(self, x: Sequence[int]) -> Point:
        x = tuple(int(c) for c in x)
        if len(x) != self.n:
            raise InvalidPointError(f"point has {len(x)} coordinates, space has {self.n}")
        for j, (c, k) in enumerate(zip(x, self.sizes)):
            if not 0 <= c < k:
                raise InvalidPointError(f"coordinate {j} = {c} outside [0, {k})")
        return x

    def validate_points(self, points) -> np.ndarray:
        arr = np.asarray(points, dtype=np.int64)
        if arr.size == 0:
            return arr.reshape(0, self.n)
        if arr.ndim != 2 or arr.shape[1] != self.n:
            raise InvalidPointError(f"expected an (m, {self.n}) array of points, got {arr.shape}")
        if (arr < 0).any() or (arr >= np.asarray(self.sizes)).any():
            raise InvalidPointError("point coordinates out of range")
        return arr

    def to_json(self) -> dict:
        return {"sizes": list(self.sizes), "enumeration_cap": self.enumeration_cap}

    @classmethod
    def from_json(cls, obj: dict) -> "SpaceSpec":
        return cls(tuple(obj["sizes"]), int(obj.get("enumeration_cap", DEFAULT_ENUMERATION_CAP)))


def _radix_weights(space: SpaceSpec) -> np.ndarray:
    # dimension 0 is the most significant digit
    w = np.ones(space.n, dtype=np.int64)
    for j in range(space.n - 2, -1, -1):
        w[j] = w[j + 1] * space.sizes[j + 1]
    return w


def flatten_index(x: Sequence[int], space: SpaceSpec) -> int:
    """Mixed-radix index of ``x`` with dimension 0 most significant."""
    if not space.fits_index:
        raise EnumerationUnsupported("space size overflows a 64-bit index")
    x = space.validate_point(x)
    idx = 0
    for c, k in zip(x, space.sizes):
        idx = idx * k + c
    return idx


def unflatten_index(idx: int, space: SpaceSpec) -> Point:
    if not space.fits_index:
        raise EnumerationUnsupported("space size overflows a 64-bit index")
    idx = int(idx)
    if not 0 <= idx < space.total_size():
        raise InvalidPointError(f"index {idx} outside [0, {space.total_size()})")
    coords = []
    for k in reversed(space.sizes):
        idx, c = divmod(idx, k)
        coords.append(c)
    return tuple(reversed(coords))


def flatten_many(points: np.ndarray, space: SpaceSpec) -> np.ndarray:
    if not space.fits_index:
        raise EnumerationUnsupported("space size overflows a 64-bit index")
    points = np.asarray(points, dtype=np.int64).reshape(-1, space.n)
    return points @ _radix_weights(space)


def unflatten_many(idx: np.ndarray, space: SpaceSpec) -> np.ndarray:
    if not space.fits_index:
        raise EnumerationUnsupported("space size overflows a 64-bit index")
    idx = np.asarray(idx, dtype=np.int64).copy()
    out = np.empty((idx.size, space.n), dtype=np.int64)
    for j in range(space.n - 1, -1, -1):
        idx, out[:, j] = np.divmod(idx, space.sizes[j])
    return out


def enumerate_points(space: SpaceSpec) -> np.ndarray:
    """All points of the space in flat-index order."""
    total = space.require_enumerable()
    return unflatten_many(np.arange(total, dtype=np.int64), space)


def _checked_probs(probs) -> np.ndarray:
    p = np.array(probs, dtype=np.float64).ravel()
    if p.size == 0:
        raise InvalidDistributionError("a distribution needs at least one point")
    if not np.all(np.isfinite(p)) or (p < 0).any():
        raise InvalidDistributionError("probabilities must be finite and non-negative")
    total = math.fsum(p)
    if abs(total - 1.0) > RENORM_TOL:
        raise InvalidDistributionError(f"probabilities sum to {total}, not 1")
    if abs(total - 1.0) > NORM_TOL:
        p = p / total
    p.setflags(write=False)
    return p


@dataclass(frozen=True, eq=False)
class DenseDistribution:
    """A distribution on ``K`` points given by its full probability vector.

    With ``space`` set, the vector is indexed by flat index over that space and
    the distribution can be evaluated at points of it.
    """

    probs: np.ndarray
    space: SpaceSpec | None = None

    def __post_init__(self):
        object.__setattr__(self, "probs", _checked_probs(self.probs))
        if self.space is not None and self.space.total_size() != self.probs.size:
            raise InvalidDistributionError(
                f"{self.probs.size} probabilities for a space of size {self.space.total_size()}"
            )

    @property
    def size(self) -> int:
        return self.probs.size

    @classmethod
    def uniform(cls, size: int) -> "DenseDistribution":
        return cls(np.full(size, 1.0 / size))

    def _flat(self, points) -> np.ndarray:
        if self.space is not None:
            return flatten_many(self.space.validate_points(points), self.space)
        idx = np.asarray(points, dtype=np.int64).reshape(-1)
        if (idx < 0).any() or (idx >= self.size).any():
            raise InvalidPointError("index out of range")
        return idx

    def mass(self, x) -> float:
        return float(self.probs[self._flat([x])[0]])

    def mass_many(self, points) -> np.ndarray:
        return self.probs[self._flat(points)]

    def set_mass(self, points) -> float:
        """Total mass of a finite set of distinct points."""
        return math.fsum(self.mass_many(points))

    def to_json(self) -> dict:
        obj = {"probs": self.probs.tolist()}
        if self.space is not None:
            obj["space"] = self.space.to_json()
        return obj


@dataclass(frozen=True, eq=False)
class ProductDistribution:
    marginals: tuple[DenseDistribution, ...]
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP
    space: SpaceSpec = field(init=False)

    def __post_init__(self):
        margs = tuple(
            m if isinstance(m, DenseDistribution) else DenseDistribution(m) for m in self.marginals
        )
        if not margs:
            raise InvalidDistributionError("a product needs at least one marginal")
        object.__setattr__(self, "marginals", margs)
        object.__setattr__(
            self, "space", SpaceSpec(tuple(m.size for m in margs), self.enumeration_cap)
        )

    @classmethod
    def from_marginals(cls, marginals: Iterable, space: SpaceSpec | None = None):
        dist = cls(tuple(marginals), space.enumeration_cap if space else DEFAULT_ENUMERATION_CAP)
        if space is not None and dist.space.sizes != space.sizes:
            raise InvalidDistributionError(
                f"marginal sizes {dist.space.sizes} do not match space {space.sizes}"
            )
        return dist

    @property
    def n(self) -> int:
        return len(self.marginals)

    def mass(self, x) -> float:
        x = self.space.validate_point(x)
        return math.prod(float(m.probs[c]) for m, c in zip(self.marginals, x))

    def mass_many(self, points) -> np.ndarray:
        pts = self.space.validate_points(points)
        out = np.ones(pts.shape[0])
        for j, marg in enumerate(self.marginals):
            out *= marg.probs[pts[:, j]]
        return out

    def set_mass(self, points) -> float:
        return math.fsum(self.mass_many(points))

    def joint(self) -> np.ndarray:
        """Full mass vector in flat-index order."""
        self.space.require_enumerable()
        out = np.ones(1)
        for marg in self.marginals:
            out = np.kron(out, marg.probs)
        return out

    def to_dense(self) -> DenseDistribution:
        return DenseDistribution(self.joint(), self.space)

    def to_json(self) -> dict:
        return {"marginals": [m.probs.tolist() for m in self.marginals]}

    @classmethod
    def from_json(cls, obj: dict) -> "ProductDistribution":
        cap = int(obj.get("enumeration_cap", DEFAULT_ENUMERATION_CAP))
        dist = cls(tuple(DenseDistribution(p) for p in obj["marginals"]), cap)
        if "space" in obj and tuple(obj["space"]["sizes"]) != dist.space.sizes:
            raise InvalidDistributionError("marginal sizes disagree with the declared space")
        return dist


def uniform_product(space: SpaceSpec) -> ProductDistribution:
    return ProductDistribution(
        tuple(DenseDistribution.uniform(k) for k in space.sizes), space.enumeration_cap
    )


def mass(dist: ProductDistribution, x: Sequence[int]) -> float:
    return dist.mass(x)


@dataclass(frozen=True, eq=False)
class SampleSet:
    """``m`` i.i.d. draws stored as an ``(m, n)`` index array."""

    space: SpaceSpec
    array: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        arr = self.space.validate_points(self.array)
        arr.setflags(write=False)
        object.__setattr__(self, "array", arr)

    @classmethod
    def from_points(cls, points: Iterable[Sequence[int]], space: SpaceSpec, seed=None):
        pts = [tuple(p) for p in points]
        return cls(space, np.array(pts, dtype=np.int64).reshape(len(pts), space.n), seed)

    @property
    def m(self) -> int:
        return self.array.shape[0]

    def __len__(self) -> int:
        return self.m

    @property
    def points(self) -> list[Point]:
        return [tuple(int(c) for c in row) for row in self.array]


def draw_samples(dist: ProductDistribution, m: int, seed: int) -> SampleSet:
    """Draw ``m`` points, each coordinate by inverse CDF on its own marginal."""
    if m < 0:
        raise ValueError("m must be non-negative")
    rng = np.random.default_rng(seed)
    u = rng.random((m, dist.n))
    out = np.empty((m, dist.n), dtype=np.int64)
    for j, marg in enumerate(dist.marginals):
        cdf = np.cumsum(marg.probs)
        cdf[-1] = 1.0
        col = np.searchsorted(cdf, u[:, j], side="right")
        # zero-mass trailing values are never selected
        out[:, j] = np.minimum(col, marg.size - 1)
    return SampleSet(dist.space, out, seed)


def counts(S: SampleSet, space: SpaceSpec | None = None) -> dict[Point, int]:
    if space is not None and space.sizes != S.space.sizes:
        raise InvalidPointError("sample set belongs to a different space")
    return dict(Counter(S.points))


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())


def load_distribution(path) -> ProductDistribution | DenseDistribution:
    obj = load_json(path)
    if "marginals" in obj:
        return ProductDistribution.from_json(obj)
    if "probs" in obj:
        space = SpaceSpec.from_json(obj["space"]) if "space" in obj else None
        return DenseDistribution(obj["probs"], space)
    raise InvalidDistributionError(f"{path}: expected a 'marginals' or 'probs' key")
