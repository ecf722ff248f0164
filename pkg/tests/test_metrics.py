import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from prodlearn import (
    DenseDistribution,
    EnumerationUnsupported,
    ProductDistribution,
    SampleSet,
    SpaceSpec,
    SparseDistribution,
    draw_samples,
    emp,
    pemp,
    tv_dense,
    tv_product_exact,
    tv_product_upper_bound,
    tv_sparse,
    tv_sparse_vs_pointwise,
    uniform_product,
    witness_advantage,
)
from prodlearn.metrics import tv_enumerate

from conftest import all_points, random_product


def brute_tv(f, g, sizes):
    """Pure-python oracle: half the L1 distance summed over every point."""
    return 0.5 * math.fsum(abs(f(x) - g(x)) for x in all_points(sizes))


def test_tv_dense_examples():
    p = DenseDistribution([0.2, 0.3, 0.5])
    assert tv_dense(p, p) == 0.0
    assert tv_dense(DenseDistribution([1, 0]), DenseDistribution([0, 1])) == 1.0
    assert tv_dense(DenseDistribution([0.5, 0.5]), DenseDistribution([1, 0])) == 0.5
    with pytest.raises(ValueError):
        tv_dense(DenseDistribution([1.0]), DenseDistribution([0.5, 0.5]))


def _dist(size):
    return arrays(np.float64, size, elements=st.floats(0, 1)).filter(lambda a: a.sum() > 1e-3).map(
        lambda a: DenseDistribution(a / a.sum())
    )


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8).flatmap(lambda k: st.tuples(_dist(k), _dist(k), _dist(k))))
def test_tv_metric_axioms(triple):
    p, q, r = triple
    assert tv_dense(p, q) == tv_dense(q, p)
    assert 0.0 <= tv_dense(p, q) <= 1.0 + 1e-12
    assert tv_dense(p, p) == 0.0
    assert tv_dense(p, r) <= tv_dense(p, q) + tv_dense(q, r) + 1e-12


def test_tv_sparse_examples():
    space = SpaceSpec.uniform(2, 2)
    D = ProductDistribution(([1.0, 0.0], [0.0, 1.0]))
    E = SparseDistribution.from_atoms(space, {(0, 1): 1.0})
    assert tv_sparse_vs_pointwise(E, D) == 0.0

    space = SpaceSpec.uniform(5, 4)
    U = uniform_product(space)
    pts = [tuple(int(c) for c in np.unravel_index(i, (4,) * 5)) for i in range(0, 1024, 4)]
    E = emp(SampleSet.from_points(pts, space))
    assert tv_sparse_vs_pointwise(E, U) == pytest.approx(0.75, abs=1e-12)
    assert tv_enumerate(E, U, space) == pytest.approx(0.75, abs=1e-12)

    space = SpaceSpec.uniform(2, 2)
    E = SparseDistribution.from_atoms(space, {(0, 0): 0.5, (0, 1): 0.5})
    U = uniform_product(space)
    assert tv_sparse_vs_pointwise(E, U) == pytest.approx(0.5, abs=1e-15)
    assert brute_tv(E.mass, U.mass, space.sizes) == pytest.approx(0.5, abs=1e-15)


def test_tv_sparse_vs_dense_pointwise():
    # a correlated D given densely over the flattened space
    space = SpaceSpec((3, 3))
    rng = np.random.default_rng(0)
    w = rng.random(9)
    D = DenseDistribution(w / w.sum(), space)
    E = SparseDistribution.from_atoms(space, {(0, 0): 0.3, (2, 1): 0.7})
    assert tv_sparse_vs_pointwise(E, D) == pytest.approx(brute_tv(E.mass, D.mass, space.sizes), abs=1e-12)


def test_tv_between_sparse():
    space = SpaceSpec.uniform(2, 3)
    E = SparseDistribution.from_atoms(space, {(0, 0): 0.5, (1, 1): 0.5})
    F = SparseDistribution.from_atoms(space, {(1, 1): 0.25, (2, 2): 0.75})
    assert tv_sparse(E, F) == pytest.approx(brute_tv(E.mass, F.mass, space.sizes), abs=1e-15)
    assert tv_sparse(E, E) == 0.0


def test_tv_product_examples():
    u, v = [0.5, 0.5], [1.0, 0.0]
    P, Q = ProductDistribution((u, u)), ProductDistribution((u, v))
    assert tv_product_exact(P, P) == 0.0
    assert tv_product_exact(P, Q) == pytest.approx(0.5, abs=1e-15)
    assert tv_product_upper_bound(P, Q) == pytest.approx(0.5, abs=1e-15)
    R = ProductDistribution((v, v))
    assert tv_product_exact(P, R) == pytest.approx(0.75, abs=1e-15)
    assert brute_tv(P.mass, R.mass, (2, 2)) == pytest.approx(0.75, abs=1e-15)
    assert tv_product_upper_bound(P, R) == pytest.approx(1.0, abs=1e-15)
    assert tv_product_upper_bound(P, P) == 0.0


def test_tv_product_exact_refuses_large_space():
    P = uniform_product(SpaceSpec.uniform(30, 4))
    with pytest.raises(EnumerationUnsupported):
        tv_product_exact(P, P)
    assert tv_product_upper_bound(P, P) == 0.0


def test_tv_product_dimension_mismatch():
    with pytest.raises(ValueError):
        tv_product_upper_bound(uniform_product(SpaceSpec((2, 3))), uniform_product(SpaceSpec((3, 2))))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31), st.lists(st.integers(1, 5), min_size=1, max_size=4))
def test_subadditivity(seed, sizes):
    rng = np.random.default_rng(seed)
    P, Q = random_product(rng, sizes), random_product(rng, sizes)
    exact = tv_product_exact(P, Q)
    assert exact == pytest.approx(brute_tv(P.mass, Q.mass, sizes), abs=1e-12)
    assert tv_product_upper_bound(P, Q) >= exact - 1e-12


def test_witness_examples():
    space = SpaceSpec.uniform(2, 2)
    E = SparseDistribution.from_atoms(space, {x: 0.25 for x in all_points((2, 2))})
    w = witness_advantage(E, uniform_product(space))
    assert w.advantage == 0.0 and len(w.points) == 0

    space = SpaceSpec.uniform(5, 4)
    E = emp(SampleSet.from_points(
        [tuple(int(c) for c in np.unravel_index(i, (4,) * 5)) for i in range(256)], space))
    w = witness_advantage(E, uniform_product(space))
    assert w.advantage == pytest.approx(0.75, abs=1e-12)
    assert len(w.points) == 256
    assert w.E_mass == pytest.approx(1.0) and w.D_mass == pytest.approx(0.25)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 200))
def test_witness_equals_tv(seed, m):
    rng = np.random.default_rng(seed)
    D = random_product(rng, (3, 4, 2))
    E = emp(draw_samples(D, m, seed=seed))
    w = witness_advantage(E, D)
    assert w.advantage == pytest.approx(tv_sparse_vs_pointwise(E, D), abs=1e-12)
    # the witness set really achieves the advantage as an event
    sel = {tuple(p) for p in w.points.tolist()}
    e_a = math.fsum(E.mass(x) for x in sel)
    d_a = math.fsum(D.mass(x) for x in sel)
    assert e_a - d_a == pytest.approx(w.advantage, abs=1e-12)


def test_emp_vs_pemp_shares_code_path(rng):
    D = random_product(rng, (3, 3, 3))
    S = draw_samples(D, 50, seed=1)
    E, P = emp(S), pemp(S)
    assert tv_sparse_vs_pointwise(E, P) == pytest.approx(brute_tv(E.mass, P.mass, (3, 3, 3)), abs=1e-12)
