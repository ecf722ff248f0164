"""Empirical (ERM) and product-empirical (PERM) density estimation on finite product spaces."""

from .core import (
    DenseDistribution,
    EmptySampleError,
    EnumerationUnsupported,
    InvalidDistributionError,
    InvalidPointError,
    ProductDistribution,
    SampleSet,
    SpaceSpec,
    counts,
    draw_samples,
    flatten_index,
    mass,
    unflatten_index,
    uniform_product,
)
from .estimators import SparseDistribution, emp, pemp
from .metrics import (
    tv_dense,
    tv_product_exact,
    tv_product_upper_bound,
    tv_sparse,
    tv_sparse_vs_pointwise,
    witness_advantage,
)
from .seeding import derive_trial_seed

__version__ = "0.1.0"
