import math

import mpmath as mp
import numpy as np
import pytest
from scipy import stats

from prodlearn import SampleSet, SpaceSpec, emp, tv_sparse_vs_pointwise, uniform_product
from prodlearn.core import unflatten_many
from prodlearn.theory import (
    C1,
    BoundInapplicable,
    BoundParams,
    HypothesisViolated,
    appendix_chain_check,
    c1_constant,
    chebyshev_closed_form,
    chebyshev_failure_bound,
    distinct_sample_tv,
    erm_lower_threshold,
    folded_abs_mean_exact,
    folded_abs_mean_sum,
    folded_variance,
    folded_variance_sum,
    lemma2_bounds,
    perm_sample_bound,
    poisson_pmf,
    theory_report,
)

mp.mp.dps = 40
C1_HP = 1 / (mp.sqrt(mp.pi) * mp.e ** (mp.mpf(1) / 12))


def scipy_folded_mean(lam):
    """Truncated-sum oracle built on scipy's Poisson pmf."""
    y = np.arange(int(lam + 40 * math.sqrt(lam) + 40) + 1)
    return math.fsum(stats.poisson.pmf(y, lam) * np.abs(y - lam))


def test_c1():
    assert c1_constant() == pytest.approx(float(C1_HP), rel=1e-15)
    assert c1_constant() == pytest.approx(0.5190795, abs=5e-8)
    assert C1**2 / 16 == pytest.approx(0.016840, abs=5e-7)
    assert C1**2 / 16 < 0.017
    assert 0.5 < C1 < 1


def test_poisson_pmf():
    assert poisson_pmf(2, 0) == pytest.approx(math.exp(-2), rel=1e-14)
    assert poisson_pmf(5, 5) == pytest.approx(float(mp.e**-5 * 5**5 / mp.factorial(5)), rel=1e-13)
    assert poisson_pmf(5, 5) == pytest.approx(0.175467, abs=5e-7)
    for lam in (0.3, 3.7, 120.0):
        for y in (1, 4, 90):
            assert poisson_pmf(lam, y) / poisson_pmf(lam, y - 1) == pytest.approx(lam / y, rel=1e-12)


@pytest.mark.parametrize("lam", [0.5, 3.0, 40.0, 1e4])
def test_poisson_pmf_truncated_mass(lam):
    top = int(math.ceil(lam + 40 * math.sqrt(lam) + 40))
    assert abs(math.fsum(poisson_pmf(lam, y) for y in range(top + 1)) - 1.0) < 1e-12


@pytest.mark.parametrize("lam", [0.5, 1, 2, 2.5, math.e, 5, 10, 50, 100, 500])
def test_folded_mean_oracles(lam):
    exact = folded_abs_mean_exact(lam)
    assert exact == pytest.approx(folded_abs_mean_sum(lam), rel=1e-9)
    assert exact == pytest.approx(scipy_folded_mean(lam), rel=1e-9)
    assert folded_variance(lam) == pytest.approx(folded_variance_sum(lam), rel=1e-9)


def test_folded_mean_examples():
    assert folded_abs_mean_exact(1) == pytest.approx(2 / math.e, rel=1e-14)
    assert folded_abs_mean_exact(2) == pytest.approx(8 * math.exp(-2), rel=1e-14)
    assert folded_abs_mean_exact(50) >= C1 * math.sqrt(50)
    assert C1 * math.sqrt(50) == pytest.approx(3.67045, abs=1e-5)


def test_folded_moment_bounds():
    lo, hi = lemma2_bounds(2)
    assert lo == pytest.approx(float(C1_HP * mp.sqrt(2)), rel=1e-14)
    assert lo == pytest.approx(0.734089, abs=1e-6)
    assert hi == 2
    lo, _ = lemma2_bounds(4)
    assert lo == pytest.approx(1.038159, abs=1e-6)
    assert folded_abs_mean_exact(4) > lo
    assert folded_variance(2) == pytest.approx(2 - 1.0826822658929015**2, rel=1e-12)
    assert folded_variance(2) == pytest.approx(0.8278, abs=1e-4)
    with pytest.raises(HypothesisViolated):
        lemma2_bounds(1.99)


@pytest.mark.parametrize("lam", [2.0, 2.999, 3.0, 3.001, 100.0, 9999.5])
def test_folded_mean_chain(lam):
    rep = appendix_chain_check(lam)
    assert rep.holds
    assert all(s.margin >= 0 for s in rep.steps)
    assert rep.exact == pytest.approx(folded_abs_mean_exact(lam), rel=1e-12)
    assert rep.steps[-1].rhs == pytest.approx(C1 * math.sqrt(lam), rel=1e-12)


def test_folded_mean_chain_steps_against_mpmath():
    lam = mp.mpf("7.3")
    f = int(mp.floor(lam))
    a = 2 * mp.mpf(f) ** (f + 1) * mp.e**-f / mp.factorial(f)
    b = mp.sqrt(2 / mp.pi) * mp.sqrt(f) / mp.e ** (mp.mpf(1) / (12 * f))
    rep = appendix_chain_check(7.3)
    assert rep.steps[0].rhs == pytest.approx(float(a), rel=1e-12)
    assert rep.steps[1].rhs == pytest.approx(float(b), rel=1e-12)
    assert rep.steps[1].log_ratio == pytest.approx(float(mp.log(a / b)), rel=1e-9)


def test_folded_mean_chain_rejects_small_rate():
    with pytest.raises(HypothesisViolated):
        appendix_chain_check(1.5)


def test_chebyshev_examples():
    b = chebyshev_failure_bound(BoundParams(1024, 1638, 0.1))
    oracle = mp.mpf(1638) / (C1_HP * mp.sqrt(1638 * 1024) - 2 * 1638 * mp.mpf("0.1")) ** 2
    assert b == pytest.approx(float(oracle), rel=1e-12)
    assert b == pytest.approx(0.01379, abs=1e-5)
    assert 4 * b == pytest.approx(0.0552, abs=1e-4)

    c, N, eps = 0.016, 1024, 0.1
    b = chebyshev_failure_bound(BoundParams(N, c * N / eps**2, eps))
    assert b == pytest.approx(chebyshev_closed_form(c, N), rel=1e-9)
    assert b <= 4 / (C1**2 * N)
    assert 4 / (C1**2 * N) == pytest.approx(0.01450, abs=1e-5)


def test_chebyshev_inapplicable():
    with pytest.raises(BoundInapplicable):
        chebyshev_failure_bound(BoundParams(1024, 7000, 0.1))
    with pytest.raises(BoundInapplicable):
        chebyshev_failure_bound(BoundParams(1024, 0, 0.1))


def test_bound_params_validation():
    with pytest.raises(ValueError):
        BoundParams(0, 1, 0.1)
    with pytest.raises(ValueError):
        BoundParams(10, 1, 1.0)
    with pytest.raises(ValueError):
        BoundParams(10, 1, 0.1, delta=0)
    assert BoundParams(1024, 2048, 0.1).lam == 2.0


def test_erm_threshold():
    assert erm_lower_threshold(1024, 0.1, 0.016) == 1638
    assert erm_lower_threshold(1024, 0.5, 0.016) == 65
    with pytest.raises(ValueError):
        erm_lower_threshold(1024, 0.1, 0.017)
    with pytest.raises(ValueError):
        erm_lower_threshold(1024, 0.1, 0.0)
    # strictly below c N / eps^2 even when that is an integer
    assert erm_lower_threshold(1000, 0.5, 0.01) == 39


def test_perm_bound():
    assert perm_sample_bound(5, 4, 0.1, 0.1, 1) == 4606
    assert perm_sample_bound(5, 4, 0.1, 1 - 1e-12, 1) <= 1
    assert perm_sample_bound(10, 4, 0.1, 0.1, 1) == pytest.approx(2 * 4605.17, abs=1)
    with pytest.raises(ValueError):
        perm_sample_bound(5, 4, 0.1, 0.1, 0)


def _distinct_tv(m, N, k=4):
    n = round(math.log(N, k))
    space = SpaceSpec.uniform(n, k)
    idx = np.random.default_rng(m).choice(N, size=m, replace=False)
    E = emp(SampleSet(space, unflatten_many(idx, space)))
    return tv_sparse_vs_pointwise(E, uniform_product(space))


def test_distinct_sample_tv():
    assert distinct_sample_tv(1024, 1024) == 0.0
    assert distinct_sample_tv(256, 1024) == 0.75
    assert _distinct_tv(256, 1024) == pytest.approx(0.75, abs=1e-12)
    assert distinct_sample_tv(1, 1024) == 1023 / 1024
    assert _distinct_tv(1, 1024) == pytest.approx(1023 / 1024, abs=1e-12)
    assert distinct_sample_tv(1, 1024) >= 0.5 * (1 - 1 / 1024)
    for m in range(1, 65):
        assert distinct_sample_tv(m, 64) >= 0.5 * (1 - m / 64)
    with pytest.raises(ValueError):
        distinct_sample_tv(1025, 1024)


def test_theory_report_fields():
    r = theory_report(1024, 1638, 0.1, n=5, k=4)
    assert r["erm_lower_threshold"] == 1638
    assert r["perm_sample_bound"] == 4606
    assert r["emp_success_upper_bound"] == pytest.approx(0.05515, abs=1e-4)
    assert "folded_moment_bounds" not in r
    r = theory_report(1024, 4096, 0.1)
    assert r["folded_mean_chain"]["holds"]
    r = theory_report(1024, 100000, 0.1)
    assert r["chebyshev_failure_bound"] is None


@pytest.mark.parametrize("lam", [1, 2, 7, 2.5, 300.0])
def test_vectorised_pmf_matches_scalar(lam):
    from prodlearn.theory import poisson_pmf_array, truncation_point

    y = np.arange(truncation_point(lam) + 1)
    vec = poisson_pmf_array(lam, y)
    ref = np.array([poisson_pmf(lam, int(v)) for v in y])
    np.testing.assert_allclose(vec, ref, rtol=1e-12, atol=0)
