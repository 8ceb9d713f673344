import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from fedinet.distfit import (ccdf, fit, fit_lognormal, fit_powerlaw, fit_reference, model_cdf,
                             powerlaw_ks)
from fedinet.errors import FitError, ValidationError
from fedinet.testkit import geometric_sample, lognormal_sample, poisson_sample, powerlaw_sample
from fedinet.testkit.oracles import ks_scan, powerlaw_cdf


def test_ccdf_hand_cases():
    assert ccdf([1, 1, 2])["empirical"] == [(1, 1.0), (2, pytest.approx(1 / 3))]
    assert ccdf([5, 5])["empirical"] == [(5, 1.0)]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 200), min_size=1, max_size=300))
def test_ccdf_non_increasing_from_one(sample):
    pts = ccdf(sample)["empirical"]
    ys = [p for _, p in pts]
    assert ys[0] == 1.0
    assert all(b <= a for a, b in zip(ys, ys[1:]))


def test_powerlaw_recovers_alpha():
    x = powerlaw_sample(2.5, 10, 10_000, seed=11)
    res = fit_powerlaw(x, bootstrap=50, seed=1)
    assert 2.4 <= res.params["alpha"] <= 2.6
    assert res.p_value > 0.1


def test_powerlaw_fixed_xmin_and_mle():
    x = powerlaw_sample(2.2, 5, 3000, seed=3)
    res = fit_powerlaw(x, bootstrap=0, xmin=5)
    assert res.params["xmin"] == 5
    # the stationary point of the discrete log-likelihood
    a = res.params["alpha"]
    tail = x[x >= 5]
    score = -np.log(tail).sum() - tail.size * special.zeta(a, 5, ) ** -1 * (
        (special.zeta(a + 1e-6, 5) - special.zeta(a - 1e-6, 5)) / 2e-6)
    assert abs(score) / tail.size < 1e-3


def test_powerlaw_ks_is_exact_sup():
    x = powerlaw_sample(2.3, 3, 800, seed=8)
    got = powerlaw_ks(x, 2.3, 3)
    want = ks_scan(x[x >= 3], powerlaw_cdf(2.3, 3), 3, int(x.max()))
    assert got == pytest.approx(want, abs=1e-12)


def test_lognormal_interval_fit():
    x = lognormal_sample(5.5, 0.9, 10_000, seed=2)
    res = fit_lognormal(x, (51, None), bootstrap=50, seed=4)
    assert res.interval[0] == 51 and res.interval[1] == x.max()
    assert res.p_value > 0.1
    assert res.params["mu"] == pytest.approx(5.5, abs=0.1)


def test_lognormal_errors():
    with pytest.raises(FitError):
        fit_lognormal([5] * 100, (5, 5), bootstrap=0)
    with pytest.raises(FitError):
        fit_lognormal(list(range(1, 200)), (10 ** 6, 10 ** 7), bootstrap=0)
    with pytest.raises(FitError):
        fit_lognormal(list(range(1, 20)), bootstrap=0)


def test_reference_families():
    x = poisson_sample(30, 10_000, seed=5)
    res = fit_reference(x, "poisson", bootstrap=50, seed=1)
    assert res.p_value > 0.1 and res.params["mean"] == pytest.approx(30, abs=0.3)
    heavy = powerlaw_sample(2.1, 1, 10_000, seed=6)
    assert fit_reference(heavy, "exponential", bootstrap=50, seed=1).p_value < 0.1
    with pytest.raises(FitError):
        fit_reference([], "poisson", bootstrap=0)
    with pytest.raises(ValidationError):
        fit_reference([1, 2, 3], "gamma")


def test_bootstrap_is_seeded():
    x = geometric_sample(0.05, 2000, seed=1)
    a = fit(x, "exponential", bootstrap=30, seed=7)
    b = fit(x, "exponential", bootstrap=30, seed=7)
    assert a == b
    assert a.as_row()["seed"] == 7


def test_zeros_are_dropped_for_powerlaw():
    x = np.concatenate((powerlaw_sample(2.5, 1, 2000, seed=1), np.zeros(10, dtype=int)))
    res = fit_powerlaw(x, bootstrap=0)
    assert res.notes["non_positive_dropped"] == 10


def test_model_cdf_reaches_one():
    x = lognormal_sample(3, 1, 5000, seed=9)
    res = fit_lognormal(x, bootstrap=0)
    assert model_cdf(res, [x.max()])[0] == pytest.approx(1.0)
    assert model_cdf(res, [0])[0] == 0.0


def test_ccdf_includes_fitted_curves():
    x = lognormal_sample(3, 1, 5000, seed=9)
    res = fit_lognormal(x, (20, None), bootstrap=0)
    pts = ccdf(x, [res])
    curve = dict(pts["lognormal"])
    assert min(curve) == 20
    emp = dict(pts["empirical"])
    assert curve[20] == pytest.approx(emp[20])


def test_shallow_tail_resampling_does_not_overflow():
    import warnings
    x = geometric_sample(0.05, 10_000, seed=500)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        res = fit_powerlaw(x, bootstrap=20, seed=0, xmin=1)
    assert res.params["alpha"] < 1.5 and res.p_value < 0.1
