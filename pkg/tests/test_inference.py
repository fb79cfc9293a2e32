import math

import numpy as np
import pytest
from scipy import stats

from hetmed import (
    GammaAggregate, InputError, NumericalError, SlopeFit, acme, aggregate_gamma, analyze, conservative_ci,
    heterogeneity_stats, iu_test, ols_slope, polynomial_fit,
)
from hetmed.inference import polynomial_acme, subgroup_intervals

from conftest import make_dataset

Q_PROB = (1 + math.sqrt(0.95)) / 2


def fit_with(beta, se, df=None, p_value=None):
    return SlopeFit(beta, se, 0.0, "naive_ols", df=df, p_value=p_value)


def agg_from_p(p, gamma0=1.0):
    # aggregate whose normal two-sided p-value is p
    z = stats.norm.isf(p / 2)
    return GammaAggregate(gamma0, (gamma0 / z) ** 2, 3)


# --- aggregation -----------------------------------------------------------

def test_aggregate_constant():
    agg = aggregate_gamma(gamma_hat=[1, 1, 1], se_gamma=[1, 2, 3], weights=[0.2, 0.3, 0.5])
    assert agg.gamma0_hat == pytest.approx(1.0)


def test_aggregate_hand_example():
    agg = aggregate_gamma(gamma_hat=[0, 2], se_gamma=[1, 1], weights=[0.5, 0.5])
    assert agg.gamma0_hat == 1.0
    assert agg.var_gamma0 == 0.5


def test_aggregate_from_dataset_no_noise():
    ds = make_dataset([1, 2, 3], [1, 1, 1], n=[1, 1, 2])
    agg = aggregate_gamma(ds)
    assert agg.var_gamma0 == 0.0
    assert agg.gamma0_hat == pytest.approx(0.25 + 0.5 + 1.5)


# --- intersection-union test ----------------------------------------------

def test_iu_rejects_when_both_small():
    res = iu_test(fit_with(1.0, 1.0, p_value=0.03), agg_from_p(0.04), 0.05)
    assert res.reject
    assert res.p_overall == pytest.approx(0.04, abs=1e-12)


def test_iu_no_rejection():
    res = iu_test(fit_with(1.0, 1.0, p_value=0.03), agg_from_p(0.20), 0.05)
    assert not res.reject
    assert res.p_overall == pytest.approx(0.20, abs=1e-12)


def test_iu_zero_beta_never_rejects():
    res = iu_test(fit_with(0.0, 0.3), agg_from_p(1e-8), 0.5)
    assert res.p_beta == 1.0
    assert not res.reject


def test_iu_uses_sd_not_variance():
    agg = GammaAggregate(2.0, 4.0, 5)  # z = 2 / sqrt(4) = 1
    res = iu_test(fit_with(1.0, 0.1), agg)
    assert res.p_gamma == pytest.approx(2 * stats.norm.sf(1.0), rel=1e-12)


def test_iu_t_reference_for_regression_fits():
    res = iu_test(fit_with(2.0, 1.0, df=4), GammaAggregate(1.0, 0.01, 6))
    assert res.p_beta == pytest.approx(2 * stats.t.sf(2.0, 4), rel=1e-10)


def test_iu_degenerate():
    with pytest.raises(NumericalError, match="degenerate test"):
        iu_test(fit_with(1.0, 0.0), GammaAggregate(1.0, 1.0, 3))
    with pytest.raises(NumericalError, match="degenerate test"):
        iu_test(fit_with(1.0, 1.0), GammaAggregate(1.0, 0.0, 3))


def test_iu_alpha_one_always_rejects():
    assert iu_test(fit_with(0.1, 10.0), GammaAggregate(0.1, 10.0, 3), alpha=1.0).reject


# --- conservative interval ---------------------------------------------------

def intervals(b_lo, b_hi, g_lo, g_hi):
    q = stats.norm.ppf(Q_PROB)
    fit = fit_with((b_lo + b_hi) / 2, (b_hi - b_lo) / 2 / q)
    agg = GammaAggregate((g_lo + g_hi) / 2, ((g_hi - g_lo) / 2 / q) ** 2, 5)
    return fit, agg


def test_ci_modes_diverge():
    fit, agg = intervals(1, 2, 3, 4)
    lo, hi = conservative_ci(fit, agg, 0.05, "endpoint_product")
    assert (lo, hi) == (pytest.approx(3.0), pytest.approx(8.0))
    lo, hi = conservative_ci(fit, agg, 0.05, "paper_literal")
    assert (lo, hi) == (pytest.approx(1.0), pytest.approx(4.0))


def test_ci_degenerate_point_mass():
    fit = fit_with(0.0, 0.0)
    agg = GammaAggregate(1.0, 0.5, 3)
    assert conservative_ci(fit, agg, mode="endpoint_product") == (0.0, 0.0)
    agg0 = GammaAggregate(0.0, 0.0, 3)
    for mode in ("endpoint_product", "paper_literal"):
        assert conservative_ci(fit, agg0, mode=mode) == (0.0, 0.0)


def test_ci_symmetric():
    fit, agg = intervals(-1, 1, -1, 1)
    lo, hi = conservative_ci(fit, agg)
    assert lo == pytest.approx(-1.0)
    assert hi == pytest.approx(1.0)


def test_ci_quantile_level():
    # half-width uses the normal quantile at (1 + sqrt(1 - alpha)) / 2
    fit = fit_with(5.0, 1.0)
    agg = GammaAggregate(0.0, 1e-300, 3)
    lo, hi = conservative_ci(fit, agg, 0.05, "paper_literal")
    assert hi == pytest.approx(5.0 + stats.norm.ppf(Q_PROB), rel=1e-12)


def test_ci_alpha_bounds():
    with pytest.raises(InputError):
        conservative_ci(fit_with(1, 1), GammaAggregate(1, 1, 3), alpha=0.6)
    with pytest.raises(InputError):
        conservative_ci(fit_with(1, 1), GammaAggregate(1, 1, 3), mode="bogus")


# --- ACME ------------------------------------------------------------------

def test_acme_products():
    assert acme(fit_with(2.0, 1.0), GammaAggregate(0.5, 0.1, 3)) == 1.0
    assert acme(fit_with(0.0, 1.0), GammaAggregate(0.5, 0.1, 3)) == 0.0


def test_polynomial_acme_hand_example():
    assert polynomial_acme((1.0, 1.0, 0.0), [1.0, 2.0], [0.5, 0.5]) == pytest.approx(4.0)


def test_acme_uses_polynomial_slope():
    g = np.array([0.5, 1.0, 1.5, 2.0, 2.5, 3.0])
    ds = make_dataset(g, (1 + g) * g + 0.3)
    fit = polynomial_fit(ds, 2)
    want = polynomial_acme((1.0, 1.0, 0.0), g, ds.weights)
    assert acme(fit, aggregate_gamma(ds), ds) == pytest.approx(want, rel=1e-8)
    with pytest.raises(InputError):
        acme(fit, aggregate_gamma(ds))


# --- heterogeneity ---------------------------------------------------------

def test_heterogeneity_no_spread():
    h = heterogeneity_stats(gamma_hat=[2, 2, 2], se_gamma=[1, 2, 3])
    assert h.Q == 0.0
    assert h.I2 == 0.0
    assert h.df == 2


def test_heterogeneity_hand_example():
    h = heterogeneity_stats(gamma_hat=[0, 2], se_gamma=[1, 1])
    assert h.Q == pytest.approx(2.0)
    assert h.df == 1
    assert h.I2 == pytest.approx(0.5)
    assert h.p_Q == pytest.approx(stats.chi2.sf(2.0, 1), abs=1e-12)


def test_heterogeneity_errors():
    with pytest.raises(InputError, match="insufficient subgroups"):
        heterogeneity_stats(gamma_hat=[1.0], se_gamma=[1.0])
    with pytest.raises(NumericalError, match="infinite weight"):
        heterogeneity_stats(gamma_hat=[1.0, 2.0], se_gamma=[1.0, 0.0])


# --- full analysis ---------------------------------------------------------

def test_analyze_consistency(noisy_dataset):
    fit = ols_slope(noisy_dataset.gamma_hat, noisy_dataset.tau_hat)
    res = analyze(noisy_dataset, fit)
    assert res.p_overall == max(res.p_beta, res.p_gamma)
    assert res.ci_lower <= res.acme_hat <= res.ci_upper
    assert res.acme_hat == fit.beta_hat * res.gamma_agg.gamma0_hat
    assert 0 <= res.heterogeneity.I2 <= 1
    assert res.reject == (res.p_overall <= 0.05)


def test_analyze_zero_se_skips_heterogeneity():
    ds = make_dataset([1, 2, 4], [2, 3, 9], se_gamma=[0.5, 0.0, 0.5], se_tau=0.5)
    res = analyze(ds, ols_slope(ds.gamma_hat, ds.tau_hat))
    assert res.heterogeneity is None


def test_analyze_all_exact_gamma_is_degenerate():
    ds = make_dataset([1, 2, 4], [2, 3, 9], se_tau=0.5)
    with pytest.raises(NumericalError, match="degenerate test"):
        analyze(ds, ols_slope(ds.gamma_hat, ds.tau_hat))


def test_subgroup_intervals(noisy_dataset):
    fit = ols_slope(noisy_dataset.gamma_hat, noisy_dataset.tau_hat)
    rows = subgroup_intervals(fit, noisy_dataset)
    assert len(rows) == noisy_dataset.K
    for gid, est, lo, hi in rows:
        assert lo <= est <= hi
