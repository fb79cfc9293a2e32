import math

import numpy as np
import pytest
from scipy import optimize

from hetmed import (
    InputError, NumericalError, SimexConfig, adjusted_fit, attenuation_corrected, attenuation_lambda,
    bces_bootstrap, bces_estimate, estimate_slope, inter_study_variance, ols_slope,
    polynomial_fit, simex_estimate,
)

from conftest import make_dataset


# --- naive OLS -------------------------------------------------------------

def test_ols_exact_linear():
    fit = ols_slope([1, 2, 3], [2, 4, 6])
    assert fit.beta_hat == pytest.approx(2.0, abs=1e-14)
    assert fit.intercept_hat == pytest.approx(0.0, abs=1e-14)
    assert fit.method == "naive_ols"


def test_ols_exact_affine():
    fit = ols_slope([1, 2, 3], [5, 7, 9])
    assert fit.beta_hat == pytest.approx(2.0, abs=1e-14)
    assert fit.intercept_hat == pytest.approx(3.0, abs=1e-14)


def test_ols_hand_example():
    # oracle: numpy's least-squares polynomial fit
    slope, intercept = np.polyfit([1, 2, 3], [2, 4, 7], 1)
    fit = ols_slope([1, 2, 3], [2, 4, 7])
    assert fit.beta_hat == pytest.approx(2.5, abs=1e-12)
    assert fit.beta_hat == pytest.approx(slope, abs=1e-12)
    # ybar - beta * xbar = 13/3 - 5
    assert fit.intercept_hat == pytest.approx(-2 / 3, abs=1e-12)
    assert fit.intercept_hat == pytest.approx(intercept, abs=1e-12)


def test_ols_hc1_against_statsmodels():
    sm = pytest.importorskip("statsmodels.api")
    rng = np.random.default_rng(5)
    x = rng.normal(size=25)
    y = 1 + 0.7 * x + rng.normal(size=25) * (1 + np.abs(x))
    ref = sm.OLS(y, sm.add_constant(x)).fit(cov_type="HC1")
    fit = ols_slope(x, y)
    assert fit.beta_hat == pytest.approx(ref.params[1], rel=1e-12)
    assert fit.se_beta == pytest.approx(ref.bse[1], rel=1e-10)
    assert fit.df == 23


def test_ols_degenerate_regressor():
    with pytest.raises(NumericalError, match="degenerate regressor"):
        ols_slope([1, 1, 1], [1, 2, 3])


def test_ols_needs_three_points():
    with pytest.raises(InputError, match="insufficient subgroups"):
        ols_slope([1, 2], [1, 2])


# --- attenuation -------------------------------------------------------------

def test_attenuation_lambda_examples():
    assert attenuation_lambda(3.0, [1.0, 1.0]) == pytest.approx(0.75)
    assert attenuation_lambda(3.0, np.sqrt([0.5, 1.5])) == pytest.approx(0.75)
    assert attenuation_lambda(2.0, [0.0, 0.0, 0.0]) == 1.0
    with pytest.raises(NumericalError, match="zero signal variance"):
        attenuation_lambda(0.0, [1.0])


def test_dl_examples():
    assert inter_study_variance([0, 2, 1], se=[1, 1, 1]) == pytest.approx(0.0, abs=1e-15)
    assert inter_study_variance([3, 3, 3], se=[1, 2, 3]) == 0.0
    assert inter_study_variance([0, 4, 8], se=[1, 1, 1]) == pytest.approx(15.0, abs=1e-12)


def test_dl_infinite_weight():
    with pytest.raises(NumericalError, match="infinite weight"):
        inter_study_variance([0, 1, 2], se=[1, 0, 1])


def test_paule_mandel_solves_moment_equation():
    rng = np.random.default_rng(8)
    y = rng.normal(0, 2, 15)
    s = rng.uniform(0.5, 1.5, 15)

    def q_gen(t2):
        w = 1 / (s**2 + t2)
        mu = np.dot(w, y) / w.sum()
        return float(np.dot(w, (y - mu) ** 2)) - (y.size - 1)

    oracle = optimize.brentq(q_gen, 0, 100, xtol=1e-14)
    assert inter_study_variance(y, "paule_mandel", se=s) == pytest.approx(oracle, abs=1e-7)


def test_paule_mandel_homogeneous_is_zero():
    assert inter_study_variance([1.0, 1.1, 0.9], "paule_mandel", se=[1, 1, 1]) == 0.0


def test_paule_mandel_no_convergence_trace():
    rng = np.random.default_rng(1)
    y, s = rng.normal(0, 3, 10), rng.uniform(0.5, 1, 10)
    with pytest.raises(NumericalError, match="no convergence") as info:
        inter_study_variance(y, "paule_mandel", se=s, max_iter=1, tol=0.0)
    assert len(info.value.trace) >= 2


def test_attenuation_corrected_zero_noise_matches_ols():
    ds = make_dataset([1, 2, 4, 5], [3, 5, 8, 12])
    fit = attenuation_corrected(ds)
    ols = ols_slope(ds.gamma_hat, ds.tau_hat)
    assert fit.beta_hat == ols.beta_hat
    assert fit.se_beta == ols.se_beta
    assert fit.diagnostics["lambda"] == 1.0


def test_attenuation_corrected_large_k():
    # one draw has sd ~0.045 here, so average 20 seeded draws (sd of mean ~0.01)
    naive, corrected = [], []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        K = 10000
        gamma = rng.normal(0, 1, K)
        tau = 2 * gamma + rng.normal(0, 0.5, K)
        ds = make_dataset(gamma + rng.standard_normal(K), tau, se_gamma=1.0, se_tau=0.0)
        fit = attenuation_corrected(ds)
        naive.append(fit.diagnostics["naive_beta"])
        corrected.append(fit.beta_hat)
        assert fit.beta_hat == pytest.approx(fit.diagnostics["naive_beta"] / fit.diagnostics["lambda"], rel=1e-14)
    assert np.mean(naive) == pytest.approx(1.0, abs=0.05)
    assert np.mean(corrected) == pytest.approx(2.0, abs=0.05)


def test_attenuation_corrected_division():
    ds = make_dataset([0, 2, 4, 6], [0, 3, 5, 9], se_gamma=1.0)
    fit = attenuation_corrected(ds)
    assert fit.beta_hat == pytest.approx(ols_slope(ds.gamma_hat, ds.tau_hat).beta_hat / fit.diagnostics["lambda"])


# --- BCES ------------------------------------------------------------------

def test_bces_equals_ols_bitwise_without_noise(noisy_dataset):
    ds = make_dataset(noisy_dataset.gamma_hat, noisy_dataset.tau_hat)
    assert bces_estimate(ds).beta_hat == ols_slope(ds.gamma_hat, ds.tau_hat).beta_hat


def test_bces_hand_example():
    ds = make_dataset([1, 2, 3], [2, 4, 6], se_gamma=math.sqrt(0.5))
    assert bces_estimate(ds).beta_hat == pytest.approx(8.0, rel=1e-12)


def test_bces_covariance_correction():
    # numerator subtracts sum of cov_uv: (4 - 3*0.25) / (2 - 1.5)
    ds = make_dataset([1, 2, 3], [2, 4, 6], se_gamma=math.sqrt(0.5), se_tau=1.0, cov_uv=0.25)
    assert bces_estimate(ds).beta_hat == pytest.approx(6.5, rel=1e-12)


def test_bces_negative_denominator():
    ds = make_dataset([1, 2, 3], [2, 4, 6], se_gamma=1.0)
    with pytest.raises(NumericalError, match="noise dominates signal"):
        bces_estimate(ds)


def test_bces_sandwich_reduces_to_hc0():
    # with no measurement error the Akritas-Bershady variance is the HC0 OLS variance
    rng = np.random.default_rng(9)
    x = rng.normal(size=20)
    y = 0.5 * x + rng.normal(size=20)
    K = x.size
    fit = bces_estimate(make_dataset(x, y))
    hc1 = ols_slope(x, y).se_beta
    assert fit.se_beta == pytest.approx(hc1 * math.sqrt((K - 2) / K), rel=1e-12)
    assert fit.df is None


def test_wild_bootstrap_constant_outcome():
    ds = make_dataset([1, 2, 3, 5, 8], [4, 4, 4, 4, 4], se_gamma=0.1)
    fit = bces_bootstrap(ds, "wild_restricted", B=499, seed=1)
    assert fit.p_value == pytest.approx(1.0, abs=0.01)


@pytest.mark.parametrize("mode", ["pairs", "wild_restricted"])
def test_bootstrap_deterministic(noisy_dataset, mode):
    a = bces_bootstrap(noisy_dataset, mode, B=299, seed=17)
    b = bces_bootstrap(noisy_dataset, mode, B=299, seed=17)
    assert a == b


def test_pairs_bootstrap_outputs(noisy_dataset):
    fit = bces_bootstrap(noisy_dataset, "pairs", B=999, seed=3)
    assert fit.method == "bces_pairs_boot"
    assert fit.se_beta > 0
    assert fit.diagnostics["ci_lower"] < fit.beta_hat < fit.diagnostics["ci_upper"]
    assert 0 <= fit.p_value <= 1


def test_bootstrap_minimum_B(noisy_dataset):
    with pytest.raises(InputError):
        bces_bootstrap(noisy_dataset, "pairs", B=100)


def test_bootstrap_unstable():
    # only the last group is noisy and it carries all the spread: a resample
    # is valid only if it holds that group exactly once (probability 0.41)
    ds = make_dataset([0, 0, 0, 0, 10], [1, 2, 3, 4, 5], se_gamma=[0, 0, 0, 0, math.sqrt(79)])
    assert bces_estimate(ds).diagnostics["denominator"] == pytest.approx(1.0)
    with pytest.raises(NumericalError, match="bootstrap unstable"):
        bces_bootstrap(ds, "pairs", B=499, seed=0)


# --- SIMEX -----------------------------------------------------------------

def test_simex_zero_noise_is_naive():
    rng = np.random.default_rng(4)
    ds = make_dataset(rng.normal(size=9), rng.normal(size=9), se_tau=0.2)
    fit = simex_estimate(ds)
    assert fit.beta_hat == ols_slope(ds.gamma_hat, ds.tau_hat).beta_hat


def test_simex_g0_is_naive_bitwise(noisy_dataset):
    fit = simex_estimate(noisy_dataset, SimexConfig(seed=5))
    assert fit.curve[0] == (0.0, ols_slope(noisy_dataset.gamma_hat, noisy_dataset.tau_hat).beta_hat)
    assert len(fit.curve) == 5
    assert fit.extrapolant(-1.0) == pytest.approx(fit.beta_hat, rel=1e-12)


def test_simex_recovers_attenuated_slope():
    # lambda = 1 / (1 + 0.25) = 0.8
    rng = np.random.default_rng(77)
    K = 200
    gamma = rng.normal(0, 1, K)
    tau = 2 * gamma + rng.normal(0, 0.2, K)
    ds = make_dataset(gamma + 0.5 * rng.standard_normal(K), tau, se_gamma=0.5, se_tau=0.2)
    naive = ols_slope(ds.gamma_hat, ds.tau_hat).beta_hat
    fit = simex_estimate(ds, SimexConfig(seed=1))
    assert naive == pytest.approx(1.6, abs=0.1)
    assert fit.beta_hat == pytest.approx(2.0, abs=0.1)


def test_simex_curve_decreases_with_noise(noisy_dataset):
    fit = simex_estimate(noisy_dataset)
    slopes = [g for _, g in fit.curve]
    assert all(b < a for a, b in zip(slopes, slopes[1:]))


def test_simex_config_validation():
    with pytest.raises(InputError, match="underdetermined extrapolant"):
        SimexConfig(zeta_grid=(0.0, 1.0))
    with pytest.raises(InputError):
        SimexConfig(zeta_grid=(0.5, 1.0, 2.0))
    with pytest.raises(InputError):
        SimexConfig(B=10)


def test_simex_deterministic(noisy_dataset):
    assert simex_estimate(noisy_dataset, SimexConfig(seed=3)) == simex_estimate(noisy_dataset, SimexConfig(seed=3))


def test_simex_bootstrap_se(noisy_dataset):
    fit = simex_estimate(noisy_dataset, SimexConfig(seed=3, se_method="bootstrap", B=50, B_outer=40))
    jk = simex_estimate(noisy_dataset, SimexConfig(seed=3, B=50))
    assert fit.beta_hat == jk.beta_hat
    assert fit.se_beta > 0
    assert 0.3 < fit.se_beta / jk.se_beta < 3


# --- polynomial ------------------------------------------------------------

def test_polynomial_nested_linear_model():
    g = np.array([0.5, 1.0, 1.7, 2.2, 3.1, 4.0])
    fit = polynomial_fit(make_dataset(g, 1.0 + 2.0 * g), 2)
    c = fit.extra_coefs
    assert c["theta0"] == pytest.approx(2.0, abs=1e-8)
    assert c["theta1"] == pytest.approx(0.0, abs=1e-8)
    assert c["theta2"] == pytest.approx(0.0, abs=1e-8)


def test_polynomial_cubic_interpolation():
    g = np.array([-2.0, -1.0, 0.5, 1.0, 2.0, 3.0])
    fit = polynomial_fit(make_dataset(g, g**3), 2)
    assert fit.extra_coefs["theta2"] == pytest.approx(1.0, abs=1e-9)


def test_polynomial_needs_five_groups():
    with pytest.raises(InputError, match="insufficient subgroups"):
        polynomial_fit(make_dataset([1, 2, 3, 4], [1, 2, 3, 5]), 2)


def test_polynomial_ill_conditioned():
    g = 1000 + 1e-4 * np.arange(6)
    with pytest.raises(NumericalError, match="ill-conditioned design"):
        polynomial_fit(make_dataset(g, g), 2)


def test_polynomial_degree_one_is_ols():
    g, t = [1, 2, 4, 7], [2, 3, 9, 11]
    assert polynomial_fit(make_dataset(g, t), 1).beta_hat == ols_slope(g, t).beta_hat


# --- covariate adjustment --------------------------------------------------

def test_adjusted_zero_column_matches_unadjusted():
    rng = np.random.default_rng(6)
    g, t = rng.normal(size=10), rng.normal(size=10)
    ds = make_dataset(g, t, covariate_means=np.zeros((10, 1)))
    with pytest.warns(UserWarning, match="zero-variance"):
        fit = adjusted_fit(ds, "naive")
    assert fit.beta_hat == ols_slope(g, t).beta_hat


def test_adjusted_removes_confounding():
    rng = np.random.default_rng(10)
    K = 500
    x = rng.normal(size=K)
    gamma = 2 + x + rng.normal(size=K)
    tau = 1 + 2 * gamma + 3 * x + rng.normal(0, 0.3, K)
    ds = make_dataset(gamma, tau, covariate_means=x[:, None], covariate_names=("x",))
    unadj = ols_slope(gamma, tau).beta_hat
    fit = adjusted_fit(ds, "naive")
    assert abs(unadj - 2) > 0.5
    assert fit.beta_hat == pytest.approx(2.0, rel=0.05)
    assert fit.extra_coefs["beta_x"] == pytest.approx(3.0, rel=0.05)


def test_adjusted_simex_with_noise():
    rng = np.random.default_rng(12)
    K = 500
    x = rng.normal(size=K)
    gamma = 2 + 0.5 * x + rng.normal(size=K)
    tau = 1 + 2 * gamma + 3 * x + rng.normal(0, 0.3, K)
    ds = make_dataset(gamma + 0.5 * rng.standard_normal(K), tau, se_gamma=0.5, se_tau=0.0,
                      covariate_means=x[:, None], covariate_names=("x",))
    naive = adjusted_fit(ds, "naive").beta_hat
    fit = adjusted_fit(ds, "simex", SimexConfig(seed=2))
    assert abs(fit.beta_hat - 2) < abs(naive - 2)
    assert fit.beta_hat == pytest.approx(2.0, rel=0.05)


def test_adjusted_simex_without_noise_equals_naive_adjusted():
    rng = np.random.default_rng(13)
    K = 12
    x = rng.normal(size=(K, 2))
    ds = make_dataset(rng.normal(size=K), rng.normal(size=K), covariate_means=x)
    a = adjusted_fit(ds, "naive")
    b = adjusted_fit(ds, "simex")
    assert b.beta_hat == pytest.approx(a.beta_hat, rel=1e-10)


def test_adjusted_too_many_covariates():
    rng = np.random.default_rng(14)
    K = 6
    ds = make_dataset(rng.normal(size=K), rng.normal(size=K), covariate_means=rng.normal(size=(K, K - 2)))
    with pytest.raises(InputError, match="insufficient subgroups"):
        adjusted_fit(ds, "naive")


def test_adjusted_collinear():
    rng = np.random.default_rng(15)
    K = 8
    g = rng.normal(size=K)
    x = np.column_stack([rng.normal(size=K), rng.normal(size=K)])
    x[:, 1] = 2 * x[:, 0] + 1
    ds = make_dataset(g, rng.normal(size=K), covariate_means=x)
    with pytest.raises(NumericalError, match="collinear covariates"):
        adjusted_fit(ds, "naive")


def test_adjusted_requires_covariates(noisy_dataset):
    with pytest.raises(InputError, match="covariate_means"):
        adjusted_fit(noisy_dataset)


# --- dispatch --------------------------------------------------------------

@pytest.mark.parametrize("name, tag", [
    ("naive", "naive_ols"), ("attenuation", "attenuation"), ("simex", "simex"),
    ("bces_wild", "bces_wild_boot"), ("polynomial", "polynomial"),
])
def test_estimate_slope_dispatch(noisy_dataset, name, tag):
    assert estimate_slope(noisy_dataset, name, seed=1, bootstrap_B=299).method == tag


def test_estimate_slope_unknown(noisy_dataset):
    with pytest.raises(InputError, match="unknown estimator"):
        estimate_slope(noisy_dataset, "lasso")


def test_randomized_estimators_depend_only_on_seed(noisy_dataset):
    for name in ("bces_pairs", "bces_wild", "simex"):
        a = estimate_slope(noisy_dataset, name, seed=99, bootstrap_B=299)
        b = estimate_slope(noisy_dataset, name, seed=99, bootstrap_B=299)
        c = estimate_slope(noisy_dataset, name, seed=98, bootstrap_B=299)
        assert a == b
        assert a != c or name == "bces"


def test_bces_wild_null_size_sanity():
    # no relation between tau and gamma: p-values roughly uniform
    rng = np.random.default_rng(21)
    ps = []
    for _ in range(60):
        g = rng.normal(2, 1, 30)
        ds = make_dataset(g + 0.1 * rng.standard_normal(30), rng.normal(size=30), se_gamma=0.1)
        ps.append(bces_bootstrap(ds, "wild_restricted", 299, int(rng.integers(1 << 31))).p_value)
    assert 0.3 < np.mean(ps) < 0.7
