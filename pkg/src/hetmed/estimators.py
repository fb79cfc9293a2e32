"""Estimators of the mediator-to-outcome slope across subgroups.

All estimators regress the subgroup outcome effects on the subgroup mediator
effects. They differ in how they deal with the sampling noise in the
mediator effects, which attenuates the naive slope towards zero.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from . import _kernels
from ._rng import substream
from .core import EffectDataset
from .errors import InputError, NumericalError

METHODS = (
    "naive_ols", "attenuation", "bces", "bces_pairs_boot", "bces_wild_boot",
    "simex", "adjusted", "polynomial",
)


@dataclass(frozen=True)
class SlopeFit:
    """A fitted slope with its standard error.

    ``df`` is the degrees of freedom of the Student t reference used for
    p-values and interval multipliers; ``None`` means standard normal.
    ``p_value`` is set only by estimators that produce their own
    (bootstrap) p-value for the slope.
    """

    beta_hat: float
    se_beta: float
    intercept_hat: float
    method: str
    extra_coefs: Mapping[str, float] | None = None
    diagnostics: Mapping[str, float] = field(default_factory=dict)
    df: int | None = None
    p_value: float | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")
        if not self.se_beta >= 0:
            raise NumericalError(f"negative or undefined standard error for {self.method}")


@dataclass(frozen=True)
class SimexConfig:
    zeta_grid: tuple[float, ...] = (0.0, 0.5, 1.0, 1.5, 2.0)
    B: int = 200
    extrapolant: str = "quadratic"
    seed: int = 0
    se_method: str = "jackknife"
    B_outer: int = 100

    def __post_init__(self):
        grid = tuple(float(z) for z in self.zeta_grid)
        object.__setattr__(self, "zeta_grid", grid)
        if len(grid) < 3:
            raise InputError("underdetermined extrapolant")
        if grid[0] != 0.0 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise InputError("invalid SIMEX grid: must start at 0 and increase strictly")
        if self.B < 50:
            raise InputError("invalid SIMEX config: B must be at least 50")
        if self.extrapolant != "quadratic":
            raise InputError(f"unsupported extrapolant {self.extrapolant!r}")
        if self.se_method not in ("jackknife", "bootstrap"):
            raise InputError(f"unknown SIMEX se_method {self.se_method!r}")
        if self.se_method == "bootstrap" and self.B_outer < 2:
            raise InputError("invalid SIMEX config: B_outer must be at least 2")


@dataclass(frozen=True)
class SimexFit(SlopeFit):
    """SIMEX slope plus the simulated curve and its quadratic extrapolant."""

    curve: tuple[tuple[float, float], ...] = ()
    extrapolant_coefs: tuple[float, ...] = ()

    def extrapolant(self, zeta):
        c2, c1, c0 = self.extrapolant_coefs
        zeta = np.asarray(zeta, dtype=float)
        return c0 + c1 * zeta + c2 * zeta * zeta


def _as_xy(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise InputError("x and y must be vectors of equal length")
    if x.size < 3:
        raise InputError("insufficient subgroups")
    return x, y


def _centered_slope(x, y, num_adjust=0.0, den_adjust=0.0):
    """Shared slope arithmetic; BCES reuses it so zero corrections are exact."""
    xc = x - x.mean()
    sxx = float(np.dot(xc, xc))
    sxy = float(np.dot(xc, y))
    return (sxy - num_adjust) / (sxx - den_adjust), xc, sxx


def ols_slope(x, y) -> SlopeFit:
    """Least-squares slope of ``y`` on ``x`` with an HC1 standard error."""
    x, y = _as_xy(x, y)
    K = x.size
    xc = x - x.mean()
    if not np.dot(xc, xc) > 0:
        raise NumericalError("degenerate regressor")
    beta, xc, sxx = _centered_slope(x, y)
    intercept = float(y.mean() - beta * x.mean())
    resid = y - intercept - beta * x
    rss = float(np.dot(resid, resid))
    hc1 = K / (K - 2) * float(np.sum(xc * xc * resid * resid)) / sxx**2
    classical = rss / (K - 2) / sxx
    return SlopeFit(
        beta_hat=float(beta),
        se_beta=math.sqrt(hc1),
        intercept_hat=intercept,
        method="naive_ols",
        diagnostics={"residual_variance": rss / (K - 2), "se_classical": math.sqrt(classical)},
        df=K - 2,
    )


def attenuation_lambda(sigma2_gamma: float, se_gammas) -> float:
    """Attenuation factor ``sigma2_gamma / (sigma2_gamma + mean(se_gamma**2))``."""
    se = np.asarray(se_gammas, dtype=float)
    if se.size == 0:
        raise InputError("empty input")
    if sigma2_gamma < 0:
        raise InputError("sigma2_gamma must be non-negative")
    noise = float(np.mean(se * se))
    if noise == 0.0:
        return 1.0
    if sigma2_gamma == 0.0:
        raise NumericalError("zero signal variance")
    return sigma2_gamma / (sigma2_gamma + noise)


def _gamma_arrays(data, se=None):
    if isinstance(data, EffectDataset):
        return data.gamma_hat, data.se_gamma
    return np.asarray(data, dtype=float), np.asarray(se, dtype=float)


def inter_study_variance(dataset, method: str = "dersimonian_laird", se=None,
                         tol: float = 1e-8, max_iter: int = 100) -> float:
    """Between-subgroup variance of the true mediator effects.

    Accepts an :class:`EffectDataset`, or raw ``(gamma_hat, se)`` arrays.
    """
    y, s = _gamma_arrays(dataset, se)
    K = y.size
    if K < 3:
        raise InputError("insufficient subgroups")
    v = s * s
    if np.any(v == 0):
        raise NumericalError("infinite weight")
    w = 1.0 / v
    mu = np.dot(w, y) / w.sum()
    q = float(np.dot(w, (y - mu) ** 2))
    if method == "dersimonian_laird":
        denom = w.sum() - np.dot(w, w) / w.sum()
        return max(0.0, (q - (K - 1)) / denom)
    if method != "paule_mandel":
        raise InputError(f"unknown inter-study variance method {method!r}")

    # Paule-Mandel: solve Q(tau2) = K - 1 with Newton steps on the generalized Q
    if q <= K - 1:
        return 0.0
    tau2 = max(0.0, (q - (K - 1)) / (w.sum() - np.dot(w, w) / w.sum()))
    trace = [tau2]
    for _ in range(max_iter):
        wt = 1.0 / (v + tau2)
        mu = np.dot(wt, y) / wt.sum()
        r2 = (y - mu) ** 2
        f = float(np.dot(wt, r2)) - (K - 1)
        slope = float(np.dot(wt * wt, r2))
        step = f / slope
        new = max(0.0, tau2 + step)
        trace.append(new)
        if abs(new - tau2) < tol:
            return new
        tau2 = new
    raise NumericalError("no convergence", trace=trace)


def attenuation_corrected(dataset: EffectDataset, variance_method: str = "dersimonian_laird") -> SlopeFit:
    """Naive slope divided by the estimated attenuation factor.

    The standard error treats the factor as known, so it understates the
    true sampling variability.
    """
    naive = ols_slope(dataset.gamma_hat, dataset.tau_hat)
    if np.all(dataset.se_gamma == 0):
        return replace(naive, method="attenuation",
                       diagnostics={**naive.diagnostics, "lambda": 1.0, "sigma2_gamma": float("nan")})
    sigma2 = inter_study_variance(dataset, variance_method)
    lam = attenuation_lambda(sigma2, dataset.se_gamma)
    beta = naive.beta_hat / lam
    return SlopeFit(
        beta_hat=beta,
        se_beta=naive.se_beta / lam,
        intercept_hat=float(dataset.tau_hat.mean() - beta * dataset.gamma_hat.mean()),
        method="attenuation",
        diagnostics={"lambda": lam, "sigma2_gamma": sigma2, "naive_beta": naive.beta_hat},
        df=naive.df,
    )


def _bces_parts(x, y, var_x, cov_xy):
    num_adjust = float(np.sum(cov_xy))
    den_adjust = float(np.sum(var_x))
    xc = x - x.mean()
    denom = float(np.dot(xc, xc)) - den_adjust
    return num_adjust, den_adjust, denom


def bces_estimate(dataset: EffectDataset) -> SlopeFit:
    """Moment-corrected slope with an Akritas-Bershady sandwich standard error."""
    x, y = dataset.gamma_hat, dataset.tau_hat
    var_x = dataset.se_gamma ** 2
    cov_xy = dataset.cov_uv
    K = x.size
    num_adjust, den_adjust, denom = _bces_parts(x, y, var_x, cov_xy)
    if not denom > 0:
        raise NumericalError("noise dominates signal")
    beta, xc, sxx = _centered_slope(x, y, num_adjust, den_adjust)
    intercept = float(y.mean() - beta * x.mean())
    resid = y - beta * x - intercept
    xi = (xc * resid + beta * var_x - cov_xy) / (denom / K)
    var = float(np.sum((xi - xi.mean()) ** 2)) / K**2
    return SlopeFit(
        beta_hat=float(beta),
        se_beta=math.sqrt(var),
        intercept_hat=intercept,
        method="bces",
        diagnostics={"denominator": denom, "numerator_correction": num_adjust,
                     "denominator_correction": den_adjust},
    )


def _bces_batch(xs, ys, var_x, cov_xy):
    # rows are replicates
    xc = xs - xs.mean(axis=1, keepdims=True)
    den = np.einsum("bk,bk->b", xc, xc) - var_x.sum(axis=-1)
    num = np.einsum("bk,bk->b", xc, ys) - cov_xy.sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = num / den
    return beta, den > 0


def bces_bootstrap(dataset: EffectDataset, mode: str = "pairs", B: int = 999, seed: int = 0,
                   alpha: float = 0.05) -> SlopeFit:
    """BCES with bootstrap inference.

    ``pairs`` resamples subgroups with replacement and reports the bootstrap
    standard deviation, a percentile interval and the p-value obtained by
    inverting that interval. ``wild_restricted`` imposes a zero slope, flips the
    restricted residuals with Rademacher weights and reports the share of
    bootstrap slopes at least as large in magnitude as the observed one.
    """
    if B < 199:
        raise InputError("bootstrap needs B >= 199")
    point = bces_estimate(dataset)
    x, y = dataset.gamma_hat, dataset.tau_hat
    var_x, cov_xy = dataset.se_gamma ** 2, dataset.cov_uv
    K = x.size

    if mode == "pairs":
        rng = substream(seed, "bces_pairs")
        idx = rng.integers(0, K, size=(B, K))
        betas, valid = _bces_batch(x[idx], y[idx], var_x[idx], cov_xy[idx])
        method = "bces_pairs_boot"
    elif mode == "wild_restricted":
        rng = substream(seed, "bces_wild")
        signs = rng.choice(np.array([-1.0, 1.0]), size=(B, K))
        center = y.mean()
        resid = y - center
        ystar = center + resid * signs
        betas, valid = _bces_batch(np.broadcast_to(x, (B, K)), ystar,
                                   var_x[None, :], cov_xy[None, :])
        method = "bces_wild_boot"
    else:
        raise InputError(f"unknown bootstrap mode {mode!r}")

    n_invalid = int(B - valid.sum())
    if n_invalid > B / 2:
        raise NumericalError("bootstrap unstable")
    good = betas[valid]
    diagnostics = {"B": float(B), "n_invalid": float(n_invalid),
                   "bootstrap_mean": float(good.mean())}
    p_value = None
    if mode == "pairs":
        lo, hi = np.quantile(good, [alpha / 2, 1 - alpha / 2])
        diagnostics.update(ci_lower=float(lo), ci_upper=float(hi))
        # inverts the percentile interval: smallest level whose interval excludes 0
        tail = min(np.mean(good <= 0.0), np.mean(good >= 0.0))
        p_value = float(min(1.0, 2.0 * tail))
    else:
        obs = abs(point.beta_hat)
        mag = np.abs(good)
        # exact ties (e.g. a constant outcome) count as extreme
        extreme = (mag >= obs) | np.isclose(mag, obs, rtol=1e-9, atol=1e-12)
        p_value = float(extreme.mean())
    return SlopeFit(
        beta_hat=point.beta_hat,
        se_beta=float(good.std(ddof=1)),
        intercept_hat=point.intercept_hat,
        method=method,
        diagnostics=diagnostics,
        p_value=p_value,
    )


def _quadratic_extrapolate(zeta, values):
    values = np.asarray(values, dtype=float)
    if np.all(values == values[0]):
        # a flat curve extrapolates to itself; skip the rounding of a solve
        return np.array([0.0, 0.0, values[0]]), float(values[0])
    design = np.vander(np.asarray(zeta, dtype=float), 3)
    coefs = np.linalg.lstsq(design, np.asarray(values, dtype=float), rcond=None)[0]
    return coefs, float(coefs[2] - coefs[1] + coefs[0])


def _group_normals(rng, m, B, K):
    # drawn group-major so appending groups leaves earlier groups' noise unchanged
    return np.ascontiguousarray(rng.standard_normal((K, m, B)).transpose(1, 2, 0))


def _simex_core(x, y, se_x, config: SimexConfig, seed_keys=()):
    """Curve, extrapolated slope and jackknife variance for one dataset."""
    zeta = np.asarray(config.zeta_grid)
    g0, xc, sxx = _centered_slope(x, y)
    if not sxx > 0:
        raise NumericalError("degenerate regressor")
    resid = (y - y.mean()) - g0 * xc
    var0 = float(np.dot(resid, resid)) / (x.size - 2) / sxx
    if not np.any(se_x):
        # no measurement noise: every perturbed dataset is the observed one
        m = zeta.size - 1
        mean_slope, mean_var, spread = np.full(m, g0), np.full(m, var0), np.zeros(m)
    else:
        rng = substream(config.seed, "simex", *seed_keys)
        normals = _group_normals(rng, zeta.size - 1, config.B, x.size)
        mean_slope, mean_var, spread = _kernels.simex_moments(
            np.ascontiguousarray(x), np.ascontiguousarray(y), np.ascontiguousarray(se_x),
            np.sqrt(zeta[1:]), normals,
        )
    curve = np.concatenate(([g0], mean_slope))
    coefs, beta = _quadratic_extrapolate(zeta, curve)
    _, jk_var = _quadratic_extrapolate(zeta, np.concatenate(([var0], mean_var - spread)))
    return curve, coefs, beta, jk_var, var0


def simex_estimate(dataset: EffectDataset, config: SimexConfig | None = None) -> SimexFit:
    """Simulation-extrapolation slope.

    Extra noise with variance ``zeta * se_gamma**2`` is added to the mediator
    effects, the mean naive slope is traced as a function of ``zeta``, and a
    quadratic in ``zeta`` is extrapolated to ``zeta = -1``.

    With ``se_method="jackknife"`` (default) the variance is the extrapolated
    difference between the mean naive variance and the between-replicate
    variance of the simulated slopes; a non-positive extrapolation falls back
    to the naive variance and is flagged in the diagnostics. With
    ``"bootstrap"`` the whole procedure is repeated on ``B_outer`` pairs
    resamples.
    """
    config = config or SimexConfig()
    x, y, se_x = dataset.gamma_hat, dataset.tau_hat, dataset.se_gamma
    K = x.size
    curve, coefs, beta, jk_var, var0 = _simex_core(x, y, se_x, config)
    diagnostics = {"naive_beta": float(curve[0]), "se_fallback": 0.0}

    if config.se_method == "jackknife":
        if jk_var > 0:
            se = math.sqrt(jk_var)
        else:
            se = math.sqrt(var0)
            diagnostics["se_fallback"] = 1.0
    else:
        rng = substream(config.seed, "simex_outer")
        idx = rng.integers(0, K, size=(config.B_outer, K))
        draws = []
        for r, row in enumerate(idx):
            xr, yr = x[row], y[row]
            if not np.ptp(xr) > 0:
                continue
            draws.append(_simex_core(xr, yr, se_x[row], config, seed_keys=(r,))[2])
        n_invalid = config.B_outer - len(draws)
        if n_invalid > config.B_outer / 2:
            raise NumericalError("bootstrap unstable")
        se = float(np.std(draws, ddof=1))
        diagnostics["n_invalid"] = float(n_invalid)

    zeta = config.zeta_grid
    return SimexFit(
        beta_hat=beta,
        se_beta=se,
        intercept_hat=float(y.mean() - beta * x.mean()),
        method="simex",
        diagnostics=diagnostics,
        df=K - 2,
        curve=tuple((float(z), float(g)) for z, g in zip(zeta, curve)),
        extrapolant_coefs=tuple(float(c) for c in coefs),
    )


def _hc1_cov(design, resid):
    K, p = design.shape
    bread = np.linalg.inv(design.T @ design)
    meat = (design * resid[:, None] ** 2).T @ design
    return K / (K - p) * bread @ meat @ bread


def polynomial_fit(dataset: EffectDataset, degree: int = 2) -> SlopeFit:
    """Slope allowed to vary quadratically with the mediator effect.

    With ``beta(g) = theta0 + theta1 g + theta2 g^2`` the outcome effect is
    cubic in ``g``; the cubic is fitted by least squares on the observed
    effects without measurement-error correction.
    """
    if degree not in (1, 2):
        raise InputError("degree must be 1 or 2")
    x, y = dataset.gamma_hat, dataset.tau_hat
    K = x.size
    if degree == 1:
        fit = ols_slope(x, y)
        return replace(fit, method="polynomial", extra_coefs={"theta0": fit.beta_hat})
    if K < degree + 3:
        raise InputError("insufficient subgroups")
    design = np.column_stack([np.ones(K), x, x**2, x**3])
    if np.linalg.cond(design) > 1e10:
        raise NumericalError("ill-conditioned design")
    coefs = np.linalg.lstsq(design, y, rcond=None)[0]
    resid = y - design @ coefs
    cov = _hc1_cov(design, resid) if K > 4 else np.full((4, 4), np.nan)
    se = float(np.sqrt(cov[1, 1])) if np.isfinite(cov[1, 1]) else 0.0
    return SlopeFit(
        beta_hat=float(coefs[1]),
        se_beta=se,
        intercept_hat=float(coefs[0]),
        method="polynomial",
        extra_coefs={"theta0": float(coefs[1]), "theta1": float(coefs[2]), "theta2": float(coefs[3])},
        diagnostics={"condition_number": float(np.linalg.cond(design)),
                     "residual_variance": float(resid @ resid) / max(K - 4, 1)},
        df=K - 4,
    )


def _adjusted_simex(x, y, se_x, covs, config: SimexConfig):
    # Frisch-Waugh: residualize on [1, covariates]; perturbation stays linear
    K, p = covs.shape
    design = np.column_stack([np.ones(K), covs])
    proj = design @ np.linalg.pinv(design)
    annihilator = np.eye(K) - proj
    y_res = annihilator @ y
    coef_solver = np.linalg.pinv(design)
    df = K - p - 2

    def slopes_and_var(xs):
        xr = xs @ annihilator.T
        sxx = np.einsum("...k,...k->...", xr, xr)
        sxy = xr @ y_res
        beta = sxy / sxx
        rss = np.maximum(y_res @ y_res - beta * sxy, 0.0)
        other = (y[None] - beta[..., None] * xs) @ coef_solver.T if xs.ndim > 1 else coef_solver @ (y - beta * xs)
        return beta, rss / df / sxx, other

    zeta = np.asarray(config.zeta_grid)
    rng = substream(config.seed, "simex_adjusted")
    normals = _group_normals(rng, zeta.size - 1, config.B, K)
    b0, v0, o0 = slopes_and_var(x)
    xs = x + np.sqrt(zeta[1:])[:, None, None] * se_x * normals
    b, v, o = slopes_and_var(xs.reshape(-1, K))
    b = b.reshape(zeta.size - 1, config.B)
    v = v.reshape(zeta.size - 1, config.B)
    o = o.reshape(zeta.size - 1, config.B, -1)
    curve = np.concatenate(([b0], b.mean(axis=1)))
    coefs, beta = _quadratic_extrapolate(zeta, curve)
    _, jk = _quadratic_extrapolate(zeta, np.concatenate(([v0], v.mean(axis=1) - b.var(axis=1, ddof=1))))
    other_curves = np.vstack([o0[None], o.mean(axis=1)])
    other = [_quadratic_extrapolate(zeta, other_curves[:, j])[1] for j in range(other_curves.shape[1])]
    fallback = not jk > 0
    se = math.sqrt(v0 if fallback else jk)
    return beta, se, other, curve, coefs, fallback


def adjusted_fit(dataset: EffectDataset, method: str = "naive", config: SimexConfig | None = None) -> SlopeFit:
    """Slope controlling for subgroup covariate means.

    Covariate means are treated as error-free; only the mediator effects are
    perturbed in the SIMEX variant. Covariate columns with no spread are
    dropped with a warning.
    """
    if method not in ("naive", "simex"):
        raise InputError(f"unknown adjusted method {method!r}")
    covs = dataset.covariate_matrix
    if covs is None:
        raise InputError("invalid record: covariate_means required")
    names = list(dataset.covariate_names)
    keep = np.ptp(covs, axis=0) > 0
    if not keep.all():
        dropped = [n for n, k in zip(names, keep) if not k]
        warnings.warn(f"dropping zero-variance covariates: {', '.join(dropped)}", stacklevel=2)
        covs = covs[:, keep]
        names = [n for n, k in zip(names, keep) if k]
    x, y = dataset.gamma_hat, dataset.tau_hat
    K, p = covs.shape
    if K < p + 3:
        raise InputError("insufficient subgroups")
    if p == 0:
        base = ols_slope(x, y) if method == "naive" else simex_estimate(dataset, config)
        return SlopeFit(base.beta_hat, base.se_beta, base.intercept_hat, "adjusted",
                        extra_coefs={}, diagnostics={**base.diagnostics, "variant_simex": float(method == "simex")},
                        df=base.df)

    centered = np.column_stack([x, covs]) - np.column_stack([x, covs]).mean(axis=0)
    if np.linalg.matrix_rank(centered) < p + 1:
        raise NumericalError("collinear covariates")
    design = np.column_stack([np.ones(K), x, covs])
    if method == "naive":
        coefs = np.linalg.lstsq(design, y, rcond=None)[0]
        resid = y - design @ coefs
        cov = _hc1_cov(design, resid)
        return SlopeFit(
            beta_hat=float(coefs[1]),
            se_beta=float(np.sqrt(cov[1, 1])),
            intercept_hat=float(coefs[0]),
            method="adjusted",
            extra_coefs={f"beta_{n}": float(c) for n, c in zip(names, coefs[2:])},
            diagnostics={"residual_variance": float(resid @ resid) / (K - p - 2), "variant_simex": 0.0},
            df=K - p - 2,
        )
    config = config or SimexConfig()
    beta, se, other, curve, _, fallback = _adjusted_simex(x, y, dataset.se_gamma, covs, config)
    return SlopeFit(
        beta_hat=beta,
        se_beta=se,
        intercept_hat=float(other[0]),
        method="adjusted",
        extra_coefs={f"beta_{n}": float(c) for n, c in zip(names, other[1:])},
        diagnostics={"naive_beta": float(curve[0]), "se_fallback": float(fallback), "variant_simex": 1.0},
        df=K - p - 2,
    )


ESTIMATORS = ("naive", "attenuation", "bces", "bces_pairs", "bces_wild", "simex",
              "polynomial", "adjusted", "adjusted_simex")


def estimate_slope(dataset: EffectDataset, estimator: str = "simex", seed: int = 0,
                   simex_config: SimexConfig | None = None, bootstrap_B: int = 999) -> SlopeFit:
    """Fit ``estimator`` by name; randomized estimators draw from ``seed``."""
    if estimator == "naive":
        return ols_slope(dataset.gamma_hat, dataset.tau_hat)
    if estimator == "attenuation":
        return attenuation_corrected(dataset)
    if estimator == "bces":
        return bces_estimate(dataset)
    if estimator == "bces_pairs":
        return bces_bootstrap(dataset, "pairs", bootstrap_B, seed)
    if estimator == "bces_wild":
        return bces_bootstrap(dataset, "wild_restricted", bootstrap_B, seed)
    config = simex_config or SimexConfig(seed=seed)
    if estimator == "simex":
        return simex_estimate(dataset, config)
    if estimator == "polynomial":
        return polynomial_fit(dataset, 2)
    if estimator == "adjusted":
        return adjusted_fit(dataset, "naive")
    if estimator == "adjusted_simex":
        return adjusted_fit(dataset, "simex", config)
    raise InputError(f"unknown estimator {estimator!r}")
