"""Aggregation of mediator effects, ACME, intersection-union test and intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import EffectDataset
from .distributions import chi2_sf, critical_value, normal_quantile, two_sided_p
from .errors import InputError, NumericalError
from .estimators import SlopeFit

CI_MODES = ("endpoint_product", "paper_literal")


@dataclass(frozen=True)
class GammaAggregate:
    """Population-weighted mediator effect and its sampling variance."""

    gamma0_hat: float
    var_gamma0: float
    K: int

    def __post_init__(self):
        if not self.var_gamma0 >= 0:
            raise NumericalError("negative variance for aggregated mediator effect")


class Heterogeneity(NamedTuple):
    Q: float
    df: int
    p_Q: float
    I2: float


class IUTest(NamedTuple):
    p_beta: float
    p_gamma: float
    p_overall: float
    reject: bool


@dataclass(frozen=True)
class MediationResult:
    beta_fit: SlopeFit
    gamma_agg: GammaAggregate
    acme_hat: float
    p_beta: float
    p_gamma: float
    p_overall: float
    ci_lower: float
    ci_upper: float
    ci_mode: str
    alpha: float
    heterogeneity: Heterogeneity | None

    @property
    def reject(self) -> bool:
        return self.p_overall <= self.alpha


def aggregate_gamma(dataset: EffectDataset | None = None, *, gamma_hat=None, se_gamma=None,
                    weights=None) -> GammaAggregate:
    """``sum(w_k * gamma_k)`` and ``sum(w_k**2 * se_gamma_k**2)``.

    Subgroup estimates are treated as independent. Raw arrays may be passed
    instead of a dataset.
    """
    if dataset is not None:
        gamma_hat, se_gamma, weights = dataset.gamma_hat, dataset.se_gamma, dataset.weights
    g = np.asarray(gamma_hat, dtype=float)
    s = np.asarray(se_gamma, dtype=float)
    w = np.asarray(weights, dtype=float)
    if not (g.shape == s.shape == w.shape) or g.size == 0:
        raise InputError("invalid record: array lengths differ")
    return GammaAggregate(float(np.dot(w, g)), float(np.dot(w * w, s * s)), int(g.size))


def _beta_p(fit: SlopeFit) -> float:
    if fit.p_value is not None:
        return fit.p_value
    if fit.se_beta == 0:
        if fit.beta_hat == 0:
            return 1.0
        raise NumericalError("degenerate test")
    return two_sided_p(fit.beta_hat / fit.se_beta, fit.df)


def _gamma_p(agg: GammaAggregate) -> float:
    if agg.var_gamma0 == 0:
        if agg.gamma0_hat == 0:
            return 1.0
        raise NumericalError("degenerate test")
    return two_sided_p(agg.gamma0_hat / math.sqrt(agg.var_gamma0))


def iu_test(beta_fit: SlopeFit, gamma_agg: GammaAggregate, alpha: float = 0.05) -> IUTest:
    """Intersection-union test of a zero ACME.

    The ACME is zero when either the slope or the aggregated mediator effect
    is zero, so the null is rejected only when both component tests reject.
    """
    if not 0 < alpha <= 1:
        raise InputError("alpha must lie in (0, 1]")
    p_beta = _beta_p(beta_fit)
    p_gamma = _gamma_p(gamma_agg)
    p = max(p_beta, p_gamma)
    return IUTest(p_beta, p_gamma, p, p_beta <= alpha and p_gamma <= alpha)


def conservative_ci(beta_fit: SlopeFit, gamma_agg: GammaAggregate, alpha: float = 0.05,
                    mode: str = "endpoint_product") -> tuple[float, float]:
    """Interval for the ACME from two ``sqrt(1 - alpha)`` component intervals.

    ``endpoint_product`` bounds the product of the two intervals and always
    contains the point estimate. ``paper_literal`` takes the min and max of
    the four component endpoints themselves.
    """
    if not 0 < alpha <= 0.5:
        raise InputError("alpha must lie in (0, 0.5]")
    if mode not in CI_MODES:
        raise InputError(f"unknown ci mode {mode!r}")
    prob = (1 + math.sqrt(1 - alpha)) / 2
    q_gamma = normal_quantile(prob)
    q_beta = critical_value(prob, beta_fit.df)
    half_g = q_gamma * math.sqrt(gamma_agg.var_gamma0)
    half_b = q_beta * beta_fit.se_beta
    a1, a2 = gamma_agg.gamma0_hat - half_g, gamma_agg.gamma0_hat + half_g
    a3, a4 = beta_fit.beta_hat - half_b, beta_fit.beta_hat + half_b
    if mode == "paper_literal":
        ends = (a1, a2, a3, a4)
    else:
        ends = (a1 * a3, a1 * a4, a2 * a3, a2 * a4)
    return min(ends), max(ends)


def acme(beta_fit: SlopeFit, gamma_agg: GammaAggregate, dataset: EffectDataset | None = None) -> float:
    """Average causal mediation effect.

    For the quadratic-slope model the per-subgroup slope
    ``theta0 + theta1 g + theta2 g^2`` is averaged with the population weights,
    which requires ``dataset``.
    """
    coefs = beta_fit.extra_coefs or {}
    if beta_fit.method == "polynomial" and "theta1" in coefs:
        if dataset is None:
            raise InputError("polynomial ACME needs the dataset")
        g = dataset.gamma_hat
        slope = coefs["theta0"] + coefs["theta1"] * g + coefs["theta2"] * g * g
        return float(np.dot(dataset.weights, slope * g))
    return beta_fit.beta_hat * gamma_agg.gamma0_hat


def polynomial_acme(theta, gamma_hat, weights) -> float:
    """ACME for given quadratic-slope coefficients ``(theta0, theta1, theta2)``."""
    t0, t1, t2 = theta
    g = np.asarray(gamma_hat, dtype=float)
    return float(np.dot(np.asarray(weights, dtype=float), (t0 + t1 * g + t2 * g * g) * g))


def heterogeneity_stats(dataset: EffectDataset | None = None, *, gamma_hat=None, se_gamma=None) -> Heterogeneity:
    """Cochran's Q on the mediator effects and Higgins-Thompson I^2."""
    if dataset is not None:
        gamma_hat, se_gamma = dataset.gamma_hat, dataset.se_gamma
    g = np.asarray(gamma_hat, dtype=float)
    s = np.asarray(se_gamma, dtype=float)
    K = g.size
    if K < 2:
        raise InputError("insufficient subgroups")
    if np.any(s == 0):
        raise NumericalError("infinite weight")
    w = 1.0 / (s * s)
    fixed = np.dot(w, g) / w.sum()
    q = float(np.dot(w, (g - fixed) ** 2))
    df = K - 1
    i2 = max(0.0, (q - df) / q) if q > 0 else 0.0
    return Heterogeneity(q, df, chi2_sf(q, df), i2)


def subgroup_intervals(beta_fit: SlopeFit, dataset: EffectDataset, alpha: float = 0.05,
                       mode: str = "endpoint_product") -> list[tuple]:
    """Experimental per-subgroup ACME intervals.

    Each subgroup's mediator effect is combined with the slope interval using
    the same endpoint rule as :func:`conservative_ci`.
    """
    out = []
    for e in dataset.effects:
        agg = GammaAggregate(e.gamma_hat, e.se_gamma**2, 1)
        lo, hi = conservative_ci(beta_fit, agg, alpha, mode)
        out.append((e.group_id, beta_fit.beta_hat * e.gamma_hat, lo, hi))
    return out


def analyze(dataset: EffectDataset, beta_fit: SlopeFit, alpha: float = 0.05,
            ci_mode: str = "endpoint_product") -> MediationResult:
    """Assemble a :class:`MediationResult` from a fitted slope."""
    agg = aggregate_gamma(dataset)
    test = iu_test(beta_fit, agg, alpha)
    lo, hi = conservative_ci(beta_fit, agg, alpha, ci_mode)
    try:
        het = heterogeneity_stats(dataset)
    except NumericalError:
        het = None
    return MediationResult(
        beta_fit=beta_fit,
        gamma_agg=agg,
        acme_hat=acme(beta_fit, agg, dataset),
        p_beta=test.p_beta,
        p_gamma=test.p_gamma,
        p_overall=test.p_overall,
        ci_lower=lo,
        ci_upper=hi,
        ci_mode=ci_mode,
        alpha=alpha,
        heterogeneity=het,
    )
