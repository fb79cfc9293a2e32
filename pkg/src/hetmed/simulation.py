"""Monte Carlo experiments: data-generating processes and calibration runs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._rng import substream
from .core import EffectDataset, IndividualDataset, LatentEffects, dataset_from_arrays
from .errors import HetmedError, InputError, NumericalError
from .estimators import SimexConfig, estimate_slope
from .inference import aggregate_gamma, analyze, iu_test
from .subgroups import estimate_group_effects


@dataclass(frozen=True)
class ConfoundedDgpConfig:
    """Individual-level DGP with group-specific mediator effects and a shared confounder.

    ``M = 1 + gamma_g T + kappa u + e_M`` and ``Y = 1 + T + M + kappa u + e_Y``
    with ``T, u, e_M, e_Y`` standard normal.
    """

    kappa: float = 0.0
    gamma_set: tuple[float, ...] = tuple(float(g) for g in range(1, 11))
    n_per_group: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.kappa < 0:
            raise InputError("kappa must be non-negative")
        if len(self.gamma_set) == 0:
            raise InputError("gamma_set must be non-empty")
        if self.n_per_group < 3:
            raise InputError("n_per_group must be at least 3")


@dataclass(frozen=True)
class AggregateDgpConfig:
    """Subgroup-level DGP: ``tau_k = delta + beta gamma_k + e_k``.

    ``gamma_k ~ N(gamma_mean, gamma_sd)``, ``e_k ~ N(0, 1)``, and the
    standard errors of both estimates are drawn from a gamma distribution.
    """

    K: int = 30
    beta: float = 0.0
    delta_mean: float = 4.0
    gamma_mean: float = 2.0
    gamma_sd: float = 1.0
    se_shape: float = 1.0
    se_rate: float = 1.0
    n_per_group: int = 100
    measurement_noise: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.K < 3:
            raise InputError("insufficient subgroups")


def dgp_confounded(config: ConfoundedDgpConfig) -> tuple[IndividualDataset, float]:
    """Draw a dataset from :class:`ConfoundedDgpConfig`; returns it and the true ACME."""
    rng = substream(config.seed, "dgp_confounded")
    G, n = len(config.gamma_set), config.n_per_group
    N = G * n
    gamma = np.repeat(np.asarray(config.gamma_set, dtype=float), n)
    t = rng.standard_normal(N)
    u = rng.standard_normal(N)
    e_m = rng.standard_normal(N)
    e_y = rng.standard_normal(N)
    m = 1 + gamma * t + config.kappa * u + e_m
    y = 1 + t + m + config.kappa * u + e_y
    labels = np.repeat(np.arange(1, G + 1), n).astype(object)
    data = IndividualDataset(t, m, y, group_label=labels)
    # mediator enters the outcome with coefficient one
    return data, float(np.mean(config.gamma_set))


def _aggregate_draws(rng, K, cfg):
    gamma = rng.normal(cfg.gamma_mean, cfg.gamma_sd, K)
    eps = rng.standard_normal(K)
    scale = 1.0 / cfg.se_rate
    se_u = rng.gamma(cfg.se_shape, scale, K)
    se_v = rng.gamma(cfg.se_shape, scale, K)
    z_u = rng.standard_normal(K)
    z_v = rng.standard_normal(K)
    return gamma, eps, se_u, se_v, z_u, z_v


def _aggregate_dataset(gamma, eps, se_u, se_v, z_u, z_v, cfg, se_multiplier=1.0):
    delta = cfg.delta_mean + eps
    tau = delta + cfg.beta * gamma
    if cfg.measurement_noise:
        se_u = se_u * se_multiplier
        se_v = se_v * se_multiplier
    else:
        se_u = np.zeros_like(gamma)
        se_v = np.zeros_like(gamma)
    data = dataset_from_arrays(gamma + se_u * z_u, se_u, tau + se_v * z_v, se_v,
                               n=np.full(gamma.size, cfg.n_per_group))
    return data, LatentEffects(gamma, delta, tau, cfg.beta)


def dgp_aggregate(config: AggregateDgpConfig) -> tuple[EffectDataset, LatentEffects]:
    """Draw observed subgroup effects and the latent truth behind them."""
    rng = substream(config.seed, "dgp_aggregate")
    draws = _aggregate_draws(rng, config.K, config)
    return _aggregate_dataset(*draws, config)


def traditional_acme(data: IndividualDataset, B: int = 500, seed: int = 0,
                     alpha: float = 0.05) -> tuple[float, tuple[float, float]]:
    """Product-of-coefficients ACME under sequential ignorability.

    Pools all units, regresses the mediator on the treatment and the outcome
    on treatment and mediator, and multiplies the two mediator coefficients.
    The interval is a percentile bootstrap over units.
    """
    if B < 199:
        raise InputError("bootstrap needs B >= 199")
    t, m, y = data.treatment, data.mediator, data.outcome
    n = t.size

    def fit(weights):
        # weighted normal equations, one row per replicate
        w = np.atleast_2d(weights)
        s1, st, sm = w.sum(1), w @ t, w @ m
        stt, stm, smm = w @ (t * t), w @ (t * m), w @ (m * m)
        sy, sty, smy = w @ y, w @ (t * y), w @ (m * y)
        var_t = stt - st * st / s1
        with np.errstate(divide="ignore", invalid="ignore"):
            a = (stm - st * sm / s1) / var_t
            ctt, ctm, cmm = var_t, stm - st * sm / s1, smm - sm * sm / s1
            cty, cmy = sty - st * sy / s1, smy - sm * sy / s1
            det = ctt * cmm - ctm * ctm
            b = (ctt * cmy - ctm * cty) / det
        return a * b, det

    est, det = fit(np.ones(n))
    if not det[0] > 1e-12 * n * n:
        raise NumericalError("degenerate regression")
    rng = substream(seed, "traditional_boot")
    draws = np.empty(B)
    chunk = 100
    for start in range(0, B, chunk):
        size = min(chunk, B - start)
        idx = rng.integers(0, n, size=(size, n)) + (np.arange(size) * n)[:, None]
        counts = np.bincount(idx.ravel(), minlength=size * n).reshape(size, n).astype(float)
        draws[start:start + size] = fit(counts)[0]
    draws = draws[np.isfinite(draws)]
    lo, hi = np.quantile(draws, [alpha / 2, 1 - alpha / 2])
    return float(est[0]), (float(lo), float(hi))


@dataclass(frozen=True)
class Table2Row:
    kappa: float
    hte_acme: float
    hte_ci_lower: float
    hte_ci_upper: float
    trad_acme: float
    trad_ci_lower: float
    trad_ci_upper: float
    reps: int
    hte_coverage: float
    trad_coverage: float
    true_acme: float


def hte_pipeline(data: IndividualDataset, estimator: str = "simex", seed: int = 0, alpha: float = 0.05,
                 ci_mode: str = "endpoint_product", simex_config: SimexConfig | None = None):
    """Group effects from labels, then slope estimation and inference."""
    dataset = estimate_group_effects(data)
    fit = estimate_slope(dataset, estimator, seed=seed, simex_config=simex_config)
    return analyze(dataset, fit, alpha, ci_mode)


def run_table2(kappas: Sequence[float] = (0, 1, 2, 3, 4), reps: int = 50, seed: int = 0,
               n_per_group: int = 500, gamma_set: Sequence[float] | None = None,
               traditional_B: int = 500, alpha: float = 0.05) -> list[Table2Row]:
    """Compare the subgroup-slope method with the traditional baseline across confounding levels.

    Each row averages ``reps`` independent datasets; coverage columns give
    the share of runs whose interval contains the true ACME.
    """
    gamma_set = tuple(float(g) for g in (gamma_set or range(1, 11)))
    rows = []
    for ki, kappa in enumerate(kappas):
        hte, trad = [], []
        for r in range(reps):
            rep_seed = _derived_seed(seed, "table2", ki, r)
            cfg = ConfoundedDgpConfig(float(kappa), gamma_set, n_per_group, rep_seed)
            data, truth = dgp_confounded(cfg)
            res = hte_pipeline(data, seed=rep_seed, alpha=alpha)
            hte.append((res.acme_hat, res.ci_lower, res.ci_upper))
            est, (lo, hi) = traditional_acme(data, traditional_B, rep_seed, alpha)
            trad.append((est, lo, hi))
        hte_a, trad_a = np.array(hte), np.array(trad)
        rows.append(Table2Row(
            kappa=float(kappa),
            hte_acme=_mean(hte_a[:, 0]), hte_ci_lower=_mean(hte_a[:, 1]), hte_ci_upper=_mean(hte_a[:, 2]),
            trad_acme=_mean(trad_a[:, 0]), trad_ci_lower=_mean(trad_a[:, 1]), trad_ci_upper=_mean(trad_a[:, 2]),
            reps=reps,
            hte_coverage=float(np.mean((hte_a[:, 1] <= truth) & (truth <= hte_a[:, 2]))),
            trad_coverage=float(np.mean((trad_a[:, 1] <= truth) & (truth <= trad_a[:, 2]))),
            true_acme=truth,
        ))
    return rows


def _mean(values) -> float:
    return math.fsum(values) / len(values)


def _derived_seed(seed, *keys) -> int:
    return int(substream(seed, *keys).integers(0, 2**63))


@dataclass(frozen=True)
class CalibrationRow:
    K: int
    estimator: str
    beta: float
    rejection_rate: float
    reps: int
    n_failed: int


def _p_overall(dataset, estimator, seed, alpha, simex_config=None, bootstrap_B=999):
    """Overall IU p-value; failed fits count as p = 1."""
    try:
        fit = estimate_slope(dataset, estimator, seed=seed, simex_config=simex_config,
                             bootstrap_B=bootstrap_B)
        return iu_test(fit, aggregate_gamma(dataset), alpha).p_overall, False
    except HetmedError:
        return 1.0, True


def run_calibration(beta: float = 0.0, K_list: Sequence[int] = (5, 10, 30, 50, 100), reps: int = 500,
                    estimators: Sequence[str] = ("bces", "bces_pairs", "bces_wild", "simex"),
                    alpha: float = 0.05, seed: int = 0, bootstrap_B: int = 999,
                    min_reps: int = 200) -> list[CalibrationRow]:
    """Rejection rates of the IU test on the aggregate DGP.

    ``beta=0`` measures size and ``beta != 0`` power. Every estimator sees
    the same datasets within a (K, rep) cell.
    """
    if reps < min_reps:
        raise InputError(f"calibration needs reps >= {min_reps}")
    rows = []
    for K in K_list:
        rejected = {e: 0 for e in estimators}
        failed = {e: 0 for e in estimators}
        for r in range(reps):
            rep_seed = _derived_seed(seed, "calibration", K, r)
            data, _ = dgp_aggregate(AggregateDgpConfig(K=K, beta=beta, seed=rep_seed))
            for e in estimators:
                p, fail = _p_overall(data, e, rep_seed, alpha, bootstrap_B=bootstrap_B)
                rejected[e] += p <= alpha
                failed[e] += fail
        for e in estimators:
            rows.append(CalibrationRow(K, e, beta, rejected[e] / reps, reps, failed[e]))
    return rows


def grow_se_multiplier(k: int, base_groups: int = 10) -> float:
    """Standard-error factor when ``k n / base_groups`` units join each of the base groups.

    With ``se ~ c / sqrt(n)`` this is ``sqrt(n) / sqrt(n + k n / base_groups)``;
    ``n`` cancels.
    """
    return 1.0 / math.sqrt(1.0 + k / base_groups)


@dataclass(frozen=True)
class PowerCurve:
    k: tuple[int, ...]
    add_groups: tuple[float, ...]
    grow_groups: tuple[float, ...]
    reps: int
    n: int
    base_groups: int
    beta: float


def power_curve(base_groups: int = 10, n: int = 100, k_max: int = 10, reps: int = 500, seed: int = 0,
                beta: float = 2.0, estimator: str = "simex", alpha: float = 0.05) -> PowerCurve:
    """Power of adding ``k`` groups versus enlarging the existing groups.

    Both arms reuse the same base draws within a replication, so the
    comparison across ``k`` uses common random numbers.
    """
    if k_max < 1:
        raise InputError("k_max must be at least 1")
    if base_groups < 3:
        raise InputError("insufficient subgroups")
    cfg = AggregateDgpConfig(K=base_groups, beta=beta, n_per_group=n)
    ks = tuple(range(k_max + 1))
    add = np.zeros(len(ks))
    grow = np.zeros(len(ks))
    for r in range(reps):
        rep_seed = _derived_seed(seed, "power", r)
        draws = _aggregate_draws(substream(rep_seed, "power_draws"), base_groups + k_max, cfg)
        base = [d[:base_groups] for d in draws]
        for i, k in enumerate(ks):
            data_add, _ = _aggregate_dataset(*[d[:base_groups + k] for d in draws], cfg)
            data_grow, _ = _aggregate_dataset(*base, cfg, se_multiplier=grow_se_multiplier(k, base_groups))
            add[i] += _p_overall(data_add, estimator, rep_seed, alpha)[0] <= alpha
            grow[i] += _p_overall(data_grow, estimator, rep_seed, alpha)[0] <= alpha
    return PowerCurve(ks, tuple(add / reps), tuple(grow / reps), reps, n, base_groups, beta)


@dataclass(frozen=True)
class PowerRow:
    k: int
    add_groups_power: float
    grow_groups_power: float
