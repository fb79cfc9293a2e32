"""NumPy implementations of the hot kernels.

These are the reference versions; ``_ckernels.pyx`` mirrors them loop for
loop and must agree to rounding error.
"""

import numpy as np


def simex_moments(gamma, tau, se_gamma, sqrt_zeta, normals):
    """Per-level moments of the naive slope on noise-inflated mediator effects.

    Parameters
    ----------
    gamma, tau, se_gamma : ndarray, shape (K,)
    sqrt_zeta : ndarray, shape (m,)
        Square roots of the positive noise-inflation levels.
    normals : ndarray, shape (m, B, K)
        Standard normal draws.

    Returns
    -------
    mean_slope, mean_var, var_slope : ndarray, shape (m,)
        Average slope over the B replicates, average classical OLS variance
        of the slope, and the between-replicate variance of the slope
        (``ddof=1``).
    """
    K = gamma.shape[0]
    x = gamma + (sqrt_zeta[:, None, None] * se_gamma) * normals
    xc = x - x.mean(axis=-1, keepdims=True)
    yc = tau - tau.mean()
    sxx = np.einsum("mbk,mbk->mb", xc, xc)
    sxy = xc @ yc
    syy = yc @ yc
    slope = sxy / sxx
    rss = np.maximum(syy - slope * sxy, 0.0)
    var = rss / (K - 2) / sxx
    return slope.mean(axis=1), var.mean(axis=1), slope.var(axis=1, ddof=1)


def best_split(x, t, y, x_est, t_est, min_leaf, min_arm, penalty):
    """Best threshold on one covariate for a treatment-effect split.

    ``x``, ``t``, ``y`` are the splitting-sample values sorted by ``x``;
    ``x_est``/``t_est`` the estimation-sample values sorted by ``x_est``.
    A split sends ``x <= threshold`` left. The gain is
    ``w_L w_R [(tau_L - tau_R)^2 - penalty (V_L + V_R)]`` where ``V`` is the
    Neyman variance of each child's difference in means.

    Returns ``(gain, threshold, found)``; ties keep the smallest threshold.
    """
    n = x.shape[0]
    if n < 2:
        return 0.0, 0.0, False
    c = 1.0 - t
    nt_l = np.cumsum(t)[:-1]
    nc_l = np.cumsum(c)[:-1]
    st_l = np.cumsum(t * y)[:-1]
    sc_l = np.cumsum(c * y)[:-1]
    qt_l = np.cumsum(t * y * y)[:-1]
    qc_l = np.cumsum(c * y * y)[:-1]
    nt_r = t.sum() - nt_l
    nc_r = c.sum() - nc_l
    st_r = (t * y).sum() - st_l
    sc_r = (c * y).sum() - sc_l
    qt_r = (t * y * y).sum() - qt_l
    qc_r = (c * y * y).sum() - qc_l
    n_l = np.arange(1, n, dtype=float)
    n_r = n - n_l

    pos = np.searchsorted(x_est, x[:-1], side="right")
    te_cum = np.concatenate(([0.0], np.cumsum(t_est)))
    ne_l = pos.astype(float)
    ne_r = x_est.shape[0] - ne_l
    nte_l = te_cum[pos]
    nte_r = te_cum[-1] - nte_l
    nce_l = ne_l - nte_l
    nce_r = ne_r - nte_r

    ok = (
        (x[:-1] < x[1:])
        & (n_l >= min_leaf) & (n_r >= min_leaf)
        & (ne_l >= min_leaf) & (ne_r >= min_leaf)
        & (nt_l >= min_arm) & (nc_l >= min_arm) & (nt_r >= min_arm) & (nc_r >= min_arm)
        & (nte_l >= min_arm) & (nce_l >= min_arm) & (nte_r >= min_arm) & (nce_r >= min_arm)
    )
    if not ok.any():
        return 0.0, 0.0, False
    with np.errstate(divide="ignore", invalid="ignore"):
        mt_l, mc_l = st_l / nt_l, sc_l / nc_l
        mt_r, mc_r = st_r / nt_r, sc_r / nc_r
        v_l = (np.maximum(qt_l - nt_l * mt_l * mt_l, 0.0) / (nt_l - 1.0) / nt_l
               + np.maximum(qc_l - nc_l * mc_l * mc_l, 0.0) / (nc_l - 1.0) / nc_l)
        v_r = (np.maximum(qt_r - nt_r * mt_r * mt_r, 0.0) / (nt_r - 1.0) / nt_r
               + np.maximum(qc_r - nc_r * mc_r * mc_r, 0.0) / (nc_r - 1.0) / nc_r)
        d = (mt_l - mc_l) - (mt_r - mc_r)
        gain = (n_l / n) * (n_r / n) * (d * d - penalty * (v_l + v_r))
    gain = np.where(ok, gain, -np.inf)
    i = int(np.argmax(gain))
    return float(gain[i]), float(x[i]), True
