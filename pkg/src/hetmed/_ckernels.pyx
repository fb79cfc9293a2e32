# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the kernels in ``_pykernels``; same signatures."""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def simex_moments(const double[::1] gamma, const double[::1] tau,
                  const double[::1] se_gamma, const double[::1] sqrt_zeta,
                  const double[:, :, ::1] normals):
    cdef Py_ssize_t K = gamma.shape[0]
    cdef Py_ssize_t m = normals.shape[0]
    cdef Py_ssize_t B = normals.shape[1]
    cdef Py_ssize_t i, b, k
    cdef double s, xbar, ybar, sxx, sxy, syy, slope, rss, d
    cdef double acc_slope, acc_var, mean_b
    out_slope = np.empty(m)
    out_var = np.empty(m)
    out_spread = np.empty(m)
    cdef double[::1] o_slope = out_slope
    cdef double[::1] o_var = out_var
    cdef double[::1] o_spread = out_spread
    cdef double[::1] x = np.empty(K)
    cdef double[::1] yc = np.empty(K)
    cdef double[::1] slopes = np.empty(B)

    ybar = 0.0
    for k in range(K):
        ybar += tau[k]
    ybar /= K
    syy = 0.0
    for k in range(K):
        yc[k] = tau[k] - ybar
        syy += yc[k] * yc[k]

    for i in range(m):
        s = sqrt_zeta[i]
        acc_slope = 0.0
        acc_var = 0.0
        for b in range(B):
            xbar = 0.0
            for k in range(K):
                x[k] = gamma[k] + (s * se_gamma[k]) * normals[i, b, k]
                xbar += x[k]
            xbar /= K
            sxx = 0.0
            sxy = 0.0
            for k in range(K):
                d = x[k] - xbar
                sxx += d * d
                sxy += d * yc[k]
            slope = sxy / sxx
            rss = syy - slope * sxy
            if rss < 0.0:
                rss = 0.0
            slopes[b] = slope
            acc_slope += slope
            acc_var += rss / (K - 2) / sxx
        mean_b = acc_slope / B
        o_slope[i] = mean_b
        o_var[i] = acc_var / B
        acc_var = 0.0
        for b in range(B):
            d = slopes[b] - mean_b
            acc_var += d * d
        o_spread[i] = acc_var / (B - 1)
    return out_slope, out_var, out_spread


cdef inline double _neyman(double nt, double st, double qt, double nc, double sc, double qc):
    cdef double mt = st / nt
    cdef double mc = sc / nc
    cdef double vt = qt - nt * mt * mt
    cdef double vc = qc - nc * mc * mc
    if vt < 0.0:
        vt = 0.0
    if vc < 0.0:
        vc = 0.0
    return vt / (nt - 1.0) / nt + vc / (nc - 1.0) / nc


def best_split(const double[::1] x, const double[::1] t, const double[::1] y,
               const double[::1] x_est, const double[::1] t_est,
               double min_leaf, double min_arm, double penalty):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t ne = x_est.shape[0]
    cdef Py_ssize_t i, j = 0
    cdef double tot_nt = 0.0, tot_nc = 0.0, tot_st = 0.0, tot_sc = 0.0, tot_qt = 0.0, tot_qc = 0.0
    cdef double nt_l = 0.0, nc_l = 0.0, st_l = 0.0, sc_l = 0.0, qt_l = 0.0, qc_l = 0.0
    cdef double nt_r, nc_r, st_r, sc_r, qt_r, qc_r
    cdef double te_tot = 0.0, te_l = 0.0
    cdef double ne_l, ne_r, nte_r, n_l, n_r, d, v_l, v_r, gain
    cdef double best = 0.0, best_thr = 0.0
    cdef bint found = False
    cdef double ti, yi

    if n < 2:
        return 0.0, 0.0, False
    for i in range(n):
        if t[i] != 0.0:
            tot_nt += t[i]
            tot_st += t[i] * y[i]
            tot_qt += t[i] * y[i] * y[i]
        else:
            tot_nc += 1.0
            tot_sc += y[i]
            tot_qc += y[i] * y[i]
    for i in range(ne):
        te_tot += t_est[i]

    for i in range(n - 1):
        ti = t[i]
        yi = y[i]
        nt_l += ti
        nc_l += 1.0 - ti
        st_l += ti * yi
        sc_l += (1.0 - ti) * yi
        qt_l += ti * yi * yi
        qc_l += (1.0 - ti) * yi * yi
        if not (x[i] < x[i + 1]):
            continue
        while j < ne and x_est[j] <= x[i]:
            te_l += t_est[j]
            j += 1
        n_l = i + 1.0
        n_r = n - n_l
        ne_l = <double>j
        ne_r = ne - ne_l
        nte_r = te_tot - te_l
        nt_r = tot_nt - nt_l
        nc_r = tot_nc - nc_l
        if (n_l < min_leaf or n_r < min_leaf or ne_l < min_leaf or ne_r < min_leaf
                or nt_l < min_arm or nc_l < min_arm or nt_r < min_arm or nc_r < min_arm
                or te_l < min_arm or ne_l - te_l < min_arm
                or nte_r < min_arm or ne_r - nte_r < min_arm):
            continue
        st_r = tot_st - st_l
        sc_r = tot_sc - sc_l
        qt_r = tot_qt - qt_l
        qc_r = tot_qc - qc_l
        v_l = _neyman(nt_l, st_l, qt_l, nc_l, sc_l, qc_l)
        v_r = _neyman(nt_r, st_r, qt_r, nc_r, sc_r, qc_r)
        d = (st_l / nt_l - sc_l / nc_l) - (st_r / nt_r - sc_r / nc_r)
        gain = (n_l / n) * (n_r / n) * (d * d - penalty * (v_l + v_r))
        if not found or gain > best:
            best = gain
            best_thr = x[i]
            found = True
    return best, best_thr, found
