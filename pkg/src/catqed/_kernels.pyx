# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Semantics mirror ``_kernels_py`` exactly."""

import numpy as np
cimport numpy as cnp

from catqed import _kernels_py
from libc.math cimport exp, sqrt, M_PI

cnp.import_array()

NAME = "cython"


def wigner_grid(rho, beta_re, beta_im):
    coef_arr, a_arr, b_arr, c_arr = _kernels_py.laguerre_tables(rho)
    cdef const double complex[:, ::1] coef = coef_arr
    cdef const double[:, ::1] ta = a_arr
    cdef const double[:, ::1] tb = b_arr
    cdef const double[::1] tc = c_arr
    cdef const double[::1] br = np.ascontiguousarray(beta_re, dtype=np.float64)
    cdef const double[::1] bi = np.ascontiguousarray(beta_im, dtype=np.float64)
    cdef Py_ssize_t dim = coef.shape[0]
    cdef Py_ssize_t nre = br.shape[0]
    cdef Py_ssize_t nim = bi.shape[0]
    cdef Py_ssize_t npts = nre * nim
    # per-point state, laid out so the innermost loop runs over points
    cdef double[::1] x = np.empty(npts)
    cdef double[::1] root = np.empty(npts)
    cdef double[::1] pr = np.empty(npts)
    cdef double[::1] pi_ = np.empty(npts)
    cdef double[::1] rr = np.ones(npts)
    cdef double[::1] ri = np.zeros(npts)
    cdef double[::1] seed = np.empty(npts)
    cdef double[::1] f = np.empty(npts)
    cdef double[::1] f_prev = np.empty(npts)
    total_arr = np.zeros(npts)
    cdef double[::1] total = total_arr
    cdef Py_ssize_t i, j, k, n, q
    cdef double gr, gi, tmp, cr, ci, ak, bk, lin, inv, fn

    for i in range(nre):
        for j in range(nim):
            q = i * nim + j
            gr = 2.0 * br[i]
            gi = 2.0 * bi[j]
            x[q] = gr * gr + gi * gi
            root[q] = sqrt(x[q])
            if x[q] > 0:
                pr[q] = gr / root[q]
                pi_[q] = gi / root[q]
            else:
                pr[q] = 1.0
                pi_[q] = 0.0
            seed[q] = exp(-0.5 * x[q])

    for k in range(dim):
        if k:
            for q in range(npts):
                tmp = rr[q] * pr[q] - ri[q] * pi_[q]
                ri[q] = rr[q] * pi_[q] + ri[q] * pr[q]
                rr[q] = tmp
                seed[q] = seed[q] * root[q] * tc[k]
        cr = coef[k, 0].real
        ci = coef[k, 0].imag
        ak = ta[k, 0]
        for q in range(npts):
            f_prev[q] = seed[q]
            total[q] += (cr * rr[q] - ci * ri[q]) * seed[q]
            f[q] = seed[q] * (1.0 + k - x[q]) * ak
        for n in range(1, dim - k):
            cr = coef[k, n].real
            ci = coef[k, n].imag
            for q in range(npts):
                total[q] += (cr * rr[q] - ci * ri[q]) * f[q]
            if n + 1 < dim - k:
                ak = ta[k, n] * (2 * n + k + 1)
                bk = tb[k, n] * (n + k)
                lin = ta[k, n]
                inv = 1.0 / (n + 1.0)
                for q in range(npts):
                    fn = ((ak - x[q] * lin) * f[q] - bk * f_prev[q]) * inv
                    f_prev[q] = f[q]
                    f[q] = fn
    return (2.0 / M_PI) * total_arr.reshape(nre, nim)


cdef double _waiting_time(double[::1] p, Py_ssize_t dim, double kappa,
                          double horizon, double u):
    """Root of survival(tau) = u in [0, horizon]; -1 when no jump occurs."""
    cdef Py_ssize_t n, it
    cdef double surv = 0.0, tau = 0.0, f, df, w, step
    for n in range(dim):
        surv += p[n] * exp(-kappa * n * horizon)
    if surv > u:
        return -1.0
    for it in range(200):
        f = -u
        df = 0.0
        for n in range(dim):
            w = p[n] * exp(-kappa * n * tau)
            f += w
            df -= kappa * n * w
        if df == 0.0:
            break
        step = -f / df
        tau = tau + step
        if tau > horizon:
            tau = horizon
        if step <= 1e-15 * (1.0 + tau):
            break
    return tau


def sample_jumps(pops, double kappa, double t_final, uniforms):
    p_in = np.asarray(pops, dtype=np.float64)
    p_in = p_in / p_in.sum()
    cdef const double[::1] p0 = np.ascontiguousarray(p_in)
    cdef const double[:, ::1] u = np.ascontiguousarray(uniforms, dtype=np.float64)
    cdef Py_ssize_t n_shots = u.shape[0]
    cdef Py_ssize_t width = u.shape[1]
    cdef Py_ssize_t dim = p0.shape[0]
    counts_arr = np.zeros(n_shots, dtype=np.int64)
    times_arr = np.full((n_shots, width), np.nan)
    cdef long long[::1] counts = counts_arr
    cdef double[:, ::1] times = times_arr
    cdef double[::1] p = np.empty(dim, dtype=np.float64)
    cdef Py_ssize_t s, j, n
    cdef double t, tau, excited, norm
    if kappa <= 0.0 or t_final <= 0.0:
        return counts_arr, times_arr
    for s in range(n_shots):
        for n in range(dim):
            p[n] = p0[n]
        t = 0.0
        j = 0
        while j < width:
            excited = 0.0
            for n in range(1, dim):
                excited += p[n]
            if excited <= 0.0:
                break
            tau = _waiting_time(p, dim, kappa, t_final - t, u[s, j])
            if tau < 0.0:
                break
            t += tau
            times[s, j] = t
            j += 1
            norm = 0.0
            for n in range(dim - 1):
                p[n] = (n + 1) * p[n + 1] * exp(-kappa * (n + 1) * tau)
                norm += p[n]
            p[dim - 1] = 0.0
            for n in range(dim - 1):
                p[n] /= norm
        counts[s] = j
    return counts_arr, times_arr
