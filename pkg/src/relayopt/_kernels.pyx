# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twin of ``_kernels_py``; same algorithm, same results."""
import numpy as np

from libc.math cimport sqrt, log1p, fabs

cdef enum:
    _CONVERGED = 0
    _MAX_ITER = 1
    _DEAD = 2

CONVERGED = _CONVERGED
MAX_ITER = _MAX_ITER
DEAD = _DEAD

cdef int _BISECT_MAX = 200
cdef double _POWER_RTOL = 1e-14


cdef double _objective(const double[::1] p2, const double[::1] f2,
                       const double[::1] lsr2, const double[::1] lrd2) noexcept nogil:
    cdef Py_ssize_t i
    cdef double a, b, s = 0.0
    for i in range(p2.shape[0]):
        a = p2[i] * lsr2[i]
        b = f2[i] * lrd2[i]
        s += log1p(-(a / (1.0 + a)) * (b / (1.0 + b)))
    return s


cdef double _level_sum(const double[::1] snr, const double[::1] gain2, double mu,
                       double[::1] out) noexcept nogil:
    cdef Py_ssize_t i
    cdef double a, g, c, x, s = 0.0
    for i in range(snr.shape[0]):
        a = snr[i]
        g = gain2[i]
        if a > 0.0 and g > 0.0:
            c = 2.0 * a * g / (mu * (a + sqrt(a * a + 4.0 * a * g / mu)))
            x = (c - 1.0) / g
            if x < 0.0:
                x = 0.0
        else:
            x = 0.0
        out[i] = x
        s += x
    return s


cdef bint _waterfill(const double[::1] snr, const double[::1] gain2, double budget,
                     double[::1] out, double* mu_out) noexcept nogil:
    cdef Py_ssize_t i, n = snr.shape[0]
    cdef bint any_usable = False
    cdef double mu, lo, hi, mid, s, err, best_mu, best_err
    cdef int k
    for i in range(n):
        if snr[i] > 0.0 and gain2[i] > 0.0:
            any_usable = True
    if not any_usable:
        for i in range(n):
            out[i] = 0.0
        mu_out[0] = 0.0
        return False

    mu = 1.0
    if _level_sum(snr, gain2, mu, out) > budget:
        lo = mu
        while _level_sum(snr, gain2, mu, out) > budget:
            lo = mu
            mu *= 2.0
        hi = mu
    else:
        hi = mu
        while _level_sum(snr, gain2, mu, out) < budget:
            hi = mu
            mu *= 0.5
        lo = mu
    best_mu = lo
    best_err = fabs(_level_sum(snr, gain2, lo, out) - budget)
    err = fabs(_level_sum(snr, gain2, hi, out) - budget)
    if err < best_err:
        best_mu = hi
        best_err = err
    for k in range(_BISECT_MAX):
        if best_err <= _POWER_RTOL * budget or hi - lo <= 1e-16 * hi:
            break
        mid = sqrt(lo * hi)
        if mid <= lo or mid >= hi:
            mid = 0.5 * (lo + hi)
        s = _level_sum(snr, gain2, mid, out)
        if fabs(s - budget) < best_err:
            best_mu = mid
            best_err = fabs(s - budget)
        if s > budget:
            lo = mid
        else:
            hi = mid
    _level_sum(snr, gain2, best_mu, out)
    mu_out[0] = best_mu
    return True


def stream_objective(p2, f2, lsr2, lrd2):
    a = np.asarray(p2, float) * np.asarray(lsr2, float)
    b = np.asarray(f2, float) * np.asarray(lrd2, float)
    return np.log1p(-(a / (1.0 + a)) * (b / (1.0 + b)))


def total_objective(p2, f2, lsr2, lrd2):
    return _objective(np.ascontiguousarray(p2, dtype=float), np.ascontiguousarray(f2, dtype=float),
                      np.ascontiguousarray(lsr2, dtype=float), np.ascontiguousarray(lrd2, dtype=float))


def waterfill(snr, gain2, double budget):
    cdef double[::1] s = np.ascontiguousarray(snr, dtype=float)
    cdef double[::1] g = np.ascontiguousarray(gain2, dtype=float)
    out = np.zeros(s.shape[0])
    cdef double[::1] o = out
    cdef double mu = 0.0
    cdef bint ok
    with nogil:
        ok = _waterfill(s, g, budget, o, &mu)
    return out, mu, bool(ok)


def alternate(lsr2, lrd2, double p_s, double p_r, p2_init, double tol, int max_iter,
              double xtol=1e-12):
    cdef double[::1] l1 = np.ascontiguousarray(lsr2, dtype=float)
    cdef double[::1] l2 = np.ascontiguousarray(lrd2, dtype=float)
    cdef Py_ssize_t i, n = l1.shape[0]
    p2_arr = np.array(p2_init, dtype=float)
    f2_arr = np.zeros(n)
    trace_arr = np.empty(2 * max(max_iter, 1))
    cdef double[::1] p2 = p2_arr
    cdef double[::1] f2 = f2_arr
    cdef double[::1] trace = trace_arr
    cdef double[::1] work = np.empty(n)
    cdef double[::1] p_old = np.empty(n)
    cdef double mu_p = 0.0, mu_f = 0.0, obj, prev = 0.0, step
    cdef bint have_prev = False, ok
    cdef int it, n_iter = 0, status = _MAX_ITER
    cdef Py_ssize_t n_trace = 0
    with nogil:
        for it in range(1, max_iter + 1):
            n_iter = it
            for i in range(n):
                work[i] = p2[i] * l1[i]
            ok = _waterfill(work, l2, p_r, f2, &mu_f)
            if not ok:
                for i in range(n):
                    p2[i] = 0.0
                status = _DEAD
                break
            obj = _objective(p2, f2, l1, l2)
            trace[n_trace] = obj
            n_trace += 1
            if not have_prev:
                prev = obj
                have_prev = True
            for i in range(n):
                work[i] = f2[i] * l2[i]
                p_old[i] = p2[i]
            _waterfill(work, l1, p_s, p2, &mu_p)
            step = 0.0
            for i in range(n):
                if fabs(p2[i] - p_old[i]) > step:
                    step = fabs(p2[i] - p_old[i])
            obj = _objective(p2, f2, l1, l2)
            trace[n_trace] = obj
            n_trace += 1
            if fabs(prev - obj) < tol and step <= xtol * p_s:
                status = _CONVERGED
                break
            prev = obj
    return p2_arr, f2_arr, mu_p, mu_f, n_iter, status, trace_arr[:n_trace].copy()
