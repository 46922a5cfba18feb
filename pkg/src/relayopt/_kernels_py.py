"""Pure-Python scalar kernels: per-stream objective, Lagrangian water-filling
and the alternating allocation loop.

``_kernels.pyx`` mirrors this module line for line; keep them in sync.
"""
from __future__ import annotations

import math

import numpy as np

CONVERGED = 0
MAX_ITER = 1
DEAD = 2

_BISECT_MAX = 200
_POWER_RTOL = 1e-14


def stream_objective(p2, f2, lsr2, lrd2) -> np.ndarray:
    """Per-stream log MSE, ``log((a+b+1) / ((a+1)(b+1)))`` with
    ``a = p2*lsr2`` and ``b = f2*lrd2``."""
    a = np.asarray(p2, float) * np.asarray(lsr2, float)
    b = np.asarray(f2, float) * np.asarray(lrd2, float)
    return np.log1p(-(a / (1.0 + a)) * (b / (1.0 + b)))


def total_objective(p2, f2, lsr2, lrd2) -> float:
    # libm log1p and a left-to-right sum, as in the compiled loop, so both
    # backends take identical stopping decisions
    s = 0.0
    for p, f, g1, g2 in zip(np.asarray(p2, float).tolist(), np.asarray(f2, float).tolist(),
                            np.asarray(lsr2, float).tolist(), np.asarray(lrd2, float).tolist()):
        a, b = p * g1, f * g2
        s += math.log1p(-(a / (1.0 + a)) * (b / (1.0 + b)))
    return s


def _level(snr, gain2, usable, mu):
    out = np.zeros_like(snr)
    a = snr[usable]
    g = gain2[usable]
    # stable form of (-a + sqrt(a^2 + 4 a g / mu)) / 2
    c = 2.0 * a * g / (mu * (a + np.sqrt(a * a + 4.0 * a * g / mu)))
    out[usable] = np.maximum((c - 1.0) / g, 0.0)
    return out


def waterfill(snr, gain2, budget: float):
    """Minimize the stream objective over one hop's powers.

    ``snr`` holds the other hop's per-stream SNRs (held fixed) and ``gain2``
    the squared singular values of this hop. Returns ``(x2, mu, ok)`` where
    ``sum(x2) == budget`` and ``mu`` is the Lagrange multiplier; ``ok`` is
    False when no stream has positive gain on both hops.
    """
    snr = np.asarray(snr, float)
    gain2 = np.asarray(gain2, float)
    usable = (snr > 0.0) & (gain2 > 0.0)
    if not usable.any():
        return np.zeros_like(snr), 0.0, False

    def total(mu):
        return sum(_level(snr, gain2, usable, mu).tolist())

    # sum(level) is continuous and strictly decreasing in mu where positive
    mu = 1.0
    if total(mu) > budget:
        lo = mu
        while total(mu) > budget:
            lo = mu
            mu *= 2.0
        hi = mu
    else:
        hi = mu
        while total(mu) < budget:
            hi = mu
            mu *= 0.5
        lo = mu
    best_mu, best_err = lo, abs(total(lo) - budget)
    err_hi = abs(total(hi) - budget)
    if err_hi < best_err:
        best_mu, best_err = hi, err_hi
    for _ in range(_BISECT_MAX):
        if best_err <= _POWER_RTOL * budget or hi - lo <= 1e-16 * hi:
            break
        mid = math.sqrt(lo * hi)
        if mid <= lo or mid >= hi:
            mid = 0.5 * (lo + hi)
        s = total(mid)
        if abs(s - budget) < best_err:
            best_mu, best_err = mid, abs(s - budget)
        if s > budget:
            lo = mid
        else:
            hi = mid
    return _level(snr, gain2, usable, best_mu), best_mu, True


def alternate(lsr2, lrd2, p_s, p_r, p2_init, tol, max_iter, xtol=1e-12):
    """Alternating water-filling over the two hops.

    Stops when a full iteration lowers the objective by less than ``tol``
    and moves no source power by more than ``xtol * p_s``; the second test
    makes the returned pair a fixed point of both half-steps.

    Returns ``(p2, f2, mu_p, mu_f, n_iter, status, trace)`` where ``trace``
    holds the objective after every half-step (f-step first).
    """
    lsr2 = np.asarray(lsr2, float)
    lrd2 = np.asarray(lrd2, float)
    p2 = np.array(p2_init, float)
    f2 = np.zeros_like(p2)
    mu_p = mu_f = 0.0
    trace = []
    prev = None
    status = MAX_ITER
    n_iter = 0
    for it in range(1, max_iter + 1):
        n_iter = it
        f2, mu_f, ok = waterfill(p2 * lsr2, lrd2, p_r)
        if not ok:
            p2 = np.zeros_like(p2)
            status = DEAD
            break
        obj = total_objective(p2, f2, lsr2, lrd2)
        trace.append(obj)
        if prev is None:
            prev = obj
        p_old = p2
        p2, mu_p, ok = waterfill(f2 * lrd2, lsr2, p_s)
        step = float(np.max(np.abs(p2 - p_old)))
        obj = total_objective(p2, f2, lsr2, lrd2)
        trace.append(obj)
        if abs(prev - obj) < tol and step <= xtol * p_s:
            status = CONVERGED
            break
        prev = obj
    return p2, f2, mu_p, mu_f, n_iter, status, np.array(trace)
