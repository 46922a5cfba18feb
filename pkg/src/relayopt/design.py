"""Robust joint design of the source precoder and relay forwarding matrix.

Both hops are whitened by ``(alpha * budget * Psi + sigma2 * I)^{-1/2}``. The
optimal matrices are diagonalized by the singular vectors of the whitened
estimates, which reduces the design to a per-stream power allocation solved
by alternating water-filling. The naive baseline runs the same pipeline with
the error terms dropped and is then evaluated under the true statistics.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .channel import ChannelEstimate
from .errors import NonPositiveDenominator
from .mse import LinkStats, achievable_rate, forwarding_from_whitened, relay_power, whitened_from_forwarding
from .numerics import hermitian_inv_sqrt, svd_desc

log = logging.getLogger(__name__)

_STATUS = {kernels.CONVERGED: "converged", kernels.MAX_ITER: "max_iter", kernels.DEAD: "dead"}


@dataclass(frozen=True)
class WhitenedHop:
    """Ordered SVD ``u @ diag(lam) @ v^H`` of ``h_bar @ whitener``."""

    u: np.ndarray
    lam: np.ndarray
    v: np.ndarray
    whitener: np.ndarray


@dataclass(frozen=True)
class PowerAllocation:
    p2: np.ndarray
    f2: np.ndarray
    mu_p: float
    mu_f: float
    objective_nats: float
    n_iter: int = 0
    status: str = "converged"
    trace: np.ndarray = field(default_factory=lambda: np.zeros(0))
    eta_p: float | None = None
    eta_f: float | None = None


@dataclass(frozen=True)
class TransceiverDesign:
    P: np.ndarray
    F_tilde: np.ndarray
    F: np.ndarray
    allocation: PowerAllocation
    rate_bits: float
    stream_order: np.ndarray


def whiten_hop(estimate: ChannelEstimate, budget: float) -> WhitenedHop:
    if not budget > 0:
        raise ValueError("budget must be positive")
    e = estimate.error
    whitener = hermitian_inv_sqrt(e.alpha * budget * e.psi + e.sigma2 * np.eye(e.size))
    svd = svd_desc(estimate.h_bar @ whitener)
    return WhitenedHop(svd.u, svd.s, svd.v, whitener)


def waterfill_f_given_p(p2, lambda_sr, lambda_rd, p_r: float):
    """Relay stream powers for fixed source powers; returns ``(f2, mu_f)``.

    If no stream has positive gain on both hops the allocation is all zeros,
    ``mu_f`` is 0 and a warning is issued.
    """
    lsr2 = np.asarray(lambda_sr, float) ** 2
    lrd2 = np.asarray(lambda_rd, float) ** 2
    f2, mu, ok = kernels.waterfill(np.asarray(p2, float) * lsr2, lrd2, float(p_r))
    if not ok:
        warnings.warn("no stream with positive gain on both hops", RuntimeWarning, stacklevel=2)
    return f2, mu


def waterfill_p_given_f(f2, lambda_sr, lambda_rd, p_s: float):
    """Mirror of :func:`waterfill_f_given_p` with the hops swapped."""
    lsr2 = np.asarray(lambda_sr, float) ** 2
    lrd2 = np.asarray(lambda_rd, float) ** 2
    p2, mu, ok = kernels.waterfill(np.asarray(f2, float) * lrd2, lsr2, float(p_s))
    if not ok:
        warnings.warn("no stream with positive gain on both hops", RuntimeWarning, stacklevel=2)
    return p2, mu


def per_stream_objective(p2_i, f2_i, lsr_i, lrd_i):
    """Log of one stream's MSE; nonpositive, zero when either power is zero."""
    return kernels.stream_objective(
        np.atleast_1d(p2_i), np.atleast_1d(f2_i), np.atleast_1d(lsr_i) ** 2, np.atleast_1d(lrd_i) ** 2
    ).reshape(np.shape(p2_i))


def alternating_power_allocation(
    lambda_sr,
    lambda_rd,
    p_s: float,
    p_r: float,
    tol: float = 1e-8,
    max_iter: int = 200,
    multistart: int = 0,
    seed: int = 0,
    p2_init=None,
    support_starts: bool = True,
    xtol: float = 1e-12,
) -> PowerAllocation:
    """Minimize the summed stream objective under both sum-power constraints.

    Starts from the uniform source allocation over streams with positive gain
    on both hops. With ``support_starts`` it also starts from uniform power on
    the ``k`` strongest usable streams for every smaller ``k``: a stream that
    reaches zero power never comes back, so the alternation cannot leave a
    support on its own and the scalar problem can have its optimum on a
    reduced support. ``multistart`` adds random Dirichlet starts. The lowest
    final objective wins. Streams with a zero singular value on either hop
    keep zero power.
    """
    lsr = np.asarray(lambda_sr, float)
    lrd = np.asarray(lambda_rd, float)
    if lsr.shape != lrd.shape or lsr.ndim != 1:
        raise ValueError("lambda_sr and lambda_rd must be 1-D of equal length")
    lsr2, lrd2 = lsr**2, lrd**2
    usable = (lsr2 > 0) & (lrd2 > 0)
    n_use = int(usable.sum())

    starts = []
    if p2_init is not None:
        starts.append(np.asarray(p2_init, float))
    elif n_use:
        starts.append(np.where(usable, p_s / n_use, 0.0))
    else:
        starts.append(np.zeros_like(lsr))
    if support_starts and p2_init is None:
        idx = np.flatnonzero(usable)
        for k in range(1, n_use):
            p0 = np.zeros_like(lsr)
            p0[idx[:k]] = p_s / k
            starts.append(p0)
    if multistart and n_use:
        rng = np.random.default_rng(seed)
        for _ in range(multistart):
            w = np.zeros_like(lsr)
            w[usable] = rng.dirichlet(np.ones(n_use))
            starts.append(p_s * w)

    best = None
    for p0 in starts:
        p2, f2, mu_p, mu_f, n_iter, status, trace = kernels.alternate(
            lsr2, lrd2, float(p_s), float(p_r), p0, float(tol), int(max_iter), float(xtol)
        )
        obj = kernels.total_objective(p2, f2, lsr2, lrd2)
        cand = PowerAllocation(p2, f2, mu_p, mu_f, obj, n_iter, _STATUS[status], trace)
        if best is None or cand.objective_nats < best.objective_nats - 1e-12:
            best = cand
    if best.status == "dead":
        warnings.warn("no stream with positive gain on both hops", RuntimeWarning, stacklevel=2)
    elif best.status == "max_iter":
        log.warning("alternating water-filling hit max_iter=%d", max_iter)
    return best


def eta_scaling(v_cols, psi, alpha: float, budget: float, sigma2: float, lambda_diag2) -> float:
    """Scale that makes the structured solution consistent with its own
    error-leakage noise term.

    Solves ``eta = alpha * Tr(X X^H Psi) + sigma2`` for
    ``X = sqrt(eta) W V diag(sqrt(lambda_diag2))``.
    """
    psi = np.asarray(psi, dtype=complex)
    w = hermitian_inv_sqrt(alpha * budget * psi + sigma2 * np.eye(psi.shape[0]))
    v = np.asarray(v_cols, dtype=complex)
    m = v.conj().T @ w @ psi @ w @ v
    t = float(np.sum(np.diag(m).real * np.asarray(lambda_diag2, float)))
    denom = 1.0 - alpha * t
    if not denom > 0:
        raise NonPositiveDenominator(f"eta denominator is {denom:.3e}")
    return sigma2 / denom


def assemble_design(
    hop1_w: WhitenedHop,
    hop2_w: WhitenedHop,
    alloc: PowerAllocation,
    stats: LinkStats,
    v1=None,
) -> TransceiverDesign:
    """Build ``P``, ``F_tilde`` and ``F`` from the per-stream allocation.

    Streams are reordered so the first-hop composite gains ``p2 * lsr^2``
    decrease; the pairing of hop-1 and hop-2 singular directions is kept.
    ``v1`` is the free ``N x N`` unitary on the right of ``P`` (identity by
    default).
    """
    n = stats.dims.n_streams
    lsr = hop1_w.lam[:n]
    order = np.argsort(-(alloc.p2 * lsr**2), kind="stable")
    p2, f2 = alloc.p2[order], alloc.f2[order]
    v_sr = hop1_w.v[:, order]
    u_sr = hop1_w.u[:, order]
    v_rd = hop2_w.v[:, order]
    e1, e2 = stats.hop1.error, stats.hop2.error

    eta_p = eta_scaling(v_sr, e1.psi, e1.alpha, stats.p_s, e1.sigma2, p2)
    eta_f = eta_scaling(v_rd, e2.psi, e2.alpha, stats.p_r, e2.sigma2, f2)
    v1 = np.eye(n) if v1 is None else np.asarray(v1, dtype=complex)

    P = np.sqrt(eta_p) * hop1_w.whitener @ (v_sr * np.sqrt(p2)) @ v1.conj().T
    F_tilde = np.sqrt(eta_f) * hop2_w.whitener @ (v_rd * np.sqrt(f2)) @ u_sr.conj().T
    F = forwarding_from_whitened(F_tilde, P, stats)
    rate = achievable_rate(P, F, stats)
    return TransceiverDesign(
        P, F_tilde, F, replace(alloc, eta_p=eta_p, eta_f=eta_f), rate, order
    )


def design_robust(
    stats: LinkStats,
    tol: float = 1e-8,
    max_iter: int = 200,
    multistart: int = 0,
    seed: int = 0,
    v1=None,
) -> TransceiverDesign:
    n = stats.dims.n_streams
    w1 = whiten_hop(stats.hop1, stats.p_s)
    w2 = whiten_hop(stats.hop2, stats.p_r)
    alloc = alternating_power_allocation(
        w1.lam[:n], w2.lam[:n], stats.p_s, stats.p_r, tol, max_iter, multistart, seed
    )
    return assemble_design(w1, w2, alloc, stats, v1=v1)


def design_naive(stats: LinkStats, rescale_relay: bool = True, **kwargs) -> TransceiverDesign:
    """Design on the estimates alone, then evaluate under the true errors.

    With ``rescale_relay`` the forwarding matrix is scaled so the relay meets
    ``p_r`` for the true received covariance (the naive design under-counts it).
    """
    d = design_robust(stats.perfect_csi(), **kwargs)
    F = d.F
    if rescale_relay:
        F = F * np.sqrt(stats.p_r / relay_power(d.P, F, stats))
    F_tilde = whitened_from_forwarding(F, d.P, stats)
    return replace(d, F=F, F_tilde=F_tilde, rate_bits=achievable_rate(d.P, F, stats))
