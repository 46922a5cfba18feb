"""MSE matrix, LMMSE equalizer and the log-det rate lower bound.

Shapes: ``P`` is ``n_s x N``, ``F`` is ``n_r x m_r``, the first-hop estimate
is ``m_r x n_s`` and the second-hop estimate is ``m_d x n_r``. Objectives are
in nats internally, reported rates in bits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import ChannelEstimate, SystemDims
from .errors import DimensionMismatch, NotPD
from .numerics import (
    hermitian_inv_sqrt,
    hermitian_sqrt,
    log_det_hermitian_pd,
    solve_hermitian_pd,
)

PHI_EIG_SLACK = 1e-10


@dataclass(frozen=True)
class LinkStats:
    hop1: ChannelEstimate
    hop2: ChannelEstimate
    dims: SystemDims
    p_s: float = 1.0
    p_r: float = 1.0

    def __post_init__(self):
        d = self.dims
        if self.hop1.shape != (d.m_r, d.n_s):
            raise DimensionMismatch(f"first hop must be {d.m_r}x{d.n_s}, got {self.hop1.shape}")
        if self.hop2.shape != (d.m_d, d.n_r):
            raise DimensionMismatch(f"second hop must be {d.m_d}x{d.n_r}, got {self.hop2.shape}")
        if not (self.p_s > 0 and self.p_r > 0):
            raise ValueError("power budgets must be positive")

    def perfect_csi(self) -> "LinkStats":
        """Same estimates with the error terms removed (alpha = 0 on both hops)."""
        return replace(
            self,
            hop1=ChannelEstimate(self.hop1.h_bar, self.hop1.error.without_error()),
            hop2=ChannelEstimate(self.hop2.h_bar, self.hop2.error.without_error()),
        )


@dataclass(frozen=True)
class Transceiver:
    precoder: np.ndarray
    forward: np.ndarray


def _check_p(p: np.ndarray, hop1: ChannelEstimate) -> np.ndarray:
    p = np.asarray(p, dtype=complex)
    if p.ndim != 2 or p.shape[0] != hop1.shape[1]:
        raise DimensionMismatch(f"precoder needs {hop1.shape[1]} rows, got shape {p.shape}")
    return p


def _check_f(f: np.ndarray, stats: LinkStats) -> np.ndarray:
    f = np.asarray(f, dtype=complex)
    want = (stats.hop2.shape[1], stats.hop1.shape[0])
    if f.shape != want:
        raise DimensionMismatch(f"forwarding matrix must be {want}, got {f.shape}")
    return f


def compute_k1(p, hop1: ChannelEstimate) -> np.ndarray:
    """Effective first-hop noise covariance (error leakage plus noise)."""
    p = _check_p(p, hop1)
    e = hop1.error
    leak = e.alpha * np.trace(p @ p.conj().T @ e.psi).real
    return (leak + e.sigma2) * np.eye(hop1.shape[0])


def compute_rx(p, hop1: ChannelEstimate) -> np.ndarray:
    """Covariance of the signal received at the relay."""
    p = _check_p(p, hop1)
    hp = hop1.h_bar @ p
    return hp @ hp.conj().T + compute_k1(p, hop1)


def compute_k2(f, r_x, hop2: ChannelEstimate) -> np.ndarray:
    f = np.asarray(f, dtype=complex)
    if f.shape[0] != hop2.shape[1] or f.shape[1] != np.shape(r_x)[0]:
        raise DimensionMismatch(f"forwarding matrix shape {f.shape} is inconsistent")
    e = hop2.error
    leak = e.alpha * np.trace(f @ r_x @ f.conj().T @ e.psi).real
    return (leak + e.sigma2) * np.eye(hop2.shape[0])


def _end_to_end(p, f, stats: LinkStats):
    p = _check_p(p, stats.hop1)
    f = _check_f(f, stats)
    r_x = compute_rx(p, stats.hop1)
    k2 = compute_k2(f, r_x, stats.hop2)
    h2f = stats.hop2.h_bar @ f
    b = h2f @ stats.hop1.h_bar @ p
    c = h2f @ r_x @ h2f.conj().T + k2
    return b, 0.5 * (c + c.conj().T)


def lmmse_equalizer(p, f, stats: LinkStats) -> np.ndarray:
    """Destination LMMSE filter ``G = B^H C^{-1}``."""
    b, c = _end_to_end(p, f, stats)
    return solve_hermitian_pd(c, b).conj().T


def mse_for_equalizer(g, p, f, stats: LinkStats) -> np.ndarray:
    """MSE matrix for an arbitrary destination filter ``g``."""
    b, c = _end_to_end(p, f, stats)
    g = np.asarray(g, dtype=complex)
    gb = g @ b
    phi = g @ c @ g.conj().T + np.eye(b.shape[1]) - gb.conj().T - gb
    return 0.5 * (phi + phi.conj().T)


def mse_matrix(p, f, stats: LinkStats) -> np.ndarray:
    """MSE matrix at the LMMSE equalizer, ``I - B^H C^{-1} B``."""
    b, c = _end_to_end(p, f, stats)
    phi = np.eye(b.shape[1]) - b.conj().T @ solve_hermitian_pd(c, b)
    return 0.5 * (phi + phi.conj().T)


def rate_lower_bound(phi) -> float:
    """``-log2 det(phi)`` in bits."""
    phi = np.asarray(phi, dtype=complex)
    try:
        return -log_det_hermitian_pd(phi) / math.log(2.0)
    except NotPD:
        raise NotPD("MSE matrix is not positive definite") from None


def achievable_rate(p, f, stats: LinkStats) -> float:
    return rate_lower_bound(mse_matrix(p, f, stats))


def _pi_p(p, hop1: ChannelEstimate) -> tuple[np.ndarray, np.ndarray]:
    k1 = compute_k1(p, hop1)
    k1_is = hermitian_inv_sqrt(k1)
    a = k1_is @ hop1.h_bar @ p
    return k1, a @ a.conj().T + np.eye(k1.shape[0])


def whitened_from_forwarding(f, p, stats: LinkStats) -> np.ndarray:
    """``F_tilde = F K1^{1/2} Pi_P^{1/2}`` so that ``F R_x F^H = F_tilde F_tilde^H``."""
    p = _check_p(p, stats.hop1)
    f = _check_f(f, stats)
    k1, pi = _pi_p(p, stats.hop1)
    return f @ hermitian_sqrt(k1) @ hermitian_sqrt(pi)


def forwarding_from_whitened(f_tilde, p, stats: LinkStats) -> np.ndarray:
    """Inverse of :func:`whitened_from_forwarding`."""
    p = _check_p(p, stats.hop1)
    f_tilde = _check_f(f_tilde, stats)
    k1, pi = _pi_p(p, stats.hop1)
    return f_tilde @ hermitian_inv_sqrt(pi) @ hermitian_inv_sqrt(k1)


def mse_matrix_whitened(p, f_tilde, stats: LinkStats) -> np.ndarray:
    """MSE matrix written in the ``(P, F_tilde)`` coordinates."""
    p = _check_p(p, stats.hop1)
    f_tilde = _check_f(f_tilde, stats)
    k1, pi = _pi_p(p, stats.hop1)
    e2 = stats.hop2.error
    k2 = (e2.alpha * np.trace(f_tilde @ f_tilde.conj().T @ e2.psi).real + e2.sigma2) * np.eye(
        stats.hop2.shape[0]
    )
    h2ft = stats.hop2.h_bar @ f_tilde
    b = h2ft @ hermitian_inv_sqrt(pi) @ hermitian_inv_sqrt(k1) @ stats.hop1.h_bar @ p
    c = h2ft @ h2ft.conj().T + k2
    phi = np.eye(p.shape[1]) - b.conj().T @ solve_hermitian_pd(c, b)
    return 0.5 * (phi + phi.conj().T)


def relay_power(p, f, stats: LinkStats) -> float:
    f = _check_f(f, stats)
    return float(np.trace(f @ compute_rx(p, stats.hop1) @ f.conj().T).real)
