"""Channel-estimation error statistics and random channel sampling.

Errors follow the Kronecker model ``dH = Sigma^{1/2} H_W Psi^{1/2}`` with the
receive-side correlation restricted to ``Sigma = alpha * I``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidRho, NotPD
from .numerics import as_matrix, check_hermitian, hermitian_sqrt


@dataclass(frozen=True)
class SystemDims:
    n_s: int = 4
    m_r: int = 4
    n_r: int = 4
    m_d: int = 4
    n_streams: int = 4

    def __post_init__(self):
        sizes = (self.n_s, self.m_r, self.n_r, self.m_d, self.n_streams)
        if min(sizes) < 1:
            raise ValueError(f"all dimensions must be positive, got {sizes}")
        if self.n_streams > min(sizes[:4]):
            raise ValueError(
                f"n_streams={self.n_streams} exceeds the smallest antenna count {min(sizes[:4])}"
            )


@dataclass(frozen=True)
class HopErrorModel:
    """Error statistics of one hop: column correlation ``psi``, row scale
    ``alpha`` and receiver noise variance ``sigma2``."""

    psi: np.ndarray
    alpha: float
    sigma2: float

    def __post_init__(self):
        psi = check_hermitian(self.psi)
        if np.linalg.eigvalsh(psi)[0] < -1e-12 * max(np.linalg.norm(psi), 1e-12):
            raise ValueError("psi must be positive semi-definite")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "sigma2", float(self.sigma2))

    @property
    def size(self) -> int:
        return self.psi.shape[0]

    def without_error(self) -> "HopErrorModel":
        return HopErrorModel(self.psi, 0.0, self.sigma2)


@dataclass(frozen=True)
class ChannelEstimate:
    """Estimated channel ``h_bar`` (rows = receive antennas) and its error model."""

    h_bar: np.ndarray
    error: HopErrorModel

    def __post_init__(self):
        h = as_matrix(self.h_bar)
        if h.shape[1] != self.error.size:
            raise DimensionMismatch(
                f"psi is {self.error.size}x{self.error.size} but channel has {h.shape[1]} columns"
            )
        object.__setattr__(self, "h_bar", h)

    @property
    def shape(self) -> tuple[int, int]:
        return self.h_bar.shape


def exponential_correlation(rho: float, n: int) -> np.ndarray:
    """Toeplitz matrix with entries ``rho**|i-j|``."""
    if not 0.0 <= rho < 1.0:
        raise InvalidRho(f"rho must lie in [0, 1), got {rho}")
    idx = np.arange(n)
    return float(rho) ** np.abs(idx[:, None] - idx[None, :]).astype(float)


def lmmse_error_correlation(r_rho, snr_est: float) -> np.ndarray:
    """Column correlation ``(I + snr_est * R)^{-1}`` left by an LMMSE estimator.

    ``snr_est`` is linear. An infinite SNR gives the zero matrix (perfect
    estimation).
    """
    r = check_hermitian(r_rho)
    if snr_est < 0:
        raise ValueError("snr_est must be nonnegative")
    if np.linalg.eigvalsh(r)[0] <= 0:
        raise NotPD("training correlation must be positive definite")
    if math.isinf(snr_est):
        return np.zeros_like(r)
    eye = np.eye(r.shape[0])
    psi = np.linalg.solve(eye + snr_est * r, eye)
    return 0.5 * (psi + psi.conj().T)


def trial_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent PCG64 stream for ``(seed, *key)``.

    Streams are derived with ``SeedSequence(seed, spawn_key=key)`` so any
    trial can be regenerated without replaying the ones before it.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def complex_gaussian(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """I.i.d. circular complex Gaussian entries with unit variance."""
    g = rng.standard_normal((rows, cols, 2))
    return (g[..., 0] + 1j * g[..., 1]) * math.sqrt(0.5)


def sample_estimated_channel(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return complex_gaussian(rng, rows, cols)


def sample_error(rng: np.random.Generator, model: HopErrorModel, rows: int, cols: int) -> np.ndarray:
    """Draw ``sqrt(alpha) * H_W @ psi^{1/2}``."""
    if model.size != cols:
        raise DimensionMismatch(f"psi is {model.size}x{model.size}, need {cols}x{cols}")
    h_w = complex_gaussian(rng, rows, cols)
    if model.alpha == 0.0:
        return np.zeros((rows, cols), dtype=complex)
    return math.sqrt(model.alpha) * h_w @ hermitian_sqrt(model.psi)


def hop_model(n: int, rho: float, snr_est_db: float, alpha: float, sigma2: float) -> HopErrorModel:
    """Error model of a hop estimated with exponentially correlated training."""
    snr = math.inf if math.isinf(snr_est_db) else 10.0 ** (snr_est_db / 10.0)
    psi = lmmse_error_correlation(exponential_correlation(rho, n), snr)
    return HopErrorModel(psi, alpha, sigma2)
