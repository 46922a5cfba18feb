import numpy as np
import pytest

from relayopt.channel import ChannelEstimate, HopErrorModel, SystemDims, exponential_correlation, hop_model
from relayopt.mse import LinkStats


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_psd(rng, n, rank=None):
    a = crandn(rng, n, rank or n)
    return a @ a.conj().T


def random_stats(rng, dims=SystemDims(), snr_db=10.0, snr_est_db=10.0, rho=0.5, alpha=1.0,
                 p_s=1.0, p_r=1.0, random_psi=False):
    sigma2 = 10 ** (-snr_db / 10)
    if random_psi:
        e1 = HopErrorModel(random_psd(rng, dims.n_s) / (4 * dims.n_s), alpha, sigma2)
        e2 = HopErrorModel(random_psd(rng, dims.n_r) / (4 * dims.n_r), alpha, 0.5 * sigma2)
    else:
        e1 = hop_model(dims.n_s, rho, snr_est_db, alpha, sigma2)
        e2 = hop_model(dims.n_r, rho, snr_est_db, alpha, sigma2)
    h1 = crandn(rng, dims.m_r, dims.n_s)
    h2 = crandn(rng, dims.m_d, dims.n_r)
    return LinkStats(ChannelEstimate(h1, e1), ChannelEstimate(h2, e2), dims, p_s, p_r)


def scalar_stats(h1, h2, sigma1, sigma2, p_s=1.0, p_r=1.0, alpha=0.0, psi=1.0):
    d = SystemDims(1, 1, 1, 1, 1)
    e1 = HopErrorModel(np.array([[psi]]), alpha, sigma1)
    e2 = HopErrorModel(np.array([[psi]]), alpha, sigma2)
    return LinkStats(ChannelEstimate(np.array([[h1]]), e1), ChannelEstimate(np.array([[h2]]), e2), d, p_s, p_r)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def r_half4():
    return exponential_correlation(0.5, 4)
