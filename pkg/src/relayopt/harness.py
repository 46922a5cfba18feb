"""Monte-Carlo sum-rate driver (robust vs. naive) and validation oracles."""
from __future__ import annotations

import csv
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .channel import (
    ChannelEstimate,
    SystemDims,
    complex_gaussian,
    hop_model,
    sample_estimated_channel,
    trial_rng,
)
from .design import design_naive, design_robust
from .errors import RelayOptError
from .kernels import total_objective
from .mse import LinkStats

log = logging.getLogger(__name__)

MODES = ("robust", "naive", "both")
CSV_HEADER = ["snr_db", "mean_rate_robust", "std_robust", "mean_rate_naive", "std_naive", "trials"]
MAX_RESAMPLES = 10


@dataclass(frozen=True)
class RunConfig:
    snr_est_db: float
    dims: SystemDims = field(default_factory=SystemDims)
    rho: float = 0.5
    snr_data_db_list: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    trials: int = 10000
    seed: int = 0
    mode: str = "both"
    output_path: str | None = None
    multistart: int = 0
    alpha: float = 1.0
    rho_rd: float | None = None
    snr_est_db_rd: float | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.snr_data_db_list:
            raise ValueError("at least one data SNR is required")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")
        if self.multistart < 0:
            raise ValueError("multistart must be nonnegative")
        object.__setattr__(self, "snr_data_db_list", tuple(float(x) for x in self.snr_data_db_list))


@dataclass(frozen=True)
class SummaryRow:
    snr_db: float
    mean_rate_robust_bits: float
    mean_rate_naive_bits: float
    std_robust: float
    std_naive: float
    trials: int
    resampled: int = 0


def link_stats_for(config: RunConfig, h_sr: np.ndarray, h_rd: np.ndarray, snr_db: float) -> LinkStats:
    """Statistics of one trial at one data SNR; powers are normalized to 1."""
    d = config.dims
    sigma2 = 10.0 ** (-snr_db / 10.0)
    rho_rd = config.rho if config.rho_rd is None else config.rho_rd
    est_rd = config.snr_est_db if config.snr_est_db_rd is None else config.snr_est_db_rd
    e1 = hop_model(d.n_s, config.rho, config.snr_est_db, config.alpha, sigma2)
    e2 = hop_model(d.n_r, rho_rd, est_rd, config.alpha, sigma2)
    return LinkStats(ChannelEstimate(h_sr, e1), ChannelEstimate(h_rd, e2), d, 1.0, 1.0)


def _trial_rates(config: RunConfig, h_sr, h_rd) -> np.ndarray:
    out = np.full((len(config.snr_data_db_list), 2), np.nan)
    for k, snr_db in enumerate(config.snr_data_db_list):
        stats = link_stats_for(config, h_sr, h_rd, snr_db)
        if config.mode in ("robust", "both"):
            out[k, 0] = design_robust(stats, multistart=config.multistart).rate_bits
        if config.mode in ("naive", "both"):
            out[k, 1] = design_naive(stats, multistart=config.multistart).rate_bits
    cols = {"robust": [0], "naive": [1], "both": [0, 1]}[config.mode]
    if not np.all(np.isfinite(out[:, cols])):
        raise RelayOptError("non-finite rate")
    return out


def run_trial(config: RunConfig, trial: int) -> tuple[np.ndarray, int]:
    """Rates of one trial, shape ``(n_snr, 2)`` (robust, naive), and the
    number of resamples it needed.

    Trial ``t`` draws its channels from ``trial_rng(seed, t, attempt)``; the
    same realization is reused across every data-SNR point.
    """
    d = config.dims
    for attempt in range(MAX_RESAMPLES + 1):
        rng = trial_rng(config.seed, trial, attempt)
        h_sr = sample_estimated_channel(rng, d.m_r, d.n_s)
        h_rd = sample_estimated_channel(rng, d.m_d, d.n_r)
        try:
            return _trial_rates(config, h_sr, h_rd), attempt
        except (RelayOptError, np.linalg.LinAlgError) as exc:
            log.warning("trial %d failed at seed offset %d: %s; resampling", trial, attempt, exc)
    raise RelayOptError(f"trial {trial} failed after {MAX_RESAMPLES} resamples")


def _run_chunk(args) -> list[tuple[np.ndarray, int]]:
    config, trials = args
    return [run_trial(config, t) for t in trials]


def worker_count() -> int:
    cap = os.environ.get("RELAYOPT_THREADS")
    n = os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def run_monte_carlo(config: RunConfig, workers: int | None = None) -> list[SummaryRow]:
    """Average the rate lower bound over ``config.trials`` channel draws.

    Results depend only on the config: trials are seeded by index and
    aggregated in index order whatever the worker count.
    """
    workers = worker_count() if workers is None else max(1, workers)
    trials = range(config.trials)
    if workers == 1:
        results = [run_trial(config, t) for t in trials]
    else:
        chunks = [list(trials[i::workers]) for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, [(config, c) for c in chunks]))
        results = [None] * config.trials
        for c, part in zip(chunks, parts):
            for t, r in zip(c, part):
                results[t] = r

    rates = np.stack([r for r, _ in results])  # (trials, n_snr, 2)
    resampled = sum(1 for _, a in results if a)
    if resampled:
        log.info("%d of %d trials were resampled", resampled, config.trials)
    ddof = 1 if config.trials > 1 else 0
    mean = rates.mean(axis=0)
    std = rates.std(axis=0, ddof=ddof)
    return [
        SummaryRow(snr, mean[k, 0], mean[k, 1], std[k, 0], std[k, 1], config.trials, resampled)
        for k, snr in enumerate(config.snr_data_db_list)
    ]


def brute_force_power_oracle(lambda_sr, lambda_rd, p_s: float, p_r: float, grid_points: int = 200):
    """Exhaustive simplex grid over ``(p2, f2)`` for at most two streams.

    Returns ``(p2, f2, objective_nats)`` at the best grid point.
    """
    lsr2 = np.asarray(lambda_sr, float) ** 2
    lrd2 = np.asarray(lambda_rd, float) ** 2
    n = lsr2.size
    if n == 1:
        p2, f2 = np.array([p_s], float), np.array([p_r], float)
        return p2, f2, total_objective(p2, f2, lsr2, lrd2)
    if n != 2:
        raise ValueError("the grid oracle supports one or two streams")
    gp = np.linspace(0.0, p_s, grid_points)
    gf = np.linspace(0.0, p_r, grid_points)
    p1, f1 = np.meshgrid(gp, gf, indexing="ij")
    a1, a2 = p1 * lsr2[0], (p_s - p1) * lsr2[1]
    b1, b2 = f1 * lrd2[0], (p_r - f1) * lrd2[1]
    obj = (np.log1p(a1 + b1) - np.log1p(a1) - np.log1p(b1)
           + np.log1p(a2 + b2) - np.log1p(a2) - np.log1p(b2))
    i, j = np.unravel_index(np.argmin(obj), obj.shape)
    p2 = np.array([gp[i], p_s - gp[i]])
    f2 = np.array([gf[j], p_r - gf[j]])
    return p2, f2, float(obj[i, j])


def _batched_rates(stats: LinkStats, P: np.ndarray, F: np.ndarray) -> np.ndarray:
    h1, h2 = stats.hop1.h_bar, stats.hop2.h_bar
    e1, e2 = stats.hop1.error, stats.hop2.error
    PH = np.conj(np.swapaxes(P, -1, -2))
    k1 = e1.alpha * np.einsum("kij,jl,kli->k", PH, e1.psi, P).real + e1.sigma2
    hp = h1 @ P
    r_x = hp @ np.conj(np.swapaxes(hp, -1, -2)) + k1[:, None, None] * np.eye(h1.shape[0])
    frf = F @ r_x @ np.conj(np.swapaxes(F, -1, -2))
    k2 = e2.alpha * np.einsum("kij,ji->k", frf, e2.psi).real + e2.sigma2
    h2f = h2 @ F
    b = h2f @ hp
    c = h2 @ frf @ h2.conj().T + k2[:, None, None] * np.eye(h2.shape[0])
    phi = np.eye(P.shape[-1]) - np.conj(np.swapaxes(b, -1, -2)) @ np.linalg.solve(c, b)
    phi = 0.5 * (phi + np.conj(np.swapaxes(phi, -1, -2)))
    sign, logdet = np.linalg.slogdet(phi)
    return -logdet / math.log(2.0)


def random_matrix_oracle(stats: LinkStats, samples: int, seed: int = 0, chunk: int = 20000) -> float:
    """Best rate over random ``(P, F)`` scaled to meet both power budgets
    with equality."""
    if samples < 1:
        raise ValueError("samples must be positive")
    d = stats.dims
    rng = np.random.default_rng(seed)
    best = -math.inf
    done = 0
    while done < samples:
        k = min(chunk, samples - done)
        P = complex_gaussian(rng, k * d.n_s, d.n_streams).reshape(k, d.n_s, d.n_streams)
        P *= np.sqrt(stats.p_s / np.sum(np.abs(P) ** 2, axis=(1, 2)))[:, None, None]
        F = complex_gaussian(rng, k * d.n_r, d.m_r).reshape(k, d.n_r, d.m_r)
        e1 = stats.hop1.error
        PH = np.conj(np.swapaxes(P, -1, -2))
        k1 = e1.alpha * np.einsum("kij,jl,kli->k", PH, e1.psi, P).real + e1.sigma2
        hp = stats.hop1.h_bar @ P
        r_x = hp @ np.conj(np.swapaxes(hp, -1, -2)) + k1[:, None, None] * np.eye(d.m_r)
        power = np.einsum("kij,kjl,kil->k", F, r_x, F.conj()).real
        F *= np.sqrt(stats.p_r / power)[:, None, None]
        best = max(best, float(np.max(_batched_rates(stats, P, F))))
        done += k
    return best


def write_csv(rows: Iterable[SummaryRow], path) -> None:
    """Write summary rows; unrequested design columns are ``nan``."""
    def fmt(x: float) -> str:
        return f"{x:.6g}"

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([
                fmt(r.snr_db),
                fmt(r.mean_rate_robust_bits),
                fmt(r.std_robust),
                fmt(r.mean_rate_naive_bits),
                fmt(r.std_naive),
                str(int(r.trials)),
            ])


def read_csv(path) -> list[dict[str, float]]:
    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def format_table(rows: Sequence[SummaryRow]) -> str:
    lines = [f"{'SNR[dB]':>8} {'robust':>10} {'naive':>10} {'gain':>8}"]
    for r in rows:
        lines.append(
            f"{r.snr_db:8.1f} {r.mean_rate_robust_bits:10.4f} {r.mean_rate_naive_bits:10.4f} "
            f"{r.mean_rate_robust_bits - r.mean_rate_naive_bits:8.4f}"
        )
    return "\n".join(lines)
