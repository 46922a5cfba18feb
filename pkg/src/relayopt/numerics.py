"""Dense complex matrix primitives with explicit ordering and tolerances.

All tolerances are relative to the Frobenius norm of the input with an
absolute floor of ``ABS_FLOOR``.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import ConvergenceFailure, NotHermitian, NotPD, NotPSD, Singular

ABS_FLOOR = 1e-12
HERM_RTOL = 1e-10
PSD_RTOL = 1e-12


class OrderedSVD(NamedTuple):
    """``u @ diag(s) @ vh`` with ``s`` sorted in decreasing order.

    ``u`` and ``vh`` are full (square) unitary matrices; ``s`` has
    ``min(rows, cols)`` entries.
    """

    u: np.ndarray
    s: np.ndarray
    vh: np.ndarray

    @property
    def v(self) -> np.ndarray:
        return self.vh.conj().T


def _scale(m: np.ndarray) -> float:
    return max(float(np.linalg.norm(m)), ABS_FLOOR)


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or 0 in a.shape:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def check_hermitian(m, rtol: float = HERM_RTOL) -> np.ndarray:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise NotHermitian(f"matrix is not square: {a.shape}")
    if np.linalg.norm(a - a.conj().T) > rtol * _scale(a):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    return 0.5 * (a + a.conj().T)


def eigh_desc(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending.

    Returns ``(U, lam)`` with ``m = U @ diag(lam) @ U^H``.
    """
    a = check_hermitian(m)
    lam, u = np.linalg.eigh(a)
    return u[:, ::-1], lam[::-1]


def _psd_eig(m) -> tuple[np.ndarray, np.ndarray, float]:
    a = check_hermitian(m)
    lam, u = np.linalg.eigh(a)
    scale = _scale(a)
    if lam[0] < -PSD_RTOL * scale:
        raise NotPSD(f"smallest eigenvalue {lam[0]:.3e} is negative")
    return u, np.clip(lam, 0.0, None), scale


def hermitian_sqrt(m) -> np.ndarray:
    """Hermitian PSD square root ``R`` with ``R @ R = m``."""
    u, lam, _ = _psd_eig(m)
    return (u * np.sqrt(lam)) @ u.conj().T


def hermitian_inv_sqrt(m) -> np.ndarray:
    """Hermitian ``R`` with ``R @ m @ R = I`` for a positive definite ``m``."""
    a = check_hermitian(m)
    lam, u = np.linalg.eigh(a)
    if lam[0] <= PSD_RTOL * _scale(a):
        raise Singular(f"smallest eigenvalue {lam[0]:.3e} is not positive")
    return (u / np.sqrt(lam)) @ u.conj().T


def svd_desc(m) -> OrderedSVD:
    """Full SVD with singular values in decreasing order.

    LAPACK already returns sorted values; the explicit stable sort keeps the
    contract independent of the backend.
    """
    a = as_matrix(m)
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    order = np.argsort(-s, kind="stable")
    k = s.size
    u = u.copy()
    vh = vh.copy()
    u[:, :k] = u[:, order]
    vh[:k, :] = vh[order, :]
    return OrderedSVD(u, s[order], vh)


def _cholesky(m) -> np.ndarray:
    a = check_hermitian(m)
    try:
        return scipy.linalg.cholesky(a, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NotPD("matrix is not positive definite") from exc


def log_det_hermitian_pd(m) -> float:
    """Natural log-determinant of a Hermitian positive definite matrix."""
    c = _cholesky(m)
    return float(2.0 * np.sum(np.log(np.diag(c).real)))


def solve_hermitian_pd(m, b) -> np.ndarray:
    """Solve ``m @ X = b`` for Hermitian positive definite ``m``."""
    c = _cholesky(m)
    b = np.asarray(b, dtype=complex)
    return scipy.linalg.cho_solve((c, True), b)


def is_psd(m, slack: float = 0.0) -> bool:
    lam = np.linalg.eigvalsh(check_hermitian(m))
    return bool(lam[0] >= -slack)
