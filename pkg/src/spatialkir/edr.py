"""Covariance of the inverse regression and extraction of the EDR space.

The EDR directions are the leading eigenvectors of ``Sigma^-1 Sigma_e``,
obtained from the symmetric problem ``W Sigma_e W`` with the whitening
matrix ``W = Sigma^-1/2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateDataset, InvalidThreshold, NoSignal,
                     SingularCovariance, UndefinedSubspace, ValidationError)
from .kernelest import KernelConfig, floored_inverse_regression_at
from .lattice import RegressionDataset

__all__ = [
    "CovariancePair", "EdrModel", "empirical_covariance", "inverse_regression_covariance",
    "covariance_pair", "edr_directions", "select_dimension", "subspace_distance",
    "orthonormal_rows", "DEFAULT_THRESHOLD",
]

RIDGE_TAU = 1e-8
MAX_CONDITION = 1e10
DEFAULT_THRESHOLD = 0.75


def _sym(m):
    m = np.asarray(m, dtype=float)
    return (m + m.T) / 2


@dataclass(frozen=True, eq=False)
class CovariancePair:
    sigma: np.ndarray
    sigma_e: np.ndarray
    n_hat: int

    def __post_init__(self):
        s, se = _sym(self.sigma), _sym(self.sigma_e)
        if s.shape != se.shape or s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ValidationError("covariance matrices must be square and of equal size")
        if np.linalg.eigvalsh(s)[0] < -1e-10 * max(1.0, np.abs(s).max()):
            raise ValidationError("sigma is not positive semi-definite")
        object.__setattr__(self, "sigma", s)
        object.__setattr__(self, "sigma_e", se)

    @property
    def d(self) -> int:
        return self.sigma.shape[0]


@dataclass(frozen=True, eq=False)
class EdrModel:
    """Estimated EDR basis.

    ``directions`` has one direction per row, orthonormal in the metric
    named by ``metric`` (``"sigma"``: ``V Sigma V^T = I``; ``"euclidean"``).
    ``eigenvalues`` holds all ``d`` eigenvalues, non-increasing.
    """

    directions: np.ndarray
    eigenvalues: np.ndarray
    D: int
    ridge: float
    metric: str = "sigma"
    all_directions: np.ndarray | None = None

    def euclidean(self) -> "EdrModel":
        """Same span, rows orthonormalized in the Euclidean metric."""
        return EdrModel(orthonormal_rows(self.directions), self.eigenvalues, self.D,
                        self.ridge, "euclidean", self.all_directions)

    def as_dict(self) -> dict:
        return {"eigenvalues": self.eigenvalues.tolist(), "D": self.D,
                "directions": self.directions.tolist(), "ridge": self.ridge,
                "metric": self.metric}


def empirical_covariance(data: RegressionDataset) -> np.ndarray:
    """``(1/n) sum (X_i - Xbar)(X_i - Xbar)^T``."""
    if data.n < 2:
        raise DegenerateDataset("covariance needs at least 2 samples")
    xc = data.x - data.mean_x
    return _sym(xc.T @ xc / data.n)


def inverse_regression_covariance(data: RegressionDataset, config: KernelConfig | None = None,
                                  h: float | None = None, e: float | None = None) -> np.ndarray:
    """``(1/n) sum r_en(Y_i) r_en(Y_i)^T - Xbar Xbar^T``, symmetrized.

    ``h`` and ``e`` override the schedule's bandwidth and floor.
    """
    if data.n < 2:
        raise DegenerateDataset("inverse regression covariance needs at least 2 samples")
    config = KernelConfig() if config is None else config
    r = floored_inverse_regression_at(data, config, data.y, h, e)
    m = r.T @ r / data.n - np.outer(data.mean_x, data.mean_x)
    return _sym(m)


def covariance_pair(data: RegressionDataset, config: KernelConfig | None = None,
                    h: float | None = None, e: float | None = None) -> CovariancePair:
    return CovariancePair(empirical_covariance(data),
                          inverse_regression_covariance(data, config, h, e), data.n)


def select_dimension(eigenvalues, param: float = DEFAULT_THRESHOLD,
                     rule: str = "threshold-fraction") -> int:
    """Smallest ``D`` whose leading eigenvalues carry a fraction ``>= param`` of the total."""
    if rule != "threshold-fraction":
        raise ValidationError(f"unknown dimension rule {rule!r}")
    if not 0 < param <= 1:
        raise InvalidThreshold(f"threshold must lie in (0, 1], got {param}")
    lam = np.clip(np.asarray(eigenvalues, dtype=float), 0, None)
    total = lam.sum()
    if total <= 0:
        return 0
    frac = np.cumsum(lam) / total
    # guard the comparison against rounding in the cumulative sum
    return int(np.argmax(frac >= param * (1 - 1e-12)) + 1)


def _sign_normalize(v):
    """Flip each column so its largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[idx, np.arange(v.shape[1])])
    signs[signs == 0] = 1
    return v * signs


def edr_directions(cov: CovariancePair, D: int | str = "auto",
                   threshold: float = DEFAULT_THRESHOLD) -> EdrModel:
    """Solve ``Sigma_e v = lambda Sigma v`` and keep the top ``D`` directions.

    ``D="auto"`` applies :func:`select_dimension` with ``threshold``; a zero
    selection raises :class:`NoSignal`. Sigma gets a ridge
    ``1e-8 * trace/d`` when its condition number exceeds ``1e10``.
    """
    sigma, sigma_e = cov.sigma, cov.sigma_e
    d = cov.d
    w, U = np.linalg.eigh(sigma)
    ridge = 0.0
    if w[-1] <= 0:
        raise SingularCovariance("sigma is zero")
    if w[0] <= 0 or w[-1] / w[0] > MAX_CONDITION:
        ridge = RIDGE_TAU * np.trace(sigma) / d
        sigma = sigma + ridge * np.eye(d)
        w, U = np.linalg.eigh(sigma)
        if w[0] <= 0 or w[-1] / w[0] > 1 / RIDGE_TAU * 10:
            raise SingularCovariance("sigma stays singular after ridge repair")
    whiten = (U / np.sqrt(w)) @ U.T
    lam, V = np.linalg.eigh(_sym(whiten @ sigma_e @ whiten))
    # non-increasing, ties kept in original index order
    order = np.argsort(-lam, kind="stable")
    lam, V = lam[order], V[:, order]
    dirs = _sign_normalize(whiten @ V)
    if D == "auto":
        D = select_dimension(lam, threshold)
        if D == 0:
            raise NoSignal("all inverse-regression eigenvalues vanish")
    D = int(D)
    if not 1 <= D <= d:
        raise ValidationError(f"D must lie in [1, {d}], got {D}")
    return EdrModel(dirs[:, :D].T.copy(), lam, D, ridge, "sigma", dirs.T.copy())


def orthonormal_rows(A) -> np.ndarray:
    """Euclidean-orthonormal basis of the row space of ``A``, one basis vector per row."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    q, r = np.linalg.qr(A.T)
    q = q * np.where(np.diag(r) < 0, -1.0, 1.0)
    return q.T


def _projector(A):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if not np.any(A):
        raise UndefinedSubspace("zero matrix spans no subspace")
    u, s, _ = np.linalg.svd(A.T, full_matrices=False)
    rank = int(np.sum(s > s[0] * max(A.shape) * np.finfo(float).eps))
    q = u[:, :rank]
    return q @ q.T, rank


def subspace_distance(A, B) -> float:
    """``||P_A - P_B||_F / sqrt(D + D')`` for the row spaces of ``A`` and ``B``."""
    PA, ra = _projector(A)
    PB, rb = _projector(B)
    if PA.shape != PB.shape:
        raise ValidationError("subspaces live in spaces of different dimension")
    return float(np.linalg.norm(PA - PB) / np.sqrt(ra + rb))
