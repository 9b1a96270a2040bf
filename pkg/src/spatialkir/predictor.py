"""Spatial prediction from nearest-neighbor vicinities.

Three pieces: a sequential scan that estimates how many neighbors carry
information about a site value, the dimension-reduction predictor
(inverse-regression EDR projection followed by kernel regression in the
reduced space) and the full-dimensional kernel predictor used as baseline.

Field values are centered by the mean over the observed region before the
scan; the predictors center covariates and responses by their training means
and add the response mean back.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .edr import DEFAULT_THRESHOLD, EdrModel, covariance_pair, edr_directions
from .errors import InsufficientRegion, NoSignal, OutOfRegion, ValidationError
from .kernelest import KernelConfig, scalar_kernel_regression
from .lattice import (LatticeRegion, RegressionDataset, ScalarField, Site,
                      build_associated_process, center_dataset, vicinity_offsets)

__all__ = [
    "NeighborScanConfig", "NeighborScanResult", "neighbor_scan", "estimate_neighbor_count",
    "FittedPredictor", "fit", "predict_site", "predict_sites",
    "BaselinePredictor", "fit_baseline", "baseline_full_kernel_predict",
    "checkerboard", "reduced_bandwidth",
]


@dataclass(frozen=True)
class NeighborScanConfig:
    """Settings of the neighbor-count scan.

    ``grid_size`` evaluation points span the 10%-90% quantiles of the
    centered observed values and the statistic is the max over them; with
    ``grid_size=None`` the single point ``y`` is used instead.
    ``bandwidth=None`` means ``bandwidth_factor * std`` of the centered
    observed values. ``anchor`` is recorded only: sums run over every
    eligible site.
    """

    delta: float = 0.1
    d_max: int = 8
    grid_size: int | None = 9
    y: float = 0.0
    bandwidth: float | None = None
    bandwidth_factor: float = 1.0
    terminate_exclusive: bool = False
    kernel_id: str = "epanechnikov"
    anchor: tuple | None = None

    def __post_init__(self):
        if not self.delta > 0:
            raise ValidationError("delta must be positive")
        if self.d_max < 1:
            raise ValidationError("d_max must be >= 1")
        if self.grid_size is not None and self.grid_size < 1:
            raise ValidationError("grid size must be >= 1")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValidationError("bandwidth must be positive")


@dataclass(frozen=True)
class NeighborScanResult:
    d: int
    statistics: tuple
    cap_reached: bool
    bandwidth: float
    y_points: tuple

    def __int__(self):
        return self.d

    def as_dict(self) -> dict:
        return {"d": self.d, "cap_reached": self.cap_reached, "bandwidth": self.bandwidth,
                "y_points": list(self.y_points),
                "statistics": [{"k": k + 1, "statistic": s} for k, s in enumerate(self.statistics)]}


def _centered_field(field: ScalarField, observed: LatticeRegion) -> tuple:
    mean = float(np.mean(field.restrict(observed)))
    return field.with_values(field.values - mean), mean


def neighbor_scan(field: ScalarField, observed: LatticeRegion | None = None,
                  config: NeighborScanConfig = NeighborScanConfig()) -> NeighborScanResult:
    """Sequential test of ``E(xi_{i(k)} | xi_i = y) = 0`` for ``k = 1, 2, ...``.

    Stops at the first ``k`` whose statistic ``|r^(k)(y)|`` is ``<= delta``
    and returns ``d = k`` (``k - 1`` with ``terminate_exclusive``).
    """
    observed = field.region if observed is None else observed
    centered, _ = _centered_field(field, observed)
    obs_vals = centered.restrict(observed).ravel()
    if config.grid_size is None:
        ys = np.array([float(config.y)])
    else:
        lo, hi = np.quantile(obs_vals, [0.1, 0.9])
        ys = np.linspace(lo, hi, config.grid_size)
    h = config.bandwidth
    if h is None:
        s = float(np.std(obs_vals, ddof=1)) if obs_vals.size > 1 else 0.0
        if not s > 0:
            raise NoSignal("observed values have zero spread")
        h = config.bandwidth_factor * s
    kcfg = KernelConfig(config.kernel_id)
    stats = []
    for k in range(1, config.d_max + 1):
        try:
            ds = build_associated_process(centered, k, observed)
        except Exception as exc:
            raise InsufficientRegion(f"no eligible sites for k={k}: {exc}") from exc
        r = scalar_kernel_regression(ds.y, ds.x[:, k - 1], kcfg, h, ys[:, None])
        stat = float(np.max(np.abs(r)))
        stats.append(stat)
        if not stat > config.delta:
            d = k - 1 if config.terminate_exclusive else k
            return NeighborScanResult(d, tuple(stats), False, h, tuple(ys.tolist()))
    return NeighborScanResult(config.d_max, tuple(stats), True, h, tuple(ys.tolist()))


def estimate_neighbor_count(field: ScalarField, observed: LatticeRegion | None = None,
                            config: NeighborScanConfig = NeighborScanConfig()) -> int:
    return neighbor_scan(field, observed, config).d


def reduced_bandwidth(scale: float, n_hat: int, dim: int) -> float:
    """``scale * n^(-1/(4 + dim))``."""
    return scale * float(n_hat) ** (-1.0 / (4 + dim))


def checkerboard(sites: np.ndarray) -> np.ndarray:
    """True for sites with an even coordinate sum (training half)."""
    return np.sum(np.asarray(sites), axis=1) % 2 == 0


def _training_data(field, observed, d, train_filter) -> RegressionDataset:
    ds = build_associated_process(field, d, observed)
    if train_filter is not None:
        mask = np.asarray(train_filter(ds.sites), dtype=bool)
        if not mask.any():
            raise InsufficientRegion("training filter removed every sample")
        ds = ds.subset(mask)
    if ds.n < d + 1:
        raise InsufficientRegion(f"{ds.n} eligible samples for d={d}; need at least {d + 1}")
    return ds


def _project(x, directions):
    # row-wise reduction: a row projects identically alone or inside a batch
    return (x[:, None, :] * directions[None, :, :]).sum(axis=2)


@dataclass(frozen=True, eq=False)
class FittedPredictor:
    d: int
    edr: EdrModel
    inputs: np.ndarray
    outputs: np.ndarray
    x_mean: np.ndarray
    y_mean: float
    bandwidth: float
    kernel: KernelConfig
    train_sites: np.ndarray | None = None
    provenance: dict = field(default_factory=dict)

    @property
    def D(self) -> int:
        return self.edr.D

    @property
    def directions(self) -> np.ndarray:
        return self.edr.directions

    def predict_covariates(self, x) -> np.ndarray | float:
        """Predict from raw vicinity vectors ``x`` of shape ``(d,)`` or ``(m, d)``."""
        x = np.asarray(x, dtype=float)
        z = _project(np.atleast_2d(x - self.x_mean), self.edr.directions)
        g = scalar_kernel_regression(self.inputs, self.outputs, self.kernel, self.bandwidth, z)
        return float(g[0]) + self.y_mean if x.ndim == 1 else g + self.y_mean


def fit(field: ScalarField, observed: LatticeRegion | None = None, d: int | str = "auto",
        config: KernelConfig | None = None, D: int | str = "auto",
        threshold: float = DEFAULT_THRESHOLD, scan: NeighborScanConfig = NeighborScanConfig(),
        train_filter: Callable[[np.ndarray], np.ndarray] | None = None,
        bandwidth: float | None = None) -> FittedPredictor:
    """Fit the dimension-reduction predictor on the observed region.

    ``train_filter`` maps the ``(n, N)`` site array of eligible samples to a
    boolean mask of training samples (e.g. :func:`checkerboard`).
    ``bandwidth`` overrides the reduced-space bandwidth.
    """
    observed = field.region if observed is None else observed
    config = KernelConfig() if config is None else config
    if d == "auto":
        d = estimate_neighbor_count(field, observed, scan)
    d = int(d)
    if d < 1:
        raise ValidationError(f"neighbor count must be >= 1, got {d}")
    ds = _training_data(field, observed, d, train_filter)
    if np.ptp(ds.y) == 0:
        raise NoSignal("observed values are constant")
    centered, x_mean = center_dataset(ds)
    y_mean = float(np.mean(ds.y))
    cov = covariance_pair(centered, config)
    edr = edr_directions(cov, D, threshold).euclidean()
    inputs = _project(centered.x, edr.directions)
    if bandwidth is None:
        bandwidth = reduced_bandwidth(config.schedule.scale(ds.y), ds.n, edr.D)
    provenance = {"d": d, "D": edr.D, "threshold": threshold, "n_train": ds.n,
                  "bandwidth": bandwidth, **config.as_dict()}
    return FittedPredictor(d, edr, inputs, ds.y - y_mean, x_mean, y_mean, float(bandwidth),
                           config, ds.sites, provenance)


def _vicinity_values(field, observed, d, targets) -> np.ndarray:
    targets = np.atleast_2d(np.asarray(targets, dtype=np.int64))
    nbrs = targets[:, None, :] + vicinity_offsets(observed.ndim, d)[None]
    inside = np.all(observed.contains_array(nbrs), axis=1)
    if not inside.all():
        bad = targets[np.argmin(inside)]
        raise OutOfRegion(f"vicinity of {Site(bad)} leaves the observed region")
    return field.lookup(nbrs)


def predict_site(model: FittedPredictor, field: ScalarField, observed: LatticeRegion | None,
                 target) -> float:
    observed = field.region if observed is None else observed
    x = _vicinity_values(field, observed, model.d, [tuple(target)])[0]
    return float(model.predict_covariates(x))


def predict_sites(model: FittedPredictor, field: ScalarField, observed: LatticeRegion | None,
                  targets) -> np.ndarray:
    observed = field.region if observed is None else observed
    x = _vicinity_values(field, observed, model.d, targets)
    return np.atleast_1d(model.predict_covariates(x))


@dataclass(frozen=True, eq=False)
class BaselinePredictor:
    """Nadaraya-Watson on the raw ``d``-vector of neighbor values."""

    d: int
    inputs: np.ndarray
    outputs: np.ndarray
    bandwidth: float
    kernel: KernelConfig

    def predict_covariates(self, x):
        return scalar_kernel_regression(self.inputs, self.outputs, self.kernel, self.bandwidth, x)


def fit_baseline(field: ScalarField, observed: LatticeRegion | None, d: int,
                 config: KernelConfig | None = None, train_filter=None,
                 bandwidth: float | None = None) -> BaselinePredictor:
    observed = field.region if observed is None else observed
    config = KernelConfig() if config is None else config
    ds = _training_data(field, observed, int(d), train_filter)
    if bandwidth is None:
        bandwidth = reduced_bandwidth(config.schedule.scale(ds.y), ds.n, ds.d)
    return BaselinePredictor(int(d), ds.x, ds.y, float(bandwidth), config)


def baseline_full_kernel_predict(field: ScalarField, observed: LatticeRegion | None, d: int,
                                 config: KernelConfig | None, target,
                                 train_filter=None, bandwidth: float | None = None) -> float:
    observed = field.region if observed is None else observed
    if np.ptp(field.restrict(observed)) == 0:
        # constant data: every kernel weight sees the same output
        return float(field.restrict(observed).flat[0])
    base = fit_baseline(field, observed, d, config, train_filter, bandwidth)
    x = _vicinity_values(field, observed, base.d, [tuple(target)])[0]
    return float(base.predict_covariates(x))
