"""Monte Carlo harness: convergence rate and CLT scaling of the
inverse-regression covariance, EDR recovery sweeps and predictor comparisons.

Replicate ``r`` of size index ``s`` draws its data with seed
``derive_seed(derive_seed(master_seed, s), r)``; results are reduced in
(size, replicate) order so every report is reproducible bit for bit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from math import isqrt, log, sqrt

import numpy as np

from . import __version__
from .edr import (DEFAULT_THRESHOLD, covariance_pair, edr_directions,
                  inverse_regression_covariance, subspace_distance)
from .errors import InsufficientReplicates, InsufficientSizes, InvalidSchedule, ValidationError
from .fieldsim import (RNG_ALGORITHM, FieldSpec, SingleIndexSpec, closed_form_sigma_e,
                       derive_seed, generate_field, generate_single_index, ground_truth_sigma_e)
from .kernelest import KernelConfig
from .lattice import build_associated_process, center_dataset
from .predictor import NeighborScanConfig, checkerboard, fit, fit_baseline, predict_sites

__all__ = [
    "RateSchedule", "RateReport", "CltSummary", "EdrRecoveryTable", "PredictorBenchmark",
    "dims_for_size", "sigma_e_oracle", "run_rate_experiment", "run_clt_check",
    "run_edr_recovery", "run_predictor_benchmark", "ORACLE_DRAWS",
]

ORACLE_DRAWS = 1_000_000


@dataclass(frozen=True)
class RateSchedule:
    """Theoretical rate quantities for a kernel order and schedule exponents.

    ``theta`` is the polynomial mixing exponent (documentation only; the
    simulated fields are m-dependent).
    """

    k: int = 2
    c1: float = 0.38
    c2: float = 0.05
    h_scale: float = 1.0
    e_scale: float = 0.01
    lattice_dim: int = 2
    theta: float | None = None

    def __post_init__(self):
        lo, hi = self.c2 / self.k + 1 / (4 * self.k), 0.5 - 2 * self.c2
        if not lo < self.c1 < hi:
            raise InvalidSchedule(f"c1={self.c1} outside ({lo:.4g}, {hi:.4g})")
        if self.theta is not None and not self.theta > 2 * self.lattice_dim:
            raise InvalidSchedule(f"theta must exceed 2N={2 * self.lattice_dim}")

    @classmethod
    def from_config(cls, config: KernelConfig, lattice_dim: int = 2, theta=None,
                    h_scale: float = 1.0) -> "RateSchedule":
        s = config.schedule
        return cls(config.order, s.c1, s.c2, s.h_scale or h_scale, s.e_scale, lattice_dim, theta)

    @property
    def theta1(self) -> float | None:
        if self.theta is None:
            return None
        N = self.lattice_dim
        return (4 * N + self.theta) / (self.theta - 2 * N)

    def h(self, n: float) -> float:
        return self.h_scale * n ** -self.c1

    def e(self, n: float) -> float:
        return self.e_scale * n ** -self.c2

    def psi(self, n: float) -> float:
        """``h^k + sqrt(log n / (n h))``."""
        h = self.h(n)
        return h ** self.k + sqrt(log(n) / (n * h))

    def overlay(self, n: float) -> float:
        """Error bound shape ``h^k + psi^2 / e^2``."""
        return self.h(n) ** self.k + self.psi(n) ** 2 / self.e(n) ** 2


def dims_for_size(n_hat: int, ndim: int = 2) -> tuple:
    """Most nearly cubic lattice dims with ``prod(dims) == n_hat``."""
    if ndim == 1:
        return (int(n_hat),)
    if ndim == 2:
        a = isqrt(n_hat)
        while n_hat % a:
            a -= 1
        return (a, n_hat // a)
    side = round(n_hat ** (1 / ndim))
    if side ** ndim != n_hat:
        raise ValidationError(f"{n_hat} is not a perfect {ndim}-th power")
    return (side,) * ndim


def sigma_e_oracle(spec: SingleIndexSpec, draws: int = ORACLE_DRAWS, seed: int = 0,
                   kind: str = "binning") -> np.ndarray:
    """``var E(X|Y)`` for the model: binning Monte Carlo or the closed form."""
    if kind == "closed":
        out = closed_form_sigma_e(spec)
        if out is None:
            raise ValidationError(f"no closed form for link {spec.link!r}")
        return out
    return ground_truth_sigma_e(spec, draws, seed=seed)


def _replicate_sigma_e(spec, config):
    data, _ = center_dataset(generate_single_index(spec))
    return inverse_regression_covariance(data, config)


def _echo(spec: SingleIndexSpec, config: KernelConfig) -> dict:
    return {"model.d": spec.d, "model.link": spec.link, "model.noise_std": spec.noise_std,
            "model.rho": spec.rho, "model.beta": list(spec.beta), **config.as_dict()}


@dataclass
class RateReport:
    sizes: list
    errors: list
    medians: list
    slope: float
    intercept: float
    overlay: list
    master_seed: int
    config: dict
    oracle: list
    wall_clock: float = 0.0
    version: str = __version__
    rng: str = RNG_ALGORITHM

    def as_dict(self, timing: bool = False) -> dict:
        out = {"kind": "rate", "version": self.version, "rng": self.rng,
               "master_seed": self.master_seed, "config": self.config,
               "sizes": self.sizes, "errors": self.errors, "medians": self.medians,
               "slope": self.slope, "intercept": self.intercept,
               "overlay": self.overlay, "oracle": self.oracle}
        if timing:
            out["wall_clock"] = self.wall_clock
        return out


def run_rate_experiment(template: SingleIndexSpec, sizes=(400, 900, 1600, 3600),
                        replicates: int = 10, config: KernelConfig | None = None,
                        master_seed: int = 0, oracle: str = "binning",
                        oracle_draws: int = ORACLE_DRAWS) -> RateReport:
    """Frobenius error of the covariance estimate against the oracle, across sizes.

    Fits OLS of log(median error) on log(n).
    """
    t0 = time.perf_counter()
    config = KernelConfig() if config is None else config
    sizes = [int(s) for s in sizes]
    if len(sizes) < 3:
        raise InsufficientSizes(f"need at least 3 sizes, got {len(sizes)}")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValidationError("sizes must be strictly increasing")
    if replicates < 5:
        raise InsufficientReplicates(f"need at least 5 replicates, got {replicates}")
    ndim = len(template.dims)
    truth = sigma_e_oracle(template, oracle_draws, derive_seed(master_seed, 1 << 32), oracle)
    errors = []
    for s_idx, n in enumerate(sizes):
        size_seed = derive_seed(master_seed, s_idx)
        row = []
        for r in range(replicates):
            spec = template.with_(dims=dims_for_size(n, ndim), seed=derive_seed(size_seed, r))
            row.append(float(np.linalg.norm(_replicate_sigma_e(spec, config) - truth)))
        errors.append(row)
    medians = [float(np.median(row)) for row in errors]
    slope, intercept = np.polyfit(np.log(sizes), np.log(medians), 1)
    if not np.isfinite(slope):
        raise ValidationError("slope fit failed")
    sched = RateSchedule.from_config(config, ndim)
    return RateReport(sizes, errors, medians, float(slope), float(intercept),
                      [sched.overlay(n) for n in sizes], int(master_seed),
                      _echo(template, config), truth.tolist(), time.perf_counter() - t0)


@dataclass
class CltSummary:
    sizes: tuple
    means: list
    stds: list
    std_ratio: list
    z_pass_fraction: float
    replicates: int
    master_seed: int
    config: dict

    def entry_ratio(self, i: int = 0, j: int = 0) -> float:
        return self.std_ratio[i][j]

    def as_dict(self) -> dict:
        return {"kind": "clt", "version": __version__, "rng": RNG_ALGORITHM,
                "master_seed": self.master_seed, "config": self.config,
                "sizes": list(self.sizes), "replicates": self.replicates,
                "means": self.means, "stds": self.stds, "std_ratio": self.std_ratio,
                "z_pass_fraction": self.z_pass_fraction}


def run_clt_check(template: SingleIndexSpec, size: int = 900, replicates: int = 200,
                  config: KernelConfig | None = None, master_seed: int = 0,
                  oracle: str = "binning", oracle_draws: int = ORACLE_DRAWS) -> CltSummary:
    """Fluctuations of ``sqrt(n) (Sigma_en - Sigma_e)`` at ``size`` and ``4 * size``.

    Reports per-entry mean and standard deviation at both sizes, the
    entrywise ratio std(size)/std(4 size), and the fraction of entries whose
    mean passes ``|mean| <= 3 std / sqrt(replicates)`` at both sizes.
    """
    if replicates < 100:
        raise InsufficientReplicates(f"need at least 100 replicates, got {replicates}")
    config = KernelConfig() if config is None else config
    ndim = len(template.dims)
    truth = sigma_e_oracle(template, oracle_draws, derive_seed(master_seed, 1 << 32), oracle)
    sizes = (int(size), 4 * int(size))
    means, stds, passes = [], [], []
    for s_idx, n in enumerate(sizes):
        size_seed = derive_seed(master_seed, s_idx)
        scaled = np.empty((replicates,) + truth.shape)
        for r in range(replicates):
            spec = template.with_(dims=dims_for_size(n, ndim), seed=derive_seed(size_seed, r))
            scaled[r] = sqrt(n) * (_replicate_sigma_e(spec, config) - truth)
        m, s = scaled.mean(axis=0), scaled.std(axis=0, ddof=1)
        means.append(m.tolist())
        stds.append(s.tolist())
        passes.append(np.abs(m) <= 3 * s / sqrt(replicates))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.asarray(stds[0]) / np.asarray(stds[1])
    frac = float(np.mean(passes[0] & passes[1]))
    return CltSummary(sizes, means, stds, ratio.tolist(), frac, replicates, int(master_seed),
                      _echo(template, config))


@dataclass
class EdrRecoveryTable:
    rows: list
    master_seed: int
    config: dict

    def cell(self, link: str, noise_std: float, n_hat: int) -> dict:
        for row in self.rows:
            if row["link"] == link and row["noise_std"] == noise_std and row["n_hat"] == n_hat:
                return row
        raise KeyError((link, noise_std, n_hat))

    def as_dict(self) -> dict:
        return {"kind": "edr-sweep", "version": __version__, "rng": RNG_ALGORITHM,
                "master_seed": self.master_seed, "config": self.config, "rows": self.rows}


def run_edr_recovery(template: SingleIndexSpec, links=("identity", "cubic"), noise_stds=(0.5,),
                     sizes=(2500,), seeds: int = 10, config: KernelConfig | None = None,
                     master_seed: int = 0, D: int = 1) -> EdrRecoveryTable:
    """Subspace distance between the estimated top-``D`` span and ``span(beta)``.

    One row per (link, noise, size) cell with per-seed distances, median and IQR.
    Seeds are shared across cells so cells are paired.
    """
    config = KernelConfig() if config is None else config
    ndim = len(template.dims)
    beta = np.asarray([template.beta])
    rows = []
    for link in links:
        for noise in noise_stds:
            for n in sizes:
                dists = []
                for r in range(seeds):
                    spec = template.with_(link=link, noise_std=noise,
                                          dims=dims_for_size(int(n), ndim),
                                          seed=derive_seed(master_seed, r))
                    data, _ = center_dataset(generate_single_index(spec))
                    model = edr_directions(covariance_pair(data, config), D)
                    dists.append(subspace_distance(model.directions, beta))
                q1, med, q3 = np.percentile(dists, [25, 50, 75])
                rows.append({"link": link, "noise_std": float(noise), "n_hat": int(n),
                             "distances": dists, "median": float(med), "iqr": float(q3 - q1)})
    echo = _echo(template, config)
    echo.pop("model.link")
    echo.pop("model.noise_std")
    return EdrRecoveryTable(rows, int(master_seed), echo)


@dataclass
class PredictorBenchmark:
    rows: list
    aggregate: dict
    master_seed: int
    config: dict

    def as_dict(self) -> dict:
        return {"kind": "predictor", "version": __version__, "rng": RNG_ALGORITHM,
                "master_seed": self.master_seed, "config": self.config,
                "rows": self.rows, "aggregate": self.aggregate}


def run_predictor_benchmark(field_spec: FieldSpec, d: int | str = "auto",
                            config: KernelConfig | None = None, seeds: int = 10,
                            master_seed: int = 0, D: int | str = "auto",
                            threshold: float = DEFAULT_THRESHOLD,
                            scan: NeighborScanConfig = NeighborScanConfig()) -> PredictorBenchmark:
    """Held-out MSE of the reduced, full-kernel and mean predictors.

    Eligible sites are split in a checkerboard: even coordinate sums train,
    odd ones are predicted.
    """
    config = KernelConfig() if config is None else config
    rows = []
    for r in range(seeds):
        seed = derive_seed(master_seed, r)
        fld = generate_field(FieldSpec(field_spec.kind, field_spec.dims, seed, field_spec.radius,
                                       field_spec.window, field_spec.weights, field_spec.range_))
        model = fit(fld, None, d, config, D, threshold, scan, train_filter=checkerboard)
        base = fit_baseline(fld, None, model.d, config, train_filter=checkerboard)
        sites = build_associated_process(fld, model.d).sites
        test = sites[~checkerboard(sites)]
        truth = fld.lookup(test)
        reduced = predict_sites(model, fld, None, test)
        baseline = predict_sites(base, fld, None, test)
        rows.append({"seed": seed, "d": model.d, "D": model.D, "n_train": int(model.inputs.shape[0]),
                     "n_test": int(len(test)), "field_variance": float(np.var(fld.values)),
                     "mse_reduced": float(np.mean((reduced - truth) ** 2)),
                     "mse_baseline": float(np.mean((baseline - truth) ** 2)),
                     "mse_mean": float(np.mean((model.y_mean - truth) ** 2))})
    agg = {key: float(np.median([row[key] for row in rows]))
           for key in ("mse_reduced", "mse_baseline", "mse_mean")}
    agg["reduced_beats_mean"] = int(sum(row["mse_reduced"] < row["mse_mean"] for row in rows))
    agg["reduced_beats_baseline"] = int(sum(row["mse_reduced"] <= row["mse_baseline"] for row in rows))
    echo = {"field.kind": field_spec.kind, "field.dims": list(field_spec.dims),
            "field.radius": field_spec.radius, "field.window": field_spec.window,
            "d": d, "D": D, "edr.threshold": threshold, **config.as_dict()}
    return PredictorBenchmark(rows, agg, int(master_seed), echo)
