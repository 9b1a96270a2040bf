"""Compactly supported kernels, bandwidth/floor schedules and the kernel
estimators of the inverse regression ``E(X | Y = y)``.

All estimators evaluate the kernel weight matrix row by row (one row per
evaluation point) and reduce each row along its contiguous axis, so an
evaluation point gives bit-identical results whether it is computed alone or
inside a batch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

from .errors import EmptyDataset, InvalidKernel, InvalidSchedule, ValidationError
from .lattice import RegressionDataset

__all__ = [
    "Kernel", "get_kernel", "KERNELS", "BandwidthSchedule", "KernelConfig",
    "InverseRegressionEval", "density_estimate", "numerator_estimate",
    "inverse_regression", "unfloored_inverse_regression", "evaluate_on_grid",
    "kernel_weights", "scalar_kernel_regression",
]

QUADRATURE_POINTS = 10_000
_CHUNK = 512


@lru_cache(maxsize=None)
def _quadrature():
    return roots_legendre(QUADRATURE_POINTS)


def _poly_kernel(coef):
    """Kernel ``sum_j coef[j] u^(2j)`` on [-1, 1], zero outside."""
    coef = np.asarray(coef, dtype=float)

    def K(u):
        u = np.asarray(u, dtype=float)
        u2 = u * u
        out = np.zeros_like(u2)
        for c in coef[::-1]:
            out = out * u2 + c
        return np.where(np.abs(u) <= 1.0, out, 0.0)

    return K


def _fourth_order_coefficients():
    # (1 - u^2)(a + b u^2): vanishes at the support edge (Lipschitz on R);
    # a, b solved from  int K = 1  and  int u^2 K = 0.
    # int_{-1}^{1} u^(2m) (1 - u^2) du = 2/(2m+1) - 2/(2m+3)
    mom = lambda m: 2.0 / (2 * m + 1) - 2.0 / (2 * m + 3)
    A = np.array([[mom(0), mom(1)], [mom(1), mom(2)]])
    a, b = np.linalg.solve(A, [1.0, 0.0])
    return [a, b - a, -b]


@dataclass(frozen=True, eq=False)
class Kernel:
    """Symmetric kernel supported on [-1, 1], validated on construction.

    Construction checks unit mass, vanishing moments ``1..order-1`` and a
    nonzero ``order``-th moment with a fixed Gauss-Legendre rule, and records
    a finite-difference Lipschitz bound.
    """

    id: str
    order: int
    coef: tuple
    lipschitz: float = field(init=False)
    moments: tuple = field(init=False)

    def __post_init__(self):
        if self.order < 2 or self.order % 2:
            raise InvalidKernel(f"kernel order must be an even integer >= 2, got {self.order}")
        u, w = _quadrature()
        k = self(u)
        moments = tuple(float(np.dot(w, u ** j * k)) for j in range(self.order + 1))
        if abs(moments[0] - 1.0) > 1e-8:
            raise InvalidKernel(f"{self.id}: integral is {moments[0]!r}, not 1")
        for j in range(1, self.order):
            if abs(moments[j]) > 1e-8:
                raise InvalidKernel(f"{self.id}: moment {j} is {moments[j]!r}")
        if abs(moments[self.order]) <= 1e-8:
            raise InvalidKernel(f"{self.id}: moment {self.order} vanishes, order is higher")
        grid = np.linspace(-1.5, 1.5, 30_001)
        lip = float(np.max(np.abs(np.diff(self(grid))) / np.diff(grid)))
        if not np.isfinite(lip):
            raise InvalidKernel(f"{self.id}: not Lipschitz")
        object.__setattr__(self, "moments", moments)
        object.__setattr__(self, "lipschitz", lip)

    def __call__(self, u):
        return _poly_kernel(self.coef)(u)

    @property
    def nonnegative(self) -> bool:
        u = np.linspace(-1, 1, 2001)
        return bool(np.all(self(u) >= 0))


KERNELS = {
    "epanechnikov": (2, (0.75, -0.75)),
    "quartic": (2, (15 / 16, -30 / 16, 15 / 16)),
    "fourth-order-polynomial": (4, tuple(_fourth_order_coefficients())),
}


@lru_cache(maxsize=None)
def get_kernel(kernel_id: str) -> Kernel:
    try:
        order, coef = KERNELS[kernel_id]
    except KeyError:
        raise InvalidKernel(f"unknown kernel {kernel_id!r}; choose from {sorted(KERNELS)}") from None
    return Kernel(kernel_id, order, coef)


@dataclass(frozen=True)
class BandwidthSchedule:
    """``h(n) = h_scale * n^-c1`` and floor ``e(n) = e_scale * n^-c2``.

    ``h_scale=None`` means the sample standard deviation of ``Y`` of the
    dataset the schedule is applied to.
    """

    c1: float = 0.38
    c2: float = 0.05
    h_scale: float | None = None
    e_scale: float = 0.01

    def __post_init__(self):
        if not 0 < self.c1 < 0.5:
            raise InvalidSchedule(f"c1 must lie in (0, 1/2), got {self.c1}")
        if not 0 < self.c2 < 0.25:
            raise InvalidSchedule(f"c2 must lie in (0, 1/4), got {self.c2}")
        if self.h_scale is not None and not self.h_scale > 0:
            raise InvalidSchedule("h_scale must be positive")
        if not self.e_scale > 0:
            raise InvalidSchedule("e_scale must be positive")

    def check_window(self, order: int) -> None:
        lo = self.c2 / order + 1 / (4 * order)
        hi = 0.5 - 2 * self.c2
        if not lo < self.c1 < hi:
            raise InvalidSchedule(
                f"c1={self.c1} outside the admissible window ({lo:.4g}, {hi:.4g}) "
                f"for c2={self.c2}, k={order}")

    def scale(self, y=None) -> float:
        if self.h_scale is not None:
            return float(self.h_scale)
        if y is None or len(y) < 2:
            raise EmptyDataset("h_scale from data needs at least 2 responses")
        s = float(np.std(y, ddof=1))
        if not s > 0:
            raise ValidationError("responses have zero spread; set h_scale explicitly")
        return s

    def h(self, n_hat: int, y=None) -> float:
        return self.scale(y) * float(n_hat) ** -self.c1

    def e(self, n_hat: int) -> float:
        return self.e_scale * float(n_hat) ** -self.c2


@dataclass(frozen=True)
class KernelConfig:
    kernel_id: str = "epanechnikov"
    schedule: BandwidthSchedule = field(default_factory=BandwidthSchedule)
    floor: str = "max"
    order: int | None = None

    def __post_init__(self):
        kern = get_kernel(self.kernel_id)
        if self.order is not None and self.order != kern.order:
            raise InvalidKernel(f"{self.kernel_id} has order {kern.order}, not {self.order}")
        if self.floor not in ("max", "add"):
            raise ValidationError(f"floor variant must be 'max' or 'add', got {self.floor!r}")
        object.__setattr__(self, "order", kern.order)
        self.schedule.check_window(kern.order)

    @property
    def kernel(self) -> Kernel:
        return get_kernel(self.kernel_id)

    def bandwidth(self, data: RegressionDataset) -> float:
        return self.schedule.h(data.n, data.y)

    def floor_level(self, data: RegressionDataset) -> float:
        return self.schedule.e(data.n)

    def apply_floor(self, f, e):
        if self.floor == "max":
            return np.maximum(e, f)
        return f + e

    def as_dict(self) -> dict:
        s = self.schedule
        return {"kernel.id": self.kernel_id, "kernel.order": self.order,
                "schedule.c1": s.c1, "schedule.c2": s.c2,
                "schedule.h_scale": "std(y)" if s.h_scale is None else s.h_scale,
                "schedule.e_scale": s.e_scale, "floor.variant": self.floor}


@dataclass(frozen=True, eq=False)
class InverseRegressionEval:
    y: float
    f_n: float
    f_en: float
    phi_n: np.ndarray
    r_en: np.ndarray


def _check(data: RegressionDataset):
    if data is None or data.n == 0:
        raise EmptyDataset("kernel estimation needs at least one sample")


def kernel_weights(kernel: Kernel, ys, samples, h: float) -> np.ndarray:
    """``K((ys[j] - samples[i]) / h)`` as an ``(len(ys), len(samples))`` matrix."""
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    return kernel((ys[:, None] - np.asarray(samples)[None, :]) / h)


def _sums(data: RegressionDataset, config: KernelConfig, ys, h):
    """Row sums ``sum_i K_i`` and ``sum_i X_i K_i`` for each evaluation point."""
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    kern = config.kernel
    xt = np.ascontiguousarray(data.x.T)
    s0 = np.empty(len(ys))
    s1 = np.empty((len(ys), data.d))
    for start in range(0, len(ys), _CHUNK):
        W = kernel_weights(kern, ys[start:start + _CHUNK], data.y, h)
        s0[start:start + _CHUNK] = W.sum(axis=1)
        for j in range(data.d):
            s1[start:start + _CHUNK, j] = (W * xt[j]).sum(axis=1)
    return s0, s1


def density_estimate(data: RegressionDataset, config: KernelConfig, y, h: float | None = None):
    """Kernel density estimate ``(1/(n h)) sum_i K((y - Y_i)/h)``; scalar in, scalar out."""
    _check(data)
    h = config.bandwidth(data) if h is None else h
    s0, _ = _sums(data, config, y, h)
    out = s0 / (data.n * h)
    return float(out[0]) if np.ndim(y) == 0 else out


def numerator_estimate(data: RegressionDataset, config: KernelConfig, y, h: float | None = None):
    """``(1/(n h)) sum_i X_i K((y - Y_i)/h)``, shape ``(d,)`` or ``(len(y), d)``."""
    _check(data)
    h = config.bandwidth(data) if h is None else h
    _, s1 = _sums(data, config, y, h)
    out = s1 / (data.n * h)
    return out[0] if np.ndim(y) == 0 else out


def _evaluate(data, config, ys, h, e):
    _check(data)
    h = config.bandwidth(data) if h is None else h
    e = config.floor_level(data) if e is None else e
    s0, s1 = _sums(data, config, ys, h)
    f = s0 / (data.n * h)
    phi = s1 / (data.n * h)
    fe = config.apply_floor(f, e)
    return f, fe, phi, phi / fe[:, None]


def inverse_regression(data: RegressionDataset, config: KernelConfig, y: float,
                       h: float | None = None, e: float | None = None) -> InverseRegressionEval:
    """Floored estimate ``r_en(y) = phi_n(y) / max(e, f_n(y))`` with its ingredients."""
    f, fe, phi, r = _evaluate(data, config, [y], h, e)
    return InverseRegressionEval(float(y), float(f[0]), float(fe[0]), phi[0], r[0])


def evaluate_on_grid(data: RegressionDataset, config: KernelConfig, ys,
                     h: float | None = None, e: float | None = None) -> list:
    ys = np.asarray(ys, dtype=float).reshape(-1)
    if ys.size == 0:
        raise ValidationError("evaluation grid is empty")
    f, fe, phi, r = _evaluate(data, config, ys, h, e)
    return [InverseRegressionEval(float(ys[j]), float(f[j]), float(fe[j]), phi[j], r[j])
            for j in range(len(ys))]


def floored_inverse_regression_at(data: RegressionDataset, config: KernelConfig, ys,
                                  h: float | None = None, e: float | None = None) -> np.ndarray:
    """``r_en`` at many points as an ``(m, d)`` array."""
    return _evaluate(data, config, np.asarray(ys, dtype=float).reshape(-1), h, e)[3]


def unfloored_inverse_regression(data: RegressionDataset, config: KernelConfig, y: float,
                                 h: float | None = None) -> np.ndarray:
    """``phi_n / f_n``, falling back to the mean response wherever ``f_n`` is zero.

    The fallback follows the convention stated for the unfloored estimator; it is
    kept for reference only, downstream code uses the floored estimator.
    """
    _check(data)
    h = config.bandwidth(data) if h is None else h
    s0, s1 = _sums(data, config, [y], h)
    if s0[0] == 0:
        return np.full(data.d, float(np.mean(data.y)))
    return s1[0] / s0[0]


def scalar_kernel_regression(inputs, outputs, config: KernelConfig, bandwidth: float, query):
    """Nadaraya-Watson estimate with a product kernel and one shared bandwidth.

    ``inputs`` is ``(n, q)``, ``query`` is ``(q,)`` or ``(m, q)``. Where every
    weight vanishes the mean of ``outputs`` is returned.
    """
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim == 1:
        inputs = inputs[:, None]
    outputs = np.asarray(outputs, dtype=float).reshape(-1)
    if inputs.shape[0] == 0:
        raise EmptyDataset("kernel regression needs at least one sample")
    if not bandwidth > 0:
        raise ValidationError("bandwidth must be positive")
    q = np.asarray(query, dtype=float)
    single = q.ndim <= 1
    q = q.reshape(1, -1) if single else q
    if q.shape[1] != inputs.shape[1]:
        raise ValidationError(f"query has {q.shape[1]} coordinates, inputs have {inputs.shape[1]}")
    kern = config.kernel
    it = np.ascontiguousarray(inputs.T)
    fallback = float(np.mean(outputs))
    out = np.empty(len(q))
    for start in range(0, len(q), _CHUNK):
        block = q[start:start + _CHUNK]
        W = np.ones((len(block), inputs.shape[0]))
        for j in range(inputs.shape[1]):
            W = W * kern((block[:, j, None] - it[j][None, :]) / bandwidth)
        den = W.sum(axis=1)
        num = (W * outputs).sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            out[start:start + _CHUNK] = np.where(den != 0, num / np.where(den != 0, den, 1.0),
                                                 fallback)
    return float(out[0]) if single else out
