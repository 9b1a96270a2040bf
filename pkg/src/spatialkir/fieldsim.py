"""Seeded simulators for lattice random fields and single-index regression data.

Every field is a finite-window moving average of an i.i.d. standard normal
base field, hence m-dependent: sites farther apart than the window diameter
are independent, so any strong-mixing coefficient vanishes beyond it.

Random numbers come from numpy's ``PCG64`` bit generator seeded directly by
the 64-bit seed. Replicate seeds are derived with :func:`derive_seed`.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import floor

import numpy as np
from scipy.signal import correlate

from .errors import EmptyRegion, InsufficientReplicates, ValidationError
from .lattice import LatticeRegion, RegressionDataset, ScalarField

__all__ = [
    "RNG_ALGORITHM", "make_rng", "derive_seed", "FieldSpec", "SingleIndexSpec",
    "window_weights", "generate_field", "generate_single_index",
    "sample_single_index", "ground_truth_sigma_e", "closed_form_sigma_e", "LINKS",
]

RNG_ALGORITHM = "numpy PCG64; replicate seeds = splitmix64(seed XOR index)"
_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Per-replicate seed: splitmix64 finalizer applied to ``seed XOR index``."""
    return _splitmix64((int(seed) ^ int(index)) & _MASK64)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK64))


@dataclass(frozen=True)
class FieldSpec:
    """Field simulator settings.

    kind:
        ``white-noise``, ``moving-average`` or ``gaussian-decay``.
    radius, window, weights:
        moving-average window: ``window='box'`` uses the cube of half-width
        ``radius``, ``window='cross'`` the sites at L1 distance <= ``radius``.
        ``weights`` (full ``(2r+1,)*N`` array) overrides the uniform default
        ``1/sqrt(window size)``.
    range_:
        gaussian-decay length scale; weights ``exp(-|u|^2 / (2 range^2))`` on
        a box truncated at ``ceil(3 range)``, normalized to unit variance.
    """

    kind: str = "white-noise"
    dims: tuple = (40, 40)
    seed: int = 0
    radius: int = 1
    window: str = "box"
    weights: tuple | None = None
    range_: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        if self.kind not in ("white-noise", "moving-average", "gaussian-decay"):
            raise ValidationError(f"unknown field kind {self.kind!r}")
        if int(self.radius) != self.radius or self.radius < 0:
            raise ValidationError("window radius must be a non-negative integer")
        if self.window not in ("box", "cross"):
            raise ValidationError(f"window must be 'box' or 'cross', got {self.window!r}")
        if self.kind == "gaussian-decay" and not self.range_ > 0:
            raise ValidationError("gaussian-decay range must be positive")
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if not np.all(np.isfinite(w)):
                raise ValidationError("moving-average weights must be finite")


def window_weights(spec: FieldSpec) -> np.ndarray:
    """Moving-average weights as a ``(2r+1,)*N`` array centered on offset 0."""
    ndim = len(spec.dims)
    if spec.kind == "white-noise":
        return np.ones((1,) * ndim)
    if spec.kind == "gaussian-decay":
        r = int(np.ceil(3 * spec.range_))
        ax = np.arange(-r, r + 1)
        sq = sum(g ** 2 for g in np.meshgrid(*[ax] * ndim, indexing="ij"))
        w = np.exp(-sq / (2 * spec.range_ ** 2))
        return w / np.sqrt(np.sum(w ** 2))
    r = int(spec.radius)
    shape = (2 * r + 1,) * ndim
    if spec.weights is not None:
        w = np.asarray(spec.weights, dtype=float)
        if w.shape != shape:
            w = w.reshape(shape)
        return w
    ax = np.arange(-r, r + 1)
    grids = np.meshgrid(*[ax] * ndim, indexing="ij")
    if spec.window == "cross":
        mask = sum(np.abs(g) for g in grids) <= r
    else:
        mask = np.ones(shape, dtype=bool)
    return mask / np.sqrt(mask.sum())


def _moving_average(rng, dims, weights) -> np.ndarray:
    pad = [(s - 1) // 2 for s in weights.shape]
    base = rng.standard_normal(tuple(n + 2 * p for n, p in zip(dims, pad)))
    if all(s == 1 for s in weights.shape):
        return base * float(weights.reshape(()))
    return correlate(base, weights, mode="valid", method="direct")


def generate_field(spec: FieldSpec) -> ScalarField:
    """Simulate the field ``xi_i = sum_u w_u eta_{i+u}`` on ``spec.dims``."""
    if len(spec.dims) == 0 or any(n <= 0 for n in spec.dims):
        raise EmptyRegion(f"cannot simulate on dims {spec.dims}")
    rng = make_rng(spec.seed)
    values = _moving_average(rng, spec.dims, window_weights(spec))
    return ScalarField(LatticeRegion(spec.dims), values)


def _identity(t):
    return t


LINKS = {
    "identity": _identity,
    "cubic": lambda t: t ** 3,
    "sine": np.sin,
}


@dataclass(frozen=True)
class SingleIndexSpec:
    """``Y = link(beta . X) + noise_std * eps`` on a lattice of ``dims`` sites.

    Each covariate coordinate is an independent field
    ``(eta_i + rho * sum_{4-nbrs} eta_j) / sqrt(1 + 2N rho^2)``: unit variance,
    Gaussian, correlated across neighboring sites when ``rho > 0``.
    """

    dims: tuple = (50, 50)
    d: int = 3
    beta: tuple | None = None
    link: str = "identity"
    noise_std: float = 1.0
    rho: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(n) for n in self.dims))
        if self.d < 1:
            raise ValidationError("covariate dimension must be >= 1")
        beta = np.zeros(self.d) if self.beta is None else np.asarray(self.beta, dtype=float)
        if self.beta is None:
            beta[0] = 1.0
        if beta.shape != (self.d,):
            raise ValidationError(f"beta must have length {self.d}")
        nrm = np.linalg.norm(beta)
        if not nrm > 0:
            raise ValidationError("beta must be nonzero")
        object.__setattr__(self, "beta", tuple(beta / nrm))
        if self.link not in LINKS:
            raise ValidationError(f"unknown link {self.link!r}; choose from {sorted(LINKS)}")
        if self.noise_std < 0:
            raise ValidationError("noise_std must be >= 0")
        if not 0 <= self.rho < 1:
            raise ValidationError("rho must lie in [0, 1)")

    @property
    def n_hat(self) -> int:
        return int(np.prod(self.dims))

    def with_(self, **changes) -> "SingleIndexSpec":
        kw = dict(dims=self.dims, d=self.d, beta=self.beta, link=self.link,
                  noise_std=self.noise_std, rho=self.rho, seed=self.seed)
        kw.update(changes)
        return SingleIndexSpec(**kw)


def _cross_weights(ndim: int, rho: float) -> np.ndarray:
    w = np.zeros((3,) * ndim)
    center = (1,) * ndim
    w[center] = 1.0
    for j in range(ndim):
        for s in (0, 2):
            idx = list(center)
            idx[j] = s
            w[tuple(idx)] = rho
    return w / np.sqrt(1 + 2 * ndim * rho ** 2)


def generate_single_index(spec: SingleIndexSpec) -> RegressionDataset:
    """One sample per lattice site, in lexicographic site order."""
    rng = make_rng(spec.seed)
    region = LatticeRegion(spec.dims)
    cols = []
    for _ in range(spec.d):
        if spec.rho == 0:
            cols.append(rng.standard_normal(spec.dims).ravel())
        else:
            cols.append(_moving_average(rng, spec.dims, _cross_weights(len(spec.dims), spec.rho)).ravel())
    x = np.stack(cols, axis=1)
    eps = rng.standard_normal(x.shape[0])
    y = LINKS[spec.link](x @ np.asarray(spec.beta)) + spec.noise_std * eps
    return RegressionDataset(x, y, region.site_array())


def sample_single_index(spec: SingleIndexSpec, size: int, rng: np.random.Generator):
    """``size`` i.i.d. draws ``(X, Y)`` from the single-site marginal law."""
    x = rng.standard_normal((size, spec.d))
    y = LINKS[spec.link](x @ np.asarray(spec.beta)) + spec.noise_std * rng.standard_normal(size)
    return x, y


def closed_form_sigma_e(spec: SingleIndexSpec) -> np.ndarray | None:
    """``var E(X|Y)`` in closed form where it is known, else ``None``.

    Identity link: ``E(X|Y) = beta Y / (1 + s^2)``, so the matrix is
    ``beta beta^T / (1 + s^2)``. The spatial correlation does not enter since
    the single-site marginal of ``X`` is standard normal for every ``rho``.
    """
    if spec.link != "identity":
        return None
    b = np.asarray(spec.beta)
    return np.outer(b, b) / (1.0 + spec.noise_std ** 2)


def ground_truth_sigma_e(spec: SingleIndexSpec, replicates: int = 1_000_000,
                         bins: int | None = None, seed: int | None = None) -> np.ndarray:
    """Monte Carlo ``var E(X|Y)`` by equal-mass binning of ``Y``.

    Draws ``replicates`` pairs, splits the sorted responses into
    ``floor(replicates^(1/3))`` bins (or ``bins``) and returns the
    mass-weighted covariance of the per-bin covariate means. Independent of
    the kernel estimators.
    """
    if replicates < 1000:
        raise InsufficientReplicates(f"need at least 1000 replicates, got {replicates}")
    nbins = int(floor(replicates ** (1 / 3) + 1e-9)) if bins is None else int(bins)
    rng = make_rng(spec.seed if seed is None else seed)
    x, y = sample_single_index(spec, replicates, rng)
    order = np.argsort(y, kind="stable")
    x = x[order]
    edges = np.linspace(0, replicates, nbins + 1).round().astype(int)
    counts = np.diff(edges)
    sums = np.add.reduceat(x, edges[:-1], axis=0)
    means = sums / counts[:, None]
    p = counts / replicates
    centered = means - p @ means
    out = (centered * p[:, None]).T @ centered
    return (out + out.T) / 2
