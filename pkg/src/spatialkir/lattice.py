"""Rectangular lattice regions, nearest-neighbor vicinities and the
associated regression process built from a scalar field.

Sites are integer tuples. A region is the box ``lower <= i <= lower + dims - 1``
(``lower`` defaults to all ones). Neighbors are ordered by squared Euclidean
distance, ties broken by the lexicographic order of the offset vector, which
makes the ordering translation invariant away from the region boundary.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field as dc_field
from itertools import product
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import (DegenerateDataset, EmptyDataset, EmptyRegion,
                     InsufficientRegion, OutOfRegion, ValidationError)

__all__ = [
    "Site", "LatticeRegion", "ScalarField", "RegressionDataset",
    "vicinity_offsets", "neighbor_ordering", "build_associated_process",
    "center_dataset", "read_field_csv", "write_field_csv",
    "read_dataset_csv", "write_dataset_csv",
]


class Site(tuple):
    """A lattice site ``(i_1, ..., i_N)``; compares equal to the plain tuple."""

    def __new__(cls, coords):
        coords = tuple(int(c) for c in coords)
        if len(coords) < 1:
            raise ValidationError("a site needs at least one coordinate")
        return super().__new__(cls, coords)

    @property
    def coords(self) -> tuple:
        return tuple(self)

    @property
    def ndim(self) -> int:
        return len(self)

    def __add__(self, other):
        return Site(a + b for a, b in zip(self, other, strict=True))

    def __repr__(self):
        return f"Site{tuple(self)}"


@dataclass(frozen=True)
class LatticeRegion:
    dims: tuple
    lower: tuple = None

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        if len(dims) < 1:
            raise ValidationError("a region needs at least one dimension")
        if any(n <= 0 for n in dims):
            raise EmptyRegion(f"region dims must be positive, got {dims}")
        lower = (1,) * len(dims) if self.lower is None else tuple(int(c) for c in self.lower)
        if len(lower) != len(dims):
            raise ValidationError("lower corner and dims differ in length")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "lower", lower)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def n_hat(self) -> int:
        return int(np.prod(self.dims))

    @property
    def upper(self) -> tuple:
        return tuple(lo + n - 1 for lo, n in zip(self.lower, self.dims))

    def __len__(self):
        return self.n_hat

    def __contains__(self, site) -> bool:
        site = tuple(site)
        if len(site) != self.ndim:
            return False
        return all(lo <= c <= hi for c, lo, hi in zip(site, self.lower, self.upper))

    def __iter__(self) -> Iterator[Site]:
        ranges = [range(lo, hi + 1) for lo, hi in zip(self.lower, self.upper)]
        for coords in product(*ranges):
            yield Site(coords)

    def contains_array(self, coords: np.ndarray) -> np.ndarray:
        """Vectorized membership for an ``(..., N)`` integer array."""
        coords = np.asarray(coords)
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        return np.all((coords >= lo) & (coords <= hi), axis=-1)

    def site_array(self) -> np.ndarray:
        """All sites as an ``(n_hat, N)`` array in lexicographic order."""
        grids = np.meshgrid(*[np.arange(lo, hi + 1) for lo, hi in zip(self.lower, self.upper)],
                            indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def contains_region(self, other: "LatticeRegion") -> bool:
        return other.ndim == self.ndim and other.lower in self and other.upper in self

    def shifted(self, offset) -> "LatticeRegion":
        return LatticeRegion(self.dims, tuple(lo + o for lo, o in zip(self.lower, offset)))


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real values on every site of a region, stored as an array of shape ``region.dims``."""

    region: LatticeRegion
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.region.dims:
            raise ValidationError(
                f"values shape {values.shape} does not match region dims {self.region.dims}")
        if not np.all(np.isfinite(values)):
            raise ValidationError("field values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def index(self, site) -> tuple:
        if site not in self.region:
            raise OutOfRegion(f"{site} lies outside {self.region}")
        return tuple(c - lo for c, lo in zip(site, self.region.lower))

    def __getitem__(self, site) -> float:
        return float(self.values[self.index(site)])

    def lookup(self, coords: np.ndarray) -> np.ndarray:
        """Values at an ``(..., N)`` array of sites (caller guarantees membership)."""
        idx = np.asarray(coords) - np.asarray(self.region.lower)
        return self.values[tuple(np.moveaxis(idx, -1, 0))]

    def restrict(self, region: LatticeRegion) -> np.ndarray:
        if not self.region.contains_region(region):
            raise OutOfRegion(f"{region} is not contained in {self.region}")
        sl = tuple(slice(lo - flo, lo - flo + n)
                   for lo, flo, n in zip(region.lower, self.region.lower, region.dims))
        return self.values[sl]

    def with_values(self, values) -> "ScalarField":
        return ScalarField(self.region, values)


@dataclass(frozen=True, eq=False)
class RegressionDataset:
    """Samples ``(X_i, Y_i)`` with ``X`` of shape ``(n, d)``.

    ``sites`` optionally tags each sample with its originating site as an
    ``(n, N)`` integer array.
    """

    x: np.ndarray
    y: np.ndarray
    sites: np.ndarray | None = None
    mean_x: np.ndarray = dc_field(init=False)

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        y = np.array(self.y, dtype=float).reshape(-1)
        if x.ndim != 2 or x.shape[1] < 1:
            raise ValidationError("covariates must be an (n, d) array with d >= 1")
        if x.shape[0] != y.shape[0]:
            raise ValidationError(f"{x.shape[0]} covariate rows but {y.shape[0]} responses")
        if x.shape[0] == 0:
            raise EmptyDataset("dataset has no samples")
        sites = None
        if self.sites is not None:
            sites = np.array(self.sites, dtype=np.int64)
            if sites.shape[0] != x.shape[0]:
                raise ValidationError("one site tag per sample is required")
            sites.flags.writeable = False
        mean_x = x.mean(axis=0)
        for a in (x, y, mean_x):
            a.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "mean_x", mean_x)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    def __len__(self):
        return self.n

    def subset(self, mask) -> "RegressionDataset":
        mask = np.asarray(mask)
        sites = None if self.sites is None else self.sites[mask]
        return RegressionDataset(self.x[mask], self.y[mask], sites)

    def concat(self, other: "RegressionDataset") -> "RegressionDataset":
        sites = None
        if self.sites is not None and other.sites is not None:
            sites = np.concatenate([self.sites, other.sites])
        return RegressionDataset(np.concatenate([self.x, other.x]),
                                 np.concatenate([self.y, other.y]), sites)


def _sorted_offsets(ndim: int, radius: int) -> np.ndarray:
    """Nonzero offsets of the cube ``[-radius, radius]^N`` in neighbor order."""
    axes = [np.arange(-radius, radius + 1)] * ndim
    off = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=-1)
    off = off[np.any(off != 0, axis=1)]
    sq = np.sum(off * off, axis=1)
    # lexsort: last key is primary
    order = np.lexsort(tuple(off[:, j] for j in range(ndim - 1, -1, -1)) + (sq,))
    return off[order]


def vicinity_offsets(ndim: int, count: int) -> np.ndarray:
    """First ``count`` offsets of the unbounded lattice in neighbor order, shape ``(count, N)``.

    This is the translation-invariant vicinity shape used by the associated process.
    """
    if count < 1:
        raise ValidationError("count must be positive")
    radius = 1
    while True:
        off = _sorted_offsets(ndim, radius)
        complete = off[np.sum(off * off, axis=1) <= radius * radius]
        if len(complete) >= count:
            return complete[:count]
        radius *= 2


def neighbor_ordering(site, region: LatticeRegion, count: int) -> list:
    """The ``count`` nearest sites of ``region`` other than ``site``.

    Ordered by (squared distance, lexicographic offset); raises
    :class:`InsufficientRegion` when the region is too small.
    """
    site = Site(site)
    if site not in region:
        raise OutOfRegion(f"{site} lies outside {region}")
    if count < 1:
        raise ValidationError("count must be positive")
    if count >= region.n_hat:
        raise InsufficientRegion(f"need {count} neighbors but region has {region.n_hat} sites")
    base = np.asarray(site)
    span = max(max(site[j] - region.lower[j], region.upper[j] - site[j]) for j in range(len(site)))
    radius = 1
    while True:
        off = _sorted_offsets(region.ndim, radius)
        inside = region.contains_array(base + off)
        if radius >= span:
            # cube covers the whole region: every candidate is accounted for
            chosen = off[inside][:count]
            break
        complete = inside & (np.sum(off * off, axis=1) <= radius * radius)
        if complete.sum() >= count:
            chosen = off[complete][:count]
            break
        radius *= 2
    return [Site(base + o) for o in chosen]


def build_associated_process(field: ScalarField, d: int, observed: LatticeRegion | None = None
                             ) -> RegressionDataset:
    """Pair every eligible site value ``xi_i`` with its ``d`` nearest-neighbor values.

    A site of ``observed`` is eligible when all ``d`` sites of its vicinity
    lie in ``observed``; other sites are skipped. Samples come out in
    lexicographic site order, tagged with their site.
    """
    observed = field.region if observed is None else observed
    if not field.region.contains_region(observed):
        raise OutOfRegion(f"{observed} is not contained in {field.region}")
    if d < 1 or d >= observed.n_hat:
        raise InsufficientRegion(f"d={d} must satisfy 1 <= d < {observed.n_hat}")
    offsets = vicinity_offsets(observed.ndim, d)
    sites = observed.site_array()
    nbrs = sites[:, None, :] + offsets[None, :, :]
    keep = np.all(observed.contains_array(nbrs), axis=1)
    if not keep.any():
        raise EmptyDataset(f"no site of {observed} has its {d}-neighbor vicinity inside it")
    sites, nbrs = sites[keep], nbrs[keep]
    return RegressionDataset(field.lookup(nbrs), field.lookup(sites), sites)


def center_dataset(data: RegressionDataset) -> tuple:
    """Subtract the covariate mean; returns ``(centered, mean)``. ``Y`` is untouched."""
    if data.n < 2:
        raise DegenerateDataset("centering needs at least 2 samples")
    mean = data.mean_x.copy()
    return RegressionDataset(data.x - mean, data.y, data.sites), mean


# ---------------------------------------------------------------- CSV formats

def _fmt(v: float) -> str:
    return repr(float(v))


def write_field_csv(field: ScalarField, path) -> None:
    n = field.region.ndim
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"i{k + 1}" for k in range(n)] + ["value"])
        for site, v in zip(field.region.site_array(), field.values.ravel()):
            w.writerow([str(int(c)) for c in site] + [_fmt(v)])


def read_field_csv(path) -> ScalarField:
    """Read ``i1,...,iN,value`` rows; the sites must fill a rectangle exactly."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValidationError(f"{path}: empty file")
    header, body = rows[0], [r for r in rows[1:] if r]
    ndim = len(header) - 1
    if ndim < 1 or header[-1].strip() != "value" or \
            [h.strip() for h in header[:-1]] != [f"i{k + 1}" for k in range(ndim)]:
        raise ValidationError(f"{path}: expected header i1,...,iN,value")
    if not body:
        raise EmptyRegion(f"{path}: no sites")
    coords = np.array([[int(c) for c in r[:ndim]] for r in body], dtype=np.int64)
    vals = np.array([float(r[ndim]) for r in body])
    lower = coords.min(axis=0)
    dims = coords.max(axis=0) - lower + 1
    region = LatticeRegion(tuple(dims), tuple(lower))
    if len(body) != region.n_hat:
        raise ValidationError(f"{path}: {len(body)} rows do not fill a {tuple(dims)} rectangle")
    values = np.full(region.dims, np.nan)
    values[tuple((coords - lower).T)] = vals
    if np.isnan(values).any():
        raise ValidationError(f"{path}: duplicate or missing sites")
    return ScalarField(region, values)


def write_dataset_csv(data: RegressionDataset, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{k + 1}" for k in range(data.d)] + ["y"])
        for xi, yi in zip(data.x, data.y):
            w.writerow([_fmt(v) for v in xi] + [_fmt(yi)])


def read_dataset_csv(path) -> RegressionDataset:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if len(rows) < 2:
        raise EmptyDataset(f"{path}: no samples")
    header = [h.strip() for h in rows[0]]
    d = len(header) - 1
    if d < 1 or header[-1] != "y" or header[:-1] != [f"x{k + 1}" for k in range(d)]:
        raise ValidationError(f"{path}: expected header x1,...,xd,y")
    arr = np.array([[float(v) for v in r] for r in rows[1:]])
    return RegressionDataset(arr[:, :d], arr[:, d])


def parse_dims(text: str | Sequence[int]) -> tuple:
    """``"40x40"`` or ``"40,40"`` -> ``(40, 40)``."""
    if not isinstance(text, str):
        return tuple(int(v) for v in text)
    parts = text.replace("x", ",").replace("X", ",").split(",")
    return tuple(int(p) for p in parts if p.strip())


def read_sites_csv(path: str | Path) -> list:
    """Site list with header ``i1,...,iN`` (extra columns ignored)."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        return []
    header = [h.strip() for h in rows[0]]
    ndim = sum(1 for h in header if h.startswith("i") and h[1:].isdigit())
    if ndim == 0:
        raise ValidationError(f"{path}: expected header i1,...,iN")
    return [Site(int(c) for c in r[:ndim]) for r in rows[1:]]
