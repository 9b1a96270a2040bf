"""Flat ``key = value`` configuration files.

Lines starting with ``#`` are comments. Lists are comma separated. Keys are
grouped by prefix: ``kernel.*``, ``schedule.*``, ``floor.*``, ``field.*``,
``model.*``, ``scan.*``, ``edr.*``, ``bench.*``.
"""

from __future__ import annotations

from .errors import ValidationError
from .fieldsim import FieldSpec, SingleIndexSpec
from .kernelest import BandwidthSchedule, KernelConfig
from .lattice import parse_dims
from .predictor import NeighborScanConfig

KNOWN_KEYS = {
    "kernel.id", "kernel.order", "schedule.c1", "schedule.c2", "schedule.h_scale",
    "schedule.e_scale", "floor.variant",
    "field.kind", "field.dims", "field.radius", "field.window", "field.weights", "field.range",
    "model.dims", "model.d", "model.beta", "model.link", "model.noise_std", "model.rho",
    "scan.delta", "scan.dmax", "scan.ygrid", "scan.y", "scan.bandwidth",
    "scan.bandwidth_factor", "scan.terminate_exclusive",
    "edr.D", "edr.threshold",
    "bench.sizes", "bench.size", "bench.replicates", "bench.seeds", "bench.links",
    "bench.noise_stds", "bench.oracle", "bench.oracle_draws", "predict.d",
}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else (":" if ":" in line else None)
        if sep is None:
            raise ValidationError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split(sep, 1))
        if key not in KNOWN_KEYS:
            raise ValidationError(f"{source}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def load_config(path) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        return parse_config_text(fh.read(), str(path))


def _floats(value: str) -> tuple:
    return tuple(float(v) for v in value.split(",") if v.strip())


def _ints(value: str) -> tuple:
    return tuple(int(v) for v in value.split(",") if v.strip())


def _bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"not a boolean: {value!r}")


def kernel_config(cfg: dict) -> KernelConfig:
    try:
        h_scale = cfg.get("schedule.h_scale")
        sched = BandwidthSchedule(
            c1=float(cfg.get("schedule.c1", 0.38)),
            c2=float(cfg.get("schedule.c2", 0.05)),
            h_scale=None if h_scale in (None, "auto", "std") else float(h_scale),
            e_scale=float(cfg.get("schedule.e_scale", 0.01)))
        order = cfg.get("kernel.order")
        return KernelConfig(cfg.get("kernel.id", "epanechnikov"), sched,
                            cfg.get("floor.variant", "max"),
                            None if order is None else int(order))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad kernel/schedule setting: {exc}") from exc


def field_spec(cfg: dict, kind=None, dims=None, seed: int = 0) -> FieldSpec:
    weights = cfg.get("field.weights")
    return FieldSpec(
        kind=kind or cfg.get("field.kind", "white-noise"),
        dims=parse_dims(dims or cfg.get("field.dims", "40x40")),
        seed=seed,
        radius=int(cfg.get("field.radius", 1)),
        window=cfg.get("field.window", "box"),
        weights=None if weights is None else _floats(weights),
        range_=float(cfg.get("field.range", 1.0)))


def single_index_spec(cfg: dict, seed: int = 0) -> SingleIndexSpec:
    beta = cfg.get("model.beta")
    return SingleIndexSpec(
        dims=parse_dims(cfg.get("model.dims", "50x50")),
        d=int(cfg.get("model.d", 3)),
        beta=None if beta is None else _floats(beta),
        link=cfg.get("model.link", "identity"),
        noise_std=float(cfg.get("model.noise_std", 1.0)),
        rho=float(cfg.get("model.rho", 0.0)),
        seed=seed)


def scan_config(cfg: dict) -> NeighborScanConfig:
    ygrid = cfg.get("scan.ygrid", "9")
    bw = cfg.get("scan.bandwidth")
    return NeighborScanConfig(
        delta=float(cfg.get("scan.delta", 0.1)),
        d_max=int(cfg.get("scan.dmax", 8)),
        grid_size=None if ygrid in ("0", "single", "none") else int(ygrid),
        y=float(cfg.get("scan.y", 0.0)),
        bandwidth=None if bw in (None, "auto") else float(bw),
        bandwidth_factor=float(cfg.get("scan.bandwidth_factor", 1.0)),
        terminate_exclusive=_bool(cfg.get("scan.terminate_exclusive", "false")),
        kernel_id=cfg.get("kernel.id", "epanechnikov"))


def dimension_rule(cfg: dict):
    D = cfg.get("edr.D", "auto")
    return (D if D == "auto" else int(D)), float(cfg.get("edr.threshold", 0.75))


def ints(value: str) -> tuple:
    return _ints(value)


def floats(value: str) -> tuple:
    return _floats(value)
