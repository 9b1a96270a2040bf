"""Command line interface.

Subcommands: simulate, sir-fit, rate-bench, clt-check, edr-sweep, predict,
neighbor-scan. Every subcommand takes ``--config``, ``--seed``, ``--out`` and
``--format``. Exit status: 0 success, 2 validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace

import numpy as np

from . import __version__, config as cfgmod
from .bench import run_clt_check, run_edr_recovery, run_rate_experiment
from .edr import covariance_pair, edr_directions
from .errors import NumericalError, SpatialKIRError, ValidationError
from .fieldsim import RNG_ALGORITHM, generate_field
from .lattice import (center_dataset, parse_dims, read_dataset_csv, read_field_csv,
                      read_sites_csv, write_field_csv)
from .predictor import fit, neighbor_scan, predict_sites


def round_sig(obj, digits: int = 12):
    """Round every float in a JSON-like structure to ``digits`` significant digits."""
    if isinstance(obj, float):
        return float(f"{obj:.{digits}g}")
    if isinstance(obj, dict):
        return {k: round_sig(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_sig(v, digits) for v in obj]
    if isinstance(obj, np.generic):
        return round_sig(obj.item(), digits)
    return obj


def _emit_json(payload: dict, out) -> None:
    text = json.dumps(round_sig(payload), indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_csv(header, rows, out) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in row])
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def _header(args, cfg) -> dict:
    return {"version": __version__, "rng": RNG_ALGORITHM, "seed": args.seed,
            "command": args.command, "config_file": dict(sorted(cfg.items()))}


# ------------------------------------------------------------------ commands

def cmd_simulate(args, cfg):
    spec = cfgmod.field_spec(cfg, kind=args.kind, dims=args.dims, seed=args.seed)
    fld = generate_field(spec)
    if args.format == "json":
        _emit_json({**_header(args, cfg), "dims": list(fld.region.dims),
                    "values": fld.values.tolist()}, args.out)
    elif args.out:
        write_field_csv(fld, args.out)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"i{k + 1}" for k in range(fld.region.ndim)] + ["value"])
        for site, v in zip(fld.region.site_array(), fld.values.ravel()):
            w.writerow([int(c) for c in site] + [repr(float(v))])
        sys.stdout.write(buf.getvalue())


def cmd_sir_fit(args, cfg):
    kcfg = cfgmod.kernel_config(cfg)
    D, threshold = cfgmod.dimension_rule(cfg)
    if args.D is not None:
        D = args.D if args.D == "auto" else int(args.D)
    if args.threshold is not None:
        threshold = args.threshold
    data, mean = center_dataset(read_dataset_csv(args.data))
    model = edr_directions(covariance_pair(data, kcfg), D, threshold)
    if args.format == "csv":
        _emit_csv([f"v{k + 1}" for k in range(data.d)], model.directions.tolist(), args.out)
        return
    _emit_json({**_header(args, cfg), **model.as_dict(), "threshold": threshold,
                "n_hat": data.n, "x_mean": mean.tolist(), "config": kcfg.as_dict()}, args.out)


def cmd_rate_bench(args, cfg):
    template = cfgmod.single_index_spec(cfg)
    sizes = cfgmod.ints(args.sizes or cfg.get("bench.sizes", "400,900,1600,3600"))
    reps = args.replicates or int(cfg.get("bench.replicates", 10))
    rep = run_rate_experiment(template, sizes, reps, cfgmod.kernel_config(cfg), args.seed,
                              cfg.get("bench.oracle", "binning"),
                              int(cfg.get("bench.oracle_draws", 1_000_000)))
    print(f"rate-bench: slope {rep.slope:.4f}, {rep.wall_clock:.1f}s", file=sys.stderr)
    if args.format == "csv":
        rows = [(n, r, e) for n, errs in zip(rep.sizes, rep.errors) for r, e in enumerate(errs)]
        _emit_csv(["n_hat", "replicate", "frobenius_error"], rows, args.out)
        return
    _emit_json({**_header(args, cfg), **rep.as_dict()}, args.out)


def cmd_clt_check(args, cfg):
    template = cfgmod.single_index_spec(cfg)
    size = args.size or int(cfg.get("bench.size", 900))
    reps = args.replicates or int(cfg.get("bench.replicates", 200))
    summ = run_clt_check(template, size, reps, cfgmod.kernel_config(cfg), args.seed,
                         cfg.get("bench.oracle", "binning"),
                         int(cfg.get("bench.oracle_draws", 1_000_000)))
    if args.format == "csv":
        d = len(summ.std_ratio)
        rows = [(i + 1, j + 1, summ.means[0][i][j], summ.stds[0][i][j], summ.means[1][i][j],
                 summ.stds[1][i][j], summ.std_ratio[i][j]) for i in range(d) for j in range(d)]
        _emit_csv(["i", "j", "mean_n", "std_n", "mean_4n", "std_4n", "std_ratio"], rows, args.out)
        return
    _emit_json({**_header(args, cfg), **summ.as_dict()}, args.out)


def cmd_edr_sweep(args, cfg):
    template = cfgmod.single_index_spec(cfg)
    if args.d:
        template = template.with_(d=args.d, beta=None)
    links = (args.links or cfg.get("bench.links", "identity,cubic")).split(",")
    noises = cfgmod.floats(args.noise_stds or cfg.get("bench.noise_stds", "0.5"))
    sizes = cfgmod.ints(args.sizes or cfg.get("bench.sizes", "2500"))
    seeds = args.seeds or int(cfg.get("bench.seeds", 10))
    table = run_edr_recovery(template, [link.strip() for link in links], noises, sizes, seeds,
                             cfgmod.kernel_config(cfg), args.seed)
    if args.format == "csv":
        rows = [(r["link"], r["noise_std"], r["n_hat"], r["median"], r["iqr"]) for r in table.rows]
        _emit_csv(["link", "noise_std", "n_hat", "median", "iqr"], rows, args.out)
        return
    _emit_json({**_header(args, cfg), **table.as_dict()}, args.out)


def cmd_predict(args, cfg):
    fld = read_field_csv(args.field)
    targets = read_sites_csv(args.targets)
    if not targets:
        raise ValidationError("no target sites given")
    d = args.d or cfg.get("predict.d", "auto")
    d = d if d == "auto" else int(d)
    D, threshold = cfgmod.dimension_rule(cfg)
    target_set = {tuple(t) for t in targets}

    def not_target(sites):
        return np.array([tuple(s) not in target_set for s in sites.tolist()], dtype=bool)

    model = fit(fld, None, d, cfgmod.kernel_config(cfg), D, threshold,
                cfgmod.scan_config(cfg), train_filter=not_target)
    preds = predict_sites(model, fld, None, np.array(targets))
    n = fld.region.ndim
    if args.format == "json":
        _emit_json({**_header(args, cfg), "d": model.d, "D": model.D,
                    "directions": model.directions.tolist(), "bandwidth": model.bandwidth,
                    "predictions": [{"site": list(t), "prediction": float(p)}
                                    for t, p in zip(targets, preds)]}, args.out)
        return
    _emit_csv([f"i{k + 1}" for k in range(n)] + ["prediction"],
              [list(t) + [float(p)] for t, p in zip(targets, preds)], args.out)


def cmd_neighbor_scan(args, cfg):
    fld = read_field_csv(args.field)
    scfg = cfgmod.scan_config(cfg)
    changes = {}
    if args.delta is not None:
        changes["delta"] = args.delta
    if args.dmax is not None:
        changes["d_max"] = args.dmax
    if args.ygrid is not None:
        changes["grid_size"] = None if args.ygrid == 0 else args.ygrid
    if args.y is not None:
        changes["y"] = args.y
    if changes:
        scfg = replace(scfg, **changes)
    res = neighbor_scan(fld, None, scfg)
    if args.format == "csv":
        _emit_csv(["k", "statistic"], [(k + 1, s) for k, s in enumerate(res.statistics)], args.out)
        return
    _emit_json({**_header(args, cfg), **res.as_dict(), "delta": scfg.delta}, args.out)


# ------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--seed", type=int, default=0, help="master seed (u64)")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default=None)

    p = argparse.ArgumentParser(prog="spatialkir", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="simulate a lattice field (CSV)")
    s.add_argument("--kind", choices=("white-noise", "moving-average", "gaussian-decay"))
    s.add_argument("--dims", help="e.g. 40x40")
    s.add_argument("--spec", help="alias of --config")
    s.set_defaults(func=cmd_simulate, default_format="csv")

    s = sub.add_parser("sir-fit", parents=[common], help="EDR directions of a dataset CSV")
    s.add_argument("--data", required=True, help="CSV with header x1,...,xd,y")
    s.add_argument("--D", help="integer or 'auto'")
    s.add_argument("--threshold", type=float)
    s.set_defaults(func=cmd_sir_fit, default_format="json")

    s = sub.add_parser("rate-bench", parents=[common], help="convergence-rate experiment")
    s.add_argument("--sizes", help="comma separated sample sizes")
    s.add_argument("--replicates", type=int)
    s.set_defaults(func=cmd_rate_bench, default_format="json")

    s = sub.add_parser("clt-check", parents=[common], help="sqrt(n) fluctuation check")
    s.add_argument("--size", type=int)
    s.add_argument("--replicates", type=int)
    s.set_defaults(func=cmd_clt_check, default_format="json")

    s = sub.add_parser("edr-sweep", parents=[common], help="EDR recovery sweep")
    s.add_argument("--links")
    s.add_argument("--noise-stds", dest="noise_stds")
    s.add_argument("--sizes")
    s.add_argument("--seeds", type=int)
    s.add_argument("--d", type=int)
    s.set_defaults(func=cmd_edr_sweep, default_format="json")

    s = sub.add_parser("predict", parents=[common], help="dimension-reduction prediction")
    s.add_argument("--field", required=True)
    s.add_argument("--targets", required=True, help="CSV with header i1,...,iN")
    s.add_argument("--d", help="integer or 'auto'")
    s.set_defaults(func=cmd_predict, default_format="csv")

    s = sub.add_parser("neighbor-scan", parents=[common], help="estimate the neighbor count")
    s.add_argument("--field", required=True)
    s.add_argument("--delta", type=float)
    s.add_argument("--dmax", type=int)
    s.add_argument("--ygrid", type=int, help="grid size; 0 evaluates the single point --y")
    s.add_argument("--y", type=float)
    s.set_defaults(func=cmd_neighbor_scan, default_format="json")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = args.default_format
    try:
        cfg = cfgmod.load_config(getattr(args, "spec", None) or args.config)
        if getattr(args, "dims", None) and args.command == "simulate":
            parse_dims(args.dims)
        args.func(args, cfg)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (SpatialKIRError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
