"""Command-line entry point for the benchmark harness.

Subcommands: ``sweep-uniform`` (uniform-grid size sweep), ``compare``
(uniform vs adaptive methods on a shared workload), ``gridinfo`` (cell
counts of the adaptive pipelines), and ``synth`` (write a synthetic dataset
CSV). Options come from defaults, then an optional flat key=value config
file, then command-line flags.
"""

from __future__ import annotations

import argparse
import sys
from typing import Dict, List, Optional

from . import bench, data
from .errors import DomainError, ParameterError
from .geo import GeoRect

_CONFIG_KEYS = {
    "dataset",
    "csv_path",
    "bbox",
    "methods",
    "epsilons",
    "rhos",
    "ns",
    "reps",
    "gamma",
    "alpha",
    "sigma",
    "privag_alpha",
    "privag_sigma",
    "aag_alpha",
    "aag_sigma",
    "seed",
    "out",
    "workers",
    "timing",
    "dump_workload",
    "dump_answers",
    "n_users",
    "synth_seed",
}


def _parse_config_file(path: str) -> Dict[str, str]:
    values: Dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise ParameterError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = value
    return values


def _parse_bbox(text: str) -> GeoRect:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise ParameterError(
            f"bbox must be 'minlon,minlat,maxlon,maxlat', got {text!r}"
        )
    min_lon, min_lat, max_lon, max_lat = (float(p) for p in parts)
    return GeoRect(min_lon, min_lat, max_lon, max_lat)


def _floats(text: str) -> List[float]:
    return [float(p) for p in text.split(",") if p.strip()]


def _ints(text: str) -> List[int]:
    return [int(p) for p in text.split(",") if p.strip()]


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ParameterError(f"expected a boolean, got {text!r}")


def _resolve_dataset_spec(
    name: Optional[str], bbox: Optional[GeoRect], cfg: Dict[str, str]
) -> data.DatasetSpec:
    name = name or cfg.get("dataset", "clustered")
    n_users = int(cfg.get("n_users", "100000"))
    synth_seed = int(cfg.get("synth_seed", "12345"))
    if name in data.PRESET_BBOXES:
        preset = data.PRESET_BBOXES[name]
        csv_path = cfg.get("csv_path")
        if not csv_path:
            raise ParameterError(
                f"dataset {name!r} needs csv_path in the config file (the raw "
                "data is user-supplied)"
            )
        return data.DatasetSpec(name, bbox or preset, data.CsvSource(csv_path))
    if name in ("clustered", "uniform"):
        return data.DatasetSpec(
            name, bbox, data.SyntheticSource(name, n_users, synth_seed)
        )
    # Anything else is a CSV path.
    return data.DatasetSpec(name, bbox, data.CsvSource(name))


def _build_config(args: argparse.Namespace) -> bench.ExperimentConfig:
    cfg = _parse_config_file(args.config) if args.config else {}
    bbox = None
    if getattr(args, "bbox", None):
        bbox = _parse_bbox(args.bbox)
    elif cfg.get("bbox"):
        bbox = _parse_bbox(cfg["bbox"])
    spec = _resolve_dataset_spec(getattr(args, "dataset", None), bbox, cfg)

    methods = tuple(args.method) if args.method else None
    if methods is None and cfg.get("methods"):
        methods = tuple(p.strip() for p in cfg["methods"].split(",") if p.strip())
    epsilons = tuple(args.epsilon) if args.epsilon else None
    if epsilons is None and cfg.get("epsilons"):
        epsilons = tuple(_floats(cfg["epsilons"]))
    rhos = tuple(args.rho) if args.rho else None
    if rhos is None and cfg.get("rhos"):
        rhos = tuple(_floats(cfg["rhos"]))
    ns = tuple(args.n) if args.n else None
    if ns is None and cfg.get("ns"):
        ns = tuple(_ints(cfg["ns"]))

    def pick(flag, key, cast, default):
        if flag is not None:
            return flag
        if key in cfg:
            return cast(cfg[key])
        return default

    config = bench.ExperimentConfig(
        dataset=spec,
        methods=methods or bench.METHODS,
        epsilons=epsilons or (1.0,),
        rhos=rhos or (0.01,),
        reps=pick(args.reps, "reps", int, 10),
        gamma=pick(args.gamma, "gamma", int, 500),
        ug_sizes=ns or (),
        privag_alpha=pick(args.alpha, "privag_alpha", float, float(cfg.get("alpha", 0.02))),
        privag_sigma=pick(args.sigma, "privag_sigma", float, float(cfg.get("sigma", 0.2))),
        aag_alpha=pick(args.alpha, "aag_alpha", float, float(cfg.get("alpha", 0.25))),
        aag_sigma=pick(args.sigma, "aag_sigma", float, float(cfg.get("sigma", 0.5))),
        master_seed=pick(args.seed, "seed", int, 0),
        out=pick(args.out, "out", str, "results.csv"),
        workers=pick(args.workers, "workers", int, 1),
        timing=pick(args.timing or None, "timing", _bool, False),
        dump_workload=pick(args.dump_workload, "dump_workload", str, None),
        dump_answers=pick(args.dump_answers, "dump_answers", str, None),
    )
    return config


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument(
        "--dataset",
        help="preset name (gowalla/porto/foursquare), synthetic name "
        "(clustered/uniform), or a CSV path",
    )
    parser.add_argument("--bbox", help="minlon,minlat,maxlon,maxlat")
    parser.add_argument(
        "--method",
        action="append",
        choices=bench.METHODS,
        help="method to run (repeatable)",
    )
    parser.add_argument("--epsilon", action="append", type=float, help="privacy budget (repeatable)")
    parser.add_argument("--rho", action="append", type=float, help="query size, fraction of the domain area (repeatable)")
    parser.add_argument("--n", action="append", type=int, help="uniform grid dimension (repeatable)")
    parser.add_argument("--reps", type=int, help="repetitions per setting (default 10)")
    parser.add_argument("--gamma", type=int, help="queries per workload (default 500)")
    parser.add_argument("--alpha", type=float, help="override the adaptive methods' subdivision alpha")
    parser.add_argument("--sigma", type=float, help="override the adaptive methods' phase-1 fraction")
    parser.add_argument("--seed", type=int, help="master seed (default 0)")
    parser.add_argument("--out", help="output CSV path (default results.csv)")
    parser.add_argument("--workers", type=int, help="parallel worker processes (default 1)")
    parser.add_argument("--timing", action="store_true", default=False,
                        help="record wall_time_ms (makes outputs non-byte-reproducible)")
    parser.add_argument("--dump-workload", dest="dump_workload", help="also write the query workload CSV")
    parser.add_argument("--dump-answers", dest="dump_answers", help="also write per-query truth/answer CSV")


def _print_summary(rows) -> None:
    for entry in bench.summarize(rows):
        bits = [
            f"dataset={entry['dataset']}",
            f"method={entry['method']}",
            f"epsilon={entry['epsilon']}",
        ]
        if entry["rho"] is not None:
            bits.append(f"rho={entry['rho']}")
        if entry["N"] is not None:
            bits.append(f"N={entry['N']}")
        bits.append(f"reps={entry['reps']}")
        if entry["mean_aqe"] is not None:
            bits.append(f"mean_aqe={entry['mean_aqe']:.6g}")
        bits.append(f"mean_cells={entry['mean_cell_count']:.6g}")
        print("  ".join(bits))


def _run_bench(args: argparse.Namespace) -> int:
    config = _build_config(args)
    if args.command == "compare":
        rows, meta = bench.run_comparison(config)
    elif args.command == "sweep-uniform":
        rows, meta = bench.run_uniform_sweep(config)
    else:
        rows, meta = bench.run_gridinfo(config)
    bench.emit_results(rows, config.out)
    bench.write_meta(meta, config.out + ".meta.json")
    _print_summary(rows)
    print(f"wrote {len(rows)} rows to {config.out}")
    return 0


def _run_synth(args: argparse.Namespace) -> int:
    domain = _parse_bbox(args.bbox) if args.bbox else data.UNIT_SQUARE
    if args.kind == "uniform":
        dataset = data.synth_uniform(domain, args.n_users, args.seed)
    else:
        dataset = data.synth_clustered(args.n_users, args.seed, domain)
    data.write_csv(dataset, args.out)
    print(f"wrote {len(dataset)} locations to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ldpgrid-bench",
        description="Benchmark grid-based spatial data collection under local differential privacy.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, helptext in (
        ("sweep-uniform", "AQE of N x N uniform grids over the configured sizes"),
        ("compare", "compare methods on shared per-repetition workloads"),
        ("gridinfo", "cell counts of the adaptive grid pipelines"),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
        if name == "gridinfo":
            p.set_defaults(method=None)

    p = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    p.add_argument("--kind", choices=("uniform", "clustered"), default="clustered")
    p.add_argument("--n-users", dest="n_users", type=int, default=100000)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--bbox", help="domain as minlon,minlat,maxlon,maxlat (default unit square)")
    p.add_argument("--out", required=True)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "synth":
            return _run_synth(args)
        if args.command == "gridinfo" and not args.method:
            args.method = ["privag", "aag"]
        return _run_bench(args)
    except (ParameterError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
