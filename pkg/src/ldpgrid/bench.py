"""Experiment harness: seeded uniform-grid sweeps, method comparisons, and
grid-size reports, emitting machine-readable CSV.

All randomness derives from one master seed. Every unit of work (one method
at one budget in one repetition) gets its own seed from the master seed and
its position in the experiment plan, so results do not depend on execution
order or worker count. Within one repetition all methods are scored on the
identical query workload.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import data as data_io
from .adaptive import AdaptiveGridParams, build_aag, build_privag, compute_g1
from .collection import collect
from .errors import ParameterError
from .geo import Dataset, build_uniform
from .queries import aqe, generate_workload, ground_truth_many, noisy_answer_many

__all__ = [
    "METHODS",
    "DEFAULT_UG_CANDIDATES",
    "CSV_HEADER",
    "ExperimentConfig",
    "ResultRow",
    "run_uniform_sweep",
    "run_comparison",
    "run_gridinfo",
    "emit_results",
    "read_results",
    "summarize",
    "write_workload_dump",
    "write_answer_dump",
]

METHODS = ("ug", "privag", "aag")
DEFAULT_UG_CANDIDATES = (2, 5, 10, 15, 20, 30, 40, 50)

CSV_HEADER = (
    "dataset",
    "method",
    "epsilon",
    "rho",
    "N",
    "rep",
    "aqe",
    "cell_count",
    "wall_time_ms",
)

# Seed-derivation tags; part of the on-disk reproducibility contract.
_TAG_WORKLOAD = 1
_TAG_BUILD = 2
_TAG_HOLDOUT_BUILD = 3
_TAG_HOLDOUT_WORKLOAD = 4


@dataclass
class ExperimentConfig:
    """Everything a run needs; field names double as config-file keys."""

    dataset: data_io.DatasetSpec
    methods: Tuple[str, ...] = METHODS
    epsilons: Tuple[float, ...] = (1.0,)
    rhos: Tuple[float, ...] = (0.01,)
    reps: int = 10
    gamma: int = 500
    ug_sizes: Tuple[int, ...] = ()
    privag_alpha: float = 0.02
    privag_sigma: float = 0.2
    aag_alpha: float = 0.25
    aag_sigma: float = 0.5
    master_seed: int = 0
    out: str = "results.csv"
    workers: int = 1
    timing: bool = False
    dump_workload: Optional[str] = None
    dump_answers: Optional[str] = None

    def validate(self) -> None:
        if not self.methods:
            raise ParameterError("at least one method required")
        for m in self.methods:
            if m not in METHODS:
                raise ParameterError(f"unknown method {m!r}; expected one of {METHODS}")
        if len(set(self.methods)) != len(self.methods):
            raise ParameterError("duplicate methods")
        if not self.epsilons:
            raise ParameterError("at least one epsilon required")
        for e in self.epsilons:
            if not e > 0:
                raise ParameterError(f"epsilon must be positive, got {e}")
        if not self.rhos:
            raise ParameterError("at least one rho required")
        for r in self.rhos:
            if not 0 < r <= 1:
                raise ParameterError(f"rho must lie in (0, 1], got {r}")
        if self.reps < 1:
            raise ParameterError("reps must be >= 1")
        if self.gamma < 1:
            raise ParameterError("gamma must be >= 1")
        for n in self.ug_sizes:
            if n < 1:
                raise ParameterError(f"grid size must be >= 1, got {n}")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ParameterError("master_seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class ResultRow:
    """One scored run. ``n_grid`` is the uniform-grid dimension (UG rows
    only); ``aqe`` is absent for grid-info rows."""

    dataset: str
    method: str
    epsilon: float
    rho: Optional[float]
    n_grid: Optional[int]
    rep: int
    aqe: Optional[float]
    cell_count: int
    wall_time_ms: Optional[int] = None


def _row_key(row: ResultRow):
    return (
        row.dataset,
        row.method,
        row.epsilon,
        -1.0 if row.rho is None else row.rho,
        -1 if row.n_grid is None else row.n_grid,
        row.rep,
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_results(rows: Sequence[ResultRow], path: str) -> None:
    """Write rows as CSV in a fixed order with round-trippable formatting."""
    ordered = sorted(rows, key=_row_key)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in ordered:
            writer.writerow(
                [
                    r.dataset,
                    r.method,
                    _fmt(r.epsilon),
                    _fmt(r.rho),
                    _fmt(r.n_grid),
                    _fmt(r.rep),
                    _fmt(r.aqe),
                    _fmt(r.cell_count),
                    _fmt(r.wall_time_ms),
                ]
            )


def read_results(path: str) -> List[ResultRow]:
    """Parse a results CSV back into rows (inverse of ``emit_results``)."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ParameterError(f"unexpected header {header!r}")
        for rec in reader:
            rows.append(
                ResultRow(
                    dataset=rec[0],
                    method=rec[1],
                    epsilon=float(rec[2]),
                    rho=float(rec[3]) if rec[3] else None,
                    n_grid=int(rec[4]) if rec[4] else None,
                    rep=int(rec[5]),
                    aqe=float(rec[6]) if rec[6] else None,
                    cell_count=int(rec[7]),
                    wall_time_ms=int(rec[8]) if rec[8] else None,
                )
            )
    return rows


def summarize(rows: Sequence[ResultRow]) -> List[dict]:
    """Mean AQE (and mean cell count) per setting, averaged over reps."""
    groups: Dict[tuple, list] = {}
    for r in rows:
        key = (r.dataset, r.method, r.epsilon, r.rho, r.n_grid)
        groups.setdefault(key, []).append(r)
    out = []
    for key in sorted(groups, key=lambda k: (k[0], k[1], k[2], k[3] or -1.0, k[4] or -1)):
        rs = groups[key]
        aqes = [r.aqe for r in rs if r.aqe is not None]
        out.append(
            {
                "dataset": key[0],
                "method": key[1],
                "epsilon": key[2],
                "rho": key[3],
                "N": key[4],
                "reps": len(rs),
                "mean_aqe": float(np.mean(aqes)) if aqes else None,
                "mean_cell_count": float(np.mean([r.cell_count for r in rs])),
            }
        )
    return out


def _derive_rng(master_seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(key))
    return np.random.default_rng(ss)


def _build_workloads(config: ExperimentConfig, dataset: Dataset):
    """Workload and exact answers per (rep, rho); shared by all methods."""
    workloads = {}
    for rep in range(config.reps):
        for rho_idx, rho in enumerate(config.rhos):
            rng = _derive_rng(config.master_seed, _TAG_WORKLOAD, rep, rho_idx)
            wl = generate_workload(dataset.domain, rho, config.gamma, rng)
            truths = ground_truth_many(dataset, wl.queries)
            workloads[(rep, rho_idx)] = (wl.queries, truths)
    return workloads


def write_workload_dump(config: ExperimentConfig, workloads, path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rep", "rho", "query", "min_lon", "min_lat", "max_lon", "max_lat"])
        for rep in range(config.reps):
            for rho_idx, rho in enumerate(config.rhos):
                queries, _ = workloads[(rep, rho_idx)]
                for qi, q in enumerate(queries):
                    r = q.rect
                    writer.writerow(
                        [
                            rep,
                            repr(float(rho)),
                            qi,
                            repr(r.min_lon),
                            repr(r.min_lat),
                            repr(r.max_lon),
                            repr(r.max_lat),
                        ]
                    )


def write_answer_dump(records: Sequence[tuple], path: str) -> None:
    """Per-query (truth, answer) pairs; AQE rows are recomputable from these."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["dataset", "method", "epsilon", "rho", "N", "rep", "query", "truth", "answer"]
        )
        for rec in sorted(records):
            dataset, method, eps, rho, n, rep, qi, truth, ans = rec
            writer.writerow(
                [
                    dataset,
                    method,
                    repr(float(eps)),
                    repr(float(rho)),
                    "" if n is None else n,
                    rep,
                    qi,
                    truth,
                    repr(float(ans)),
                ]
            )


# Worker context for process pools: set once per worker, referenced by items.
_CTX: dict = {}


def _init_worker(dataset: Dataset, workloads, config: ExperimentConfig) -> None:
    _CTX["dataset"] = dataset
    _CTX["workloads"] = workloads
    _CTX["config"] = config


def _build_method(
    dataset: Dataset,
    method: str,
    epsilon: float,
    config: ExperimentConfig,
    rng: np.random.Generator,
    ug_n: Optional[int],
):
    if method == "ug":
        grid = build_uniform(dataset.domain, ug_n, ug_n)
        est = collect(dataset, grid, epsilon, rng)
    elif method == "privag":
        params = AdaptiveGridParams.for_privag(
            epsilon, config.privag_alpha, config.privag_sigma
        )
        grid, est = build_privag(dataset, params, rng)
    elif method == "aag":
        params = AdaptiveGridParams.for_aag(epsilon, config.aag_alpha, config.aag_sigma)
        grid, est = build_aag(dataset, params, rng)
    else:
        raise ParameterError(f"unknown method {method!r}")
    return grid, est


def _compare_item(args):
    """One (method, epsilon, rep) unit: build, collect, score every rho."""
    method, method_idx, eps_idx, rep, ug_n, want_answers = args
    dataset = _CTX["dataset"]
    workloads = _CTX["workloads"]
    config = _CTX["config"]
    epsilon = config.epsilons[eps_idx]
    started = time.perf_counter()
    rng = _derive_rng(config.master_seed, _TAG_BUILD, method_idx, eps_idx, rep)
    grid, est = _build_method(dataset, method, epsilon, config, rng, ug_n)
    scored = []
    for rho_idx in range(len(config.rhos)):
        queries, truths = workloads[(rep, rho_idx)]
        answers = noisy_answer_many(grid, est, queries)
        score = aqe(truths, answers, len(dataset))
        scored.append((rho_idx, score, answers if want_answers else None, truths))
    elapsed_ms = int(round((time.perf_counter() - started) * 1000))
    return method, eps_idx, rep, ug_n, len(grid.cells), elapsed_ms, scored


def _sweep_item(args):
    """One (N, epsilon, rep) unit of the uniform-grid sweep."""
    n, n_idx, eps_idx, rep, want_answers = args
    dataset = _CTX["dataset"]
    workloads = _CTX["workloads"]
    config = _CTX["config"]
    epsilon = config.epsilons[eps_idx]
    started = time.perf_counter()
    rng = _derive_rng(config.master_seed, _TAG_BUILD, 0, eps_idx, rep, n_idx)
    grid = build_uniform(dataset.domain, n, n)
    est = collect(dataset, grid, epsilon, rng)
    scored = []
    for rho_idx in range(len(config.rhos)):
        queries, truths = workloads[(rep, rho_idx)]
        answers = noisy_answer_many(grid, est, queries)
        score = aqe(truths, answers, len(dataset))
        scored.append((rho_idx, score, answers if want_answers else None, truths))
    elapsed_ms = int(round((time.perf_counter() - started) * 1000))
    return n, eps_idx, rep, len(grid.cells), elapsed_ms, scored


def _run_items(config: ExperimentConfig, dataset: Dataset, workloads, fn, payloads):
    """Run items serially or on a process pool; output order follows payload
    order either way."""
    if config.workers == 1 or len(payloads) <= 1:
        _init_worker(dataset, workloads, config)
        return [fn(p) for p in payloads]
    with ProcessPoolExecutor(
        max_workers=config.workers,
        initializer=_init_worker,
        initargs=(dataset, workloads, config),
    ) as pool:
        return list(pool.map(fn, payloads))


def _resolve_dataset(config: ExperimentConfig, dataset: Optional[Dataset]):
    if dataset is not None:
        return dataset, 0
    return data_io.realize(config.dataset)


def _pick_ug_sizes(
    config: ExperimentConfig, dataset: Dataset
) -> Dict[int, int]:
    """Best uniform-grid dimension per epsilon, from a seeded holdout run.

    With a single configured size there is nothing to optimize. Otherwise
    each candidate is built and collected once on a holdout repetition and
    scored on a holdout workload; the lowest mean AQE wins (ties go to the
    smaller grid).
    """
    candidates = tuple(sorted(set(config.ug_sizes))) or DEFAULT_UG_CANDIDATES
    if len(candidates) == 1:
        return {eps_idx: candidates[0] for eps_idx in range(len(config.epsilons))}
    holdout = {}
    for rho_idx, rho in enumerate(config.rhos):
        rng = _derive_rng(config.master_seed, _TAG_HOLDOUT_WORKLOAD, rho_idx)
        wl = generate_workload(dataset.domain, rho, config.gamma, rng)
        holdout[rho_idx] = (wl.queries, ground_truth_many(dataset, wl.queries))
    best: Dict[int, int] = {}
    for eps_idx, epsilon in enumerate(config.epsilons):
        best_n, best_score = None, None
        for n_idx, n in enumerate(candidates):
            rng = _derive_rng(config.master_seed, _TAG_HOLDOUT_BUILD, eps_idx, n_idx)
            grid = build_uniform(dataset.domain, n, n)
            est = collect(dataset, grid, epsilon, rng)
            scores = []
            for rho_idx in range(len(config.rhos)):
                queries, truths = holdout[rho_idx]
                answers = noisy_answer_many(grid, est, queries)
                scores.append(aqe(truths, answers, len(dataset)))
            score = float(np.mean(scores))
            if best_score is None or score < best_score:
                best_n, best_score = n, score
        best[eps_idx] = best_n
    return best


def run_comparison(
    config: ExperimentConfig, dataset: Optional[Dataset] = None
) -> Tuple[List[ResultRow], dict]:
    """Score every configured method at every (epsilon, rho) over seeded
    repetitions; within a repetition all methods share the query workload."""
    config.validate()
    dataset, dropped = _resolve_dataset(config, dataset)
    workloads = _build_workloads(config, dataset)
    methods = tuple(m for m in METHODS if m in config.methods)
    ug_choice = _pick_ug_sizes(config, dataset) if "ug" in methods else {}

    payloads = []
    for method_idx, method in enumerate(METHODS):
        if method not in methods:
            continue
        for eps_idx in range(len(config.epsilons)):
            for rep in range(config.reps):
                ug_n = ug_choice.get(eps_idx) if method == "ug" else None
                payloads.append(
                    (method, method_idx, eps_idx, rep, ug_n, config.dump_answers is not None)
                )
    results = _run_items(config, dataset, workloads, _compare_item, payloads)

    rows: List[ResultRow] = []
    answer_records = []
    for method, eps_idx, rep, ug_n, cell_count, elapsed_ms, scored in results:
        for rho_idx, score, answers, truths in scored:
            rows.append(
                ResultRow(
                    dataset=config.dataset.name,
                    method=method,
                    epsilon=config.epsilons[eps_idx],
                    rho=config.rhos[rho_idx],
                    n_grid=ug_n,
                    rep=rep,
                    aqe=score,
                    cell_count=cell_count,
                    wall_time_ms=elapsed_ms if config.timing else None,
                )
            )
            if answers is not None:
                for qi, (t, a) in enumerate(zip(truths, answers)):
                    answer_records.append(
                        (
                            config.dataset.name,
                            method,
                            config.epsilons[eps_idx],
                            config.rhos[rho_idx],
                            ug_n,
                            rep,
                            qi,
                            int(t),
                            float(a),
                        )
                    )
    if config.dump_workload:
        write_workload_dump(config, workloads, config.dump_workload)
    if config.dump_answers:
        write_answer_dump(answer_records, config.dump_answers)
    meta = {
        "command": "compare",
        "dataset": config.dataset.name,
        "n_users": len(dataset),
        "rows_dropped": dropped,
        "master_seed": config.master_seed,
        "ug_n_per_epsilon": {
            repr(float(config.epsilons[i])): n for i, n in sorted(ug_choice.items())
        },
        "note": "uniform grids use the whole population; two-phase methods split it internally; UG size re-optimized per epsilon on a holdout repetition",
    }
    return rows, meta


def run_uniform_sweep(
    config: ExperimentConfig, dataset: Optional[Dataset] = None
) -> Tuple[List[ResultRow], dict]:
    """AQE of N x N uniform grids for every configured N."""
    config.validate()
    if not config.ug_sizes:
        raise ParameterError("sweep needs at least one grid size (ug_sizes)")
    dataset, dropped = _resolve_dataset(config, dataset)
    workloads = _build_workloads(config, dataset)

    payloads = []
    for n_idx, n in enumerate(config.ug_sizes):
        for eps_idx in range(len(config.epsilons)):
            for rep in range(config.reps):
                payloads.append((n, n_idx, eps_idx, rep, config.dump_answers is not None))
    results = _run_items(config, dataset, workloads, _sweep_item, payloads)

    rows: List[ResultRow] = []
    answer_records = []
    for n, eps_idx, rep, cell_count, elapsed_ms, scored in results:
        for rho_idx, score, answers, truths in scored:
            rows.append(
                ResultRow(
                    dataset=config.dataset.name,
                    method="ug",
                    epsilon=config.epsilons[eps_idx],
                    rho=config.rhos[rho_idx],
                    n_grid=n,
                    rep=rep,
                    aqe=score,
                    cell_count=cell_count,
                    wall_time_ms=elapsed_ms if config.timing else None,
                )
            )
            if answers is not None:
                for qi, (t, a) in enumerate(zip(truths, answers)):
                    answer_records.append(
                        (
                            config.dataset.name,
                            "ug",
                            config.epsilons[eps_idx],
                            config.rhos[rho_idx],
                            n,
                            rep,
                            qi,
                            int(t),
                            float(a),
                        )
                    )
    if config.dump_workload:
        write_workload_dump(config, workloads, config.dump_workload)
    if config.dump_answers:
        write_answer_dump(answer_records, config.dump_answers)
    meta = {
        "command": "sweep-uniform",
        "dataset": config.dataset.name,
        "n_users": len(dataset),
        "rows_dropped": dropped,
        "master_seed": config.master_seed,
        "ug_sizes": list(config.ug_sizes),
    }
    return rows, meta


def _gridinfo_item(args):
    method, method_idx, eps_idx, rep = args
    dataset = _CTX["dataset"]
    config = _CTX["config"]
    epsilon = config.epsilons[eps_idx]
    started = time.perf_counter()
    rng = _derive_rng(config.master_seed, _TAG_BUILD, method_idx, eps_idx, rep)
    grid, _ = _build_method(dataset, method, epsilon, config, rng, None)
    elapsed_ms = int(round((time.perf_counter() - started) * 1000))
    return method, eps_idx, rep, len(grid.cells), elapsed_ms


def run_gridinfo(
    config: ExperimentConfig, dataset: Optional[Dataset] = None
) -> Tuple[List[ResultRow], dict]:
    """Cell counts of the adaptive pipelines plus the deterministic initial
    lattice size, per epsilon."""
    config.validate()
    for m in config.methods:
        if m not in ("privag", "aag"):
            raise ParameterError("gridinfo supports only the adaptive methods")
    dataset, dropped = _resolve_dataset(config, dataset)

    rows: List[ResultRow] = []
    for eps_idx, epsilon in enumerate(config.epsilons):
        g1 = compute_g1(len(dataset), epsilon, 0.02)
        rows.append(
            ResultRow(
                dataset=config.dataset.name,
                method="initial",
                epsilon=epsilon,
                rho=None,
                n_grid=None,
                rep=0,
                aqe=None,
                cell_count=g1 * g1,
                wall_time_ms=None,
            )
        )
    payloads = []
    for method_idx, method in enumerate(METHODS):
        if method not in config.methods:
            continue
        for eps_idx in range(len(config.epsilons)):
            for rep in range(config.reps):
                payloads.append((method, method_idx, eps_idx, rep))
    results = _run_items(config, dataset, {}, _gridinfo_item, payloads)
    for method, eps_idx, rep, cell_count, elapsed_ms in results:
        rows.append(
            ResultRow(
                dataset=config.dataset.name,
                method=method,
                epsilon=config.epsilons[eps_idx],
                rho=None,
                n_grid=None,
                rep=rep,
                aqe=None,
                cell_count=cell_count,
                wall_time_ms=elapsed_ms if config.timing else None,
            )
        )
    meta = {
        "command": "gridinfo",
        "dataset": config.dataset.name,
        "n_users": len(dataset),
        "rows_dropped": dropped,
        "master_seed": config.master_seed,
    }
    return rows, meta


def write_meta(meta: dict, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
