"""Deterministic Monte Carlo over grids of model cells.

Replication ``r`` of the cell at position ``i`` draws from its own stream,
seeded by ``SeedSequence(master_seed, spawn_key=(i, r))``. No state is
shared between replications and per-replication results are aggregated in
replication order with exactly rounded sums, so the output does not depend
on how work is split across processes. Because the position is part of the
seed, two identical cells at different positions get different draws.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .model import ModelParams, draw_observations, draw_signals, exact_risk, determined_threshold
from .oracle import DEFAULT_GRID_POINTS, ideal_threshold_grid
from .scoring import confusion, discrepancy_pct, select
from .thresholds import STANDARD_METHODS, ThresholdMethod, compute_threshold, method_to_config, parse_method

DEFAULT_SEED = 20150601
SEED_ENV_VAR = "EQUICORR_SEED"

CSV_HEADER = (
    "m", "beta", "sigma0_sq", "tau_sq", "rho", "method",
    "mean_total_error", "mean_fp", "mean_fn", "se_total_error", "discrepancy_pct",
)

# Table columns headed sigma_0 and tau are read as the variances sigma0^2 and
# tau^2. Set to False to read them as standard deviations instead.
TABLE_COLUMNS_ARE_VARIANCES = True

_FAILED = -1


@dataclass(frozen=True)
class ExperimentCell:
    params: ModelParams
    methods: tuple[ThresholdMethod, ...]
    reps: int = 1000
    oracle_grid_points: int = DEFAULT_GRID_POINTS

    def __post_init__(self) -> None:
        object.__setattr__(self, "methods", tuple(self.methods))
        if not self.methods:
            raise ValueError("a cell needs at least one method")
        labels = [m.label for m in self.methods]
        if len(set(labels)) != len(labels) or "ideal" in labels:
            raise ValueError(f"method labels must be unique and not 'ideal', got {labels}")
        if int(self.reps) != self.reps or self.reps < 1:
            raise ValueError(f"reps must be a positive integer, got {self.reps!r}")
        if int(self.oracle_grid_points) != self.oracle_grid_points or self.oracle_grid_points < 2:
            raise ValueError(f"oracle_grid_points must be an integer >= 2, got {self.oracle_grid_points!r}")

    @property
    def labels(self) -> list[str]:
        return [m.label for m in self.methods]


@dataclass(frozen=True)
class MethodStats:
    mean_total_error: float
    mean_fp: float
    mean_fn: float
    se_total_error: float


@dataclass
class CellResult:
    methods: dict[str, MethodStats | None]
    ideal: MethodStats
    discrepancy: dict[str, float | None] = field(default_factory=dict)


@dataclass
class ExperimentTable:
    rows: list[tuple[ExperimentCell, CellResult]] = field(default_factory=list)


def rep_generator(master_seed: int, cell_index: int, rep: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=(cell_index, rep))))


def run_replication(cell: ExperimentCell, master_seed: int, cell_index: int, rep: int) -> np.ndarray:
    """(fp, fn) per method plus the ideal cut as the last row; -1 marks a failed method."""
    rng = rep_generator(master_seed, cell_index, rep)
    params = cell.params
    nu = draw_signals(params, rng)
    y = draw_observations(params, nu, rng).y
    out = np.full((len(cell.methods) + 1, 2), _FAILED, dtype=np.int64)
    for j, method in enumerate(cell.methods):
        try:
            C = compute_threshold(method, y, params)
        except ValueError:
            continue
        conf = confusion(select(y, C), nu)
        out[j] = conf.fp, conf.fn
    best = ideal_threshold_grid(y, nu, cell.oracle_grid_points)
    out[-1] = _ideal_counts(y, nu, best.c_ideal)
    return out


def _ideal_counts(y, nu, C: float) -> tuple[int, int]:
    conf = confusion(select(y, C), nu)
    return conf.fp, conf.fn


def _run_chunk(cell: ExperimentCell, master_seed: int, cell_index: int, start: int, stop: int) -> np.ndarray:
    return np.stack([run_replication(cell, master_seed, cell_index, r) for r in range(start, stop)])


def _stats(fp: np.ndarray, fn: np.ndarray) -> MethodStats:
    n = fp.size
    total = (fp + fn).astype(float)
    mean = math.fsum(total) / n
    se = math.sqrt(math.fsum((total - mean) ** 2) / (n - 1) / n) if n > 1 else math.nan
    return MethodStats(
        mean_total_error=mean,
        mean_fp=math.fsum(fp.astype(float)) / n,
        mean_fn=math.fsum(fn.astype(float)) / n,
        se_total_error=se,
    )


def aggregate(cell: ExperimentCell, counts: np.ndarray) -> CellResult:
    """Reduce a (reps, n_methods + 1, 2) count array in replication order."""
    ideal = _stats(counts[:, -1, 0], counts[:, -1, 1])
    methods: dict[str, MethodStats | None] = {}
    discrepancy: dict[str, float | None] = {}
    for j, label in enumerate(cell.labels):
        fp, fn = counts[:, j, 0], counts[:, j, 1]
        if np.any(fp == _FAILED):
            methods[label] = discrepancy[label] = None
            continue
        stats = methods[label] = _stats(fp, fn)
        try:
            discrepancy[label] = discrepancy_pct(stats.mean_total_error, ideal.mean_total_error)
        except ValueError:
            discrepancy[label] = None
    return CellResult(methods=methods, ideal=ideal, discrepancy=discrepancy)


def _chunks(reps: int, workers: int) -> list[tuple[int, int]]:
    size = max(1, math.ceil(reps / (4 * workers))) if workers > 1 else reps
    return [(s, min(s + size, reps)) for s in range(0, reps, size)]


def _check_seed(master_seed: int) -> int:
    if int(master_seed) != master_seed or not 0 <= master_seed < 2**64:
        raise ValueError(f"master seed must be an integer in [0, 2**64), got {master_seed!r}")
    return int(master_seed)


def run_cell(cell: ExperimentCell, master_seed: int, workers: int = 1, cell_index: int = 0) -> CellResult:
    return run_grid([cell], master_seed, workers, first_index=cell_index).rows[0][1]


def run_grid(
    cells: Sequence[ExperimentCell], master_seed: int, workers: int = 1, first_index: int = 0
) -> ExperimentTable:
    """Run every cell; rows come back in declaration order whatever ``workers`` is."""
    cells = list(cells)
    if not cells:
        raise ValueError("the experiment grid is empty")
    master_seed = _check_seed(master_seed)
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    tasks = [
        (i, cell, start, stop)
        for i, cell in enumerate(cells, start=first_index)
        for start, stop in _chunks(cell.reps, workers)
    ]
    if workers == 1:
        parts = [_run_chunk(cell, master_seed, i, a, b) for i, cell, a, b in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, cell, master_seed, i, a, b) for i, cell, a, b in tasks]
            parts = [f.result() for f in futures]
    table = ExperimentTable()
    for offset, cell in enumerate(cells):
        index = first_index + offset
        counts = np.concatenate([part for (i, *_), part in zip(tasks, parts) if i == index])
        table.rows.append((cell, aggregate(cell, counts)))
    return table


# ---------------------------------------------------------------- CSV output


def _fmt(x: float | int | None) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".6g")


def _cell_keys(cell: ExperimentCell) -> list[str]:
    p = cell.params
    return [_fmt(p.m), _fmt(p.beta), _fmt(p.sigma0_sq), _fmt(p.tau_sq), _fmt(p.rho)]


def table_rows(table: ExperimentTable) -> Iterable[list[str]]:
    for cell, result in table.rows:
        keys = _cell_keys(cell)
        for label in cell.labels:
            stats = result.methods[label]
            if stats is None:
                yield keys + [label, "", "", "", "", ""]
            else:
                yield keys + [
                    label, _fmt(stats.mean_total_error), _fmt(stats.mean_fp), _fmt(stats.mean_fn),
                    _fmt(stats.se_total_error), _fmt(result.discrepancy[label]),
                ]
        ideal = result.ideal
        yield keys + [
            "ideal", _fmt(ideal.mean_total_error), _fmt(ideal.mean_fp), _fmt(ideal.mean_fn),
            _fmt(ideal.se_total_error), "",
        ]


def _write_rows(header: Sequence[str], rows: Iterable[Sequence[str]], destination) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    text = buf.getvalue()
    if hasattr(destination, "write"):
        destination.write(text)
        return
    path = Path(destination)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc.strerror or exc}") from exc


def write_csv(table: ExperimentTable, destination) -> None:
    """Long-format results: one row per (cell, method) plus an ``ideal`` row per cell."""
    _write_rows(CSV_HEADER, table_rows(table), destination)


# ------------------------------------------------------------ configuration


_CELL_KEYS = {"params", "methods", "reps", "oracle_grid_points"}
_PARAM_KEYS = {f.name for f in fields(ModelParams)}


def cell_from_dict(data: dict[str, Any]) -> ExperimentCell:
    if not isinstance(data, dict):
        raise ValueError(f"each cell must be a JSON object, got {type(data).__name__}")
    unknown = set(data) - _CELL_KEYS
    if unknown:
        raise ValueError(f"unknown cell keys: {sorted(unknown)}")
    if "params" not in data or "methods" not in data:
        raise ValueError("a cell needs 'params' and 'methods'")
    raw = data["params"]
    if not isinstance(raw, dict):
        raise ValueError("'params' must be a JSON object")
    unknown = set(raw) - _PARAM_KEYS
    if unknown:
        raise ValueError(f"unknown params keys: {sorted(unknown)}")
    methods = data["methods"]
    if not isinstance(methods, list):
        raise ValueError("'methods' must be a list")
    return ExperimentCell(
        params=ModelParams(**raw),
        methods=tuple(parse_method(m) for m in methods),
        reps=data.get("reps", 1000),
        oracle_grid_points=data.get("oracle_grid_points", DEFAULT_GRID_POINTS),
    )


def cell_to_dict(cell: ExperimentCell) -> dict[str, Any]:
    params = {f.name: getattr(cell.params, f.name) for f in fields(ModelParams)}
    params = {k: v for k, v in params.items() if v is not None}
    return {
        "params": params,
        "methods": [method_to_config(m) for m in cell.methods],
        "reps": cell.reps,
        "oracle_grid_points": cell.oracle_grid_points,
    }


def load_config(path) -> list[ExperimentCell]:
    """Read cells from JSON: either a list of cells or ``{"cells": [...]}``."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"config {path} is not valid JSON: {exc}") from exc
    if isinstance(data, dict):
        unknown = set(data) - {"cells"}
        if unknown:
            raise ValueError(f"unknown top-level config keys: {sorted(unknown)}")
        data = data.get("cells")
    if not isinstance(data, list) or not data:
        raise ValueError("config must hold a nonempty list of cells")
    return [cell_from_dict(c) for c in data]


def seed_from_env(default: int = DEFAULT_SEED) -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw, 0)
    except ValueError as exc:
        raise ValueError(f"{SEED_ENV_VAR}={raw!r} is not an integer") from exc


# ----------------------------------------------------------- standard grid


GRID_M = (80, 180)
GRID_BETA = (0.3, 0.7)
GRID_SIGMA0 = (1.0, 3.0)
GRID_TAU = (15.0, 90.0)
GRID_RHO = (0.0, 0.1, 0.7)
GRID_NEGATIVE_RHO = {80: -0.00633, 180: -0.00279}


def table_params(m: int, beta: float, sigma0: float, tau: float, rho: float) -> ModelParams:
    """Map a printed table row to model parameters."""
    if TABLE_COLUMNS_ARE_VARIANCES:
        sigma0_sq, tau_sq = sigma0, tau
    else:
        sigma0_sq, tau_sq = sigma0**2, tau**2
    return ModelParams(m=m, beta=beta, sigma0_sq=sigma0_sq, tau_sq=tau_sq, rho=rho)


def standard_grid(
    reps: int = 1000, oracle_grid_points: int = DEFAULT_GRID_POINTS, negative_rho: bool = True
) -> list[ExperimentCell]:
    """Cells of the non-negative-rho table followed by the negative-rho table."""
    keys = [
        (m, beta, s, t, rho)
        for m in GRID_M for beta in GRID_BETA for s in GRID_SIGMA0 for t in GRID_TAU for rho in GRID_RHO
    ]
    if negative_rho:
        keys += [
            (m, beta, s, t, GRID_NEGATIVE_RHO[m])
            for m in GRID_M for beta in GRID_BETA for s in GRID_SIGMA0 for t in GRID_TAU
        ]
    return [
        ExperimentCell(table_params(*k), STANDARD_METHODS, reps=reps, oracle_grid_points=oracle_grid_points)
        for k in keys
    ]


def _analytic_determined(params: ModelParams) -> float | None:
    try:
        return exact_risk(params, determined_threshold(params)).risk
    except ValueError:
        return None


def write_table_csvs(table: ExperimentTable, out_dir) -> list[Path]:
    """Emit ``total_error.csv`` (long), ``tables.csv`` and ``discrepancy.csv`` (wide, table layout)."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc
    labels = [m.label for m in STANDARD_METHODS]
    wide, disc = [], []
    for cell, result in table.rows:
        keys = _cell_keys(cell)
        errs = [None if result.methods[l] is None else result.methods[l].mean_total_error for l in labels]
        wide.append(keys + [_fmt(e) for e in errs] + [
            _fmt(result.ideal.mean_total_error), _fmt(_analytic_determined(cell.params))
        ])
        disc.append(keys + [_fmt(result.discrepancy[l]) for l in labels])
    key_cols = list(CSV_HEADER[:5])
    paths = [out / "total_error.csv", out / "tables.csv", out / "discrepancy.csv"]
    write_csv(table, paths[0])
    _write_rows(key_cols + labels + ["ideal", "determined_exact_risk"], wide, paths[1])
    _write_rows(key_cols + labels, disc, paths[2])
    return paths
