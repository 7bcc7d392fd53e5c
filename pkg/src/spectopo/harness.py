"""Desk-scale experiment drivers and their file formats.

Phase diagrams of recovery uniqueness over (N, p) grids of connected
random graphs, rank histograms of the squared-template matrix, and
error-versus-sample-size curves for templates estimated from diffused
signals. All randomness flows from one master seed through spawned
seed sequences, so a full experiment is reproducible byte for byte;
trials are independent and could run in parallel without changing any
output.

Formats: CSV tables with float fields written as ``repr`` (shortest
round-trip), a dense matrix CSV (one row per line, comma separated),
and a JSON manifest recording configuration, seed, and package
version. Dashes through the CSVs round-trip exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__
from .diffusion import FilterSpec, apply_filter, sample_covariance, synthesize_diffused, templates_from_covariance
from .graphs import Graph, ShiftKind, ShiftMatrix, build_shift, degrees, erdos_renyi, is_connected
from .recovery import (RecoveryConfig, RecoveryResult, edge_error, laplacian_to_adjacency,
                       recover, recover_adjacency)
from .spectral import templates_from_shift

RESAMPLE_CAP = 1000  # attempts per trial before a cell is marked degenerate


@dataclass(frozen=True)
class ExperimentConfig:
    n_values: tuple = (10, 20, 30)
    p_values: tuple = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    trials: int = 50
    mode: ShiftKind = ShiftKind.ADJACENCY
    h: tuple = (1.0, 0.5)
    m_values: tuple = (100, 1000, 10000)
    repetitions: int = 50
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "p_values", tuple(float(p) for p in self.p_values))
        object.__setattr__(self, "h", tuple(float(v) for v in self.h))
        object.__setattr__(self, "m_values", tuple(int(m) for m in self.m_values))
        object.__setattr__(self, "mode", ShiftKind(self.mode))
        if self.trials < 1 or self.repetitions < 1:
            raise ValueError("trials and repetitions must be >= 1")
        if any(n < 2 for n in self.n_values):
            raise ValueError("grid sizes must be >= 2")
        if any(m < 1 for m in self.m_values):
            raise ValueError("sample sizes must be positive")

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["mode"] = self.mode.value
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class PhaseCell:
    n: int
    p: float
    trials: int
    unique_fraction: float
    recovery_fraction: float
    mean_rank: float
    degenerate: bool = False


def sample_connected(n: int, p: float, rng: np.random.Generator,
                     cap: int = RESAMPLE_CAP) -> Graph | None:
    """Resample G(n, p) until connected; None once the cap is exhausted."""
    for _ in range(cap):
        g = erdos_renyi(n, p, int(rng.integers(2**62)))
        if is_connected(g):
            return g
    return None


def _true_shift(g: Graph, mode: ShiftKind) -> ShiftMatrix:
    return build_shift(g, mode)


def _recovered_exactly(g: Graph, mode: ShiftKind, result: RecoveryResult) -> bool:
    truth = build_shift(g, ShiftKind.ADJACENCY)
    if mode == ShiftKind.ADJACENCY:
        estimate = result.s_hat
    else:
        estimate = laplacian_to_adjacency(result.s_continuous, mode)
    return edge_error(truth, estimate) == 0.0


def run_trial(g: Graph, mode: ShiftKind, base_cfg: RecoveryConfig | None = None) -> tuple[RecoveryResult, bool]:
    """Exact-template recovery of one graph; returns (result, recovered?)."""
    mode = ShiftKind(mode)
    cfg = replace(base_cfg, mode=mode) if base_cfg is not None else RecoveryConfig(mode=mode)
    shift = _true_shift(g, mode)
    templates = templates_from_shift(shift.data)
    d = degrees(g) if mode == ShiftKind.COMBINATORIAL_LAPLACIAN else None
    result = recover(templates, cfg, d=d)
    return result, _recovered_exactly(g, mode, result)


def run_phase(cfg: ExperimentConfig) -> list[PhaseCell]:
    """Uniqueness and recovery fractions over the (N, p) grid."""
    cells = []
    ss = np.random.SeedSequence(cfg.seed)
    cell_seeds = ss.spawn(len(cfg.n_values) * len(cfg.p_values))
    idx = 0
    for n in cfg.n_values:
        for p in cfg.p_values:
            rng = np.random.default_rng(cell_seeds[idx])
            idx += 1
            unique = 0
            recovered = 0
            ranks = []
            degenerate_cell = False
            for _ in range(cfg.trials):
                g = sample_connected(n, p, rng)
                if g is None:
                    degenerate_cell = True
                    break
                result, ok = run_trial(g, cfg.mode)
                unique += int(result.unique)
                recovered += int(ok)
                ranks.append(n - result.q)
            if degenerate_cell:
                cells.append(PhaseCell(n, p, cfg.trials, math.nan, math.nan, math.nan, True))
            else:
                cells.append(PhaseCell(
                    n, p, cfg.trials,
                    unique / cfg.trials,
                    recovered / cfg.trials,
                    float(np.mean(ranks)),
                ))
    return cells


def run_rankhist(n: int, p: float, trials: int, seed: int) -> list[dict]:
    """Histogram of rank(squared-template matrix), normalized-Laplacian
    mode, with per-rank uniqueness and exact-recovery tallies."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    buckets: dict[int, dict] = {}
    for _ in range(trials):
        g = sample_connected(n, p, rng)
        if g is None:
            raise RuntimeError(f"could not sample a connected G({n},{p}) in {RESAMPLE_CAP} tries")
        result, ok = run_trial(g, ShiftKind.NORMALIZED_LAPLACIAN)
        rank = n - result.q
        b = buckets.setdefault(rank, {"rank": rank, "count": 0, "unique_count": 0, "recovered_count": 0})
        b["count"] += 1
        b["unique_count"] += int(result.unique)
        b["recovered_count"] += int(ok)
    return [buckets[r] for r in sorted(buckets)]


def run_noisy(n: int, p: float, graph_seed: int, h, m_values, repetitions: int,
              seed: int, include_exact: bool = False) -> list[dict]:
    """Mean edge-misidentification rate of noisy-template recovery as a
    function of the number of observed diffused signals.

    The graph is fixed (resampled from graph_seed until connected); per
    sample size, ``repetitions`` independent batches are diffused, the
    sample covariance eigenbasis is extracted, and adjacency recovery
    runs with the automatic slack search. ``include_exact`` appends the
    infinite-sample surrogate that uses the analytic covariance.
    """
    rng = np.random.default_rng(graph_seed)
    g = sample_connected(n, p, rng)
    if g is None:
        raise RuntimeError(f"could not sample a connected G({n},{p})")
    truth = build_shift(g, ShiftKind.ADJACENCY)
    spec = FilterSpec(np.asarray(h, dtype=float))
    ss = np.random.SeedSequence(seed)
    rows = []
    for m in m_values:
        errors = []
        for rep_ss in ss.spawn(repetitions):
            batch_seed = int(rep_ss.generate_state(1)[0])
            batch = synthesize_diffused(truth, spec, m, batch_seed)
            templates = templates_from_covariance(sample_covariance(batch), 0.0)
            cfg = RecoveryConfig(mode=ShiftKind.ADJACENCY, epsilon="auto")
            result = recover_adjacency(templates, cfg)
            errors.append(edge_error(truth, result.s_hat))
        rows.append({"m": int(m), "mean_error": float(np.mean(errors)),
                     "std_error": float(np.std(errors))})
    if include_exact:
        hmat = apply_filter(truth, spec, np.eye(g.n))
        cov = hmat @ hmat.T
        templates = templates_from_covariance(0.5 * (cov + cov.T), 0.0)
        result = recover_adjacency(templates, RecoveryConfig(mode=ShiftKind.ADJACENCY))
        err = edge_error(truth, result.s_hat)
        rows.append({"m": math.inf, "mean_error": float(err), "std_error": 0.0})
    return rows


# ---------------------------------------------------------------------------
# file formats


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_phase_csv(cells: list[PhaseCell], path) -> None:
    lines = ["n,p,trials,unique_fraction,recovery_fraction,mean_rank,degenerate"]
    for c in cells:
        lines.append(",".join([
            _fmt(c.n), _fmt(c.p), _fmt(c.trials), _fmt(c.unique_fraction),
            _fmt(c.recovery_fraction), _fmt(c.mean_rank), _fmt(c.degenerate),
        ]))
    _write_lines(path, lines)


def read_phase_csv(path) -> list[PhaseCell]:
    rows = _read_rows(path, "n,p,trials,unique_fraction,recovery_fraction,mean_rank,degenerate")
    return [PhaseCell(int(r[0]), float(r[1]), int(r[2]), float(r[3]), float(r[4]),
                      float(r[5]), bool(int(r[6]))) for r in rows]


def write_rankhist_csv(rows: list[dict], path) -> None:
    lines = ["rank,count,unique_count,recovered_count"]
    for r in rows:
        lines.append(",".join(_fmt(r[k]) for k in ("rank", "count", "unique_count", "recovered_count")))
    _write_lines(path, lines)


def read_rankhist_csv(path) -> list[dict]:
    rows = _read_rows(path, "rank,count,unique_count,recovered_count")
    return [{"rank": int(r[0]), "count": int(r[1]), "unique_count": int(r[2]),
             "recovered_count": int(r[3])} for r in rows]


def write_noisy_csv(rows: list[dict], path) -> None:
    lines = ["m,mean_error,std_error"]
    for r in rows:
        m = "inf" if math.isinf(r["m"]) else str(int(r["m"]))
        lines.append(",".join([m, _fmt(r["mean_error"]), _fmt(r["std_error"])]))
    _write_lines(path, lines)


def read_noisy_csv(path) -> list[dict]:
    rows = _read_rows(path, "m,mean_error,std_error")
    return [{"m": math.inf if r[0] == "inf" else int(r[0]),
             "mean_error": float(r[1]), "std_error": float(r[2])} for r in rows]


def write_matrix_csv(m, path) -> None:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    lines = [",".join(repr(float(v)) for v in row) for row in m]
    _write_lines(path, lines)


def read_matrix_csv(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        rows = [[float(v) for v in ln.strip().split(",")] for ln in fh if ln.strip()]
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise ValueError(f"{path}: ragged or empty matrix CSV")
    return np.array(rows)


def write_manifest(command: str, config: dict, seed, path) -> None:
    payload = {
        "command": command,
        "config": config,
        "seed": seed,
        "version": __version__,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _write_lines(path, lines: list[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _read_rows(path, header: str) -> list[list[str]]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != header:
        raise ValueError(f"{path}: expected header {header!r}")
    return [ln.split(",") for ln in lines[1:]]
