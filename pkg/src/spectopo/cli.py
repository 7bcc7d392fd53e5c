"""Command-line experiment driver.

Subcommands::

    gen       write an edge list (and optionally diffused signals)
    recover   recover a shift from templates or signals, report JSON
    phase     uniqueness/recovery fractions over an (N, p) grid
    rankhist  histogram of the squared-template matrix rank
    noisy     recovery error versus number of observed signals

Exit codes: 0 success, 2 argument error, 3 infeasible recovery,
4 I/O error. Every experiment writes one CSV plus a JSON manifest
(configuration, seed, version) into --out; rerunning with the same
arguments reproduces the outputs byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import harness
from .diffusion import (FilterSpec, SignalBatch, sample_covariance, synthesize_diffused,
                        templates_from_covariance)
from .graphs import ShiftKind, build_shift, degrees, erdos_renyi, read_edgelist, write_edgelist
from .recovery import InfeasibleTemplatesError, RecoveryConfig, edge_error, laplacian_to_adjacency, recover
from .spectral import SpectralTemplates, templates_from_shift

MODES = {
    "adjacency": ShiftKind.ADJACENCY,
    "nlaplacian": ShiftKind.NORMALIZED_LAPLACIAN,
    "claplacian": ShiftKind.COMBINATORIAL_LAPLACIAN,
}


class _IOFailure(Exception):
    """File could not be read, written, or parsed."""


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _epsilon_arg(text: str):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"--epsilon takes a number or 'auto', got {text!r}") from exc


def _out_dir(args) -> Path:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _IOFailure(f"cannot create output directory {out}: {exc}") from exc
    return out


def _load(fn, path):
    try:
        return fn(path)
    except OSError as exc:
        raise _IOFailure(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise _IOFailure(f"cannot parse {path}: {exc}") from exc


def _write(fn, path, *payload):
    try:
        fn(*payload, path)
    except OSError as exc:
        raise _IOFailure(f"cannot write {path}: {exc}") from exc


def _config_overlay(args, fields: dict) -> dict:
    """Config-file values overridden by any explicitly given CLI flags."""
    merged = {}
    if getattr(args, "config", None):
        raw = _load(lambda p: json.loads(Path(p).read_text(encoding="utf-8")), args.config)
        if not isinstance(raw, dict):
            raise _IOFailure(f"{args.config}: config must be a JSON object")
        merged.update(raw)
    for key, value in fields.items():
        if value is not None:
            merged[key] = value
    return merged


def cmd_gen(args) -> int:
    out = _out_dir(args)
    g = erdos_renyi(args.n, args.p, args.seed)
    edge_path = out / "graph.edges"
    _write(write_edgelist, edge_path, g)
    written = [str(edge_path)]
    if args.signals:
        shift = build_shift(g, MODES[args.mode])
        batch = synthesize_diffused(shift, FilterSpec(np.array(args.h)), args.signals, args.seed)
        sig_path = out / "signals.csv"
        _write(harness.write_matrix_csv, sig_path, batch.data)
        written.append(str(sig_path))
    _write(harness.write_manifest, out / "manifest.json", "gen",
           {"n": args.n, "p": args.p, "mode": args.mode, "signals": args.signals,
            "h": list(args.h)}, args.seed)
    print("\n".join(written))
    return 0


def cmd_recover(args) -> int:
    if (args.templates is None) == (args.signals is None):
        raise ValueError("give exactly one of --templates or --signals")
    mode = MODES[args.mode]
    if args.templates:
        v = _load(harness.read_matrix_csv, args.templates)
        templates = SpectralTemplates(v, noisy=False)
        epsilon = args.epsilon
    else:
        x = _load(harness.read_matrix_csv, args.signals)
        templates = templates_from_covariance(sample_covariance(SignalBatch(x)), 0.0)
        epsilon = args.epsilon if args.epsilon is not None else "auto"
    cfg = RecoveryConfig(mode=mode, delta=args.delta, max_reweight=args.max_reweight,
                         epsilon=epsilon, eta=args.eta)
    truth = _load(read_edgelist, args.truth) if args.truth else None
    d = None
    if mode == ShiftKind.COMBINATORIAL_LAPLACIAN:
        if args.degrees is not None:
            d = np.array(args.degrees, dtype=float)
        elif truth is not None:
            d = degrees(truth).astype(float)
        else:
            raise ValueError("claplacian mode needs --degrees or --truth to supply the degree vector")
    result = recover(templates, cfg, d=d)
    report = result.to_dict()
    if truth is not None:
        truth_shift = build_shift(truth, ShiftKind.ADJACENCY)
        estimate = result.s_hat if mode == ShiftKind.ADJACENCY else \
            laplacian_to_adjacency(result.s_continuous, mode)
        report["edge_error"] = edge_error(truth_shift, estimate)
    text = json.dumps(report, sort_keys=True, indent=2)
    print(text)
    if args.out is not None:
        out = _out_dir(args)
        try:
            (out / "recovery.json").write_text(text + "\n", encoding="utf-8")
        except OSError as exc:
            raise _IOFailure(f"cannot write report: {exc}") from exc
    return 0


def cmd_phase(args) -> int:
    out = _out_dir(args)
    merged = _config_overlay(args, {
        "n_values": args.n_values, "p_values": args.p_values, "trials": args.trials,
        "mode": args.mode, "seed": args.seed,
    })
    merged.setdefault("mode", "adjacency")
    cfg = harness.ExperimentConfig.from_json_dict(merged)
    cells = harness.run_phase(cfg)
    _write(harness.write_phase_csv, out / "phase.csv", cells)
    _write(harness.write_manifest, out / "manifest.json", "phase", cfg.to_json_dict(), cfg.seed)
    print(str(out / "phase.csv"))
    return 0


def cmd_rankhist(args) -> int:
    out = _out_dir(args)
    merged = _config_overlay(args, {"trials": args.trials, "seed": args.seed})
    trials = int(merged.get("trials", 100))
    seed = int(merged.get("seed", 0))
    rows = harness.run_rankhist(args.n, args.p, trials, seed)
    _write(harness.write_rankhist_csv, out / "rankhist.csv", rows)
    _write(harness.write_manifest, out / "manifest.json", "rankhist",
           {"n": args.n, "p": args.p, "trials": trials}, seed)
    print(str(out / "rankhist.csv"))
    return 0


def cmd_noisy(args) -> int:
    out = _out_dir(args)
    merged = _config_overlay(args, {
        "h": args.h, "m_values": args.m_values, "repetitions": args.reps, "seed": args.seed,
    })
    h = merged.get("h", [1.0, 0.5])
    m_values = merged.get("m_values", [100, 1000, 10000])
    reps = int(merged.get("repetitions", 50))
    seed = int(merged.get("seed", 0))
    rows = harness.run_noisy(args.n, args.p, args.graph_seed, h, m_values, reps, seed,
                             include_exact=args.include_exact)
    _write(harness.write_noisy_csv, out / "noisy.csv", rows)
    _write(harness.write_manifest, out / "manifest.json", "noisy",
           {"n": args.n, "p": args.p, "graph_seed": args.graph_seed, "h": list(h),
            "m_values": list(m_values), "repetitions": reps,
            "include_exact": args.include_exact}, seed)
    print(str(out / "noisy.csv"))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spectopo",
                                     description="graph topology inference from spectral templates")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a random graph and optional diffused signals")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--p", type=float, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--mode", choices=sorted(MODES), default="adjacency")
    gen.add_argument("--signals", type=int, default=0, help="number of diffused signals to write")
    gen.add_argument("--h", type=_floats, default=[1.0, 0.5], help="filter coefficients, comma separated")
    gen.add_argument("--out", default=".")
    gen.set_defaults(func=cmd_gen)

    rec = sub.add_parser("recover", help="recover a shift operator, print a JSON report")
    rec.add_argument("--templates", help="CSV of the eigenvector matrix")
    rec.add_argument("--signals", help="CSV of diffused signals (templates estimated internally)")
    rec.add_argument("--mode", choices=sorted(MODES), required=True)
    rec.add_argument("--truth", help="edge list to compare against")
    rec.add_argument("--degrees", type=_floats, help="degree vector for claplacian mode")
    rec.add_argument("--epsilon", type=_epsilon_arg, default=None)
    rec.add_argument("--eta", type=float, default=0.0)
    rec.add_argument("--delta", type=float, default=1e-3)
    rec.add_argument("--max-reweight", type=int, default=10)
    rec.add_argument("--out", default=None)
    rec.set_defaults(func=cmd_recover)

    phase = sub.add_parser("phase", help="uniqueness/recovery phase diagram")
    phase.add_argument("--config", help="JSON file mirroring the experiment config; flags override")
    phase.add_argument("--n-values", type=_ints, default=None)
    phase.add_argument("--p-values", type=_floats, default=None)
    phase.add_argument("--trials", type=int, default=None)
    phase.add_argument("--mode", choices=sorted(MODES), default=None)
    phase.add_argument("--seed", type=int, default=None)
    phase.add_argument("--out", default=".")
    phase.set_defaults(func=cmd_phase)

    rank = sub.add_parser("rankhist", help="rank histogram of the squared-template matrix")
    rank.add_argument("--config")
    rank.add_argument("--n", type=int, default=10)
    rank.add_argument("--p", type=float, default=0.2)
    rank.add_argument("--trials", type=int, default=None)
    rank.add_argument("--seed", type=int, default=None)
    rank.add_argument("--out", default=".")
    rank.set_defaults(func=cmd_rankhist)

    noisy = sub.add_parser("noisy", help="recovery error versus number of observed signals")
    noisy.add_argument("--config")
    noisy.add_argument("--n", type=int, default=20)
    noisy.add_argument("--p", type=float, default=0.3)
    noisy.add_argument("--graph-seed", type=int, default=0)
    noisy.add_argument("--h", type=_floats, default=None)
    noisy.add_argument("--m-values", type=_ints, default=None)
    noisy.add_argument("--reps", type=int, default=None)
    noisy.add_argument("--seed", type=int, default=None)
    noisy.add_argument("--include-exact", action="store_true")
    noisy.add_argument("--out", default=".")
    noisy.set_defaults(func=cmd_noisy)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleTemplatesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except _IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
