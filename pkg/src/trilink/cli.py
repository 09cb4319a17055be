"""Command-line entry point.

Subcommands: ingest, features, train, eval, ablate, sweep.  Every run writes
into a timestamped directory under ``--out`` containing the resolved config,
logs, and outputs, so any run can be reproduced from its own directory.

Exit codes: 0 success, 1 unmet metric threshold, 2 usage error, 3 data
error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import fields
from pathlib import Path

from .config import RunConfig
from .graph import DataError, dump_snapshots, load_edge_csv, make_windows, prepare_snapshots
from .training import NumericalError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_THRESHOLD = 1
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

_CONFIG_FLAGS = {
    "T": int,
    "n": int,
    "h": int,
    "num_walks": int,
    "walk_length": int,
    "embedding_dim": int,
    "context_window": int,
    "negatives_per_target": int,
    "skipgram_epochs": int,
    "skipgram_lr": float,
    "d_model": int,
    "transformer_layers": int,
    "attention_heads": int,
    "mlp_hidden": int,
    "dropout": float,
    "lr": float,
    "epochs": int,
    "patience": int,
    "split_ratio": float,
    "lambda_link": float,
    "lambda_sign": float,
    "lambda_weight": float,
    "first_diff": str,
}


def _add_shared(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dataset", help="path to the edge file")
    parser.add_argument("--format", choices=["csv", "events"], help="edge file format (default: csv)")
    parser.add_argument("--name", help="dataset label (default: file stem)")
    parser.add_argument("--config", help="JSON config file; flags override its keys")
    parser.add_argument("--out", help="output root directory (default: runs)")
    parser.add_argument("--seed", type=int, help="run seed")
    parser.add_argument("--jobs", type=int, help="worker processes for feature extraction")
    parser.add_argument(
        "--deterministic",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="single-threaded deterministic mode (default: on)",
    )
    for key, typ in _CONFIG_FLAGS.items():
        parser.add_argument(f"--{key.replace('_', '-')}", dest=key, type=typ, default=None)


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.from_json(args.config) if args.config else RunConfig()
    overrides = {}
    for f in fields(RunConfig):
        val = getattr(args, f.name, None)
        if val is not None:
            overrides[f.name] = val
    cfg = cfg.override(**overrides)
    if not cfg.dataset:
        raise UsageError("--dataset is required (directly or via --config)")
    if not cfg.name:
        cfg = cfg.override(name=Path(cfg.dataset).stem)
    return cfg


class UsageError(Exception):
    pass


def _run_dir(cfg: RunConfig, command: str) -> Path:
    stamp = time.strftime("%Y%m%d-%H%M%S")
    path = Path(cfg.out) / f"{command}-{cfg.dataset_name}-{stamp}-s{cfg.seed}"
    path.mkdir(parents=True, exist_ok=True)
    cfg.to_json(path / "config.json")
    return path


def _load(cfg: RunConfig):
    return load_edge_csv(cfg.dataset, fmt=cfg.format)


def cmd_ingest(args) -> int:
    cfg = _resolve_config(args)
    graph = _load(cfg)
    print(f"{graph.num_nodes} nodes, {graph.num_edges} edges, {graph.num_positive} positive, {graph.num_negative} negative")
    if graph.dropped_zero_weight:
        print(f"{graph.dropped_zero_weight} zero-weight edges rejected")
    seq, meta = prepare_snapshots(graph, cfg.T)
    windows = make_windows(seq, cfg.n)
    print(f"{len(windows)} windows")
    run_dir = _run_dir(cfg, "ingest")
    summary = {
        "nodes": graph.num_nodes,
        "edges": graph.num_edges,
        "positive": graph.num_positive,
        "negative": graph.num_negative,
        "zero_weight_rejected": graph.dropped_zero_weight,
        "is_signed": meta.is_signed,
        "is_weighted": meta.is_weighted,
        "weight_scale": meta.weight_scale,
        "T": cfg.T,
        "n": cfg.n,
        "windows": len(windows),
        "bin_width_seconds": seq.bin_width,
        "edges_per_snapshot": [s.num_edges for s in seq.snapshots],
    }
    with open(run_dir / "ingest.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
    if args.dump_snapshots:
        dump_snapshots(seq, run_dir / "snapshots.txt")
    print(f"run directory: {run_dir}")
    return EXIT_OK


def cmd_features(args) -> int:
    from .features import precompute_features
    from .structural import dump_structural

    cfg = _resolve_config(args)
    graph = _load(cfg)
    seq, meta = prepare_snapshots(graph, cfg.T)
    windows = make_windows(seq, cfg.n)
    run_dir = _run_dir(cfg, "features")
    cache = run_dir / "features"
    cache.mkdir(exist_ok=True)
    precompute_features(
        windows,
        cfg.feature_config(),
        cfg.seed,
        seq=seq,
        jobs=cfg.jobs,
        cache_dir=cache,
        dataset=cfg.dataset_name,
    )
    if args.dump_structural is not None:
        w = windows[min(args.dump_structural, len(windows) - 1)]
        dump_structural(w, cfg.h, run_dir / f"structural_t{w.target_t}.txt")
    print(f"cached {len(windows)} feature blocks under {cache}")
    return EXIT_OK


def cmd_train(args) -> int:
    from .experiment import run_experiment
    from .model import save_checkpoint

    cfg = _resolve_config(args)
    graph = _load(cfg)
    run_dir = _run_dir(cfg, "train")
    result = run_experiment(graph, cfg, variant=args.variant)
    save_checkpoint(result.training.model, run_dir / "model.pt", data_hash=cfg.data_hash())
    with open(run_dir / "train_log.csv", "w", encoding="utf-8") as fh:
        fh.write("epoch,window_t,loss_total,loss_link,loss_sign,loss_weight,val_auc\n")
        fh.write("\n".join(result.training.history) + "\n")
    result.report.write(run_dir / "report.txt")
    for line in result.report.lines():
        print(line)
    print(f"best_val_auc={result.training.best_val_auc:.4f} epochs_run={result.training.epochs_run}")
    print(f"run directory: {run_dir}")
    return EXIT_OK


def _check_thresholds(args, report) -> int:
    failures = []
    if args.min_auc_link is not None and (report.auc_link is None or report.auc_link < args.min_auc_link):
        failures.append(f"auc_link {report.auc_link} < {args.min_auc_link}")
    if args.min_auc_sign is not None and (report.auc_sign is None or report.auc_sign < args.min_auc_sign):
        failures.append(f"auc_sign {report.auc_sign} < {args.min_auc_sign}")
    if args.max_mae is not None and (report.mae is None or report.mae > args.max_mae):
        failures.append(f"mae {report.mae} > {args.max_mae}")
    if args.max_rmse is not None and (report.rmse is None or report.rmse > args.max_rmse):
        failures.append(f"rmse {report.rmse} > {args.max_rmse}")
    for f in failures:
        print(f"THRESHOLD UNMET: {f}", file=sys.stderr)
    return EXIT_THRESHOLD if failures else EXIT_OK


def cmd_eval(args) -> int:
    from .evaluation import evaluate
    from .features import precompute_features
    from .model import load_checkpoint
    from .training import chronological_split

    cfg = _resolve_config(args)
    if not args.checkpoint:
        raise UsageError("--checkpoint is required for eval")
    graph = _load(cfg)
    seq, meta = prepare_snapshots(graph, cfg.T)
    windows = make_windows(seq, cfg.n)
    model = load_checkpoint(args.checkpoint, expected_data_hash=cfg.data_hash())
    feature_cfg = cfg.feature_config(model.variant)
    _, test_windows = chronological_split(windows, cfg.split_ratio)
    features = precompute_features(test_windows, feature_cfg, cfg.seed, seq=seq, jobs=cfg.jobs)
    report = evaluate(model, test_windows, features, seq, meta, seed=cfg.seed, config=cfg.to_dict())
    run_dir = _run_dir(cfg, "eval")
    report.write(run_dir / "report.txt")
    for line in report.lines():
        print(line)
    print(f"run directory: {run_dir}")
    return _check_thresholds(args, report)


def cmd_ablate(args) -> int:
    from .experiment import ablation_table, run_ablations

    cfg = _resolve_config(args)
    graph = _load(cfg)
    run_dir = _run_dir(cfg, "ablate")
    reports = run_ablations(graph, cfg)
    table = ablation_table(reports)
    print(table)
    with open(run_dir / "ablation.txt", "w", encoding="utf-8") as fh:
        fh.write(table + "\n")
    for variant, rep in reports.items():
        rep.write(run_dir / f"report_{variant}.txt")
    print(f"run directory: {run_dir}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .evaluation import sweep

    cfg = _resolve_config(args)
    graph = _load(cfg)
    run_dir = _run_dir(cfg, "sweep")
    grids = {}
    if args.n_grid:
        grids["n_grid"] = [int(x) for x in args.n_grid.split(",")]
    if args.h_grid:
        grids["h_grid"] = [int(x) for x in args.h_grid.split(",")]
    if args.T_grid:
        grids["T_grid"] = [int(x) for x in args.T_grid.split(",")]
    rows = sweep(graph, cfg, run_dir, **grids)
    done = sum(1 for r in rows if not r.get("skipped"))
    print(f"{done} sweep points written to {run_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trilink", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load a dataset and print its statistics")
    _add_shared(p)
    p.add_argument("--dump-snapshots", action="store_true", help="write t,src,dst,weight lines")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("features", help="precompute and cache window feature blocks")
    _add_shared(p)
    p.add_argument("--dump-structural", type=int, default=None, metavar="WINDOW", help="dump one window's structural block")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="train a model and evaluate it")
    _add_shared(p)
    p.add_argument("--variant", default="full", choices=["full", "no_transformer", "no_embedding", "no_feature", "no_decoupling"])
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a saved checkpoint")
    _add_shared(p)
    p.add_argument("--checkpoint", help="path to model.pt")
    p.add_argument("--min-auc-link", type=float, default=None)
    p.add_argument("--min-auc-sign", type=float, default=None)
    p.add_argument("--max-mae", type=float, default=None)
    p.add_argument("--max-rmse", type=float, default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="run all five model variants and compare")
    _add_shared(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("sweep", help="one-factor-at-a-time parameter sweep")
    _add_shared(p)
    p.add_argument("--n-grid", help="comma-separated window sizes (default 1..10)")
    p.add_argument("--h-grid", help="comma-separated hop counts (default 1..10)")
    p.add_argument("--T-grid", dest="T_grid", help="comma-separated snapshot counts (default 100..200:10)")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors already
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
