"""End-to-end runs: load, featurize, train, evaluate, ablate.

Thin orchestration over the library modules so the CLI, the sweep harness,
and tests all share one code path.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

from .config import RunConfig
from .evaluation import MetricReport, evaluate
from .features import VARIANTS
from .graph import TemporalGraph, load_edge_csv, make_windows, prepare_snapshots
from .training import TrainResult, train

logger = logging.getLogger(__name__)


@dataclass
class ExperimentResult:
    report: MetricReport
    training: TrainResult
    meta: object
    seq: object
    windows: list


def load_graph(cfg: RunConfig) -> TemporalGraph:
    return load_edge_csv(cfg.dataset, fmt=cfg.format)


def run_experiment(
    graph: TemporalGraph,
    cfg: RunConfig,
    variant: str = "full",
    cache_dir=None,
) -> ExperimentResult:
    """Train one model under ``cfg`` and evaluate it on the test windows."""
    seq, meta = prepare_snapshots(graph, cfg.T)
    windows = make_windows(seq, cfg.n)
    result = train(
        seq,
        meta,
        windows,
        feature_cfg=cfg.feature_config(variant),
        model_cfg=cfg.model_config(),
        train_cfg=cfg.train_config(),
        variant=variant,
        jobs=cfg.jobs,
        cache_dir=cache_dir,
        dataset=cfg.dataset_name,
    )
    report = evaluate(
        result.model,
        result.test_windows,
        result.features,
        seq,
        meta,
        seed=cfg.seed,
        config={**cfg.to_dict(), "variant": variant},
    )
    return ExperimentResult(report=report, training=result, meta=meta, seq=seq, windows=windows)


def run_single(graph: TemporalGraph, cfg: RunConfig) -> MetricReport:
    """Sweep-point entry: one full train/evaluate cycle, report only."""
    return run_experiment(graph, cfg).report


def run_ablations(
    graph: TemporalGraph,
    cfg: RunConfig,
    variants=VARIANTS,
    full_report: Optional[MetricReport] = None,
) -> dict[str, MetricReport]:
    """Train and evaluate every requested ablation variant on one dataset.

    A precomputed report for the unablated model may be passed to avoid
    retraining it.
    """
    reports: dict[str, MetricReport] = {}
    for variant in variants:
        if variant == "full" and full_report is not None:
            reports["full"] = full_report
            continue
        logger.info("ablation variant: %s", variant)
        reports[variant] = run_experiment(graph, cfg, variant=variant).report
    return reports


ABLATION_COLUMNS = ("auc_link", "auc_sign", "mae", "rmse")


def ablation_table(reports: dict[str, MetricReport]) -> str:
    """Fixed-width comparison table over the five variants."""
    header = f"{'variant':<16}" + "".join(f"{c:>10}" for c in ("AUC(L)", "AUC(S)", "MAE", "RMSE"))
    lines = [header]
    order = [v for v in ("no_transformer", "no_embedding", "no_feature", "no_decoupling", "full") if v in reports]
    for variant in order:
        rep = reports[variant]
        cells = []
        for key in ABLATION_COLUMNS:
            val = getattr(rep, key)
            cells.append(f"{val:>10.4f}" if val is not None else f"{'-':>10}")
        lines.append(f"{variant:<16}" + "".join(cells))
    return "\n".join(lines)
