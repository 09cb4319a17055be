"""Metrics, test-set evaluation, and one-factor-at-a-time parameter sweeps.

AUC is the rank statistic (probability a random positive outscores a random
negative, ties counted half) computed from average ranks.  Weight errors are
MAE / RMSE on normalized weights.  Evaluation pools all test windows into
single headline numbers and also reports a per-window breakdown.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import torch

from .graph import DatasetMeta, SnapshotSequence, Window
from .model import JointPredictor
from .training import batch_forward, make_edge_batch, _derived_seed

logger = logging.getLogger(__name__)


def auc(scores, labels) -> Optional[float]:
    """Rank-statistic AUC with ties counted 1/2; None on single-class input."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int(np.count_nonzero(labels == 1))
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        logger.warning("AUC undefined: need both classes, got %d positive / %d negative", n_pos, n_neg)
        return None
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(scores.size, dtype=np.float64)
    ranks[order] = np.arange(1, scores.size + 1)
    # average ranks over ties
    sorted_scores = scores[order]
    boundary = np.concatenate([[True], sorted_scores[1:] != sorted_scores[:-1]])
    group_id = np.cumsum(boundary) - 1
    group_sum = np.bincount(group_id, weights=np.arange(1, scores.size + 1))
    group_count = np.bincount(group_id)
    avg = group_sum / group_count
    ranks[order] = avg[group_id]
    pos_rank_sum = ranks[np.asarray(labels) == 1].sum()
    u = pos_rank_sum - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def mae(y, y_hat) -> float:
    y = np.asarray(y, dtype=np.float64)
    y_hat = np.asarray(y_hat, dtype=np.float64)
    if y.size == 0 or y.size != y_hat.size:
        raise ValueError("mae needs equal, nonzero-length inputs")
    return float(np.mean(np.abs(y - y_hat)))


def rmse(y, y_hat) -> float:
    y = np.asarray(y, dtype=np.float64)
    y_hat = np.asarray(y_hat, dtype=np.float64)
    if y.size == 0 or y.size != y_hat.size:
        raise ValueError("rmse needs equal, nonzero-length inputs")
    return float(np.sqrt(np.mean((y - y_hat) ** 2)))


@dataclass
class MetricReport:
    dataset: str
    auc_link: Optional[float]
    auc_sign: Optional[float]  # absent (None) for unsigned networks
    mae: Optional[float]  # absent for unweighted networks
    rmse: Optional[float]
    per_window: list[dict] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    runtime_seconds: float = 0.0

    def lines(self) -> list[str]:
        out = [f"dataset={self.dataset}"]
        for key in ("auc_link", "auc_sign", "mae", "rmse"):
            val = getattr(self, key)
            if val is not None:
                out.append(f"{key}={val:.4f}")
        out.append(f"runtime_seconds={self.runtime_seconds:.1f}")
        return out

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(self.lines()) + "\n\n")
            fh.write("window,target_t,positives,auc_link,auc_sign,mae,rmse\n")
            for i, row in enumerate(self.per_window):
                cells = [str(i), str(row["target_t"]), str(row["positives"])]
                for key in ("auc_link", "auc_sign", "mae", "rmse"):
                    v = row.get(key)
                    cells.append("" if v is None else f"{v:.4f}")
                fh.write(",".join(cells) + "\n")
            fh.write("\nconfig=" + json.dumps(self.config, sort_keys=True, default=str) + "\n")


def evaluate(
    model: JointPredictor,
    windows: Sequence[Window],
    features: dict,
    seq: SnapshotSequence,
    meta: DatasetMeta,
    seed: int = 0,
    config: Optional[dict] = None,
) -> MetricReport:
    """Score every test window with balanced seeded negatives and pool metrics.

    Link AUC pools scores across all windows (single headline number); sign
    scores cover true positives only, weight predictions likewise.  The model
    is untouched (eval mode, no gradients).
    """
    t_start = time.time()
    link_scores, link_labels = [], []
    sign_scores, sign_labels = [], []
    weight_pred, weight_true = [], []
    per_window = []

    was_training = model.training
    model.eval()
    with torch.no_grad():
        for w in sorted(windows, key=lambda x: x.target_t):
            target = seq[w.target_t]
            if target.num_edges == 0:
                per_window.append({"target_t": w.target_t, "positives": 0})
                continue
            batch = make_edge_batch(target, w, _derived_seed(seed, 9_000_017, w.target_t))
            preds = batch_forward(model, features[w.target_t], batch)
            probs = preds.link_prob.numpy()
            n_pos = batch.n_pos
            w_link_labels = np.concatenate([np.ones(n_pos), np.zeros(batch.n_neg)])
            link_scores.append(probs)
            link_labels.append(w_link_labels)
            row = {"target_t": w.target_t, "positives": n_pos, "auc_link": auc(probs, w_link_labels)}
            if meta.is_signed:
                s_scores = preds.sign_prob.numpy()[:n_pos]
                s_labels = (batch.pos_sign > 0).astype(np.int64)
                sign_scores.append(s_scores)
                sign_labels.append(s_labels)
                if s_labels.min() != s_labels.max():
                    row["auc_sign"] = auc(s_scores, s_labels)
            if meta.is_weighted:
                wp = preds.weight.numpy()[:n_pos]
                weight_pred.append(wp)
                weight_true.append(batch.pos_weight)
                row["mae"] = mae(batch.pos_weight, wp)
                row["rmse"] = rmse(batch.pos_weight, wp)
            per_window.append(row)
    if was_training:
        model.train()

    report = MetricReport(
        dataset=meta.name,
        auc_link=auc(np.concatenate(link_scores), np.concatenate(link_labels)) if link_scores else None,
        auc_sign=(
            auc(np.concatenate(sign_scores), np.concatenate(sign_labels))
            if meta.is_signed and sign_scores
            else None
        ),
        mae=mae(np.concatenate(weight_true), np.concatenate(weight_pred)) if weight_pred else None,
        rmse=rmse(np.concatenate(weight_true), np.concatenate(weight_pred)) if weight_pred else None,
        per_window=per_window,
        config=config or {},
        runtime_seconds=time.time() - t_start,
    )
    return report


SWEEP_COLUMNS = "param,value,auc_l,auc_s,mae,rmse"


def sweep(
    graph,
    base,
    out_dir,
    n_grid: Sequence[int] = tuple(range(1, 11)),
    h_grid: Sequence[int] = tuple(range(1, 11)),
    T_grid: Sequence[int] = tuple(range(100, 201, 10)),
) -> list[dict]:
    """One-factor-at-a-time runs from the base config over n, h, and T.

    Writes one plot-ready CSV per swept parameter into ``out_dir`` and
    returns the result rows.  Infeasible combinations (T <= n) are skipped
    and recorded.
    """
    from .experiment import run_single  # lazy: avoids a module cycle

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows: list[dict] = []
    grids = {"n": n_grid, "h": h_grid, "T": T_grid}
    for param, grid in grids.items():
        for value in grid:
            cfg = base.override(**{param: int(value)})
            if cfg.T <= cfg.n:
                logger.warning("skipping infeasible sweep point %s=%s (T=%d <= n=%d)", param, value, cfg.T, cfg.n)
                rows.append({"param": param, "value": value, "skipped": True})
                continue
            report = run_single(graph, cfg)
            rows.append(
                {
                    "param": param,
                    "value": value,
                    "auc_l": report.auc_link,
                    "auc_s": report.auc_sign,
                    "mae": report.mae,
                    "rmse": report.rmse,
                }
            )
    for param in grids:
        path = out_dir / f"sweep_{param}.csv"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(SWEEP_COLUMNS + "\n")
            for row in rows:
                if row["param"] != param or row.get("skipped"):
                    continue
                cells = [param, str(row["value"])]
                for key in ("auc_l", "auc_s", "mae", "rmse"):
                    v = row.get(key)
                    cells.append("" if v is None else f"{v:.4f}")
                fh.write(",".join(cells) + "\n")
    skipped = [r for r in rows if r.get("skipped")]
    if skipped:
        with open(out_dir / "sweep_skipped.csv", "w", encoding="utf-8") as fh:
            fh.write("param,value,reason\n")
            for row in skipped:
                fh.write(f"{row['param']},{row['value']},T<=n\n")
    return rows
