"""Chronological training of the joint predictor.

Windows are split 8:2 by target time (no shuffling); the last tenth of the
training windows is held out for early stopping on link AUC.  Each epoch
walks the fit windows in order; per window, the edges of the target snapshot
are the positives and an equal number of non-edges is drawn fresh (seeds
derive from (run seed, epoch, window) so "dynamic" sampling stays
reproducible).  One Adam step per window.
"""

from __future__ import annotations

import copy
import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
import torch

from .features import FeatureConfig, WindowFeatures, precompute_features
from .graph import DatasetMeta, Snapshot, SnapshotSequence, Window
from .model import JointPredictor, ModelConfig, PredictionTriple, build_model

logger = logging.getLogger(__name__)


class NumericalError(RuntimeError):
    """Training produced a non-finite quantity (maps to CLI exit code 4)."""


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.001
    epochs: int = 100
    patience: int = 10  # epochs without validation link-AUC improvement
    split_ratio: float = 0.8
    lambda_link: float = 1.0
    lambda_sign: float = 1.0
    lambda_weight: float = 1.0
    seed: int = 0
    deterministic: bool = True  # single-threaded, dropout off

    def __post_init__(self):
        if not 0.0 < self.split_ratio < 1.0:
            raise ValueError("split_ratio must be in (0, 1)")


@dataclass
class EdgeBatch:
    """Positives of the target snapshot plus equally many sampled non-edges."""

    pos_src: np.ndarray
    pos_dst: np.ndarray
    pos_weight: np.ndarray  # normalized, signed
    neg_src: np.ndarray
    neg_dst: np.ndarray

    @property
    def n_pos(self) -> int:
        return int(self.pos_src.size)

    @property
    def n_neg(self) -> int:
        return int(self.neg_src.size)

    @property
    def pos_sign(self) -> np.ndarray:
        return np.where(self.pos_weight > 0, 1, -1)

    def all_pairs(self) -> np.ndarray:
        src = np.concatenate([self.pos_src, self.neg_src])
        dst = np.concatenate([self.pos_dst, self.neg_dst])
        return np.stack([src, dst], axis=1)


def chronological_split(windows: Sequence[Window], ratio: float) -> tuple[list[Window], list[Window]]:
    """First ceil(ratio * count) windows train, the rest test; order preserved."""
    if len(windows) < 2:
        raise ValueError("need at least 2 windows to split")
    ordered = sorted(windows, key=lambda w: w.target_t)
    cut = min(math.ceil(ratio * len(ordered)), len(ordered) - 1)
    return list(ordered[:cut]), list(ordered[cut:])


def sample_negatives(target: Snapshot, count: int, node_pool: np.ndarray, seed: int) -> np.ndarray:
    """``count`` distinct ordered non-edges (i, j), i != j, over the pool.

    Uniform over admissible pairs via rejection sampling.  If fewer admissible
    pairs exist than requested, all of them are returned with a warning.
    """
    pool = np.unique(np.asarray(node_pool, dtype=np.int64))
    rng = np.random.default_rng(seed)
    if count <= 0 or pool.size < 2:
        return np.empty((0, 2), dtype=np.int64)

    edge_keys = set((target.src.astype(np.int64) << np.int64(32) | target.dst.astype(np.int64)).tolist())
    p = pool.size
    # p*(p-1) counts ordered non-self pairs; subtract target edges inside the
    # pool, ignoring self-loop edges which that count never included
    in_pool = np.isin(target.src, pool) & np.isin(target.dst, pool) & (target.src != target.dst)
    admissible = p * (p - 1) - int(np.count_nonzero(in_pool))

    if admissible <= count:
        if admissible < count:
            logger.warning(
                "only %d admissible non-edges for %d requested; returning all", max(admissible, 0), count
            )
        ii, jj = np.meshgrid(pool, pool, indexing="ij")
        cand = np.stack([ii.ravel(), jj.ravel()], axis=1)
        cand = cand[cand[:, 0] != cand[:, 1]]
        keys = cand[:, 0] << np.int64(32) | cand[:, 1]
        keep = np.fromiter((k not in edge_keys for k in keys.tolist()), dtype=bool, count=keys.size)
        cand = cand[keep]
        if cand.shape[0] > count:
            sel = rng.choice(cand.shape[0], size=count, replace=False)
            cand = cand[np.sort(sel)]
        return cand

    chosen: list[tuple[int, int]] = []
    seen: set[int] = set()
    while len(chosen) < count:
        need = count - len(chosen)
        i = pool[rng.integers(0, p, size=2 * need + 8)]
        j = pool[rng.integers(0, p, size=2 * need + 8)]
        for a, b in zip(i.tolist(), j.tolist()):
            if a == b:
                continue
            key = a << 32 | b
            if key in edge_keys or key in seen:
                continue
            seen.add(key)
            chosen.append((a, b))
            if len(chosen) == count:
                break
    return np.asarray(chosen, dtype=np.int64)


def make_edge_batch(target: Snapshot, window: Window, seed: int) -> EdgeBatch:
    """Balanced batch for one window: target edges vs sampled non-edges."""
    pool = np.union1d(window.node_ids, target.node_ids)
    negs = sample_negatives(target, target.num_edges, pool, seed)
    return EdgeBatch(
        pos_src=target.src.copy(),
        pos_dst=target.dst.copy(),
        pos_weight=target.w.copy(),
        neg_src=negs[:, 0] if negs.size else np.empty(0, np.int64),
        neg_dst=negs[:, 1] if negs.size else np.empty(0, np.int64),
    )


def batch_forward(
    model: JointPredictor, feats: WindowFeatures, batch: EdgeBatch, dtype=torch.float32
) -> PredictionTriple:
    """Run the model on every candidate edge of a batch."""
    pairs = batch.all_pairs()
    nodes = np.unique(pairs)
    sem, struct = feats.lookup(nodes)
    local = np.searchsorted(nodes, pairs)
    sem_t = torch.as_tensor(sem, dtype=dtype)
    struct_t = torch.as_tensor(struct, dtype=dtype).transpose(0, 1).contiguous()  # B x n x s
    pairs_t = torch.as_tensor(local, dtype=torch.long)
    return model(sem_t, struct_t, pairs_t)


def multitask_loss(
    preds: PredictionTriple,
    batch: EdgeBatch,
    meta: DatasetMeta,
    lambdas: tuple[float, float, float] = (1.0, 1.0, 1.0),
) -> tuple[torch.Tensor, dict[str, float]]:
    """Weighted sum of the three task losses, each a mean over its samples.

    Link BCE covers positives and negatives; sign BCE (signed data) and
    weight MSE (weighted data) cover true positives only.
    """
    n_pos, n_neg = batch.n_pos, batch.n_neg
    dtype = preds.link_logit.dtype
    labels = torch.cat([torch.ones(n_pos, dtype=dtype), torch.zeros(n_neg, dtype=dtype)])
    loss_link = torch.nn.functional.binary_cross_entropy_with_logits(preds.link_logit, labels)
    total = lambdas[0] * loss_link
    parts = {"link": float(loss_link.detach())}

    if meta.is_signed and n_pos > 0:
        sign_labels = torch.as_tensor(batch.pos_sign > 0, dtype=dtype)
        loss_sign = torch.nn.functional.binary_cross_entropy_with_logits(preds.sign_logit[:n_pos], sign_labels)
        total = total + lambdas[1] * loss_sign
        parts["sign"] = float(loss_sign.detach())
    if meta.is_weighted and n_pos > 0:
        targets = torch.as_tensor(batch.pos_weight, dtype=dtype)
        loss_weight = torch.nn.functional.mse_loss(preds.weight[:n_pos], targets)
        total = total + lambdas[2] * loss_weight
        parts["weight"] = float(loss_weight.detach())
    parts["total"] = float(total.detach())
    return total, parts


@dataclass
class TrainResult:
    model: JointPredictor
    history: list[str]  # log lines: epoch,window_t,loss_total,loss_link,loss_sign,loss_weight,val_auc
    best_val_auc: float
    best_epoch: int
    epochs_run: int
    train_windows: list[Window]
    test_windows: list[Window]
    features: dict[int, WindowFeatures]


def _derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def _validation_auc(model, windows, features, seq, seed) -> Optional[float]:
    from .evaluation import auc  # local import keeps module deps one-way

    scores: list[np.ndarray] = []
    labels: list[np.ndarray] = []
    model.eval()
    with torch.no_grad():
        for w in windows:
            target = seq[w.target_t]
            if target.num_edges == 0:
                continue
            batch = make_edge_batch(target, w, _derived_seed(seed, 7_000_003, w.target_t))
            preds = batch_forward(model, features[w.target_t], batch)
            probs = preds.link_prob.numpy()
            scores.append(probs)
            labels.append(np.concatenate([np.ones(batch.n_pos), np.zeros(batch.n_neg)]))
    model.train()
    if not scores:
        return None
    return auc(np.concatenate(scores), np.concatenate(labels))


def train(
    seq: SnapshotSequence,
    meta: DatasetMeta,
    windows: Sequence[Window],
    feature_cfg: FeatureConfig,
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    variant: str = "full",
    features: Optional[dict[int, WindowFeatures]] = None,
    jobs: int = 1,
    cache_dir=None,
    dataset: str = "",
) -> TrainResult:
    """Fit the model on the chronological training windows.

    ``variant`` selects the ablation wiring; feature assembly and model
    architecture are adjusted together so each variant changes exactly the
    component it names.
    """
    if train_cfg.deterministic:
        torch.set_num_threads(1)
    torch.manual_seed(_derived_seed(train_cfg.seed, 11))

    feature_cfg = replace(feature_cfg, variant=variant)
    if variant == "no_feature":
        model_cfg = replace(model_cfg, structural_in=2)
    if train_cfg.deterministic:
        model_cfg = replace(model_cfg, dropout=0.0)
    model_cfg = replace(model_cfg, seed=_derived_seed(train_cfg.seed, 13))

    if features is None:
        features = precompute_features(
            windows, feature_cfg, train_cfg.seed, seq=seq, jobs=jobs, cache_dir=cache_dir, dataset=dataset
        )

    train_windows, test_windows = chronological_split(windows, train_cfg.split_ratio)
    n_val = 0
    if len(train_windows) >= 2:
        n_val = min(len(train_windows) - 1, max(1, math.ceil(0.1 * len(train_windows))))
    fit_windows = train_windows[: len(train_windows) - n_val]
    val_windows = train_windows[len(train_windows) - n_val :]

    model = build_model(model_cfg, window_len=windows[0].n, variant=variant)
    optimizer = torch.optim.Adam(model.parameters(), lr=train_cfg.lr)
    lambdas = (train_cfg.lambda_link, train_cfg.lambda_sign, train_cfg.lambda_weight)

    history: list[str] = []
    best_auc = -np.inf
    best_epoch = -1
    best_state = copy.deepcopy(model.state_dict())
    epochs_run = 0

    for epoch in range(train_cfg.epochs):
        epochs_run = epoch + 1
        epoch_lines = []
        for w in fit_windows:
            target = seq[w.target_t]
            if target.num_edges == 0:
                logger.debug("skipping window %d: empty target snapshot", w.target_t)
                continue
            batch = make_edge_batch(target, w, _derived_seed(train_cfg.seed, epoch, w.target_t))
            preds = batch_forward(model, features[w.target_t], batch)
            loss, parts = multitask_loss(preds, batch, meta, lambdas)
            if not torch.isfinite(loss):
                raise NumericalError(
                    f"non-finite loss at epoch {epoch} window {w.target_t}: "
                    + ", ".join(f"{k}={v}" for k, v in parts.items())
                )
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_lines.append(
                f"{epoch},{w.target_t},{parts['total']:.6f},{parts['link']:.6f},"
                f"{parts.get('sign', float('nan')):.6f},{parts.get('weight', float('nan')):.6f},"
            )

        val_auc = _validation_auc(model, val_windows, features, seq, train_cfg.seed) if val_windows else None
        if epoch_lines:
            if val_auc is not None:
                epoch_lines[-1] += f"{val_auc:.6f}"
            history.extend(epoch_lines)

        if val_auc is not None:
            if val_auc > best_auc + 1e-6:
                best_auc = val_auc
                best_epoch = epoch
                best_state = copy.deepcopy(model.state_dict())
            elif epoch - best_epoch >= train_cfg.patience:
                logger.info("early stop at epoch %d (best val AUC %.4f at epoch %d)", epoch, best_auc, best_epoch)
                break

    if best_epoch >= 0:
        model.load_state_dict(best_state)
    model.eval()
    return TrainResult(
        model=model,
        history=history,
        best_val_auc=float(best_auc) if np.isfinite(best_auc) else float("nan"),
        best_epoch=best_epoch,
        epochs_run=epochs_run,
        train_windows=train_windows,
        test_windows=test_windows,
        features=features,
    )
