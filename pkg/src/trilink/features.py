"""Per-window feature assembly feeding the encoder.

A window's feature block pairs one 2d-dim semantic row per node (window
level) with one structural vector per node per member snapshot.  Blocks are
stored compactly over the window's node set; lookups for foreign nodes
(e.g. nodes that first appear in the target snapshot) return zero rows.
Ablation variants change what gets assembled: ``no_embedding`` zeroes the
semantic block, ``no_feature`` swaps the 8-dim structural vector for plain
positive/negative weight sums (2-dim).
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .graph import SnapshotSequence, Window
from .semantic import SkipGramConfig, WalkConfig, window_embedding
from .structural import simple_weight_sums, structural_block

logger = logging.getLogger(__name__)

VARIANTS = ("full", "no_transformer", "no_embedding", "no_feature", "no_decoupling")


@dataclass(frozen=True)
class FeatureConfig:
    """Everything that determines a window's feature block."""

    hops: int = 2
    first_diff: str = "zero"  # "zero" | "previous": baseline for a window's first snapshot
    walks: WalkConfig = WalkConfig()
    skipgram: SkipGramConfig = SkipGramConfig()
    variant: str = "full"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.first_diff not in ("zero", "previous"):
            raise ValueError("first_diff must be 'zero' or 'previous'")

    @property
    def semantic_dim(self) -> int:
        return 2 * self.skipgram.dim

    @property
    def structural_dim(self) -> int:
        return 2 if self.variant == "no_feature" else 8

    def cache_key(self, dataset: str, seed: int) -> str:
        payload = json.dumps(
            {"dataset": dataset, "seed": seed, "cfg": asdict(self)},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass
class WindowFeatures:
    """Compact feature block over one window's node set."""

    target_t: int
    node_ids: np.ndarray  # sorted
    semantic: np.ndarray  # |nodes| x 2d float32
    structural: np.ndarray  # n x |nodes| x s float32

    @property
    def n(self) -> int:
        return int(self.structural.shape[0])

    def lookup(self, nodes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Feature rows for arbitrary node ids; zeros for unknown nodes."""
        nodes = np.asarray(nodes, dtype=np.int64)
        pos = np.searchsorted(self.node_ids, nodes)
        pos_c = np.minimum(pos, max(self.node_ids.size - 1, 0))
        known = (self.node_ids.size > 0) & (self.node_ids[pos_c] == nodes)
        sem = np.zeros((nodes.size, self.semantic.shape[1]), dtype=np.float32)
        struct = np.zeros((self.n, nodes.size, self.structural.shape[2]), dtype=np.float32)
        if np.any(known):
            sem[known] = self.semantic[pos_c[known]]
            struct[:, known, :] = self.structural[:, pos_c[known], :]
        return sem, struct


def compute_window_features(
    window: Window,
    cfg: FeatureConfig,
    seed: int,
    seq: Optional[SnapshotSequence] = None,
) -> WindowFeatures:
    """Assemble one window's block under the configured variant."""
    node_ids = window.node_ids
    wcfg = WalkConfig(cfg.walks.num_walks, cfg.walks.walk_length, seed=seed)
    scfg = cfg.skipgram

    if cfg.variant == "no_embedding":
        semantic = np.zeros((node_ids.size, cfg.semantic_dim), dtype=np.float32)
    else:
        semantic = window_embedding(window, wcfg, scfg, node_universe=node_ids).matrix

    if cfg.variant == "no_feature":
        structural = simple_weight_sums(window, node_ids)
    else:
        prev_outside = None
        if cfg.first_diff == "previous" and seq is not None:
            first_index = window.target_t - window.n
            if first_index - 1 >= 0:
                prev_outside = seq[first_index - 1]
        structural = structural_block(window, cfg.hops, node_ids, prev_outside=prev_outside)

    return WindowFeatures(
        target_t=window.target_t,
        node_ids=node_ids,
        semantic=np.ascontiguousarray(semantic, dtype=np.float32),
        structural=np.ascontiguousarray(structural, dtype=np.float32),
    )


def precompute_features(
    windows: Sequence[Window],
    cfg: FeatureConfig,
    seed: int,
    seq: Optional[SnapshotSequence] = None,
    jobs: int = 1,
    cache_dir: Optional[Path] = None,
    dataset: str = "",
) -> dict[int, WindowFeatures]:
    """Feature blocks for every window, keyed by target_t.

    With ``cache_dir`` set, blocks are loaded from / saved to npz files keyed
    by (dataset, target_t, seed, config hash).  ``jobs`` > 1 distributes
    windows over process workers; per-window seeds derive from (seed,
    target_t) so results are independent of scheduling.
    """
    out: dict[int, WindowFeatures] = {}
    todo = []
    key = cfg.cache_key(dataset, seed) if cache_dir is not None else None
    for w in windows:
        if cache_dir is not None:
            path = Path(cache_dir) / f"{dataset}_t{w.target_t}_s{seed}_{key}.npz"
            if path.exists():
                out[w.target_t] = load_window_features(path)
                continue
        todo.append(w)

    if jobs > 1 and len(todo) > 1:
        from concurrent.futures import ProcessPoolExecutor

        seq_arg = seq if cfg.first_diff == "previous" else None  # workers only need it then
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = pool.map(
                _compute_one,
                [(w, cfg, _window_seed(seed, w.target_t), seq_arg) for w in todo],
                chunksize=4,
            )
            for feats in results:
                out[feats.target_t] = feats
    else:
        for w in todo:
            out[w.target_t] = compute_window_features(w, cfg, _window_seed(seed, w.target_t), seq)

    if cache_dir is not None:
        Path(cache_dir).mkdir(parents=True, exist_ok=True)
        for w in todo:
            path = Path(cache_dir) / f"{dataset}_t{w.target_t}_s{seed}_{key}.npz"
            save_window_features(out[w.target_t], path)
    return out


def _window_seed(seed: int, target_t: int) -> int:
    return int(np.random.SeedSequence([seed, target_t]).generate_state(1)[0])


def _compute_one(args):
    w, cfg, seed, seq = args
    import torch

    torch.set_num_threads(1)
    return compute_window_features(w, cfg, seed, seq)


def save_window_features(feats: WindowFeatures, path) -> None:
    np.savez_compressed(
        path,
        target_t=feats.target_t,
        node_ids=feats.node_ids,
        semantic=feats.semantic,
        structural=feats.structural,
    )


def load_window_features(path) -> WindowFeatures:
    data = np.load(path)
    return WindowFeatures(
        target_t=int(data["target_t"]),
        node_ids=data["node_ids"],
        semantic=data["semantic"],
        structural=data["structural"],
    )
