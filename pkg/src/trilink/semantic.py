"""Sign-aware node embeddings: weighted random walks plus Skip-Gram.

Per window the union graph is split into a positive and a negative subgraph.
On each, walks follow out-edges with probability proportional to |weight|,
a Skip-Gram model with negative sampling is trained on the walk corpus, and
the two d-dim embeddings are concatenated into one 2d-dim row per node.
Everything is deterministic under the configured seed: walk sampling is
single-generator lockstep, Skip-Gram batches are shuffled by a seeded torch
generator, and iteration orders are fixed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import torch

from .graph import Subgraph, Window, signed_subgraphs


@dataclass(frozen=True)
class WalkConfig:
    num_walks: int = 5  # walks started per non-isolated node
    walk_length: int = 10  # max nodes per walk; walks stop early at sinks
    seed: int = 0

    def __post_init__(self):
        if self.num_walks < 1:
            raise ValueError("num_walks must be >= 1")
        if self.walk_length < 2:
            raise ValueError("walk_length must be >= 2")


@dataclass(frozen=True)
class SkipGramConfig:
    dim: int = 64
    context_window: int = 5
    negatives_per_target: int = 5
    epochs: int = 5
    initial_lr: float = 0.025  # linearly decayed over training
    batch_size: int = 4096
    seed: int = 0
    # each node's init row depends only on (init_seed, node id), which keeps
    # embedding frames aligned across independently retrained windows
    init_seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")


@dataclass
class SemanticEmbedding:
    """Concatenated positive|negative embeddings, one row per universe node."""

    matrix: np.ndarray  # |universe| x 2d, float32
    node_ids: np.ndarray  # row order of ``matrix``
    target_t: int


class _WalkGraph:
    """CSR view of a subgraph's out-edges with per-row cumulative |weight|."""

    def __init__(self, sub: Subgraph):
        self.nodes = np.unique(np.concatenate([sub.src, sub.dst])) if sub.src.size else np.empty(0, np.int64)
        self.m = self.nodes.size
        if self.m == 0:
            self.offsets = np.zeros(1, dtype=np.int64)
            self.targets = np.empty(0, np.int64)
            self.cum = np.empty(0, np.float64)
            return
        src = np.searchsorted(self.nodes, sub.src)
        dst = np.searchsorted(self.nodes, sub.dst)
        order = np.argsort(src, kind="stable")
        src, dst, w = src[order], dst[order], np.abs(sub.w[order])
        counts = np.bincount(src, minlength=self.m)
        self.offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self.targets = dst
        # per-row cumulative probabilities normalized to end at 1.0, then
        # shifted by the row index so one global searchsorted resolves a draw
        cum = np.empty(w.size, dtype=np.float64)
        for r in range(self.m):
            a, b = self.offsets[r], self.offsets[r + 1]
            if b > a:
                c = np.cumsum(w[a:b])
                cum[a:b] = c / c[-1]
                cum[b - 1] = 1.0
        rows = np.repeat(np.arange(self.m, dtype=np.float64), counts)
        self.cum = cum + rows
        self.out_degree = counts


def transition_distribution(node: int, sub: Subgraph) -> dict[int, float]:
    """P(next = j | at node) over out-neighbors, proportional to |weight|."""
    if node not in set(sub.nodes.tolist()):
        raise KeyError(f"node {node} not in subgraph node set")
    mask = sub.src == node
    if not np.any(mask):
        return {}
    w = np.abs(sub.w[mask])
    total = w.sum()
    probs: dict[int, float] = {}
    for j, v in zip(sub.dst[mask], w):  # aggregate any duplicate pairs
        probs[int(j)] = probs.get(int(j), 0.0) + float(v / total)
    return probs


def generate_walks(sub: Subgraph, cfg: WalkConfig) -> list[np.ndarray]:
    """Lockstep weighted walks: ``num_walks`` from every non-isolated node.

    Walks move along out-edges only and stop at sinks, so every consecutive
    pair in a walk is an existing edge.  The returned node ids are the
    subgraph's original ids.
    """
    wg = _WalkGraph(sub)
    if wg.m == 0:
        return []
    rng = np.random.default_rng(cfg.seed)
    starts = np.repeat(np.arange(wg.m, dtype=np.int64), cfg.num_walks)
    n_walks = starts.size
    paths = np.full((n_walks, cfg.walk_length), -1, dtype=np.int64)
    paths[:, 0] = starts
    cur = starts.copy()
    alive = wg.out_degree[cur] > 0
    for step in range(1, cfg.walk_length):
        if not alive.any():
            break
        active = np.flatnonzero(alive)
        u = rng.random(active.size)
        pos = np.searchsorted(wg.cum, cur[active] + u, side="right")
        nxt = wg.targets[pos]
        cur[active] = nxt
        paths[active, step] = nxt
        alive[active] = wg.out_degree[nxt] > 0
    ids = wg.nodes
    out = []
    for row in paths:
        stop = np.argmax(row < 0) if (row < 0).any() else cfg.walk_length
        out.append(ids[row[:stop]])
    return out


def _mean_index_add(dest: torch.Tensor, idx: torch.Tensor, grads: torch.Tensor) -> None:
    counts = torch.bincount(idx, minlength=dest.shape[0]).clamp_(min=1).to(grads.dtype)
    dest.index_add_(0, idx, grads / counts[idx].unsqueeze(1))


def _anchored_init(node_ids: np.ndarray, dim: int, seed: int) -> np.ndarray:
    """Word2vec-scale uniform init rows that are functions of the node id."""
    out = np.empty((node_ids.size, dim), dtype=np.float32)
    for r, g in enumerate(node_ids):
        state = np.random.SeedSequence([seed, int(g)]).generate_state(dim, dtype=np.uint32)
        out[r] = state / np.float32(2**32) - np.float32(0.5)
    return out / dim


def _walk_pairs(walks: Sequence[np.ndarray], vocab: np.ndarray, window: int):
    """(center, context) local-index pairs within a fixed context window."""
    centers, contexts = [], []
    for walk in walks:
        if walk.size < 2:
            continue
        loc = np.searchsorted(vocab, walk)
        m = loc.size
        for off in range(1, window + 1):
            if off >= m:
                break
            a, b = loc[:-off], loc[off:]
            centers.append(a)
            contexts.append(b)
            centers.append(b)
            contexts.append(a)
    if not centers:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    return np.concatenate(centers), np.concatenate(contexts)


def train_skipgram(
    walks: Sequence[np.ndarray],
    cfg: SkipGramConfig,
    node_universe: np.ndarray,
) -> np.ndarray:
    """Skip-Gram with negative sampling over a walk corpus.

    Returns a |universe| x dim float32 matrix aligned with ``node_universe``
    (sorted ids).  Nodes absent from every walk get all-zero rows; trained
    rows are the sum of input and output vectors, which carries direct
    co-occurrence (first-order) signal alongside contextual similarity.
    Training follows word2vec conventions: uniform(-0.5/d, 0.5/d) input
    init (anchored per node id), zero output init, unigram^0.75 negative
    table, linear lr decay.
    """
    universe = np.asarray(node_universe, dtype=np.int64)
    out = np.zeros((universe.size, cfg.dim), dtype=np.float32)
    present = [w for w in walks if w.size > 0]
    if not present:
        return out
    vocab = np.unique(np.concatenate(present))
    centers_np, contexts_np = _walk_pairs(present, vocab, cfg.context_window)

    gen = torch.Generator().manual_seed(cfg.seed)
    v = vocab.size
    emb_in = torch.from_numpy(_anchored_init(vocab, cfg.dim, cfg.init_seed))
    emb_out = torch.zeros((v, cfg.dim), dtype=torch.float32)

    n_pairs = centers_np.size
    if n_pairs > 0:
        counts = np.bincount(np.searchsorted(vocab, np.concatenate(present)), minlength=v).astype(np.float64)
        noise = counts**0.75
        noise_cum = torch.from_numpy(np.cumsum(noise / noise.sum()))

        centers = torch.from_numpy(centers_np)
        contexts = torch.from_numpy(contexts_np)
        k = cfg.negatives_per_target
        total_batches = cfg.epochs * max(1, (n_pairs + cfg.batch_size - 1) // cfg.batch_size)
        batch_no = 0
        for _epoch in range(cfg.epochs):
            perm = torch.randperm(n_pairs, generator=gen)
            for lo in range(0, n_pairs, cfg.batch_size):
                sel = perm[lo : lo + cfg.batch_size]
                c = centers[sel]
                o = contexts[sel]
                lr = cfg.initial_lr * max(1.0 - batch_no / total_batches, 1e-4)
                batch_no += 1

                negs = torch.searchsorted(noise_cum, torch.rand((sel.size(0), k), generator=gen, dtype=torch.float64))
                negs = negs.clamp_(max=v - 1)

                vc = emb_in[c]  # B x d
                uo = emb_out[o]  # B x d
                un = emb_out[negs]  # B x k x d

                s_pos = torch.sigmoid((vc * uo).sum(dim=1))  # B
                s_neg = torch.sigmoid(torch.einsum("bd,bkd->bk", vc, un))  # B x k

                g_pos = (1.0 - s_pos) * lr  # toward label 1
                g_neg = -s_neg * lr  # toward label 0
                g_neg = g_neg * (negs != o.unsqueeze(1))  # a drawn true context is skipped

                grad_vc = g_pos.unsqueeze(1) * uo + torch.einsum("bk,bkd->bd", g_neg, un)
                grad_uo = g_pos.unsqueeze(1) * vc
                grad_un = g_neg.unsqueeze(2) * vc.unsqueeze(1)

                # mean-accumulate per row: a node appearing many times in one
                # batch must not take a proportionally larger step
                _mean_index_add(emb_in, c, grad_vc)
                _mean_index_add(emb_out, o, grad_uo)
                _mean_index_add(emb_out, negs.reshape(-1), grad_un.reshape(-1, cfg.dim))

    rows = np.searchsorted(universe, vocab)
    out[rows] = (emb_in + emb_out).numpy()
    return out


def window_embedding(
    window: Window,
    wcfg: WalkConfig,
    scfg: SkipGramConfig,
    node_universe: Optional[np.ndarray] = None,
) -> SemanticEmbedding:
    """Positive|negative Skip-Gram embeddings for one window (width 2*dim).

    The positive subgraph fills the first ``dim`` columns, the negative
    subgraph the last; a node isolated in both subgraphs keeps an all-zero
    row.  Distinct derived seeds keep the two subgraph models independent.
    """
    if node_universe is None:
        node_universe = window.node_ids
    universe = np.asarray(node_universe, dtype=np.int64)
    pos, neg = signed_subgraphs(window.union)
    cols = np.zeros((universe.size, 2 * scfg.dim), dtype=np.float32)
    for half, sub in enumerate((pos, neg)):
        sub_seed = np.random.SeedSequence([wcfg.seed, window.target_t, half]).generate_state(1)[0]
        init_seed = np.random.SeedSequence([scfg.init_seed, 151, half]).generate_state(1)[0]
        walks = generate_walks(sub, WalkConfig(wcfg.num_walks, wcfg.walk_length, seed=int(sub_seed)))
        emb = train_skipgram(
            walks,
            SkipGramConfig(
                dim=scfg.dim,
                context_window=scfg.context_window,
                negatives_per_target=scfg.negatives_per_target,
                epochs=scfg.epochs,
                initial_lr=scfg.initial_lr,
                batch_size=scfg.batch_size,
                seed=int(sub_seed) + 1,
                init_seed=int(init_seed),
            ),
            universe,
        )
        cols[:, half * scfg.dim : (half + 1) * scfg.dim] = emb
    return SemanticEmbedding(matrix=cols, node_ids=universe, target_t=window.target_t)
