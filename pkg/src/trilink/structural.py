"""Multi-hop structural balance and temporal difference features.

Per snapshot: build the signed transition matrix P = D^-1 A (D = diagonal of
row-wise absolute sums), accumulate S = sum of P^k for k = 1..h, and reduce
each node's row of S into four balance numbers (received positive propagation,
received negative propagation, balance coefficient in [-1, 1], total
strength).  Temporal differences track per-node changes of the four weighted
degree channels (in+/out+/in-/out-) between consecutive snapshots.  The
per-snapshot node vector is the 8-wide concatenation of both blocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .graph import Snapshot, Window

DENSE_FILL_THRESHOLD = 0.5  # switch matrix powers to dense beyond this fill


@dataclass
class SignedTransition:
    """Row-normalized signed adjacency; zero out-degree rows stay zero."""

    P: sp.csr_matrix
    node_ids: np.ndarray

    @property
    def shape(self):
        return self.P.shape


@dataclass
class BalanceFeatures:
    r_plus: np.ndarray  # received positive propagation, >= 0
    r_minus: np.ndarray  # received negative propagation, >= 0
    b: np.ndarray  # balance coefficient in [-1, 1]; 0 when nothing received
    a: np.ndarray  # total propagation strength

    @property
    def matrix(self) -> np.ndarray:
        return np.stack([self.r_plus, self.r_minus, self.b, self.a], axis=1)


@dataclass
class TemporalDiff:
    """Per-node 4-vector: change of (in+, out+, in-, out-) weighted degrees."""

    matrix: np.ndarray  # |nodes| x 4


def signed_transition(snapshot: Snapshot, node_ids: np.ndarray) -> SignedTransition:
    """P = D^-1 A over the given node indexing (sorted ids)."""
    node_ids = np.asarray(node_ids, dtype=np.int64)
    m = node_ids.size
    if snapshot.num_edges == 0:
        return SignedTransition(sp.csr_matrix((m, m)), node_ids)
    rows = np.searchsorted(node_ids, snapshot.src)
    cols = np.searchsorted(node_ids, snapshot.dst)
    if np.any(node_ids[rows] != snapshot.src) or np.any(node_ids[cols] != snapshot.dst):
        raise KeyError("snapshot contains nodes outside the given node index")
    A = sp.csr_matrix((snapshot.w, (rows, cols)), shape=(m, m))
    absrow = np.abs(A).sum(axis=1).A1
    inv = np.zeros(m)
    nz = absrow > 0
    inv[nz] = 1.0 / absrow[nz]
    P = sp.diags(inv) @ A
    return SignedTransition(P.tocsr(), node_ids)


def multihop_cumulative(P: SignedTransition, h: int) -> sp.csr_matrix:
    """S = sum_{k=1..h} P^k by iterated multiplication in float64.

    Sparse products throughout; if the accumulating power fills past
    ``DENSE_FILL_THRESHOLD`` the remaining hops run dense.
    """
    if h <= 0:
        raise ValueError(f"hop count h must be >= 1, got {h}")
    mat = P.P.astype(np.float64)
    S = mat.copy()
    acc = mat
    dense = False
    for _ in range(2, h + 1):
        if not dense:
            acc = acc @ mat
            if acc.nnz > DENSE_FILL_THRESHOLD * acc.shape[0] * max(acc.shape[1], 1):
                acc = acc.toarray()
                dense = True
        else:
            acc = acc @ mat.toarray()
        S = S + (sp.csr_matrix(acc) if dense else acc)
    return sp.csr_matrix(S)


def balance_features(S: sp.spmatrix, h: int) -> BalanceFeatures:
    """Reduce each row of the cumulative matrix into the four balance numbers.

    With sigma = signed row sum and alpha = absolute row sum:
    r+ = alpha + sigma, r- = alpha - sigma (no 1/2 factor),
    b = (r+ - r-) / (r+ + r-) with 0/0 defined as 0, a = r+ + r-.
    """
    S = sp.csr_matrix(S)
    sigma = np.asarray(S.sum(axis=1)).ravel()
    alpha = np.asarray(np.abs(S).sum(axis=1)).ravel()
    r_plus = np.maximum(alpha + sigma, 0.0)
    r_minus = np.maximum(alpha - sigma, 0.0)
    a = r_plus + r_minus
    with np.errstate(invalid="ignore", divide="ignore"):
        b = np.where(a > 0, (r_plus - r_minus) / np.where(a > 0, a, 1.0), 0.0)
    b = np.clip(b, -1.0, 1.0)
    return BalanceFeatures(r_plus=r_plus, r_minus=r_minus, b=b, a=a)


def _degree_levels(snapshot: Optional[Snapshot], node_ids: np.ndarray) -> np.ndarray:
    """Per-node (in+, out+, in-, out-) weighted degree totals; magnitudes."""
    m = node_ids.size
    levels = np.zeros((m, 4), dtype=np.float64)
    if snapshot is None or snapshot.num_edges == 0:
        return levels
    rows = np.searchsorted(node_ids, snapshot.src)
    cols = np.searchsorted(node_ids, snapshot.dst)
    in_range_r = (rows < m) & (node_ids[np.minimum(rows, m - 1)] == snapshot.src)
    in_range_c = (cols < m) & (node_ids[np.minimum(cols, m - 1)] == snapshot.dst)
    w = snapshot.w
    pos = w > 0
    neg = ~pos
    np.add.at(levels[:, 0], cols[pos & in_range_c], w[pos & in_range_c])
    np.add.at(levels[:, 1], rows[pos & in_range_r], w[pos & in_range_r])
    np.add.at(levels[:, 2], cols[neg & in_range_c], -w[neg & in_range_c])
    np.add.at(levels[:, 3], rows[neg & in_range_r], -w[neg & in_range_r])
    return levels


def temporal_diff(curr: Snapshot, prev: Optional[Snapshot], node_ids: np.ndarray) -> TemporalDiff:
    """Difference of degree levels between ``curr`` and ``prev`` (zero if None)."""
    node_ids = np.asarray(node_ids, dtype=np.int64)
    return TemporalDiff(matrix=_degree_levels(curr, node_ids) - _degree_levels(prev, node_ids))


def structural_block(
    window: Window,
    h: int,
    node_ids: Optional[np.ndarray] = None,
    prev_outside: Optional[Snapshot] = None,
) -> np.ndarray:
    """Per-snapshot 8-wide node features for a window: balance(4) | diff(4).

    Shape (n, |nodes|, 8).  Nodes absent from a member snapshot contribute
    zero rows for that snapshot.  The first snapshot differences against zero
    unless ``prev_outside`` (the snapshot just before the window) is supplied.
    """
    if node_ids is None:
        node_ids = window.node_ids
    node_ids = np.asarray(node_ids, dtype=np.int64)
    n = window.n
    out = np.zeros((n, node_ids.size, 8), dtype=np.float64)
    prev: Optional[Snapshot] = prev_outside
    for i, snap in enumerate(window.snapshots):
        if snap.num_edges:
            P = signed_transition(_restrict(snap, node_ids), node_ids)
            S = multihop_cumulative(P, h)
            out[i, :, :4] = balance_features(S, h).matrix
        out[i, :, 4:] = temporal_diff(_restrict(snap, node_ids), _restrict(prev, node_ids), node_ids).matrix
        prev = snap
    return out


def simple_weight_sums(window: Window, node_ids: Optional[np.ndarray] = None) -> np.ndarray:
    """Ablation features: per snapshot [sum of positive w, sum of |negative w|].

    Incident (in plus out) sums per node; shape (n, |nodes|, 2).
    """
    if node_ids is None:
        node_ids = window.node_ids
    node_ids = np.asarray(node_ids, dtype=np.int64)
    out = np.zeros((window.n, node_ids.size, 2), dtype=np.float64)
    for i, snap in enumerate(window.snapshots):
        levels = _degree_levels(_restrict(snap, node_ids), node_ids)
        out[i, :, 0] = levels[:, 0] + levels[:, 1]
        out[i, :, 1] = levels[:, 2] + levels[:, 3]
    return out


def _restrict(snapshot: Optional[Snapshot], node_ids: np.ndarray) -> Optional[Snapshot]:
    """Drop edges touching nodes outside ``node_ids`` (window boundary)."""
    if snapshot is None or snapshot.num_edges == 0:
        return snapshot
    si = np.searchsorted(node_ids, snapshot.src)
    di = np.searchsorted(node_ids, snapshot.dst)
    m = node_ids.size
    ok = (
        (si < m)
        & (di < m)
        & (node_ids[np.minimum(si, m - 1)] == snapshot.src)
        & (node_ids[np.minimum(di, m - 1)] == snapshot.dst)
    )
    if ok.all():
        return snapshot
    return Snapshot(
        index=snapshot.index,
        src=snapshot.src[ok],
        dst=snapshot.dst[ok],
        w=snapshot.w[ok],
        premerge_count=snapshot.premerge_count,
    )


def dump_structural(window: Window, h: int, path) -> None:
    """Text dump per (window, snapshot): node_id,r_plus,r_minus,b,a,d1..d4."""
    node_ids = window.node_ids
    block = structural_block(window, h, node_ids)
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(window.n):
            snap_index = window.snapshots[i].index
            for row, nid in enumerate(node_ids):
                vals = ",".join(f"{v:.10g}" for v in block[i, row])
                fh.write(f"{snap_index},{nid},{vals}\n")
