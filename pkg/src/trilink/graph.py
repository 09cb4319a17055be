"""Timestamped signed weighted edge lists and their snapshot / window views.

A dynamic network is kept in columnar form (numpy arrays over edges).  The
pipeline is: load an edge file, normalize weights into [-1, 1], discretize the
time axis into T equal-width snapshots, then slide a length-n window over the
snapshot sequence.  Every snapshot merges duplicate (source, target) pairs by
summing weights; a window additionally keeps a union graph of its members.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)


class DataError(ValueError):
    """Malformed or unusable input data (maps to CLI exit code 3)."""


@dataclass(frozen=True)
class DatasetMeta:
    """What kind of network a file turned out to contain."""

    is_signed: bool
    is_weighted: bool
    weight_scale: float  # max |raw weight|; divisor used by normalize_weights
    name: str = ""


@dataclass(frozen=True)
class TemporalEdge:
    """One timestamped, signed, weighted, directed interaction."""

    source: int
    target: int
    weight: float
    sign: int
    timestamp: float


@dataclass
class TemporalGraph:
    """Columnar edge list plus dataset metadata.

    ``weight`` holds signed values and is never zero; ``sign`` is derived.
    """

    source: np.ndarray
    target: np.ndarray
    weight: np.ndarray
    timestamp: np.ndarray
    meta: DatasetMeta
    dropped_zero_weight: int = 0
    _nodes: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if np.any(self.weight == 0):
            raise DataError("zero-weight edges must be rejected at load time")

    @property
    def sign(self) -> np.ndarray:
        return np.where(self.weight > 0, 1, -1).astype(np.int64)

    @property
    def nodes(self) -> np.ndarray:
        """Sorted unique node ids (union of all endpoints)."""
        if self._nodes is None:
            self._nodes = np.unique(np.concatenate([self.source, self.target]))
        return self._nodes

    @property
    def num_nodes(self) -> int:
        return int(self.nodes.size)

    @property
    def num_edges(self) -> int:
        return int(self.source.size)

    @property
    def num_positive(self) -> int:
        return int(np.count_nonzero(self.weight > 0))

    @property
    def num_negative(self) -> int:
        return int(np.count_nonzero(self.weight < 0))

    def edges(self) -> Iterator[TemporalEdge]:
        for s, t, w, ts in zip(self.source, self.target, self.weight, self.timestamp):
            yield TemporalEdge(int(s), int(t), float(w), 1 if w > 0 else -1, float(ts))


@dataclass
class Snapshot:
    """Static graph of one time bin: merged (source, target, weight) triples.

    ``premerge_count`` remembers how many raw edges fell into the bin before
    duplicate merging, so binning completeness can be audited.
    """

    index: int
    src: np.ndarray
    dst: np.ndarray
    w: np.ndarray
    premerge_count: int = 0

    @property
    def num_edges(self) -> int:
        return int(self.src.size)

    @property
    def node_ids(self) -> np.ndarray:
        return np.unique(np.concatenate([self.src, self.dst]))

    @property
    def node_count(self) -> int:
        return int(self.node_ids.size)

    def edge_key_set(self) -> set[tuple[int, int]]:
        return set(zip(self.src.tolist(), self.dst.tolist()))


@dataclass
class SnapshotSequence:
    snapshots: tuple[Snapshot, ...]
    bin_width: float
    t_min: float

    def __len__(self) -> int:
        return len(self.snapshots)

    def __getitem__(self, i: int) -> Snapshot:
        return self.snapshots[i]


@dataclass
class Subgraph:
    """One sign partition of a window union; keeps the full union node set."""

    src: np.ndarray
    dst: np.ndarray
    w: np.ndarray
    nodes: np.ndarray  # full window node set, isolated nodes permitted

    @property
    def num_edges(self) -> int:
        return int(self.src.size)


@dataclass
class Window:
    """The n snapshots preceding ``target_t`` plus their merged union graph."""

    target_t: int
    snapshots: tuple[Snapshot, ...]
    union: Snapshot

    @property
    def n(self) -> int:
        return len(self.snapshots)

    @property
    def node_ids(self) -> np.ndarray:
        return self.union.node_ids


def _merge_duplicate_pairs(src, dst, w, clamp: bool):
    """Sum weights of duplicate (src, dst) pairs; drop exact-zero sums.

    With ``clamp`` the merged weights are clipped into [-1, 1] (the rule for
    already-normalized inputs); count-valued inputs skip the clamp and are
    rescaled by the caller.
    """
    if src.size == 0:
        return src, dst, w
    key = (src.astype(np.int64) << np.int64(32)) | dst.astype(np.int64)
    uniq, inverse = np.unique(key, return_inverse=True)
    merged = np.bincount(inverse, weights=w, minlength=uniq.size)
    if clamp:
        merged = np.clip(merged, -1.0, 1.0)
    keep = merged != 0.0
    uniq, merged = uniq[keep], merged[keep]
    return (uniq >> np.int64(32)).astype(np.int64), (uniq & np.int64(0xFFFFFFFF)).astype(np.int64), merged


def load_edge_csv(path, fmt: Optional[str] = None, meta_hint: Optional[DatasetMeta] = None) -> TemporalGraph:
    """Load a timestamped edge list.

    Two line formats are understood:
      * ``csv``:    SOURCE,TARGET,WEIGHT,TIMESTAMP   (comma separated, no header)
      * ``events``: SOURCE TARGET TIMESTAMP          (whitespace separated; each
        event carries an implicit weight of +1)

    ``fmt=None`` sniffs the format from the first non-blank line.  Zero-weight
    edges are dropped (their count is logged and recorded on the graph);
    malformed lines raise :class:`DataError` naming the line number.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such dataset file: {path}")

    sources: list[int] = []
    targets: list[int] = []
    weights: list[float] = []
    stamps: list[float] = []
    dropped_zero = 0

    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if fmt is None:
                fmt = "csv" if "," in line else "events"
            try:
                if fmt == "csv":
                    parts = line.split(",")
                    if len(parts) != 4:
                        raise ValueError(f"expected 4 comma-separated fields, got {len(parts)}")
                    s, t = int(parts[0]), int(parts[1])
                    w = float(parts[2])
                    ts = float(parts[3])
                elif fmt == "events":
                    parts = line.split()
                    if len(parts) != 3:
                        raise ValueError(f"expected 3 whitespace-separated fields, got {len(parts)}")
                    s, t = int(parts[0]), int(parts[1])
                    w = 1.0
                    ts = float(parts[2])
                else:
                    raise DataError(f"unknown format {fmt!r} (expected 'csv' or 'events')")
                if s < 0 or t < 0:
                    raise ValueError("negative node id")
            except DataError:
                raise
            except ValueError as exc:
                raise DataError(f"{path.name} line {lineno}: {exc}") from None
            if w == 0.0:
                dropped_zero += 1
                continue
            sources.append(s)
            targets.append(t)
            weights.append(w)
            stamps.append(ts)

    if dropped_zero:
        logger.warning("%s: dropped %d zero-weight edges", path.name, dropped_zero)
    if not sources:
        raise DataError(f"{path.name}: no usable edges")

    source = np.asarray(sources, dtype=np.int64)
    target = np.asarray(targets, dtype=np.int64)
    weight = np.asarray(weights, dtype=np.float64)
    timestamp = np.asarray(stamps, dtype=np.float64)

    if meta_hint is not None:
        meta = replace(meta_hint, weight_scale=float(np.max(np.abs(weight))))
    else:
        is_signed = bool(np.any(weight < 0))
        # weighted iff weights carry magnitude information, or events will be
        # aggregated into per-snapshot interaction counts
        nonunit = bool(np.any(np.abs(weight) != 1.0))
        is_weighted = nonunit or fmt == "events"
        meta = DatasetMeta(
            is_signed=is_signed,
            is_weighted=is_weighted,
            weight_scale=float(np.max(np.abs(weight))),
            name=path.stem,
        )
    return TemporalGraph(source, target, weight, timestamp, meta, dropped_zero_weight=dropped_zero)


def normalize_weights(graph: TemporalGraph) -> TemporalGraph:
    """Divide every weight by ``meta.weight_scale`` so magnitudes land in (0, 1].

    The scale stays recorded on the meta for de-normalization.
    """
    scale = graph.meta.weight_scale
    if scale <= 0:
        raise DataError("cannot normalize: weight scale is not positive")
    return TemporalGraph(
        graph.source,
        graph.target,
        graph.weight / scale,
        graph.timestamp,
        graph.meta,
        dropped_zero_weight=graph.dropped_zero_weight,
    )


def discretize(graph: TemporalGraph, T: int, _clamp: bool = True) -> SnapshotSequence:
    """Bin edges into T equal-width snapshots and merge duplicates per bin.

    Bin index = floor((ts - t_min) / bin_width); the last bin is right-closed
    so ts == t_max lands in snapshot T-1.
    """
    if T <= 0:
        raise ValueError(f"T must be >= 1, got {T}")
    if graph.num_edges == 0:
        raise DataError("cannot discretize an empty graph")

    t_min = float(graph.timestamp.min())
    t_max = float(graph.timestamp.max())
    span = t_max - t_min
    width = span / T
    if width > 0:
        idx = np.floor((graph.timestamp - t_min) / width).astype(np.int64)
        idx = np.clip(idx, 0, T - 1)
    else:  # all timestamps equal: everything is "ts == t_max"
        idx = np.full(graph.num_edges, T - 1, dtype=np.int64)

    snaps = []
    for t in range(T):
        mask = idx == t
        src, dst, w = _merge_duplicate_pairs(graph.source[mask], graph.target[mask], graph.weight[mask], clamp=_clamp)
        snaps.append(Snapshot(index=t, src=src, dst=dst, w=w, premerge_count=int(mask.sum())))
    return SnapshotSequence(snapshots=tuple(snaps), bin_width=width, t_min=t_min)


def prepare_snapshots(graph: TemporalGraph, T: int) -> tuple[SnapshotSequence, DatasetMeta]:
    """Normalize and discretize in the order the dataset type requires.

    Rating-style data (some |weight| > 1) is normalized by the max absolute
    raw weight before binning, and merged sums are clamped into [-1, 1].
    Count-style data (weighted but all-unit raw weights, e.g. email events)
    is binned first; the scale is then fixed as the max merged per-snapshot
    count, so the final weights are counts / scale in (0, 1].
    """
    counts_mode = graph.meta.is_weighted and bool(np.all(np.abs(graph.weight) == 1.0))
    if not counts_mode:
        seq = discretize(normalize_weights(graph), T)
        return seq, graph.meta

    seq = discretize(graph, T, _clamp=False)
    scale = max((float(np.max(np.abs(s.w))) for s in seq.snapshots if s.num_edges), default=0.0)
    if scale <= 0:
        raise DataError("cannot fix count scale: no edges after discretization")
    snaps = tuple(
        Snapshot(s.index, s.src, s.dst, s.w / scale, premerge_count=s.premerge_count) for s in seq.snapshots
    )
    meta = replace(graph.meta, weight_scale=scale)
    return SnapshotSequence(snapshots=snaps, bin_width=seq.bin_width, t_min=seq.t_min), meta


def make_windows(seq: SnapshotSequence, n: int) -> list[Window]:
    """One window per target_t in {n, ..., T-1}; members are the n prior bins."""
    if n < 1:
        raise ValueError(f"window size n must be >= 1, got {n}")
    T = len(seq)
    if T <= n:
        raise DataError(f"insufficient snapshots: T={T} <= n={n}")
    windows = []
    for target_t in range(n, T):
        members = seq.snapshots[target_t - n : target_t]
        src = np.concatenate([m.src for m in members])
        dst = np.concatenate([m.dst for m in members])
        w = np.concatenate([m.w for m in members])
        premerge = int(sum(m.num_edges for m in members))
        usrc, udst, uw = _merge_duplicate_pairs(src, dst, w, clamp=True)
        union = Snapshot(index=-1, src=usrc, dst=udst, w=uw, premerge_count=premerge)
        windows.append(Window(target_t=target_t, snapshots=tuple(members), union=union))
    return windows


def signed_subgraphs(union: Snapshot) -> tuple[Subgraph, Subgraph]:
    """Partition a union graph's edges by sign; both halves keep all nodes."""
    nodes = union.node_ids
    pos = union.w > 0
    neg = ~pos
    positive = Subgraph(src=union.src[pos], dst=union.dst[pos], w=union.w[pos], nodes=nodes)
    negative = Subgraph(src=union.src[neg], dst=union.dst[neg], w=union.w[neg], nodes=nodes)
    return positive, negative


def dump_snapshots(seq: SnapshotSequence, path) -> None:
    """Write a line-oriented dump ``t,src,dst,normalized_weight`` for debugging."""
    with open(path, "w", encoding="utf-8") as fh:
        for snap in seq.snapshots:
            for s, d, w in zip(snap.src, snap.dst, snap.w):
                fh.write(f"{snap.index},{s},{d},{w:.10g}\n")
