import numpy as np
import pytest
import torch

from trilink import synth
from trilink.graph import DatasetMeta, TemporalGraph, make_windows, prepare_snapshots

torch.set_num_threads(1)

DATA_DIR = "data"


@pytest.fixture(scope="session")
def dataset_path():
    """Factory: path to a named stand-in dataset, generated on first use."""

    def _get(name):
        return synth.ensure_dataset(name, DATA_DIR)

    return _get


def build_toy_graph(seed=3, n_nodes=20, n_edges=200, signed=True, span=1000.0):
    """Small two-community trust network used across training-level tests."""
    rng = np.random.default_rng(seed)
    comm = np.arange(n_nodes) % 2
    quality = rng.uniform(0.2, 1.0, n_nodes)
    src = rng.integers(0, n_nodes, n_edges)
    shift = rng.integers(1, n_nodes // 2, n_edges) * 2  # stay in the community
    dst = (src + shift) % n_nodes
    ts = np.sort(rng.uniform(0, span, n_edges))
    sign = np.where(rng.random(n_edges) < quality[dst], 1.0, -1.0) if signed else np.ones(n_edges)
    mag = np.clip(np.rint(10 * quality[dst] * rng.uniform(0.5, 1.0, n_edges)), 1, 10)
    w = sign * mag
    meta = DatasetMeta(is_signed=signed, is_weighted=True, weight_scale=float(np.abs(w).max()), name="toy")
    return TemporalGraph(src, dst, w, ts, meta)


@pytest.fixture(scope="session")
def toy_graph():
    return build_toy_graph()


@pytest.fixture(scope="session")
def toy_setup(toy_graph):
    """(seq, meta, windows) for the toy graph at T=10, n=3."""
    seq, meta = prepare_snapshots(toy_graph, 10)
    windows = make_windows(seq, 3)
    return seq, meta, windows
