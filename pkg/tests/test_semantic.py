import numpy as np
import pytest

from trilink.graph import Snapshot, Subgraph, Window
from trilink.semantic import (
    SkipGramConfig,
    WalkConfig,
    generate_walks,
    train_skipgram,
    transition_distribution,
    window_embedding,
)


def sub(src, dst, w, nodes=None):
    src, dst, w = np.asarray(src), np.asarray(dst), np.asarray(w, dtype=float)
    if nodes is None:
        nodes = np.unique(np.concatenate([src, dst])) if src.size else np.empty(0, np.int64)
    return Subgraph(src=src, dst=dst, w=w, nodes=np.asarray(nodes))


class TestTransitionDistribution:
    def test_absolute_weight_proportions(self):
        s = sub([1, 1], [2, 3], [0.2, -0.3])
        probs = transition_distribution(1, s)
        assert probs[2] == pytest.approx(0.4)
        assert probs[3] == pytest.approx(0.6)

    def test_single_neighbor(self):
        s = sub([1], [2], [0.7])
        assert transition_distribution(1, s) == {2: 1.0}

    def test_sink_is_empty(self):
        s = sub([1], [2], [0.7])
        assert transition_distribution(2, s) == {}

    def test_unknown_node_raises(self):
        s = sub([1], [2], [0.7])
        with pytest.raises(KeyError):
            transition_distribution(99, s)

    def test_normalization_property(self):
        rng = np.random.default_rng(0)
        for case in range(1000):
            m = rng.integers(2, 30)
            e = rng.integers(1, 80)
            src = rng.integers(0, m, e)
            dst = rng.integers(0, m, e)
            w = rng.uniform(-1, 1, e)
            w[w == 0] = 0.5
            s = sub(src, dst, w)
            node = int(src[rng.integers(e)])
            probs = transition_distribution(node, s)
            if probs:
                assert abs(sum(probs.values()) - 1.0) < 1e-12


class TestWalks:
    def test_forced_termination_at_sink(self):
        s = sub([1], [2], [0.4])
        walks = generate_walks(s, WalkConfig(num_walks=5, walk_length=10, seed=0))
        from_a = [w for w in walks if w[0] == 1]
        assert len(from_a) == 5
        assert all(w.tolist() == [1, 2] for w in from_a)

    def test_walk_count_contract(self):
        rng = np.random.default_rng(1)
        src = rng.integers(0, 100, 400)
        dst = (src + rng.integers(1, 100, 400)) % 100
        s = sub(src, dst, rng.uniform(0.1, 1, 400))
        n_nonisolated = np.unique(np.concatenate([s.src, s.dst])).size
        walks = generate_walks(s, WalkConfig(num_walks=5, walk_length=10, seed=0))
        assert len(walks) == 5 * n_nonisolated

    def test_deterministic_under_seed(self):
        rng = np.random.default_rng(2)
        src = rng.integers(0, 50, 200)
        dst = (src + rng.integers(1, 50, 200)) % 50
        s = sub(src, dst, rng.uniform(0.1, 1, 200))
        w1 = generate_walks(s, WalkConfig(seed=42))
        w2 = generate_walks(s, WalkConfig(seed=42))
        assert len(w1) == len(w2)
        assert all(np.array_equal(a, b) for a, b in zip(w1, w2))
        w3 = generate_walks(s, WalkConfig(seed=43))
        assert any(not np.array_equal(a, b) for a, b in zip(w1, w3))

    def test_empty_subgraph(self):
        s = sub([], [], [])
        assert generate_walks(s, WalkConfig()) == []

    def test_steps_follow_out_edges(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            m = rng.integers(3, 15)
            e = rng.integers(2, 40)
            src = rng.integers(0, m, e)
            dst = rng.integers(0, m, e)
            keep = src != dst
            s = sub(src[keep], dst[keep], rng.uniform(0.1, 1, keep.sum()))
            if s.src.size == 0:
                continue
            edges = set(zip(s.src.tolist(), s.dst.tolist()))
            for walk in generate_walks(s, WalkConfig(num_walks=2, walk_length=6, seed=int(rng.integers(1e6)))):
                for a, b in zip(walk[:-1], walk[1:]):
                    assert (a, b) in edges


class TestSkipGram:
    def test_shape_contract(self):
        walks = [np.array([0, 1, 2]), np.array([2, 3])]
        emb = train_skipgram(walks, SkipGramConfig(dim=8, epochs=1, seed=0), np.arange(10))
        assert emb.shape == (10, 8)
        assert np.all(np.isfinite(emb))

    def test_absent_nodes_zero(self):
        walks = [np.array([0, 1])]
        emb = train_skipgram(walks, SkipGramConfig(dim=8, epochs=1, seed=0), np.arange(5))
        assert np.all(emb[2:] == 0)
        assert np.any(emb[0] != 0)

    def test_empty_corpus_zero_matrix(self):
        emb = train_skipgram([], SkipGramConfig(dim=8, seed=0), np.arange(4))
        assert np.all(emb == 0)

    def test_cooccurrence_drives_similarity(self):
        # oracle: train long enough on a corpus where (a, b) always co-occur
        # and (c, d) always co-occur; a must end up closer to b than to c
        ab = np.array([0, 1] * 5)
        cd = np.array([2, 3] * 5)
        walks = [ab, cd] * 40
        cfg = SkipGramConfig(dim=16, context_window=2, epochs=30, seed=1, batch_size=256)
        emb = train_skipgram(walks, cfg, np.arange(4))

        def cos(u, v):
            return float(u @ v / (np.linalg.norm(u) * np.linalg.norm(v) + 1e-12))

        assert cos(emb[0], emb[1]) > cos(emb[0], emb[2])
        assert cos(emb[0], emb[1]) > cos(emb[0], emb[3])

    def test_deterministic(self):
        walks = [np.array([0, 1, 2, 3, 0, 1])] * 10
        cfg = SkipGramConfig(dim=8, epochs=3, seed=5)
        a = train_skipgram(walks, cfg, np.arange(4))
        b = train_skipgram(walks, cfg, np.arange(4))
        assert np.array_equal(a, b)


class TestWindowEmbedding:
    def make_window(self, src, dst, w):
        union = Snapshot(0, np.asarray(src), np.asarray(dst), np.asarray(w, dtype=float))
        return Window(target_t=5, snapshots=(union,), union=union)

    def test_width_and_halves(self):
        w = self.make_window([1, 2, 3], [2, 3, 1], [0.5, -0.5, 0.8])
        emb = window_embedding(w, WalkConfig(seed=0), SkipGramConfig(dim=64, epochs=1, seed=0))
        assert emb.matrix.shape == (3, 128)

    def test_unsigned_window_last_half_zero(self):
        w = self.make_window([1, 2], [2, 3], [0.5, 0.8])
        emb = window_embedding(w, WalkConfig(seed=0), SkipGramConfig(dim=16, epochs=1, seed=0))
        assert np.all(emb.matrix[:, 16:] == 0)
        assert np.any(emb.matrix[:, :16] != 0)

    def test_node_only_in_negative_subgraph(self):
        # node 9 only touches a negative edge: first half must stay zero
        w = self.make_window([1, 2, 9], [2, 3, 1], [0.5, 0.6, -0.9])
        emb = window_embedding(w, WalkConfig(seed=0), SkipGramConfig(dim=16, epochs=1, seed=0))
        row = np.searchsorted(emb.node_ids, 9)
        assert np.all(emb.matrix[row, :16] == 0)
        assert np.any(emb.matrix[row, 16:] != 0)

    def test_isolated_in_both_is_zero_row(self, toy_setup):
        seq, meta, windows = toy_setup
        w = windows[0]
        universe = np.union1d(w.node_ids, np.array([10_000]))  # node absent everywhere
        emb = window_embedding(w, WalkConfig(seed=0), SkipGramConfig(dim=8, epochs=1, seed=0), universe)
        row = np.searchsorted(universe, 10_000)
        assert np.all(emb.matrix[row] == 0)

    def test_no_nonfinite_values(self, toy_setup):
        seq, meta, windows = toy_setup
        emb = window_embedding(windows[0], WalkConfig(seed=3), SkipGramConfig(dim=8, epochs=2, seed=3))
        assert np.all(np.isfinite(emb.matrix))

    def test_embeddings_deterministic_end_to_end(self, toy_setup):
        seq, meta, windows = toy_setup
        a = window_embedding(windows[1], WalkConfig(seed=9), SkipGramConfig(dim=8, epochs=2, seed=9))
        b = window_embedding(windows[1], WalkConfig(seed=9), SkipGramConfig(dim=8, epochs=2, seed=9))
        assert np.array_equal(a.matrix, b.matrix)
