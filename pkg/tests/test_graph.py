import numpy as np
import pytest

from trilink.graph import (
    DataError,
    DatasetMeta,
    TemporalGraph,
    discretize,
    load_edge_csv,
    make_windows,
    normalize_weights,
    prepare_snapshots,
    signed_subgraphs,
)


def write(tmp_path, text, name="edges.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoad:
    def test_csv_line_fields(self, tmp_path):
        g = load_edge_csv(write(tmp_path, "7188,1,10,1407470400\n"))
        e = next(g.edges())
        assert (e.source, e.target, e.weight, e.sign, e.timestamp) == (7188, 1, 10.0, 1, 1407470400.0)

    def test_negative_weight_sign(self, tmp_path):
        g = load_edge_csv(write(tmp_path, "3,5,-2,100.0\n"))
        e = next(g.edges())
        assert e.sign == -1 and e.weight == -2.0

    def test_events_line(self, tmp_path):
        g = load_edge_csv(write(tmp_path, "582 364 0\n", name="events.txt"))
        e = next(g.edges())
        assert (e.weight, e.sign, e.timestamp) == (1.0, 1, 0.0)
        assert g.meta.is_weighted and not g.meta.is_signed

    def test_zero_weight_rejected_with_count(self, tmp_path):
        g = load_edge_csv(write(tmp_path, "1,2,0,10\n2,3,1,20\n3,4,0,30\n"))
        assert g.num_edges == 1
        assert g.dropped_zero_weight == 2

    def test_malformed_line_names_line_number(self, tmp_path):
        with pytest.raises(DataError, match="line 2"):
            load_edge_csv(write(tmp_path, "1,2,3,4\n1,2,oops,4\n"))

    def test_wrong_field_count_names_line(self, tmp_path):
        with pytest.raises(DataError, match="line 1"):
            load_edge_csv(write(tmp_path, "1,2,3\n"))

    def test_empty_file_errors(self, tmp_path):
        with pytest.raises(DataError, match="no usable edges"):
            load_edge_csv(write(tmp_path, ""))

    def test_missing_file_errors(self, tmp_path):
        with pytest.raises(DataError, match="no such dataset"):
            load_edge_csv(tmp_path / "absent.csv")

    def test_meta_inference_signed_weighted(self, tmp_path):
        g = load_edge_csv(write(tmp_path, "1,2,5,0\n2,3,-1,1\n"))
        assert g.meta.is_signed and g.meta.is_weighted and g.meta.weight_scale == 5.0

    def test_meta_inference_unit_csv_is_unweighted(self, tmp_path):
        g = load_edge_csv(write(tmp_path, "1,2,1,0\n2,3,-1,1\n"))
        assert g.meta.is_signed and not g.meta.is_weighted

    def test_bitcoinalpha_reference_stats(self, dataset_path):
        g = load_edge_csv(dataset_path("bitcoinalpha"))
        assert g.num_nodes == 3783
        assert g.num_edges == 24168
        assert g.num_positive == 22650
        assert g.num_negative == 1518


class TestNormalize:
    def test_division(self, tmp_path):
        g = load_edge_csv(write(tmp_path, "1,2,10,0\n2,3,-2,5\n"))
        ng = normalize_weights(g)
        assert ng.weight[0] == 1.0
        assert ng.weight[1] == -0.2
        assert ng.meta.weight_scale == 10.0  # kept for de-normalization

    def test_round_trip(self):
        rng = np.random.default_rng(0)
        w = rng.integers(1, 11, 500) * np.where(rng.random(500) < 0.1, -1, 1)
        g = TemporalGraph(
            rng.integers(0, 50, 500),
            rng.integers(0, 50, 500),
            w.astype(float),
            rng.uniform(0, 100, 500),
            DatasetMeta(True, True, float(np.abs(w).max()), "rt"),
        )
        ng = normalize_weights(g)
        assert np.all(np.abs(ng.weight) <= 1.0)
        recovered = ng.weight * ng.meta.weight_scale
        assert np.max(np.abs(recovered - g.weight) / np.abs(g.weight)) < 1e-9

    def test_counts_scale_fixed_after_discretization(self, dataset_path):
        # independent oracle: bin events by hand, count per-pair-per-bin,
        # and check the pipeline scale equals the max merged count
        g = load_edge_csv(dataset_path("email-Eu"), fmt="events")
        T = 100
        span = g.timestamp.max() - g.timestamp.min()
        width = span / T
        bins = np.minimum(((g.timestamp - g.timestamp.min()) / width).astype(int), T - 1)
        key = bins * 10_000_000_000 + g.source * 100_000 + g.target
        _, counts = np.unique(key, return_counts=True)
        expected_scale = float(counts.max())
        assert expected_scale > 1  # the dataset does aggregate events

        seq, meta = prepare_snapshots(g, T)
        assert meta.weight_scale == expected_scale
        merged = np.concatenate([s.w for s in seq.snapshots])
        assert np.isclose(merged.max(), 1.0)
        # a pair merged to count c has weight c / scale
        assert np.isclose(np.sort(np.unique(merged))[0], np.sort(np.unique(counts))[0] / expected_scale)


class TestDiscretize:
    def graph_with_timestamps(self, ts):
        ts = np.asarray(ts, dtype=float)
        n = ts.size
        return TemporalGraph(
            np.arange(n) % 7,
            (np.arange(n) % 7) + 7,
            np.ones(n),
            ts,
            DatasetMeta(False, False, 1.0, "ts"),
        )

    def test_bin_width_and_assignment(self):
        g = self.graph_with_timestamps(np.arange(100))
        seq = discretize(g, 10)
        assert seq.bin_width == pytest.approx(9.9)
        # edge at ts 25 -> floor(25/9.9) = 2
        g2 = self.graph_with_timestamps([0, 25, 99])
        seq2 = discretize(g2, 10)
        assert seq2[2].premerge_count == 1

    def test_t_max_clamped_to_last_bin(self):
        g = self.graph_with_timestamps([0, 50, 100])
        seq = discretize(g, 10)
        assert seq[9].premerge_count == 1  # the ts == t_max edge

    def test_merge_by_sum(self):
        g = TemporalGraph(
            np.array([1, 1]),
            np.array([2, 2]),
            np.array([0.3, 0.4]),
            np.array([0.0, 1.0]),
            DatasetMeta(False, True, 1.0, "m"),
        )
        seq = discretize(g, 1)
        assert seq[0].num_edges == 1
        assert seq[0].w[0] == pytest.approx(0.7)

    def test_merged_zero_dropped(self):
        g = TemporalGraph(
            np.array([1, 1]),
            np.array([2, 2]),
            np.array([0.5, -0.5]),
            np.array([0.0, 1.0]),
            DatasetMeta(True, True, 1.0, "z"),
        )
        seq = discretize(g, 1)
        assert seq[0].num_edges == 0

    def test_merge_clamps_to_unit_interval(self):
        g = TemporalGraph(
            np.array([1, 1]),
            np.array([2, 2]),
            np.array([0.8, 0.8]),
            np.array([0.0, 1.0]),
            DatasetMeta(False, True, 1.0, "c"),
        )
        seq = discretize(g, 1)
        assert seq[0].w[0] == 1.0

    def test_partition_completeness(self, toy_graph):
        seq = discretize(toy_graph, 13)
        assert sum(s.premerge_count for s in seq.snapshots) == toy_graph.num_edges

    def test_invalid_T(self, toy_graph):
        with pytest.raises(ValueError):
            discretize(toy_graph, 0)


class TestWindows:
    def seq(self, T):
        ts = np.arange(T * 3, dtype=float)
        n = ts.size
        g = TemporalGraph(
            np.arange(n) % 5,
            (np.arange(n) % 5) + 5,
            np.ones(n) * 0.5,
            ts,
            DatasetMeta(False, True, 1.0, "w"),
        )
        return discretize(g, T)

    def test_count_and_coverage(self):
        seq = self.seq(100)
        windows = make_windows(seq, 10)
        assert len(windows) == 90
        first = windows[0]
        assert first.target_t == 10
        assert [s.index for s in first.snapshots] == list(range(10))
        assert windows[-1].target_t == 99

    def test_single_snapshot_windows(self):
        seq = self.seq(5)
        windows = make_windows(seq, 1)
        assert len(windows) == 4
        assert all(w.n == 1 for w in windows)

    def test_insufficient_snapshots(self):
        seq = self.seq(5)
        with pytest.raises(DataError, match="insufficient"):
            make_windows(seq, 5)

    def test_union_merges_like_snapshots(self):
        g = TemporalGraph(
            np.array([1, 1, 2]),
            np.array([2, 2, 3]),
            np.array([0.3, 0.4, -0.2]),
            np.array([0.0, 1.1, 1.5]),
            DatasetMeta(True, True, 1.0, "u"),
        )
        seq = discretize(g, 2)
        windows = make_windows(seq, 1)
        # window targeting t=1 holds only snapshot 0
        w0 = windows[0]
        assert w0.union.num_edges == 1
        assert w0.union.w[0] == pytest.approx(0.3)

    def test_window_count_property(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            T = int(rng.integers(2, 40))
            n = int(rng.integers(1, T))
            seq = self.seq(T)
            assert len(make_windows(seq, n)) == T - n


class TestSignedSubgraphs:
    def test_partition(self):
        from trilink.graph import Snapshot

        union = Snapshot(0, np.array([1, 2, 3]), np.array([2, 3, 4]), np.array([0.5, -0.3, 1.0]))
        pos, neg = signed_subgraphs(union)
        assert pos.num_edges == 2 and neg.num_edges == 1
        assert pos.num_edges + neg.num_edges == union.num_edges
        assert np.array_equal(pos.nodes, union.node_ids)
        assert np.array_equal(neg.nodes, union.node_ids)

    def test_all_positive(self):
        from trilink.graph import Snapshot

        union = Snapshot(0, np.array([1, 2]), np.array([2, 3]), np.array([0.5, 0.7]))
        _, neg = signed_subgraphs(union)
        assert neg.num_edges == 0

    def test_unsigned_dataset_negative_always_empty(self, dataset_path):
        g = load_edge_csv(dataset_path("email-Eu"), fmt="events")
        seq, _ = prepare_snapshots(g, 50)
        for w in make_windows(seq, 5)[:10]:
            _, neg = signed_subgraphs(w.union)
            assert neg.num_edges == 0

    def test_sign_partition_counts_on_real_scale_data(self, dataset_path):
        g = load_edge_csv(dataset_path("bitcoinalpha"))
        seq, _ = prepare_snapshots(g, 40)
        for w in make_windows(seq, 4)[:5]:
            pos, neg = signed_subgraphs(w.union)
            assert pos.num_edges + neg.num_edges == w.union.num_edges
