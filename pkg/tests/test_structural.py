import numpy as np
import pytest
import scipy.sparse as sp

from trilink.graph import Snapshot, Window
from trilink.structural import (
    balance_features,
    multihop_cumulative,
    signed_transition,
    simple_weight_sums,
    structural_block,
    temporal_diff,
)


def snap(src, dst, w, index=0):
    return Snapshot(index, np.asarray(src), np.asarray(dst), np.asarray(w, dtype=float))


IDS3 = np.array([0, 1, 2])


class TestSignedTransition:
    def test_row_normalization(self):
        P = signed_transition(snap([0, 0], [1, 2], [0.5, -0.5]), IDS3).P.toarray()
        assert np.allclose(P[0], [0, 0.5, -0.5])

    def test_sink_row_is_zero(self):
        P = signed_transition(snap([0], [1], [0.3]), IDS3).P.toarray()
        assert np.all(P[1] == 0) and np.all(P[2] == 0)

    def test_single_negative_edge(self):
        P = signed_transition(snap([0], [1], [-1.0]), IDS3).P.toarray()
        assert P[0, 1] == -1.0

    def test_row_abs_sums_one_or_zero(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            m = rng.integers(2, 25)
            e = rng.integers(1, 60)
            src, dst = rng.integers(0, m, e), rng.integers(0, m, e)
            w = rng.uniform(-1, 1, e)
            w[w == 0] = 0.1
            s, d, ww = [], [], []
            seen = set()
            for a, b, c in zip(src, dst, w):  # unique pairs like real snapshots
                if (a, b) not in seen:
                    seen.add((a, b))
                    s.append(a), d.append(b), ww.append(c)
            P = signed_transition(snap(s, d, ww), np.arange(m)).P
            sums = np.abs(P).sum(axis=1).A1
            assert np.all((np.abs(sums - 1) < 1e-9) | (sums == 0))


class TestMultihop:
    def test_h1_is_P(self):
        P = signed_transition(snap([0, 0], [1, 2], [0.5, -0.5]), IDS3)
        S = multihop_cumulative(P, 1)
        assert np.allclose(S.toarray(), P.P.toarray())

    def test_nilpotent_second_hop(self):
        # b and c are sinks, so P^2 = 0 and S^2 = P
        P = signed_transition(snap([0, 0], [1, 2], [0.5, -0.5]), IDS3)
        S = multihop_cumulative(P, 2)
        assert np.allclose(S.toarray(), P.P.toarray())

    def test_invalid_h(self):
        P = signed_transition(snap([0], [1], [1.0]), IDS3)
        with pytest.raises(ValueError):
            multihop_cumulative(P, 0)

    def test_matches_dense_oracle(self):
        # acceptance: 200 random graphs vs brute-force dense powers
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(200):
            m = int(rng.integers(2, 21))
            h = int(rng.integers(1, 6))
            e = int(rng.integers(1, m * m))
            src, dst = rng.integers(0, m, e), rng.integers(0, m, e)
            w = rng.uniform(-1, 1, e)
            w[w == 0] = 0.3
            s, d, ww = [], [], []
            seen = set()
            for a, b, c in zip(src, dst, w):
                if (a, b) not in seen:
                    seen.add((a, b))
                    s.append(a), d.append(b), ww.append(c)
            P = signed_transition(snap(s, d, ww), np.arange(m))
            S = multihop_cumulative(P, h).toarray()
            dense = P.P.toarray()
            expected = np.zeros_like(dense)
            for k in range(1, h + 1):
                expected += np.linalg.matrix_power(dense, k)
            worst = max(worst, float(np.max(np.abs(S - expected))))
        assert worst < 1e-9

    def test_dense_fallback_used_on_full_graphs(self):
        m = 8
        src, dst = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
        keep = src.ravel() != dst.ravel()
        P = signed_transition(snap(src.ravel()[keep], dst.ravel()[keep], np.ones(keep.sum())), np.arange(m))
        S = multihop_cumulative(P, 4)
        dense = P.P.toarray()
        expected = sum(np.linalg.matrix_power(dense, k) for k in range(1, 5))
        assert np.allclose(S.toarray(), expected, atol=1e-9)


class TestBalance:
    def test_hand_example(self):
        S = sp.csr_matrix(np.array([[0.5, -0.5], [0.0, 0.0]]))
        bf = balance_features(S, 2)
        assert bf.r_plus[0] == pytest.approx(1.0)
        assert bf.r_minus[0] == pytest.approx(1.0)
        assert bf.b[0] == pytest.approx(0.0)
        assert bf.a[0] == pytest.approx(2.0)

    def test_all_positive_row(self):
        S = sp.csr_matrix(np.array([[0.5, 0.5]]))
        bf = balance_features(S, 1)
        assert bf.r_minus[0] == pytest.approx(0.0)
        assert bf.b[0] == pytest.approx(1.0)

    def test_isolated_node_all_zero(self):
        S = sp.csr_matrix((3, 3))
        bf = balance_features(S, 1)
        assert np.all(bf.matrix == 0)

    def test_bounds_and_identities_property(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            m = int(rng.integers(1, 15))
            S = sp.csr_matrix(rng.uniform(-1, 1, (m, m)) * (rng.random((m, m)) < 0.4))
            bf = balance_features(S, 2)
            assert np.all(bf.b >= -1) and np.all(bf.b <= 1)
            assert np.all(bf.r_plus >= 0) and np.all(bf.r_minus >= 0)
            sigma = np.asarray(S.sum(axis=1)).ravel()
            alpha = np.asarray(np.abs(S).sum(axis=1)).ravel()
            assert np.allclose(bf.r_plus - bf.r_minus, 2 * sigma, atol=1e-9)
            assert np.allclose(bf.r_plus + bf.r_minus, 2 * alpha, atol=1e-9)
            assert np.allclose(bf.a, bf.r_plus + bf.r_minus)
            assert bf.b[bf.a == 0].size == 0 or np.all(bf.b[bf.a == 0] == 0)


class TestTemporalDiff:
    def test_positive_in_weight_change(self):
        prev = snap([1], [0], [0.1])
        curr = snap([1], [0], [0.3], index=1)
        d = temporal_diff(curr, prev, IDS3).matrix
        assert np.allclose(d[0], [0.2, 0, 0, 0])
        assert np.allclose(d[1], [0, 0.2, 0, 0])

    def test_identical_snapshots_zero(self):
        s = snap([0, 1], [1, 2], [0.5, -0.4])
        d = temporal_diff(s, s, IDS3).matrix
        assert np.all(d == 0)

    def test_negative_edge_magnitude_convention(self):
        curr = snap([1], [0], [-0.4])
        d = temporal_diff(curr, None, IDS3).matrix
        assert np.allclose(d[0], [0, 0, 0.4, 0])  # a receives 0.4 of negative in-weight
        assert np.allclose(d[1], [0, 0, 0, 0.4])

    def test_none_prev_means_zero_baseline(self):
        curr = snap([0], [1], [0.5])
        d = temporal_diff(curr, None, IDS3).matrix
        assert np.allclose(d[0], [0, 0.5, 0, 0])

    def test_identical_random_snapshots_property(self):
        rng = np.random.default_rng(13)
        for _ in range(1000):
            m = int(rng.integers(2, 12))
            e = int(rng.integers(1, 20))
            s = snap(rng.integers(0, m, e), rng.integers(0, m, e), rng.uniform(-1, 1, e))
            d = temporal_diff(s, s, np.arange(m)).matrix
            assert np.all(d == 0)


class TestStructuralBlock:
    def window(self, n=3):
        snaps = tuple(
            snap([0, 1], [1, 2], [0.5 * (i + 1) / n, -0.25], index=i) for i in range(n)
        )
        src = np.concatenate([s.src for s in snaps])
        dst = np.concatenate([s.dst for s in snaps])
        w = np.concatenate([s.w for s in snaps])
        union = Snapshot(-1, src[:2], dst[:2], w[:2])
        return Window(target_t=n, snapshots=snaps, union=union)

    def test_shape_and_width(self):
        w = self.window(3)
        block = structural_block(w, 2, IDS3)
        assert block.shape == (3, 3, 8)
        # 8 + 128-dim semantic = 136 encoder input at reference settings
        assert block.shape[2] + 128 == 136

    def test_empty_snapshot_gives_zero_matrix(self):
        empty = snap([], [], [], index=0)
        other = snap([0], [1], [0.5], index=1)
        union = Snapshot(-1, other.src, other.dst, other.w)
        w = Window(target_t=2, snapshots=(empty, other), union=union)
        block = structural_block(w, 2, np.array([0, 1]))
        assert np.all(block[0, :, :4] == 0)

    def test_first_snapshot_zero_baseline_vs_outside(self):
        w = self.window(2)
        prev = snap([0], [1], [0.5], index=-1)
        z = structural_block(w, 1, IDS3)
        p = structural_block(w, 1, IDS3, prev_outside=prev)
        assert not np.allclose(z[0, :, 4:], p[0, :, 4:])
        assert np.allclose(z[1], p[1])  # later positions unaffected

    def test_simple_weight_sums(self):
        w = self.window(2)
        block = simple_weight_sums(w, IDS3)
        assert block.shape == (2, 3, 2)
        s0 = w.snapshots[0]
        assert block[0, 1, 0] == pytest.approx(0.25 + 0)  # node1: +0.25 in
        assert block[0, 1, 1] == pytest.approx(0.25)  # node1: |-0.25| out
