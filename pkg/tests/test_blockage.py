import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from diagnosis import numerics
from diagnosis.errors import ChannelNull, InvalidProbability
from simulation.blockage import (
    blocked_count,
    cluster_cells,
    cluster_shapes,
    extract_params,
    gen_blockage,
    gen_joint_blockage,
    reconstruct_b,
    truth_q,
)
from simulation.channel import ArrayGeometry, gen_ula_channel, gen_upa_channel


def footprint(support, n_x):
    rows, cols = support % n_x, support // n_x
    return (rows.max() - rows.min() + 1, cols.max() - cols.min() + 1)


class TestCounts:
    @pytest.mark.parametrize(
        "p_b, n, expected", [(0.1, 100, 10), (0.0, 100, 0), (1.0, 16, 16), (0.25, 10, 3)]
    )
    def test_blocked_count(self, p_b, n, expected):
        assert blocked_count(p_b, n) == expected

    @pytest.mark.parametrize("p_b", [-0.1, 1.5])
    def test_invalid_probability(self, p_b):
        with pytest.raises(InvalidProbability):
            blocked_count(p_b, 10)

    def test_cluster_shapes(self):
        assert cluster_shapes(10, 10, 10) == [(2, 5), (5, 2)]
        assert cluster_shapes(4, 10, 10) == [(2, 2)]
        assert cluster_shapes(7, 10, 10) == [(1, 7), (7, 1)]
        assert cluster_shapes(13, 10, 10) == []

    def test_cluster_without_rectangle(self, rng):
        rows, cols = cluster_cells(13, 10, 10, rng)
        cells = set(zip(rows.tolist(), cols.tolist()))
        assert len(cells) == 13
        assert all(0 <= r < 10 and 0 <= c < 10 for r, c in cells)


class TestGenBlockage:
    def test_partial(self, geom, rng):
        pattern = gen_blockage(geom, 0.1, "partial", rng)
        assert len(pattern.support) == 10
        assert sorted(footprint(pattern.support, 10)) == [2, 5]
        assert np.all((pattern.tau >= 0) & (pattern.tau < 1))
        assert np.all((pattern.psi >= 0) & (pattern.psi < 2 * np.pi))
        assert_allclose(pattern.b[pattern.support], pattern.tau * np.exp(1j * pattern.psi))
        healthy = np.setdiff1d(np.arange(100), pattern.support)
        assert_array_equal(pattern.b[healthy], 1)

    def test_complete(self, geom, rng):
        pattern = gen_blockage(geom, 0.1, "complete", rng)
        assert_array_equal(pattern.tau, 0)
        assert_array_equal(pattern.psi, 0)
        assert_array_equal(pattern.b[pattern.support], 0)

    def test_same_support_in_both_modes(self, geom):
        partial = gen_blockage(geom, 0.1, "partial", np.random.default_rng(3))
        complete = gen_blockage(geom, 0.1, "complete", np.random.default_rng(3))
        assert_array_equal(partial.support, complete.support)

    def test_no_blockage(self, geom, rng):
        pattern = gen_blockage(geom, 0.0, "partial", rng)
        assert len(pattern.support) == 0
        assert_array_equal(pattern.b, 1)

    def test_aligned_origin(self, geom):
        for seed in range(20):
            pattern = gen_blockage(geom, 0.04, "complete", np.random.default_rng(seed), align=(2, 2))
            rows, cols = pattern.support % 10, pattern.support // 10
            assert rows.min() % 2 == 0 and cols.min() % 2 == 0
            assert footprint(pattern.support, 10) == (2, 2)

    def test_aligned_cluster_tiles_blocks(self, geom):
        for seed in range(20):
            pattern = gen_blockage(geom, 0.1, "partial", np.random.default_rng(seed), align=(2, 1))
            rows = pattern.support % 10
            assert rows.min() % 2 == 0
            assert footprint(pattern.support, 10) == (2, 5)

    def test_ula_run(self, rng):
        pattern = gen_blockage(ArrayGeometry.ula(10), 0.3, "partial", rng)
        assert np.all(np.diff(pattern.support) == 1)

    def test_unknown_mode(self, geom, rng):
        with pytest.raises(ValueError):
            gen_blockage(geom, 0.1, "sideways", rng)


class TestRecovery:
    def test_exact_support_roundtrip(self, geom):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            H = gen_upa_channel(geom, 10, rng).H
            pattern = gen_blockage(geom, 0.1, "partial", rng)
            q = truth_q(H, pattern)
            b_hat = reconstruct_b(q, numerics.vec(H), pattern.support)
            assert np.max(np.abs(b_hat - pattern.b)) <= 1e-10

    def test_extract_params(self, geom, upa_channel_10x10, rng):
        pattern = gen_blockage(geom, 0.1, "partial", rng)
        q = truth_q(upa_channel_10x10, pattern)
        params = extract_params(q, numerics.vec(upa_channel_10x10), pattern.support)
        assert [n for n, _, _ in params] == pattern.support.tolist()
        assert_allclose([t for _, t, _ in params], pattern.tau, atol=1e-10)
        assert_allclose([p for _, _, p in params], pattern.psi, atol=1e-10)

    def test_complete_params(self, geom, upa_channel_10x10, rng):
        pattern = gen_blockage(geom, 0.1, "complete", rng)
        h = numerics.vec(upa_channel_10x10)
        params = extract_params(truth_q(upa_channel_10x10, pattern), h, pattern.support)
        assert all(tau < 1e-12 for _, tau, _ in params)

    def test_channel_null(self):
        h = np.array([1.0, 0.0, 2.0], dtype=complex)
        with pytest.raises(ChannelNull):
            reconstruct_b(np.array([0, -1.0, 0]), h, [1])

    def test_joint_truth(self, rng):
        g_t, g_r = ArrayGeometry.ula(6), ArrayGeometry.ula(4)
        H = gen_ula_channel(g_r, g_t, 5, rng).H
        pattern = gen_joint_blockage(g_t, g_r, 0.3, "partial", rng)
        assert pattern.B.shape == (4, 6)
        assert_allclose(pattern.B, np.outer(pattern.b_r, pattern.b_t))
        assert_allclose(truth_q(H, pattern), numerics.vec(H * pattern.B - H))
