import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from diagnosis import numerics
from diagnosis.errors import DimensionMismatch
from simulation.blockage import (
    BlockagePattern,
    gen_blockage,
    gen_joint_blockage,
    pattern_from_params,
    truth_q,
)
from simulation.channel import ArrayGeometry, gen_ula_channel
from simulation.sounding import (
    PHASE_ALPHABET,
    build_joint_operator,
    gen_precoder,
    measure_joint,
    measure_tx,
    noise_var_from_snr,
    sound_joint,
    sound_tx,
)


class TestPrecoder:
    def test_alphabet(self, rng):
        F = gen_precoder(30, 16, rng)
        assert F.shape == (30, 16)
        assert np.all(np.isin(F, PHASE_ALPHABET))
        assert_allclose(np.abs(F) ** 2, 2.0)

    def test_rows_are_a_prefix_across_k(self):
        F30 = gen_precoder(30, 100, np.random.default_rng(2))
        F50 = gen_precoder(50, 100, np.random.default_rng(2))
        assert_array_equal(F30, F50[:30])

    def test_invalid_dimensions(self, rng):
        with pytest.raises(ValueError):
            gen_precoder(0, 4, rng)

    def test_symbols_are_equiprobable(self):
        F = gen_precoder(1000, 100, np.random.default_rng(11))
        n = F.size
        bound = 4 * np.sqrt(0.25 * 0.75 / n)
        for symbol in PHASE_ALPHABET:
            assert abs(np.mean(F == symbol) - 0.25) < bound


class TestMeasurements:
    def test_noise_variance(self):
        assert noise_var_from_snr(10.0) == pytest.approx(0.1)
        assert noise_var_from_snr(0.0) == 1.0

    def test_noiseless_tx(self, geom, upa_channel_10x10, rng):
        pattern = gen_blockage(geom, 0.1, "partial", rng)
        sounding = sound_tx(upa_channel_10x10, pattern, 50, 0.0, rng, rng)
        assert sounding.n_measurements == 50
        assert not sounding.is_joint
        assert sounding.operator is sounding.precoders
        assert_allclose(sounding.y, sounding.precoders @ truth_q(upa_channel_10x10, pattern))

    def test_noise_level(self, geom, upa_channel_10x10, rng):
        pattern = gen_blockage(geom, 0.0, "partial", rng)
        F = gen_precoder(10000, 100, rng)
        y = measure_tx(upa_channel_10x10, pattern, F, 0.5, rng)
        assert np.mean(np.abs(y) ** 2) == pytest.approx(0.5, rel=0.05)

    def test_noiseless_tx_is_linear_in_q(self, upa_channel_10x10):
        F = gen_precoder(40, 100, np.random.default_rng(4))
        first = pattern_from_params(100, [3, 4, 13, 14], [0.2, 0.5, 0.0, 0.9], [0.3, 1.0, 0.0, 4.0], "partial")
        second = pattern_from_params(100, [70, 80], [0.6, 0.1], [2.0, 5.5], "partial")
        union = pattern_from_params(
            100, [3, 4, 13, 14, 70, 80],
            [0.2, 0.5, 0.0, 0.9, 0.6, 0.1], [0.3, 1.0, 0.0, 4.0, 2.0, 5.5], "partial",
        )

        def measure(pattern):
            return measure_tx(upa_channel_10x10, pattern, F, 0.0, np.random.default_rng(0))

        assert_allclose(measure(union), measure(first) + measure(second), atol=1e-12)

        alpha = -2.5
        scaled = BlockagePattern(
            mode="partial", b=1 + alpha * (first.b - 1), support=first.support,
            tau=first.tau, psi=first.psi,
        )
        assert_allclose(measure(scaled), alpha * measure(first), atol=1e-12)

    def test_tx_dimension_mismatch(self, geom, upa_channel_10x10, rng):
        pattern = gen_blockage(geom, 0.1, "partial", rng)
        with pytest.raises(DimensionMismatch):
            measure_tx(upa_channel_10x10, pattern, gen_precoder(5, 99, rng), 0.0, rng)


class TestJointSounding:
    def test_operator_rows(self, rng):
        F = gen_precoder(7, 5, rng)
        W = gen_precoder(7, 3, rng)
        U = build_joint_operator(F, W)
        assert U.shape == (7, 15)
        for k in range(7):
            assert_array_equal(U[k], numerics.kron_row(F[k], W[k]))

    def test_matrix_and_kronecker_forms_agree(self):
        g_t, g_r = ArrayGeometry.ula(10), ArrayGeometry.ula(10)
        for seed in range(20):
            rng = np.random.default_rng(seed)
            H = gen_ula_channel(g_r, g_t, 10, rng).H
            pattern = gen_joint_blockage(g_t, g_r, 0.1, "partial", rng)
            sounding = sound_joint(H, pattern, 50, 0.0, rng, rng, rng)
            assert sounding.is_joint
            expected = sounding.operator @ truth_q(H, pattern)
            scale = max(1.0, np.linalg.norm(expected))
            assert np.max(np.abs(sounding.y - expected)) < 1e-12 * scale

    def test_measure_joint(self, rng):
        g_t, g_r = ArrayGeometry.ula(6), ArrayGeometry.ula(4)
        H = gen_ula_channel(g_r, g_t, 3, rng).H
        pattern = gen_joint_blockage(g_t, g_r, 0.25, "partial", rng)
        F, W = gen_precoder(12, 6, rng), gen_precoder(12, 4, rng)
        y, U = measure_joint(H, pattern, F, W, 0.0, rng)
        assert U.shape == (12, 24)
        assert_allclose(y, U @ truth_q(H, pattern), atol=1e-12)
        with pytest.raises(DimensionMismatch):
            measure_joint(H, pattern, F[:, :5], W, 0.0, rng)

    def test_operator_mismatch(self, rng):
        with pytest.raises(DimensionMismatch):
            build_joint_operator(gen_precoder(4, 3, rng), gen_precoder(5, 3, rng))
