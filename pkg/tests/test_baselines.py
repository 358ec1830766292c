import dataclasses

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from diagnosis import numerics
from diagnosis.baselines import (
    default_omp_sparsity,
    default_omp_threshold,
    omp,
    oracle_ls,
    plain_ce,
)
from diagnosis.ce import CEConfig, run_ce_aad
from simulation.blockage import truth_q
from simulation.sounding import gen_precoder


def sparse_problem(rng, K=40, N=64, support=(3, 17, 50)):
    F = rng.standard_normal((K, N)) + 1j * rng.standard_normal((K, N))
    q = np.zeros(N, dtype=np.complex128)
    q[list(support)] = rng.standard_normal(len(support)) + 1j * rng.standard_normal(len(support)) + 2
    return F, q


class TestDefaults:
    def test_sparsity(self):
        assert default_omp_sparsity(100) == 25
        assert default_omp_sparsity(10) == 3

    def test_threshold(self):
        assert default_omp_threshold(50, 0.5) == pytest.approx(5.0)
        assert default_omp_threshold(50, 0.0) == 0.0


class TestOMP:
    def test_noiseless_recovery(self, rng):
        F, q = sparse_problem(rng)
        support, q_hat = omp(F @ q, F, residual_tol=1e-9)
        assert support.tolist() == [3, 17, 50]
        assert_allclose(q_hat, q, atol=1e-9)

    def test_zero_measurements(self, rng):
        F, _ = sparse_problem(rng)
        support, q_hat = omp(np.zeros(40), F)
        assert support.size == 0
        assert_array_equal(q_hat, 0)

    def test_atom_cap(self, rng):
        F, q = sparse_problem(rng)
        support, _ = omp(F @ q, F, max_atoms=2)
        assert len(support) == 2

    def test_atoms_capped_by_measurements(self, rng):
        F = rng.standard_normal((4, 30)) + 0j
        support, _ = omp(rng.standard_normal(4) + 0j, F, max_atoms=10)
        assert len(support) <= 4

    def test_greedy_path(self, rng):
        F, q = sparse_problem(rng)
        y = F @ q + 0.1 * (rng.standard_normal(40) + 1j * rng.standard_normal(40))
        previous_support, previous_residual = [], np.inf
        for k in range(1, 11):
            support, q_hat = omp(y, F, max_atoms=k, residual_tol=0.0)
            assert len(support) == k == len(set(support.tolist()))
            assert set(previous_support) < set(support.tolist())
            residual = np.linalg.norm(y - F @ q_hat)
            assert residual <= previous_residual + 1e-12
            previous_support, previous_residual = support.tolist(), residual

    @pytest.mark.slow
    def test_exact_recovery_rate(self):
        hits = 0
        for trial in range(100):
            rng = np.random.default_rng(trial)
            F = gen_precoder(40, 100, rng)
            support = np.sort(rng.choice(100, size=3, replace=False))
            q = np.zeros(100, dtype=np.complex128)
            q[support] = rng.standard_normal(3) + 1j * rng.standard_normal(3) + 2
            found, _ = omp(F @ q, F, residual_tol=1e-9)
            hits += np.array_equal(found, support)
        assert hits >= 90


class TestOracle:
    def test_exact_on_true_support(self, rng):
        F, q = sparse_problem(rng)
        assert_allclose(oracle_ls(F @ q, F, [3, 17, 50]), q, atol=1e-10)

    def test_empty_support(self, rng):
        F, _ = sparse_problem(rng)
        assert_array_equal(oracle_ls(np.ones(40), F, []), 0)


class TestPlainCE:
    def test_one_probability_per_antenna(self, geom, upa_channel_10x10, block_pattern, small_solver):
        pattern = block_pattern(geom, 1, 1, mode="partial", tau=0.5)
        F = gen_precoder(40, 100, np.random.default_rng(0))
        y = F @ truth_q(upa_channel_10x10, pattern)
        report = plain_ce(y, F, numerics.vec(upa_channel_10x10), small_solver,
                          np.random.default_rng(0), geom)
        assert report.method == "plain-ce"
        assert report.trace[0].probabilities.shape == (10, 10)
        assert small_solver.block_rows == 2

    def test_complete_block_noiseless(self, geom, upa_channel_10x10, block_pattern):
        pattern = block_pattern(geom, 2, 2, mode="complete")
        F = gen_precoder(60, 100, np.random.default_rng(3))
        y = F @ truth_q(upa_channel_10x10, pattern)
        report = plain_ce(y, F, numerics.vec(upa_channel_10x10), CEConfig(mode="complete"),
                          np.random.default_rng(3), geom)
        assert_array_equal(report.support, pattern.support)
        assert_allclose(report.b_hat, pattern.b, atol=1e-9)

    def test_matches_unit_block_search(self, geom, upa_channel_10x10, block_pattern, small_solver):
        pattern = block_pattern(geom, 3, 0, mode="partial", tau=0.3, psi=1.0)
        F = gen_precoder(40, 100, np.random.default_rng(5))
        y = F @ truth_q(upa_channel_10x10, pattern)
        h = numerics.vec(upa_channel_10x10)
        plain = plain_ce(y, F, h, small_solver, np.random.default_rng(8), geom)
        unit = dataclasses.replace(small_solver, block_rows=1, block_cols=1)
        ce = run_ce_aad(y, F, h, unit, np.random.default_rng(8), geom)
        assert_array_equal(plain.support, ce.support)
        assert_array_equal(plain.q_hat, ce.q_hat)
        assert plain.best_zeta == ce.best_zeta
        assert [r.best_zeta for r in plain.trace] == [r.best_zeta for r in ce.trace]
