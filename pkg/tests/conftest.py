import json

import numpy as np
import pytest

from diagnosis.ce import CEConfig
from simulation.blockage import pattern_from_params
from simulation.channel import ArrayGeometry, gen_upa_channel


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def geom():
    return ArrayGeometry.upa(10, 10)


@pytest.fixture
def small_solver():
    return CEConfig(n_candidates=60, n_elites=10, n_iterations=5)


def aligned_block_pattern(geom, block_row, block_col, mode="complete", tau=0.0, psi=0.0):
    """Single 2x2 blockage on the block grid of `geom`."""
    rows = 2 * block_row + np.array([0, 1, 0, 1])
    cols = 2 * block_col + np.array([0, 0, 1, 1])
    support = cols * geom.n_x + rows
    return pattern_from_params(
        geom.n_antennas, support, np.full(4, tau), np.full(4, psi), mode
    )


@pytest.fixture
def upa_channel_10x10(geom):
    return gen_upa_channel(geom, 10, np.random.default_rng(7)).H


@pytest.fixture
def write_config(tmp_path):
    def _write(name="tiny", **overrides):
        d = {
            "name": name,
            "scenario": "tx",
            "n_x": 4,
            "n_y": 4,
            "n_paths": 3,
            "p_b": 0.25,
            "mode": "partial",
            "sweep_name": "measurements",
            "sweep_values": [12, 16],
            "snr_db": 10.0,
            "methods": ["ce-aad", "omp", "oracle"],
            "trials": 2,
            "master_seed": 99,
            "solver": {"n_candidates": 30, "n_elites": 5, "n_iterations": 3},
        }
        d.update(overrides)
        path = tmp_path / "{}.json".format(name)
        path.write_text(json.dumps(d))
        return str(path)

    return _write


@pytest.fixture
def block_pattern():
    return aligned_block_pattern
