"""
Comparison recoverers: orthogonal matching pursuit, the oracle least-squares
bound (true support known) and cross-entropy without block structure.
"""

import dataclasses
import logging
import math

import numpy as np

import config
from diagnosis import numerics
from diagnosis.ce import run_ce_aad

logger = logging.getLogger(__name__)


def default_omp_sparsity(n_antennas):
    return int(math.ceil(config.OMP_SPARSITY_RATIO * n_antennas))


def default_omp_threshold(n_measurements, noise_var):
    return math.sqrt(n_measurements * noise_var)


def omp(y, F, max_atoms=None, residual_tol=None):
    """
    Orthogonal matching pursuit.

    Parameters
    ----------
    y : (K,) complex array
    F : (K, N) complex array
    max_atoms : int, optional
        Maximum support size S (capped at K). Defaults to ceil(0.25 N).
    residual_tol : float, optional
        Stop once ||residual||_2 <= residual_tol. Defaults to 0.

    Returns
    -------
    support : sorted int array
    q_hat : (N,) complex array, zero off the support
    """
    y = numerics.as_cvec(y, "y")
    F = numerics.as_cmat(F, "F")
    K, N = F.shape
    S = default_omp_sparsity(N) if max_atoms is None else int(max_atoms)
    S = min(S, K, N)
    rho = 0.0 if residual_tol is None else float(residual_tol)

    norms = np.linalg.norm(F, axis=0)
    norms[norms == 0] = 1.0
    selected = []
    coef = np.zeros(0, dtype=np.complex128)
    residual = y.copy()
    while len(selected) < S and np.linalg.norm(residual) > rho:
        correlation = np.abs(F.conj().T @ residual) / norms
        correlation[selected] = -1.0
        selected.append(int(np.argmax(correlation)))
        coef = numerics.ls_solve(F[:, selected], y)
        residual = y - F[:, selected] @ coef

    q_hat = np.zeros(N, dtype=np.complex128)
    q_hat[selected] = coef
    logger.debug(
        "omp stopped with {} atoms, residual {:.3e}".format(
            len(selected), np.linalg.norm(residual)
        )
    )
    return np.sort(np.asarray(selected, dtype=int)), q_hat


def oracle_ls(y, F, true_support):
    y = numerics.as_cvec(y, "y")
    F = numerics.as_cmat(F, "F")
    support = np.asarray(true_support, dtype=int)
    q_hat = np.zeros(F.shape[1], dtype=np.complex128)
    if len(support):
        q_hat[support] = numerics.ls_solve(F[:, support], y)
    return q_hat


def plain_ce(y, F, h, ce_config, rng, geom):
    """CE-AAD with 1x1 blocks: one probability per antenna."""
    ce_config = dataclasses.replace(ce_config, block_rows=1, block_cols=1)
    return run_ce_aad(y, F, h, ce_config, rng, geom, method="plain-ce")
