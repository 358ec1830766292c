"""
Joint transmitter/receiver CE-AAD for ULA-to-ULA links.

Blockage of receive antenna m or transmit antenna n disturbs entry (m, n) of
Q = H o B - H, so a candidate is a pair of binary vectors (d_r, d_t) whose
support is C(m, n) = d_r(m) OR d_t(n). Probabilities are kept per antenna on
each side.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from diagnosis import numerics
from diagnosis.ce import (
    DiagnosisReport,
    check_problem,
    cross_entropy_search,
    estimate_q,
)
from diagnosis.errors import DimensionMismatch
from simulation.blockage import check_mode, extract_params

logger = logging.getLogger(__name__)


@dataclass
class JointProbability:
    p_t: np.ndarray
    p_r: np.ndarray

    def __post_init__(self):
        for name in ("p_t", "p_r"):
            p = getattr(self, name)
            if np.any(p < 0) or np.any(p > 1):
                raise ValueError("{} entries must lie in [0, 1]".format(name))


@dataclass
class JointCandidate:
    index: int
    d_t: np.ndarray
    d_r: np.ndarray
    mask: np.ndarray
    d: np.ndarray
    support: np.ndarray
    zeta: float = np.inf
    q_sub: Optional[np.ndarray] = None


def init_joint_prob(n_tx, n_rx):
    """1/2 everywhere; a single-antenna side is not diagnosed and stays at 0."""
    p_t = np.full(n_tx, 0.5) if n_tx > 1 else np.zeros(n_tx)
    p_r = np.full(n_rx, 0.5) if n_rx > 1 else np.zeros(n_rx)
    return JointProbability(p_t=p_t, p_r=p_r)


def _draw_side(p, n_candidates, rng):
    # single-antenna sides consume no random draws
    if len(p) == 1:
        return np.zeros((n_candidates, 1), dtype=bool)
    return rng.random((n_candidates, len(p))) < p


def candidates_from_sides(d_t, d_r, start_index=0):
    d_t = np.asarray(d_t, dtype=bool)
    d_r = np.asarray(d_r, dtype=bool)
    masks = d_r[:, :, None] | d_t[:, None, :]
    ds = masks.transpose(0, 2, 1).reshape(len(masks), -1).astype(np.int8)
    return [
        JointCandidate(
            index=start_index + i,
            d_t=d_t[i],
            d_r=d_r[i],
            mask=masks[i],
            d=ds[i],
            support=np.flatnonzero(ds[i]),
        )
        for i in range(len(masks))
    ]


def sample_joint(P, n_candidates, rng):
    d_t = _draw_side(P.p_t, n_candidates, rng)
    d_r = _draw_side(P.p_r, n_candidates, rng)
    return candidates_from_sides(d_t, d_r)


def joint_elite_update(elites, previous=None, alpha=1.0):
    if not elites:
        raise ValueError("elite list is empty")
    p_t = np.mean([e.d_t for e in elites], axis=0)
    p_r = np.mean([e.d_r for e in elites], axis=0)
    if previous is not None and alpha != 1.0:
        p_t = alpha * p_t + (1 - alpha) * previous.p_t
        p_r = alpha * p_r + (1 - alpha) * previous.p_r
    return JointProbability(p_t=p_t, p_r=p_r)


def reconstruct_B(q_hat, H, support):
    """B_hat = Q_hat / H + 1 on the support, 1 elsewhere."""
    n_r, n_t = H.shape
    h = numerics.vec(H)
    # extract_params raises ChannelNull on vanishing channel entries
    params = extract_params(q_hat, h, support)
    b = np.ones(n_r * n_t, dtype=np.complex128)
    b[support] = q_hat[support] / h[support] + 1
    return numerics.ivec(b, n_r, n_t), params


def run_joint_ce_aad(y, U, H, ce_config, rng, method="ce-aad"):
    """
    Joint diagnosis from y = U vec(Q) + n, with H the N_r x N_t healthy
    channel. Block dimensions of `ce_config` are not used here.
    """
    H = numerics.as_cmat(H, "H")
    n_r, n_t = H.shape
    h = numerics.vec(H)
    y, U, h = check_problem(y, U, h)
    check_mode(ce_config.mode)
    if U.shape[1] != n_r * n_t:
        raise DimensionMismatch(
            "U has {} columns for a {}x{} channel".format(U.shape[1], n_r, n_t)
        )

    best, trace = cross_entropy_search(
        y, U, h, ce_config, rng,
        state=init_joint_prob(n_t, n_r),
        sample=sample_joint,
        update=lambda elites, state, alpha: joint_elite_update(elites, state, alpha),
        probabilities=lambda state: np.concatenate([state.p_t, state.p_r]),
    )

    support = best.support
    q_hat = estimate_q(y, U, h, support, ce_config.mode)
    B_hat, params = reconstruct_B(q_hat, H, support)
    report = DiagnosisReport(
        method=method,
        support=support,
        q_hat=q_hat,
        params=params,
        b_hat=numerics.vec(B_hat),
        best_zeta=best.zeta,
        trace=trace,
        B_hat=B_hat,
        tx_support=np.flatnonzero(best.d_t),
        rx_support=np.flatnonzero(best.d_r),
    )
    logger.debug(
        "{}: {} tx and {} rx antennas flagged".format(
            method, len(report.tx_support), len(report.rx_support)
        )
    )
    return report
