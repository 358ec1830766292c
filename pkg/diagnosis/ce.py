"""
Cross-entropy antenna array diagnosis (CE-AAD) for blockages at a UPA
transmitter.

Each iteration samples N_c binary block masks from a block probability
matrix, fits the measurements on every mask's support, scores it with
||y - F_S q_S||_2 + epsilon * |S| and refits the probabilities to the N_e
best masks. The best mask seen over all iterations is the estimate.
"""

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

import config
from diagnosis import numerics
from diagnosis.errors import BlockShapeMismatch, ConfigError, DimensionMismatch
from simulation.blockage import check_mode, extract_params, reconstruct_b

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CEConfig:
    n_candidates: int = config.NB_CANDIDATES
    n_elites: int = config.NB_ELITES
    n_iterations: int = config.NB_ITERATIONS
    epsilon: float = config.EPSILON
    block_rows: int = config.BLOCK_ROWS
    block_cols: int = config.BLOCK_COLS
    mode: str = "partial"
    smoothing_alpha: float = config.SMOOTHING_ALPHA

    def __post_init__(self):
        if not 1 <= self.n_elites <= self.n_candidates:
            raise ConfigError(
                "need 1 <= n_elites <= n_candidates, got {} and {}".format(
                    self.n_elites, self.n_candidates
                )
            )
        if self.n_iterations < 1:
            raise ConfigError("n_iterations must be >= 1")
        if self.epsilon < 0:
            raise ConfigError("epsilon must be >= 0")
        if self.block_rows < 1 or self.block_cols < 1:
            raise ConfigError("block dimensions must be >= 1")
        if not 0 < self.smoothing_alpha <= 1:
            raise ConfigError("smoothing_alpha must lie in (0, 1]")
        if self.mode not in config.BLOCKAGE_MODES:
            raise ConfigError(
                "mode must be one of {}, got {}".format(config.BLOCKAGE_MODES, self.mode)
            )

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError("unknown solver keys: {}".format(sorted(unknown)))
        return cls(**d)


@dataclass
class BlockProbabilityMatrix:
    values: np.ndarray
    block_rows: int
    block_cols: int

    @property
    def array_shape(self):
        rows, cols = self.values.shape
        return (rows * self.block_rows, cols * self.block_cols)


@dataclass
class CandidateMask:
    """
    block_mask: C_B, one entry per block.
    mask: C = C_B expanded to antennas.
    d: vec(C) as 0/1 integers; support: indices where d = 1.
    """

    index: int
    block_mask: np.ndarray
    mask: np.ndarray
    d: np.ndarray
    support: np.ndarray
    zeta: float = np.inf
    q_sub: Optional[np.ndarray] = None


@dataclass
class IterationRecord:
    iteration: int
    best_zeta: float
    best_so_far: float
    mean_probability: float
    probabilities: np.ndarray


@dataclass
class DiagnosisReport:
    method: str
    support: np.ndarray
    q_hat: np.ndarray
    params: list
    b_hat: np.ndarray
    best_zeta: float
    trace: List[IterationRecord] = field(default_factory=list)
    B_hat: Optional[np.ndarray] = None
    tx_support: Optional[np.ndarray] = None
    rx_support: Optional[np.ndarray] = None


def _array_shape(geom):
    return tuple(geom.shape) if hasattr(geom, "shape") else tuple(geom)


def init_prob(geom, n_bx, n_by):
    n_x, n_y = _array_shape(geom)
    if n_x % n_bx or n_y % n_by:
        raise BlockShapeMismatch(
            "{}x{} blocks do not tile a {}x{} array".format(n_bx, n_by, n_x, n_y)
        )
    values = np.full((n_x // n_bx, n_y // n_by), 0.5)
    return BlockProbabilityMatrix(values=values, block_rows=n_bx, block_cols=n_by)


def masks_from_blocks(block_masks, block_rows, block_cols, start_index=0):
    """Expand a stack of block masks (n, R, C) into CandidateMasks."""
    block_masks = np.asarray(block_masks, dtype=bool)
    masks = np.repeat(np.repeat(block_masks, block_rows, axis=1), block_cols, axis=2)
    # column-major vec of each mask
    ds = masks.transpose(0, 2, 1).reshape(len(masks), -1).astype(np.int8)
    return [
        CandidateMask(
            index=start_index + i,
            block_mask=block_masks[i],
            mask=masks[i],
            d=ds[i],
            support=np.flatnonzero(ds[i]),
        )
        for i in range(len(masks))
    ]


def sample_candidates(P_B, n_candidates, rng):
    draws = rng.random((n_candidates,) + P_B.values.shape) < P_B.values
    return masks_from_blocks(draws, P_B.block_rows, P_B.block_cols)


def objective(y, F, mask, epsilon, mode, h):
    """
    Score of a candidate support. Partial blockage fits q on the support by
    least squares; complete blockage forces q = -h there. Returns (zeta, q_sub).
    """
    support = mask.support
    if len(support) == 0:
        return float(np.linalg.norm(y)), np.zeros(0, dtype=np.complex128)
    F_s = F[:, support]
    if mode == "complete":
        q_sub = -h[support]
    else:
        q_sub = numerics.ls_solve(F_s, y)
    residual = y - F_s @ q_sub
    return float(np.linalg.norm(residual)) + epsilon * len(support), q_sub


def elite_indices(zetas, n_elites):
    """Indices of the n_elites smallest scores, ties by lower index."""
    return np.argsort(np.asarray(zetas, dtype=float), kind="stable")[:n_elites]


def select_elites(masks, n_elites):
    if n_elites > len(masks):
        raise ValueError(
            "cannot select {} elites from {} candidates".format(n_elites, len(masks))
        )
    return [masks[i] for i in elite_indices([m.zeta for m in masks], n_elites)]


def elite_update(elites, previous=None, alpha=1.0):
    if not elites:
        raise ValueError("elite list is empty")
    values = np.mean([e.block_mask for e in elites], axis=0)
    if previous is None:
        rows, cols = elites[0].mask.shape
        block_rows = rows // elites[0].block_mask.shape[0]
        block_cols = cols // elites[0].block_mask.shape[1]
    else:
        block_rows, block_cols = previous.block_rows, previous.block_cols
        if alpha != 1.0:
            values = alpha * values + (1 - alpha) * previous.values
    return BlockProbabilityMatrix(values=values, block_rows=block_rows, block_cols=block_cols)


def check_problem(y, F, h):
    y = numerics.as_cvec(y, "y")
    F = numerics.as_cmat(F, "F")
    h = numerics.as_cvec(h, "h")
    if F.shape[0] != len(y):
        raise DimensionMismatch(
            "F has {} rows but y has length {}".format(F.shape[0], len(y))
        )
    if F.shape[1] != len(h):
        raise DimensionMismatch(
            "F has {} columns but h has length {}".format(F.shape[1], len(h))
        )
    return y, F, h


def cross_entropy_search(y, F, h, ce_config, rng, state, sample, update, probabilities):
    """
    Iterate sample / score / select / update and return the best candidate
    over all iterations with the per-iteration trace.

    sample(state, n, rng) -> candidates; update(elites, state, alpha) -> state;
    probabilities(state) -> array snapshot for the trace.
    """
    best = None
    trace = []
    for i in range(ce_config.n_iterations):
        candidates = sample(state, ce_config.n_candidates, rng)
        for candidate in candidates:
            candidate.zeta, candidate.q_sub = objective(
                y, F, candidate, ce_config.epsilon, ce_config.mode, h
            )
        elites = select_elites(candidates, ce_config.n_elites)
        if best is None or elites[0].zeta < best.zeta:
            best = elites[0]
        snapshot = probabilities(state)
        trace.append(
            IterationRecord(
                iteration=i,
                best_zeta=elites[0].zeta,
                best_so_far=best.zeta,
                mean_probability=float(np.mean(snapshot)),
                probabilities=snapshot,
            )
        )
        logger.debug(
            "iteration {}: best zeta {:.4f}, best so far {:.4f}, |S| = {}".format(
                i, elites[0].zeta, best.zeta, len(best.support)
            )
        )
        state = update(elites, state, ce_config.smoothing_alpha)
    return best, trace


def estimate_q(y, F, h, support, mode):
    q_hat = np.zeros(F.shape[1], dtype=np.complex128)
    if len(support) == 0:
        return q_hat
    if mode == "complete":
        q_hat[support] = -h[support]
    else:
        q_hat[support] = numerics.ls_solve(F[:, support], y)
    return q_hat


def run_ce_aad(y, F, h, ce_config, rng, geom, method="ce-aad"):
    """
    Block cross-entropy diagnosis of a transmit array of shape `geom`
    (an ArrayGeometry or an (N_x, N_y) tuple) from y = F q + n, with
    h = vec(H) the known healthy channel.
    """
    y, F, h = check_problem(y, F, h)
    check_mode(ce_config.mode)
    n_x, n_y = _array_shape(geom)
    if n_x * n_y != len(h):
        raise DimensionMismatch(
            "array shape {}x{} does not match {} antennas".format(n_x, n_y, len(h))
        )
    P_B = init_prob((n_x, n_y), ce_config.block_rows, ce_config.block_cols)

    best, trace = cross_entropy_search(
        y, F, h, ce_config, rng,
        state=P_B,
        sample=sample_candidates,
        update=lambda elites, state, alpha: elite_update(elites, state, alpha),
        probabilities=lambda state: state.values.copy(),
    )

    support = best.support
    q_hat = estimate_q(y, F, h, support, ce_config.mode)
    report = DiagnosisReport(
        method=method,
        support=support,
        q_hat=q_hat,
        params=extract_params(q_hat, h, support),
        b_hat=reconstruct_b(q_hat, h, support),
        best_zeta=best.zeta,
        trace=trace,
    )
    logger.debug(
        "{}: {} antennas flagged, zeta = {:.4f}".format(method, len(support), best.zeta)
    )
    return report
