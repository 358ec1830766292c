"""
Ground-truth blockage patterns and recovery of the characteristic parameters
(tau, Psi) of blocked antennas.

A blocked antenna n multiplies its channel coefficient by
a_n = tau_n * exp(i * Psi_n); unblocked antennas keep coefficient 1.
"""

import math
from dataclasses import dataclass

import numpy as np

import config
from diagnosis import numerics
from diagnosis.errors import ChannelNull, DimensionMismatch, InvalidProbability


@dataclass(frozen=True)
class BlockagePattern:
    mode: str
    b: np.ndarray
    support: np.ndarray
    tau: np.ndarray
    psi: np.ndarray

    @property
    def params(self):
        return [
            (int(n), float(t), float(p))
            for n, t, p in zip(self.support, self.tau, self.psi)
        ]


@dataclass(frozen=True)
class JointBlockagePattern:
    tx: BlockagePattern
    rx: BlockagePattern

    @property
    def b_t(self):
        return self.tx.b

    @property
    def b_r(self):
        return self.rx.b

    @property
    def B(self):
        return np.outer(self.rx.b, self.tx.b)

    @property
    def mode(self):
        return self.tx.mode


def check_mode(mode):
    if mode not in config.BLOCKAGE_MODES:
        raise ValueError(
            "blockage mode must be one of {}, got {}".format(config.BLOCKAGE_MODES, mode)
        )


def blocked_count(p_b, n_antennas):
    """round(p_b * N) with halves rounded up."""
    if not 0.0 <= p_b <= 1.0:
        raise InvalidProbability("blockage probability {} outside [0, 1]".format(p_b))
    return int(math.floor(p_b * n_antennas + 0.5))


def cluster_shapes(count, n_x, n_y):
    """
    Rectangle shapes (rows, cols) holding exactly `count` antennas that fit
    the array. Shapes with both sides >= 2 are preferred over single lines.
    """
    pairs = [
        (a, count // a)
        for a in range(1, count + 1)
        if count % a == 0 and a <= n_x and count // a <= n_y
    ]
    proper = [(a, c) for a, c in pairs if a >= 2 and c >= 2]
    return proper if proper else pairs


def cluster_cells(count, n_x, n_y, rng, align=(1, 1)):
    """
    Contiguous cluster of `count` cells as (rows, cols) index arrays. A
    rectangular cluster starts on a multiple of `align` and, when some
    rectangle allows it, is a whole number of align-sized tiles.
    """
    if count == 0:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    shapes = cluster_shapes(count, n_x, n_y)
    tiled = [s for s in shapes if s[0] % align[0] == 0 and s[1] % align[1] == 0]
    if tiled:
        shapes = tiled
    if shapes:
        rows, cols = shapes[rng.integers(len(shapes))]
        r0 = align[0] * rng.integers((n_x - rows) // align[0] + 1)
        c0 = align[1] * rng.integers((n_y - cols) // align[1] + 1)
        rr, cc = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
        return (r0 + rr).ravel(), (c0 + cc).ravel()

    # no rectangle fits: fill a bounding box row by row, last row partial
    cols = min(n_y, math.ceil(math.sqrt(count)))
    rows = math.ceil(count / cols)
    if rows > n_x:
        cols = n_y
        rows = math.ceil(count / cols)
    r0 = rng.integers(n_x - rows + 1)
    c0 = rng.integers(n_y - cols + 1)
    cells = np.arange(count)
    return r0 + cells // cols, c0 + cells % cols


def pattern_from_params(n_antennas, support, tau, psi, mode):
    check_mode(mode)
    support = np.asarray(support, dtype=int)
    tau = np.asarray(tau, dtype=float)
    psi = np.asarray(psi, dtype=float)
    if not (len(support) == len(tau) == len(psi)):
        raise DimensionMismatch("support, tau and psi must have equal lengths")
    if np.any(support < 0) or np.any(support >= n_antennas):
        raise DimensionMismatch("support index outside [0, {})".format(n_antennas))
    order = np.argsort(support, kind="stable")
    support, tau, psi = support[order], tau[order], psi[order]
    b = np.ones(n_antennas, dtype=np.complex128)
    b[support] = tau * np.exp(1j * psi)
    return BlockagePattern(mode=mode, b=b, support=support, tau=tau, psi=psi)


def gen_blockage(geom, p_b, mode, rng, align=(1, 1)):
    """
    Draw a clustered blockage pattern on `geom`.

    round(p_b * N_T) antennas are blocked as one contiguous rectangle (a run
    for a ULA) at a uniformly random position. Partial blockages draw
    tau ~ U(0, 1) and Psi ~ U(0, 2pi); complete blockages have tau = 0.
    With `align` the rectangle is laid on the solver's block grid.
    """
    check_mode(mode)
    count = blocked_count(p_b, geom.n_antennas)
    rows, cols = cluster_cells(count, geom.n_x, geom.n_y, rng, align)
    support = np.sort(cols * geom.n_x + rows)
    if mode == "partial":
        tau = rng.uniform(0.0, 1.0, count)
        psi = rng.uniform(0.0, 2 * np.pi, count)
    else:
        tau = np.zeros(count)
        psi = np.zeros(count)
    return pattern_from_params(geom.n_antennas, support, tau, psi, mode)


def gen_joint_blockage(geom_t, geom_r, p_b, mode, rng):
    tx = gen_blockage(geom_t, p_b, mode, rng)
    rx = gen_blockage(geom_r, p_b, mode, rng)
    return JointBlockagePattern(tx=tx, rx=rx)


def truth_q(H, pattern):
    """Deviation vector q = vec(H o B) - vec(H)."""
    H = numerics.as_cmat(H, "H")
    if isinstance(pattern, JointBlockagePattern):
        B = pattern.B
        if B.shape != H.shape:
            raise DimensionMismatch(
                "B is {} but H is {}".format(B.shape, H.shape)
            )
        return numerics.vec(H * B - H)
    h = numerics.vec(H)
    if len(pattern.b) != len(h):
        raise DimensionMismatch(
            "b has length {} but H has {} entries".format(len(pattern.b), len(h))
        )
    return numerics.hadamard(h, pattern.b) - h


def _ratios(q_hat, h, support):
    support = np.asarray(support, dtype=int)
    q_hat = np.asarray(q_hat, dtype=np.complex128)
    h = np.asarray(h, dtype=np.complex128)
    if q_hat.shape != h.shape:
        raise DimensionMismatch(
            "q_hat has length {} but h has {}".format(len(q_hat), len(h))
        )
    h_s = h[support]
    null = np.abs(h_s) <= config.CHANNEL_NULL_TOL
    if np.any(null):
        raise ChannelNull(
            "channel coefficient vanishes at antennas {}".format(support[null].tolist())
        )
    return support, q_hat[support] / h_s + 1


def extract_params(q_hat, h, support):
    """
    Characteristic parameters (n, tau_n, Psi_n) of each antenna in `support`,
    with tau = |q_n / h_n + 1| and Psi = angle(q_n / h_n + 1) in [0, 2pi).
    Psi is reported as 0 where tau is 0.
    """
    support, ratios = _ratios(q_hat, h, support)
    params = []
    for n, r in zip(support, ratios):
        tau = float(np.abs(r))
        psi = float(np.mod(np.angle(r), 2 * np.pi)) if tau > 0 else 0.0
        if psi >= 2 * np.pi:
            psi = 0.0
        params.append((int(n), tau, psi))
    return params


def reconstruct_b(q_hat, h, support):
    support, ratios = _ratios(q_hat, h, support)
    b_hat = np.ones(len(h), dtype=np.complex128)
    b_hat[support] = ratios
    return b_hat
