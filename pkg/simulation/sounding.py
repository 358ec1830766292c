"""
Sounding with 2-bit phase-shifter precoders/combiners and synthesis of the
difference measurements y = F q + n (transmitter only) and y = U q + n (joint).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

import config
from diagnosis import numerics
from diagnosis.errors import DimensionMismatch
from simulation.blockage import truth_q
from simulation.channel import complex_gaussian

PHASE_ALPHABET = np.array(config.PHASE_ALPHABET, dtype=np.complex128)


@dataclass(frozen=True)
class SoundingSet:
    """
    precoders: K x N_t, row k is f_k^T.
    combiners: K x N_r, row k is w_k (joint sounding only).
    operator: the K x N matrix the measurements are linear in (F or U).
    """

    precoders: np.ndarray
    y: np.ndarray
    noise_var: float
    operator: np.ndarray
    combiners: Optional[np.ndarray] = None

    @property
    def n_measurements(self):
        return len(self.y)

    @property
    def is_joint(self):
        return self.combiners is not None


def gen_precoder(K, N, rng):
    if K < 1 or N < 1:
        raise ValueError("precoder dimensions must be >= 1, got {}x{}".format(K, N))
    return PHASE_ALPHABET[rng.integers(0, len(PHASE_ALPHABET), size=(K, N))]


def noise_var_from_snr(snr_db):
    return 10.0 ** (-snr_db / 10.0)


def build_joint_operator(F, W):
    """U with row k equal to kron_row(f_k, w_k)."""
    F = numerics.as_cmat(F, "F")
    W = numerics.as_cmat(W, "W")
    if F.shape[0] != W.shape[0]:
        raise DimensionMismatch(
            "{} precoders but {} combiners".format(F.shape[0], W.shape[0])
        )
    return numerics.kron_rows(F, W)


def measure_tx(H, pattern, F, noise_var, rng):
    F = numerics.as_cmat(F, "F")
    q = truth_q(H, pattern)
    if F.shape[1] != len(q):
        raise DimensionMismatch(
            "F has {} columns but the array has {} antennas".format(F.shape[1], len(q))
        )
    noise = complex_gaussian(rng, F.shape[0], noise_var)
    return F @ q + noise


def measure_joint(H, pattern, F, W, noise_var, rng):
    """
    y_k = w_k^H (H o B - H) f_k + n_k, evaluated in matrix form, and the
    Kronecker operator U such that y = U vec(Q) + n.
    """
    H = numerics.as_cmat(H, "H")
    F = numerics.as_cmat(F, "F")
    W = numerics.as_cmat(W, "W")
    n_r, n_t = H.shape
    if F.shape[1] != n_t or W.shape[1] != n_r or F.shape[0] != W.shape[0]:
        raise DimensionMismatch(
            "H is {}x{} but precoders are {} and combiners {}".format(
                n_r, n_t, F.shape, W.shape
            )
        )
    B = pattern.B
    if B.shape != H.shape:
        raise DimensionMismatch("B is {} but H is {}".format(B.shape, H.shape))
    Q = H * B - H
    noise = complex_gaussian(rng, F.shape[0], noise_var)
    y = np.einsum("km,mn,kn->k", W.conj(), Q, F) + noise
    return y, build_joint_operator(F, W)


def sound_tx(H, pattern, K, noise_var, rng_precoder, rng_noise):
    F = gen_precoder(K, len(pattern.b), rng_precoder)
    y = measure_tx(H, pattern, F, noise_var, rng_noise)
    return SoundingSet(precoders=F, y=y, noise_var=noise_var, operator=F)


def sound_joint(H, pattern, K, noise_var, rng_precoder, rng_combiner, rng_noise):
    n_r, n_t = np.shape(H)
    F = gen_precoder(K, n_t, rng_precoder)
    W = gen_precoder(K, n_r, rng_combiner)
    y, U = measure_joint(H, pattern, F, W, noise_var, rng_noise)
    return SoundingSet(precoders=F, y=y, noise_var=noise_var, operator=U, combiners=W)
