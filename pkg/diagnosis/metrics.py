import numpy as np

from diagnosis.errors import DimensionMismatch, ZeroTruth


def nmse(estimate, truth):
    """||estimate - truth||^2 / ||truth||^2 (Frobenius for matrices)."""
    estimate = np.asarray(estimate, dtype=np.complex128)
    truth = np.asarray(truth, dtype=np.complex128)
    if estimate.shape != truth.shape:
        raise DimensionMismatch(
            "estimate is {} but truth is {}".format(estimate.shape, truth.shape)
        )
    power = np.sum(np.abs(truth) ** 2)
    if power == 0:
        raise ZeroTruth("NMSE undefined for an all-zero reference")
    return float(np.sum(np.abs(estimate - truth) ** 2) / power)


def exact_support(estimated, true):
    return set(np.asarray(estimated, dtype=int).tolist()) == set(
        np.asarray(true, dtype=int).tolist()
    )
