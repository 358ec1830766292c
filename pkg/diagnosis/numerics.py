"""
Complex vector/matrix kernels shared by the simulation and diagnosis code.

Matrices are numpy complex128 arrays and `vec` stacks them column-major, so
the antenna index n of an N_x x N_y array is n = col * N_x + row.
"""

import logging

import numpy as np
import scipy.linalg

import config
from diagnosis.errors import DimensionMismatch

logger = logging.getLogger(__name__)


def as_cvec(v, name="vector"):
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1 or v.size == 0:
        raise DimensionMismatch(
            "{} must be a non-empty 1-D array, got shape {}".format(name, v.shape)
        )
    if not np.all(np.isfinite(v)):
        raise ValueError("{} has non-finite entries".format(name))
    return v


def as_cmat(M, name="matrix"):
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2 or M.size == 0:
        raise DimensionMismatch(
            "{} must be a non-empty 2-D array, got shape {}".format(name, M.shape)
        )
    if not np.all(np.isfinite(M)):
        raise ValueError("{} has non-finite entries".format(name))
    return M


def vec(M):
    M = as_cmat(M)
    return M.reshape(-1, order="F")


def ivec(v, rows, cols):
    v = as_cvec(v)
    if v.size != rows * cols:
        raise DimensionMismatch(
            "cannot reshape vector of length {} into {}x{}".format(v.size, rows, cols)
        )
    return v.reshape((rows, cols), order="F")


def hadamard(a, b):
    a = as_cvec(a, "a")
    b = as_cvec(b, "b")
    if a.shape != b.shape:
        raise DimensionMismatch(
            "hadamard operands differ in length: {} vs {}".format(a.size, b.size)
        )
    return a * b


def kron_row(f, w):
    """
    Row u = f^T kron w^H, so that u @ vec(Q) == w^H Q f for any N_r x N_t Q.
    """
    f = as_cvec(f, "f")
    w = as_cvec(w, "w")
    return np.kron(f, np.conj(w))


def kron_rows(F, W):
    """Stack kron_row(f_k, w_k) over the rows of F (K x N_t) and W (K x N_r)."""
    F = as_cmat(F, "F")
    W = as_cmat(W, "W")
    if F.shape[0] != W.shape[0]:
        raise DimensionMismatch(
            "{} rows in F but {} in W".format(F.shape[0], W.shape[0])
        )
    if F.shape[0] == 0:
        return np.zeros((0, F.shape[1] * W.shape[1]), dtype=np.complex128)
    return np.stack([kron_row(f, w) for f, w in zip(F, W)])


def ls_solve(A, y, return_info=False):
    """
    Least-squares solution of A x = y.

    Full-column-rank systems with N <= K are solved through a column-pivoted
    QR factorisation, which equals (A^H A)^{-1} A^H y. Rank-deficient or
    underdetermined systems fall back to ridge-regularised normal equations
    with lambda = RIDGE_FACTOR * trace(A^H A) / N, which approaches the
    minimum-norm solution.

    Parameters
    ----------
    A : (K, N) complex array
    y : (K,) complex array
    return_info : bool
        Also return a dict with the detected rank and whether the
        regularised path was taken.
    """
    A = as_cmat(A, "A")
    y = as_cvec(y, "y")
    K, N = A.shape
    if y.size != K:
        raise DimensionMismatch(
            "A has {} rows but y has length {}".format(K, y.size)
        )

    rank = None
    if N <= K:
        Q, R, perm = scipy.linalg.qr(A, mode="economic", pivoting=True)
        diag = np.abs(np.diag(R))
        tol = max(K, N) * np.finfo(float).eps * diag[0] if diag[0] > 0 else 0.0
        rank = int(np.sum(diag > tol))
        if rank == N:
            z = scipy.linalg.solve_triangular(R, Q.conj().T @ y)
            x = np.empty(N, dtype=np.complex128)
            x[perm] = z
            if return_info:
                return x, {"rank": rank, "regularized": False}
            return x

    # rank-deficient or underdetermined
    gram = A.conj().T @ A
    lam = config.RIDGE_FACTOR * np.real(np.trace(gram)) / N
    if lam <= 0:
        lam = config.RIDGE_FACTOR
    x = scipy.linalg.solve(
        gram + lam * np.eye(N), A.conj().T @ y, assume_a="her"
    )
    logger.debug("regularized LS path taken (K={}, N={}, rank={})".format(K, N, rank))
    if return_info:
        return x, {"rank": rank, "regularized": True}
    return x
