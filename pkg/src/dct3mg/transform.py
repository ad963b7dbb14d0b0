"""The orthogonal DCT-III transform ``Q_m`` that diagonalizes the cosine algebra.

``Q_m[i, j] = sqrt((2 - delta_{j,1}) / m) cos((j - 1)(i - 1/2) pi / m)``: integer
frequency on the column index, half-integer sampling on the row index. Column
``j`` is the unit eigenvector for the grid frequency ``x_j = (j - 1) pi / m`` and
the first column is ``e / sqrt(m)``.

The fast path uses :func:`scipy.fft.dct` (type 3 with ``norm="ortho"`` is exactly
``Q_m``; type 2 is ``Q_m^T``). :func:`dct3_matrix` builds the matrix explicitly
and is used as the oracle.
"""

from __future__ import annotations

import numpy as np
import scipy.fft

from .errors import UsageError


def grid(m: int) -> np.ndarray:
    """Grid frequencies ``x_j = (j - 1) pi / m``, ``j = 1..m``."""
    if m < 1:
        raise UsageError("grid size must be positive")
    return np.arange(m) * np.pi / m


def dct3_matrix(m: int) -> np.ndarray:
    i = np.arange(m)[:, None] + 0.5
    j = np.arange(m)[None, :]
    weight = np.where(j == 0, 1.0, 2.0) / m
    return np.sqrt(weight) * np.cos(j * i * np.pi / m)


def _check(v: np.ndarray, m) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if m is not None and v.shape[0] != m:
        raise UsageError(f"vector of length {v.shape[0]} does not match size {m}")
    return v


def dct3_apply(v, m: int | None = None, *, dense: bool = False) -> np.ndarray:
    """Return ``Q_m v`` (along axis 0 if ``v`` is 2D)."""
    v = _check(v, m)
    if dense:
        return dct3_matrix(v.shape[0]) @ v
    return scipy.fft.dct(v, type=3, norm="ortho", axis=0)


def dct3_apply_transpose(v, m: int | None = None, *, dense: bool = False) -> np.ndarray:
    """Return ``Q_m^T v``."""
    v = _check(v, m)
    if dense:
        return dct3_matrix(v.shape[0]).T @ v
    return scipy.fft.dct(v, type=2, norm="ortho", axis=0)


def tensor_apply(V, shape: tuple | None = None, *, transpose: bool = False, dense: bool = False) -> np.ndarray:
    """Apply ``Q_{m1}`` along columns and ``Q_{m2}`` along rows of an ``m1 x m2`` array.

    In vectorized (row-major) form this is ``kron(Q_{m1}, Q_{m2}) vec(V)``.
    """
    V = np.asarray(V, dtype=float)
    if shape is not None and V.shape != tuple(shape):
        raise UsageError(f"array of shape {V.shape} does not match {tuple(shape)}")
    if dense:
        Q1, Q2 = dct3_matrix(V.shape[0]), dct3_matrix(V.shape[1])
        if transpose:
            return Q1.T @ V @ Q2
        return Q1 @ V @ Q2.T
    return scipy.fft.dctn(V, type=2 if transpose else 3, norm="ortho")


def forward(v, *, dense: bool = False) -> np.ndarray:
    """``Q v`` for a grid array of any supported dimension."""
    v = np.asarray(v, dtype=float)
    return dct3_apply(v, dense=dense) if v.ndim == 1 else tensor_apply(v, dense=dense)


def inverse(v, *, dense: bool = False) -> np.ndarray:
    """``Q^T v`` for a grid array of any supported dimension."""
    v = np.asarray(v, dtype=float)
    return dct3_apply_transpose(v, dense=dense) if v.ndim == 1 else tensor_apply(v, transpose=True, dense=dense)
