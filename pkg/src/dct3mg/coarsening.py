"""Cutting operator, projectors ``P = T C(p)`` and symbolic Galerkin coarsening."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError
from .operator import Dct3Operator, from_symbol
from .symbol import Symbol, galerkin_symbol

_SQRT_HALF = np.sqrt(0.5)


def cut(v) -> np.ndarray:
    """``T v``: merge neighbouring pairs with weight ``1/sqrt(2)`` along every axis."""
    v = np.asarray(v, dtype=float)
    for axis in range(v.ndim):
        if v.shape[axis] % 2:
            raise UsageError(f"cannot cut an axis of odd length {v.shape[axis]}")
        idx_even = [slice(None)] * v.ndim
        idx_odd = [slice(None)] * v.ndim
        idx_even[axis] = slice(0, None, 2)
        idx_odd[axis] = slice(1, None, 2)
        v = (v[tuple(idx_even)] + v[tuple(idx_odd)]) * _SQRT_HALF
    return v


def cut_transpose(w) -> np.ndarray:
    """``T^T w``: copy each coarse entry onto its two fine children, times ``1/sqrt(2)``."""
    w = np.asarray(w, dtype=float)
    for axis in range(w.ndim):
        w = np.repeat(w, 2, axis=axis) * _SQRT_HALF
    return w


def cut_matrix(m: int) -> np.ndarray:
    T = np.zeros((m // 2, m))
    rows = np.arange(m // 2)
    T[rows, 2 * rows] = T[rows, 2 * rows + 1] = _SQRT_HALF
    return T


@dataclass(frozen=True, eq=False)
class Projector:
    """``P = T C_m(p)`` from a fine grid of shape ``fine_shape`` to half its size."""

    fine_shape: tuple
    p: Symbol
    Cp: Dct3Operator = field(init=False, repr=False)

    def __post_init__(self):
        shape = (int(self.fine_shape),) if np.isscalar(self.fine_shape) else tuple(int(m) for m in self.fine_shape)
        if any(m % 2 for m in shape):
            raise UsageError(f"fine grid {shape} must be even in every dimension")
        object.__setattr__(self, "fine_shape", shape)
        object.__setattr__(self, "Cp", from_symbol(shape, self.p))
        # every aliasing set {x, pi - x} (per axis) must keep a nonzero p
        mirrored = self.Cp.eigenvalues() ** 2
        for axis in range(mirrored.ndim):
            mirrored = mirrored + np.roll(np.flip(mirrored, axis=axis), 1, axis=axis)
        if np.any(mirrored <= 0):
            raise UsageError("projector symbol vanishes on a whole aliasing set")

    @property
    def coarse_shape(self) -> tuple:
        return tuple(m // 2 for m in self.fine_shape)

    def restrict(self, v) -> np.ndarray:
        return cut(self.Cp.matvec(v))

    def prolong(self, w) -> np.ndarray:
        return self.Cp.matvec(cut_transpose(w))

    def dense(self) -> np.ndarray:
        """Dense ``P`` (row-major vectorization in 2D)."""
        T = cut_matrix(self.fine_shape[0])
        for m in self.fine_shape[1:]:
            T = np.kron(T, cut_matrix(m))
        return T @ self.Cp.materialize_dense(cap=max(4096, self.Cp.size))


def coarse_operator(A: Dct3Operator, P: Projector) -> Dct3Operator:
    """Galerkin coarse operator built from the symbol, never from a triple product."""
    if tuple(A.shape) != tuple(P.fine_shape):
        raise UsageError(f"operator shape {A.shape} does not match projector {P.fine_shape}")
    return from_symbol(P.coarse_shape, galerkin_symbol(A.symbol, P.p))
