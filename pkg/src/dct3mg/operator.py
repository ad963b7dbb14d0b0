"""Level operators ``C_m(f)`` of the DCT-III algebra.

The entries are ``C[i, l] = a_{|i-l|} + a_{i+l-1} + a_{2m-i-l+1}`` where
``f = a_0 + 2 sum_j a_j cos(j x)``: a symmetric Toeplitz band plus two Hankel
corners. Applying it is the same as correlating the half-sample symmetric
extension of the vector with the stencil ``(a_k, ..., a_1, a_0, a_1, ..., a_k)``,
which is what :meth:`Dct3Operator.matvec` does (``scipy.ndimage`` ``reflect``
mode is exactly that extension). The point mass adds ``mass * mean(v) * e``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import transform
from .errors import UsageError
from .symbol import CosPoly, Symbol, eval_grid

DENSE_CAP = 4096


def _shape(m, dim: int) -> tuple:
    if np.isscalar(m):
        return (int(m),) * dim
    shape = tuple(int(v) for v in m)
    if len(shape) != dim:
        raise UsageError(f"size {m} does not match a {dim}D symbol")
    return shape


@dataclass(frozen=True, eq=False)
class Dct3Operator:
    """``C_m(f) + mass * e e^T / N`` for a symbol ``f`` on an ``m`` (or ``m1 x m2``) grid."""

    shape: tuple
    symbol: Symbol
    stencil: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        sym = self.symbol if isinstance(self.symbol, Symbol) else Symbol(CosPoly(self.symbol))
        object.__setattr__(self, "symbol", sym)
        shape = _shape(self.shape, sym.dim)
        object.__setattr__(self, "shape", shape)
        if any(m < 2 for m in shape):
            raise UsageError(f"grid size must be at least 2, got {shape}")
        deg = sym.poly.degree
        degs = (deg,) if sym.dim == 1 else deg
        if any(d >= m for d, m in zip(degs, shape)):
            raise UsageError(f"symbol degree {deg} must be smaller than the grid size {shape}")
        stencil = sym.poly.two_sided().copy()
        stencil.setflags(write=False)
        object.__setattr__(self, "stencil", stencil)

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def mass(self) -> float:
        return self.symbol.mass

    @property
    def bandwidth(self):
        """``2k + 1`` per dimension."""
        if self.dim == 1:
            return self.stencil.shape[0]
        return self.stencil.shape

    def matvec_flops(self) -> int:
        """Multiply-adds of one banded matvec (stencil nonzeros per grid point, plus the mass term)."""
        nnz = int(np.count_nonzero(self.stencil))
        return 2 * self.size * nnz + (2 * self.size if self.mass else 0)

    def _check(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != self.shape:
            if v.size == self.size:
                return v.reshape(self.shape)
            raise UsageError(f"vector of shape {v.shape} does not match operator shape {self.shape}")
        return v

    def matvec(self, v) -> np.ndarray:
        """Banded product, ``O(N * stencil)``."""
        v = self._check(v)
        if self.dim == 1:
            k = (self.stencil.shape[0] - 1) // 2
            out = np.convolve(np.pad(v, k, mode="symmetric"), self.stencil, mode="valid")
        else:
            out = ndimage.correlate(v, self.stencil, mode="reflect")
        if self.mass:
            out = out + self.mass * v.mean()
        return out

    __matmul__ = matvec

    def eigenvalues(self) -> np.ndarray:
        """Symbol sampled on the grid, mass added at the zero frequency.

        Ordered like the columns of ``Q`` (ascending frequency); 2D results are
        ``m1 x m2`` arrays.
        """
        lam = eval_grid(self.symbol.poly, *(transform.grid(m) for m in self.shape))
        lam = np.array(lam, dtype=float)
        lam[(0,) * self.dim] += self.mass
        return lam

    def matvec_spectral(self, v, *, dense: bool = False) -> np.ndarray:
        """``Q diag(lambda) Q^T v`` through the transform (test oracle)."""
        v = self._check(v)
        return transform.forward(self.eigenvalues() * transform.inverse(v, dense=dense), dense=dense)

    def solve_spectral(self, b) -> np.ndarray:
        """Exact solve ``Q diag(1/lambda) Q^T b``."""
        b = self._check(b)
        lam = self.eigenvalues()
        if np.any(lam == 0):
            raise UsageError("operator is singular on the grid")
        return transform.forward(transform.inverse(b) / lam)

    def materialize_dense(self, cap: int = DENSE_CAP) -> np.ndarray:
        """Full matrix (row-major vectorization in 2D) from the banded action."""
        n = self.size
        if n > cap:
            raise UsageError(f"dense materialization of size {n} exceeds the cap {cap}")
        eye = np.eye(n)
        cols = [self.matvec(eye[i].reshape(self.shape)).ravel() for i in range(n)]
        return np.column_stack(cols)

    def dense_spectral(self) -> np.ndarray:
        """``Q diag(lambda) Q^T`` assembled explicitly (independent of the band formula)."""
        Q = transform.dct3_matrix(self.shape[0])
        for m in self.shape[1:]:
            Q = np.kron(Q, transform.dct3_matrix(m))
        return (Q * self.eigenvalues().ravel()) @ Q.T


def from_symbol(m, sym) -> Dct3Operator:
    """Build the level operator of size ``m`` (int, or a pair in 2D) for ``sym``."""
    if not isinstance(sym, Symbol):
        sym = Symbol(sym if isinstance(sym, CosPoly) else CosPoly(sym))
    return Dct3Operator(m, sym)


def dense_entries(m: int, sym) -> np.ndarray:
    """1D entries from the explicit Toeplitz-plus-Hankel formula."""
    sym = sym if isinstance(sym, Symbol) else Symbol(CosPoly(sym))
    c = sym.poly.coeffs
    k = c.shape[0] - 1
    a = np.zeros(2 * m + 2)
    a[0] = c[0]
    a[1 : k + 1] = c[1:] / 2.0
    i = np.arange(1, m + 1)[:, None]
    l = np.arange(1, m + 1)[None, :]
    C = a[np.abs(i - l)] + a[i + l - 1] + a[2 * m - i - l + 1]
    return C + sym.mass / m
