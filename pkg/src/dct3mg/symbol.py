"""Even trigonometric polynomials and the symbols of DCT-III matrices.

A :class:`CosPoly` stores plain cosine coefficients, ``f(x) = sum_j c_j cos(j x)``
in one dimension and ``f(x, y) = sum c_{j1,j2} cos(j1 x) cos(j2 y)`` in two.
A :class:`Symbol` adds a nonnegative point mass at the zero frequency, which is
how rank-one (Strang) corrections are carried through the coarsening.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.signal import convolve

from .errors import FactorizationError, ConsistencyError, UsageError

ArrayLike = Union[Sequence[float], np.ndarray]

#: samples per dimension used for sup/inf estimates
SUP_SAMPLES_1D = 4096
SUP_SAMPLES_2D = 1024


def _trim(c: np.ndarray) -> np.ndarray:
    """Drop trailing (near-)zero coefficient slices along every axis."""
    scale = np.max(np.abs(c)) if c.size else 0.0
    tol = 1e-14 * scale
    for axis in range(c.ndim):
        while c.shape[axis] > 1:
            last = np.take(c, -1, axis=axis)
            if np.all(np.abs(last) <= tol):
                c = np.delete(c, -1, axis=axis)
            else:
                break
    return c


@dataclass(frozen=True, eq=False)
class CosPoly:
    """Even trigonometric polynomial in one or two variables."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if c.ndim > 2:
            raise UsageError("only one- and two-dimensional symbols are supported")
        if c.size == 0:
            c = np.zeros((1,) * c.ndim)
        c = _trim(c).copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def constant(cls, value: float, dim: int = 1) -> "CosPoly":
        return cls(np.full((1,) * dim, float(value)))

    @property
    def dim(self) -> int:
        return self.coeffs.ndim

    @property
    def degree(self):
        """Degree as an int in 1D, a tuple of per-variable degrees in 2D."""
        if self.dim == 1:
            return self.coeffs.shape[0] - 1
        return tuple(n - 1 for n in self.coeffs.shape)

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def __call__(self, *x):
        return eval_poly(self, *x)

    def __mul__(self, other):
        if isinstance(other, CosPoly):
            return multiply(self, other)
        return CosPoly(self.coeffs * float(other))

    __rmul__ = __mul__

    def __add__(self, other: "CosPoly") -> "CosPoly":
        if other.dim != self.dim:
            raise UsageError("dimension mismatch")
        shape = tuple(max(a, b) for a, b in zip(self.coeffs.shape, other.coeffs.shape))
        out = np.zeros(shape)
        out[tuple(slice(0, n) for n in self.coeffs.shape)] += self.coeffs
        out[tuple(slice(0, n) for n in other.coeffs.shape)] += other.coeffs
        return CosPoly(out)

    def __pow__(self, r: int) -> "CosPoly":
        out = CosPoly.constant(1.0, self.dim)
        for _ in range(int(r)):
            out = multiply(out, self)
        return out

    def reflect(self) -> "CosPoly":
        """Return ``g(x) = f(pi - x)`` (applied in every variable)."""
        c = self.coeffs.copy()
        for axis in range(self.dim):
            sign = (-1.0) ** np.arange(c.shape[axis])
            shape = [1] * self.dim
            shape[axis] = -1
            c = c * sign.reshape(shape)
        return CosPoly(c)

    def two_sided(self) -> np.ndarray:
        """Symmetric Fourier array ``a`` with ``f = sum_t a_t e^{i t x}``.

        Its centre entry is ``c_0`` and ``a_{+-j} = c_j / 2``; in 2D the halving
        applies per axis. This is also the matvec stencil of ``C_m(f)``.
        """
        c = self.coeffs
        for axis in range(self.dim):
            n = c.shape[axis]
            half = np.take(c, np.arange(1, n), axis=axis) / 2.0
            c = np.concatenate([np.flip(half, axis=axis), np.take(c, [0], axis=axis), half], axis=axis)
        return c

    @classmethod
    def from_two_sided(cls, a: np.ndarray) -> "CosPoly":
        c = np.asarray(a, dtype=float)
        for axis in range(c.ndim):
            k = (c.shape[axis] - 1) // 2
            centre = np.take(c, [k], axis=axis)
            pos = np.take(c, np.arange(k + 1, 2 * k + 1), axis=axis)
            neg = np.flip(np.take(c, np.arange(0, k), axis=axis), axis=axis)
            c = np.concatenate([centre, pos + neg], axis=axis)
        return cls(c)

    def __repr__(self):
        return f"CosPoly({self.coeffs.tolist()})"


@dataclass(frozen=True, eq=False)
class Symbol:
    """Cosine polynomial plus a point mass at the zero frequency.

    The eigenvalue of ``C_m(sym)`` at grid frequency ``x_j`` is
    ``poly(x_j) + mass * [x_j == 0]``.
    """

    poly: CosPoly
    mass: float = 0.0

    def __post_init__(self):
        if not isinstance(self.poly, CosPoly):
            object.__setattr__(self, "poly", CosPoly(self.poly))
        if self.mass < 0:
            raise UsageError(f"symbol mass must be nonnegative, got {self.mass}")
        object.__setattr__(self, "mass", float(self.mass))

    @property
    def dim(self) -> int:
        return self.poly.dim

    @property
    def coeffs(self) -> np.ndarray:
        return self.poly.coeffs

    def value_at_zero(self) -> float:
        """Eigenvalue at the zero frequency, mass included."""
        return float(self.poly(*([0.0] * self.dim))) + self.mass

    def __repr__(self):
        return f"Symbol({self.poly.coeffs.tolist()}, mass={self.mass:.6g})"


@dataclass(frozen=True)
class ZeroInfo:
    """Location (``"0"`` or ``"pi"`` per variable) and even order of a symbol zero."""

    location: tuple
    order: int

    def __post_init__(self):
        loc = self.location
        if isinstance(loc, (str, float, int)):
            loc = (loc,)
        loc = tuple(_normalize_location(v) for v in loc)
        if self.order <= 0 or self.order % 2:
            raise UsageError(f"zero order must be a positive even integer, got {self.order}")
        object.__setattr__(self, "location", loc)

    @classmethod
    def at(cls, location: str, order: int, dim: int = 1) -> "ZeroInfo":
        return cls((location,) * dim, order)

    @property
    def dim(self) -> int:
        return len(self.location)

    @property
    def q(self) -> int:
        return self.order // 2

    def point(self) -> tuple:
        return tuple(0.0 if v == "0" else np.pi for v in self.location)


def _normalize_location(v) -> str:
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("0", "zero"):
            return "0"
        if s in ("pi", "π"):
            return "pi"
    elif v == 0:
        return "0"
    elif np.isclose(float(v), np.pi):
        return "pi"
    raise UsageError(f"unsupported zero location {v!r}; only 0 and pi are handled")


def _as_poly(f) -> CosPoly:
    if isinstance(f, Symbol):
        return f.poly
    if isinstance(f, CosPoly):
        return f
    return CosPoly(f)


def eval_poly(f, *x):
    """Evaluate the cosine sum at ``x`` (1D) or ``(x, y)`` (2D), elementwise."""
    p = _as_poly(f)
    if len(x) != p.dim:
        raise UsageError(f"expected {p.dim} coordinate(s), got {len(x)}")
    if p.dim == 1:
        xx = np.asarray(x[0], dtype=float)
        j = np.arange(p.coeffs.shape[0])
        return np.cos(xx[..., None] * j) @ p.coeffs
    xx, yy = np.broadcast_arrays(np.asarray(x[0], float), np.asarray(x[1], float))
    cx = np.cos(xx[..., None] * np.arange(p.coeffs.shape[0]))
    cy = np.cos(yy[..., None] * np.arange(p.coeffs.shape[1]))
    return np.einsum("...i,ij,...j->...", cx, p.coeffs, cy)


def eval_symbol(sym, *x):
    """Evaluate the polynomial part of a symbol; the mass is a spectral correction only."""
    return eval_poly(sym, *x)


def eval_grid(f, *axes):
    """Evaluate on the tensor grid spanned by 1D sample arrays ``axes``."""
    p = _as_poly(f)
    if len(axes) != p.dim:
        raise UsageError(f"expected {p.dim} axis array(s), got {len(axes)}")
    mats = [np.cos(np.outer(np.asarray(a, float), np.arange(n))) for a, n in zip(axes, p.coeffs.shape)]
    if p.dim == 1:
        return mats[0] @ p.coeffs
    return mats[0] @ p.coeffs @ mats[1].T


def multiply(a, b) -> CosPoly:
    """Product of two cosine polynomials (product-to-sum, done as a convolution)."""
    a, b = _as_poly(a), _as_poly(b)
    if a.dim != b.dim:
        raise UsageError("dimension mismatch")
    return CosPoly.from_two_sided(convolve(a.two_sided(), b.two_sided(), method="direct"))


def _even_part(h: CosPoly) -> CosPoly:
    idx = tuple(slice(0, None, 2) for _ in range(h.dim))
    return CosPoly(h.coeffs[idx])


def _phi(dim: int) -> CosPoly:
    """(1 + cos x) in every variable, multiplied together."""
    one = CosPoly([1.0, 1.0])
    if dim == 1:
        return one
    return CosPoly(np.outer(one.coeffs, one.coeffs))


def galerkin_symbol(f: Symbol, p: Symbol) -> Symbol:
    """Symbol of the Galerkin coarse matrix ``P C(f) P^T`` with ``P = T C(p)``.

    The polynomial part keeps the even-indexed coefficients of
    ``(1 + cos x) f p^2`` (per variable in 2D). The mass is whatever makes the
    zero-frequency eigenvalue equal ``(f(0) + c) (p(0) + d)^2``.
    """
    if f.dim != p.dim:
        raise UsageError("symbol and projector dimensions differ")
    if p.poly.is_zero() and p.mass == 0:
        raise UsageError("projector symbol is identically zero")
    h = multiply(multiply(_phi(f.dim), f.poly), multiply(p.poly, p.poly))
    coarse = _even_part(h)
    zero = [0.0] * f.dim
    lam0 = f.value_at_zero() * p.value_at_zero() ** 2
    mass = lam0 - float(coarse(*zero))
    scale = max(abs(lam0), np.max(np.abs(coarse.coeffs)), 1.0)
    if mass < 0:
        if mass < -1e-12 * scale:
            raise ConsistencyError(f"coarse symbol would need negative mass {mass:.3e}")
        mass = 0.0
    elif mass <= 1e-14 * scale and f.mass == 0 and p.mass == 0:
        mass = 0.0
    return Symbol(coarse, mass)


def psi_step(psi, q: int, p) -> CosPoly:
    """One application of the coarse-level map on the positive factor ``psi``.

    Returns the even-indexed coefficients of ``(1 + cos x) p psi`` scaled by
    ``2**-q``, i.e. ``2**-(q+1) [g(x/2) + g(pi - x/2)]`` with ``g = (1+cos) p psi``.
    """
    if q < 1:
        raise UsageError("q must be >= 1")
    psi, p = _as_poly(psi), _as_poly(p)
    g = multiply(multiply(_phi(1), p), psi)
    return _even_part(g) * (2.0 ** -q)


def project_zero(z: ZeroInfo) -> ZeroInfo:
    """Zero of the coarse symbol: 0 stays at 0, pi moves to 0 with order + 2."""
    if all(v == "0" for v in z.location):
        return z
    if all(v == "pi" for v in z.location):
        return ZeroInfo(("0",) * z.dim, z.order + 2)
    raise UsageError(f"mixed zero locations {z.location} are not supported")


def _first_nonzero_grid_value(f, m) -> float:
    """Smallest symbol value at the grid points next to the zero frequency."""
    p = _as_poly(f)
    ms = (m,) * p.dim if np.isscalar(m) else tuple(m)
    if p.dim == 1:
        return float(p(np.pi / ms[0]))
    return float(min(p(np.pi / ms[0], 0.0), p(0.0, np.pi / ms[1])))


def projector_poly(z: ZeroInfo, r: int, m, form: str = "auto") -> Symbol:
    """Projector symbol vanishing at the mirror point of ``z`` with order ``2r``.

    For a zero at 0 this is ``(2 + 2cos x)^r``; for a zero at pi it is
    ``(2 - 2cos x)^r``, which vanishes at the grid point 0 and therefore
    carries its own Strang mass (the value at the first nonzero grid point).

    In 2D the univariate terms are combined by ``form``: ``"product"`` vanishes
    on every aliased corner, ``"sum"`` only at the corner opposite the zero.
    ``"auto"`` takes the product for a zero at the origin and the sum for a zero
    at (pi, pi), where a product would vanish on whole grid lines and lose rank.
    """
    if r < 1:
        raise UsageError("projector order r must be >= 1")
    if form not in ("auto", "sum", "product"):
        raise UsageError(f"unknown projector form {form!r}")
    sign = {"0": 1.0, "pi": -1.0}
    bases = [(CosPoly([2.0, 2.0 * sign[loc]]) ** r).coeffs for loc in z.location]
    if z.dim == 1:
        poly = CosPoly(bases[0])
    else:
        if form == "auto":
            form = "product" if all(v == "0" for v in z.location) else "sum"
        if form == "product":
            poly = CosPoly(np.outer(bases[0], bases[1]))
        else:
            c = np.zeros((max(b.shape[0] for b in bases),) * 2)
            c[: bases[0].shape[0], 0] += bases[0]
            c[0, : bases[1].shape[0]] += bases[1]
            poly = CosPoly(c)
    mass = 0.0
    if abs(poly(*([0.0] * z.dim))) <= 1e-12 * np.max(np.abs(poly.coeffs)):
        mass = _first_nonzero_grid_value(poly, m)
    return Symbol(poly, mass)


def strang_correct(f, m) -> Symbol:
    """Add the rank-one correction ``f(pi/m) * e e^T / m`` to a symbol vanishing at 0."""
    p = _as_poly(f)
    ms = (m,) * p.dim if np.isscalar(m) else tuple(m)
    if any(mm < 2 for mm in ms):
        raise UsageError("grid size must be at least 2")
    f0 = float(p(*([0.0] * p.dim)))
    if abs(f0) > 1e-12 * max(1.0, np.max(np.abs(p.coeffs))):
        raise UsageError(f"f(0) = {f0:.3e} is nonzero; the matrix needs no correction")
    return Symbol(p, _first_nonzero_grid_value(p, ms))


def extract_psi(f, q: int, location: str = "0") -> CosPoly:
    """Factor ``f = (1 - cos x)^q psi`` (or ``(1 + cos x)^q psi`` for a zero at pi).

    The division runs in the Chebyshev basis, where ``cos(j x)`` is ``T_j(cos x)``.
    """
    p = _as_poly(f)
    if p.dim != 1:
        raise UsageError("factorization is implemented for 1D symbols only")
    if _normalize_location(location) == "pi":
        return extract_psi(p.reflect(), q).reflect()
    if q < 1:
        raise UsageError("q must be >= 1")
    divisor = cheb.chebpow([1.0, -1.0], q)
    quo, rem = cheb.chebdiv(p.coeffs, divisor)
    scale = max(np.max(np.abs(p.coeffs)), 1e-300)
    if rem.size and np.max(np.abs(rem)) > 1e-9 * scale:
        raise FactorizationError(f"(1 - cos x)^{q} does not divide the symbol (remainder {np.max(np.abs(rem)):.2e})")
    psi = CosPoly(quo)
    xs = np.linspace(0.0, np.pi, 2048)
    if np.min(psi(xs)) <= 0:
        raise FactorizationError(f"quotient is not positive; the zero order is not exactly {2 * q}")
    return psi


def sample_axes(dim: int) -> list:
    n = SUP_SAMPLES_1D if dim == 1 else SUP_SAMPLES_2D
    return [np.linspace(0.0, np.pi, n + 1)] * dim


def sup_norm(f) -> float:
    """Sampled ``sup |f|`` on ``[0, pi]^d``, with the zero-frequency eigenvalue included."""
    sym = f if isinstance(f, Symbol) else Symbol(_as_poly(f))
    vals = eval_grid(sym.poly, *sample_axes(sym.dim))
    return float(max(np.max(np.abs(vals)), abs(sym.value_at_zero())))


def min_max(f) -> tuple:
    """Sampled ``(inf |f|, sup |f|)`` of a polynomial; no mass."""
    p = _as_poly(f)
    vals = np.abs(eval_grid(p, *sample_axes(p.dim)))
    return float(np.min(vals)), float(np.max(vals))


def mu_inf(f) -> float:
    lo, hi = min_max(f)
    return hi / lo
