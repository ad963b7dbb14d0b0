"""Richardson smoothing, two-grid and V-cycle iterations over a symbolic hierarchy.

The hierarchy is set up once from the finest symbol: every coarse operator
comes from :func:`galerkin_symbol`, so the setup costs ``O(levels)`` coefficient
operations and no matrix products. The cycles only ever touch operators
through banded matvecs, the cutting operator and the coarsest exact solve.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import linalg

from .coarsening import Projector, coarse_operator
from .errors import ConsistencyError, FactorizationError, UsageError
from .operator import Dct3Operator, from_symbol
from .symbol import (
    CosPoly,
    Symbol,
    ZeroInfo,
    eval_grid,
    extract_psi,
    project_zero,
    projector_poly,
    sample_axes,
    strang_correct,
    sup_norm,
)

log = logging.getLogger(__name__)

#: coarsest problems up to this many unknowns are solved by a dense Cholesky factor
DENSE_DIRECT_LIMIT = 1024
RHS_MODES = ("random", "ones", "zero", "linear")


@dataclass(frozen=True, eq=False)
class LevelData:
    """One level of the hierarchy; ``P`` is ``None`` on the coarsest level."""

    shape: tuple
    symbol: Symbol
    A: Dct3Operator
    zero: Optional[ZeroInfo]
    omega_pre: float
    omega_post: float
    r: Optional[int] = None
    P: Optional[Projector] = None

    @property
    def size(self) -> int:
        return self.A.size

    def summary(self) -> dict:
        out = {
            "m": list(self.shape),
            "coeffs": self.symbol.coeffs.tolist(),
            "mass": self.symbol.mass,
            "omega_pre": self.omega_pre,
            "omega_post": self.omega_post,
            "zero": None if self.zero is None else {"location": list(self.zero.location), "order": self.zero.order},
        }
        if self.P is not None:
            out["projector"] = {"r": self.r, "coeffs": self.P.p.coeffs.tolist(), "mass": self.P.p.mass}
        return out


class ExactSolver:
    """Exact solve with a level operator: dense Cholesky when small, DCT diagonalization otherwise."""

    def __init__(self, A: Dct3Operator, dense_limit: int = DENSE_DIRECT_LIMIT):
        self.A = A
        self.dense = A.size <= dense_limit
        if self.dense:
            try:
                self._factor = linalg.cho_factor(A.materialize_dense(cap=dense_limit))
            except linalg.LinAlgError as exc:
                raise FactorizationError(f"level operator of size {A.shape} is not positive definite") from exc

    def __call__(self, b: np.ndarray) -> np.ndarray:
        if self.dense:
            return linalg.cho_solve(self._factor, b.ravel()).reshape(b.shape)
        return self.A.solve_spectral(b)


@dataclass(eq=False)
class Hierarchy:
    """Levels from finest (index 0) to coarsest, plus the coarsest exact solver."""

    levels: list
    coarsest_solver: ExactSolver = field(init=False, repr=False)
    _exact: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if not self.levels:
            raise UsageError("a hierarchy needs at least one level")
        self.coarsest_solver = self.exact_solver(len(self.levels) - 1)

    @property
    def dim(self) -> int:
        return self.levels[0].A.dim

    @property
    def shape(self) -> tuple:
        return self.levels[0].shape

    def __len__(self) -> int:
        return len(self.levels)

    def exact_solver(self, s: int) -> ExactSolver:
        if s not in self._exact:
            self._exact[s] = ExactSolver(self.levels[s].A)
        return self._exact[s]

    def summary(self) -> list:
        return [lvl.summary() for lvl in self.levels]


def _as_symbol(f) -> Symbol:
    if isinstance(f, Symbol):
        return f
    return Symbol(f if isinstance(f, CosPoly) else CosPoly(f))


def _shape(size, dim: int) -> tuple:
    shape = (int(size),) * dim if np.isscalar(size) else tuple(int(m) for m in size)
    if len(shape) != dim:
        raise UsageError(f"size {size} does not match dimension {dim}")
    for m in shape:
        if m < 2 or m & (m - 1):
            raise UsageError(f"grid size {m} is not a power of 2")
    return shape


def _check_zero(f: Symbol, zero: Optional[ZeroInfo]) -> None:
    """Reject symbols that are negative or do not vanish as declared."""
    vals = eval_grid(f.poly, *sample_axes(f.dim))
    scale = max(float(np.max(np.abs(vals))), 1e-300)
    if np.min(vals) < -1e-12 * scale:
        raise UsageError("the symbol takes negative values")
    if zero is None:
        if np.min(vals) <= 0:
            raise UsageError("a symbol without a declared zero must be positive")
        return
    if zero.dim != f.dim:
        raise UsageError("zero and symbol dimensions differ")
    if f.dim == 1:
        try:
            extract_psi(f.poly, zero.q, zero.location[0])
        except FactorizationError as exc:
            raise UsageError(f"symbol has no zero of order {zero.order} at {zero.location[0]}: {exc}") from exc
    elif abs(float(f.poly(*zero.point()))) > 1e-12 * scale:
        raise UsageError(f"symbol does not vanish at {zero.location}")


def build_hierarchy(
    f0,
    zero: Optional[ZeroInfo],
    size,
    *,
    r=None,
    coarsest: int = 16,
    max_levels: Optional[int] = None,
    omega_pre_scale: float = 1.0,
    omega_post_scale: float = 2.0,
    min_size: int = 16,
    projector_form: str = "auto",
) -> Hierarchy:
    """Set up the level operators, projectors and smoothing weights.

    Parameters
    ----------
    f0 : Symbol, CosPoly or array_like
        Finest symbol, nonnegative with the zero described by ``zero``. A zero
        at the origin is Strang-corrected here; pass an already corrected
        :class:`Symbol` (nonzero mass) to skip that.
    zero : ZeroInfo or None
        Location and order of the zero of ``f0``; ``None`` for a positive
        symbol, coarsened with ``(2 + 2cos x)^r`` projectors.
    size : int or tuple
        Finest grid, a power of 2 per dimension.
    r : int, optional
        Projector order applied at every level. The default follows the zero
        order at each level (``order / 2``).
    coarsest : int
        Stop once the grid is at most this size per dimension.
    max_levels : int, optional
        Cap on the number of levels (2 gives a two-grid hierarchy).
    omega_pre_scale, omega_post_scale : float
        Smoothing weights are ``scale / ||f_s||_inf``.
    min_size : int
        Smallest admissible finest grid per dimension.
    projector_form : {"auto", "product", "sum"}
        How 2D projector terms are combined, see :func:`projector_poly`.
    """
    f = _as_symbol(f0)
    dim = f.dim
    shape = _shape(size, dim)
    if min(shape) < min_size:
        raise UsageError(f"finest grid {shape} is smaller than {min_size}")
    if not (0 < omega_pre_scale <= 2 and 0 < omega_post_scale <= 2):
        raise UsageError("smoothing scales must lie in (0, 2]")
    if r is not None and (r == "auto"):
        r = None
    if r is not None and int(r) < 1:
        raise UsageError("projector order r must be >= 1")
    _check_zero(f, zero)
    if zero is not None and all(v == "0" for v in zero.location) and f.mass == 0:
        f = strang_correct(f.poly, shape)

    levels = []
    while True:
        A = from_symbol(shape, f)
        lam = A.eigenvalues()
        if np.min(lam) <= 0:
            raise ConsistencyError(f"level operator on grid {shape} is not positive definite")
        norm = sup_norm(f)
        last = min(shape) <= coarsest or (max_levels is not None and len(levels) + 1 >= max_levels)
        if last:
            levels.append(LevelData(shape, f, A, zero, omega_pre_scale / norm, omega_post_scale / norm))
            break
        z = ZeroInfo.at("0", 2, dim) if zero is None else zero
        r_s = int(r) if r is not None else z.q
        P = Projector(shape, projector_poly(z, r_s, shape, projector_form))
        levels.append(LevelData(shape, f, A, zero, omega_pre_scale / norm, omega_post_scale / norm, r_s, P))
        f = coarse_operator(A, P).symbol
        zero = None if zero is None else project_zero(zero)
        shape = P.coarse_shape
    log.debug("hierarchy: %s", [lvl.shape for lvl in levels])
    return Hierarchy(levels)


def richardson(A: Dct3Operator, x, b, omega: float, nu: int = 1) -> np.ndarray:
    """``nu`` steps of ``x <- x + omega (b - A x)``."""
    if nu < 0:
        raise UsageError("nu must be nonnegative")
    for _ in range(nu):
        x = x + omega * (b - A.matvec(x))
    return x


@dataclass
class SolveOptions:
    method: str = "vcycle"
    tol: float = 1e-7
    max_iters: int = 1000
    nu_pre: int = 1
    nu_post: int = 1
    rhs: str = "linear"
    seed: int = 42

    def __post_init__(self):
        if self.method not in ("tgm", "vcycle"):
            raise UsageError(f"unknown method {self.method!r}")
        if not self.tol > 0:
            raise UsageError("tol must be positive")
        if self.max_iters < 0 or self.nu_pre < 0 or self.nu_post < 0:
            raise UsageError("iteration counts must be nonnegative")
        if self.rhs not in RHS_MODES:
            raise UsageError(f"unknown rhs mode {self.rhs!r}")


@dataclass
class SolveReport:
    method: str
    iterations: int
    converged: bool
    residual_history: list
    levels: list
    elapsed_ms: float
    x: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def final_relative_residual(self) -> float:
        return self.residual_history[-1] if self.residual_history else 0.0

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "iterations": self.iterations,
            "converged": self.converged,
            "final_relative_residual": self.final_relative_residual,
            "residual_history": list(self.residual_history),
            "levels": self.levels,
            "elapsed_ms": self.elapsed_ms,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _cycle(h: Hierarchy, s: int, x, b, opts: SolveOptions, exact_at: int) -> np.ndarray:
    lvl = h.levels[s]
    if s == exact_at:
        return h.exact_solver(s)(b)
    x = richardson(lvl.A, x, b, lvl.omega_pre, opts.nu_pre)
    r = lvl.P.restrict(b - lvl.A.matvec(x))
    e = _cycle(h, s + 1, np.zeros_like(r), r, opts, exact_at)
    x = x + lvl.P.prolong(e)
    return richardson(lvl.A, x, b, lvl.omega_post, opts.nu_post)


def _iterate(h: Hierarchy, b, opts: SolveOptions, step: Callable) -> SolveReport:
    A = h.levels[0].A
    b = np.asarray(b, dtype=float).reshape(A.shape)
    t0 = time.perf_counter()
    x = np.zeros_like(b)
    bnorm = float(np.linalg.norm(b))
    history = []
    converged = bnorm == 0.0
    it = 0
    if not converged:
        while it < opts.max_iters:
            x = step(x, b)
            it += 1
            res = float(np.linalg.norm(b - A.matvec(x))) / bnorm
            history.append(res)
            if not np.isfinite(res):
                break
            if res <= opts.tol:
                converged = True
                break
    elapsed = (time.perf_counter() - t0) * 1e3
    log.info("%s: %d iterations, converged=%s", opts.method, it, converged)
    return SolveReport(opts.method, it, converged, history, h.summary(), elapsed, x)


def tgm_solve(h: Hierarchy, b, opts: Optional[SolveOptions] = None) -> SolveReport:
    """Two-grid iteration: levels 0 and 1 only, the level-1 problem solved exactly."""
    opts = opts or SolveOptions(method="tgm")
    if len(h) < 2:
        raise UsageError("the two-grid method needs at least two levels")
    opts = SolveOptions(**{**opts.__dict__, "method": "tgm"})
    return _iterate(h, b, opts, lambda x, b: _cycle(h, 0, x, b, opts, exact_at=1))


def vcycle_solve(h: Hierarchy, b, opts: Optional[SolveOptions] = None) -> SolveReport:
    """V-cycle iteration with one recursive call per level and an exact coarsest solve."""
    opts = opts or SolveOptions()
    opts = SolveOptions(**{**opts.__dict__, "method": "vcycle"})
    return _iterate(h, b, opts, lambda x, b: _cycle(h, 0, x, b, opts, exact_at=len(h) - 1))


def vcycle_once(h: Hierarchy, x, b, *, nu_pre: int = 1, nu_post: int = 1, exact_at: Optional[int] = None):
    """A single cycle from ``x``; ``exact_at=1`` gives one two-grid step."""
    opts = SolveOptions(nu_pre=nu_pre, nu_post=nu_post)
    return _cycle(h, 0, np.asarray(x, float), np.asarray(b, float), opts, len(h) - 1 if exact_at is None else exact_at)


def solve(h: Hierarchy, b, opts: Optional[SolveOptions] = None) -> SolveReport:
    opts = opts or SolveOptions()
    return tgm_solve(h, b, opts) if opts.method == "tgm" else vcycle_solve(h, b, opts)


def make_rhs(h: Hierarchy, mode: str = "linear", seed: int = 42) -> np.ndarray:
    """Right-hand side ``b = A u`` for a chosen exact solution ``u``.

    ``random``: ``u`` uniform on [0, 1) from ``seed``; ``ones``: ``u = e``;
    ``linear``: ``u`` ramps as ``j / N`` over the (row-major) unknowns;
    ``zero``: ``b = 0``.
    """
    A = h.levels[0].A
    if mode == "zero":
        return np.zeros(A.shape)
    if mode == "random":
        u = np.random.default_rng(seed).random(A.shape)
    elif mode == "ones":
        u = np.ones(A.shape)
    elif mode == "linear":
        u = (np.arange(1, A.size + 1, dtype=float) / A.size).reshape(A.shape)
    else:
        raise UsageError(f"unknown rhs mode {mode!r}; expected one of {RHS_MODES}")
    return A.matvec(u)
