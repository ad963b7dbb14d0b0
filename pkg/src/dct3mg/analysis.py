"""Convergence diagnostics: smoothing and approximation constants, the level-wise
delta of the V-cycle bound, measured A-norm contraction and dense structural checks.

Everything here works on small dense matrices or on symbols and is meant for
verification, not for use inside the solver.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import transform
from .coarsening import cut_matrix
from .errors import FactorizationError, StructuralError, UsageError
from .solver import Hierarchy, vcycle_once
from .symbol import CosPoly, Symbol, extract_psi, min_max, psi_step, sup_norm

#: default dense caps for measured_contraction (unknowns)
CONTRACTION_CAP = {1: 256, 2: 32 * 32}


def smoothing_constants(f, omega: float) -> tuple:
    """Largest admissible ``(alpha, beta)`` for Richardson with weight ``omega``.

    ``alpha = omega min{2, (2 - omega N) / (1 - omega N)^2}`` and
    ``beta = omega (2 - omega N)`` with ``N = ||f||_inf``.
    """
    norm = sup_norm(f)
    t = omega * norm
    if not (0 < omega and t <= 2 * (1 + 1e-12)):
        raise UsageError(f"omega must lie in (0, 2/||f||] = (0, {2 / norm:.6g}], got {omega}")
    t = min(t, 2.0)
    if t == 1.0:
        alpha = 2 * omega
    else:
        alpha = omega * min(2.0, (2 - t) / (1 - t) ** 2)
    beta = omega * (2 - t)
    return float(alpha), float(beta)


def psi_of(f, q: int, location: str = "0") -> CosPoly:
    """Positive factor of ``f``; ``q = 0`` means ``f`` has no zero and is its own factor."""
    poly = f.poly if isinstance(f, Symbol) else (f if isinstance(f, CosPoly) else CosPoly(f))
    if q == 0:
        if min_max(poly)[0] <= 0:
            raise UsageError("a symbol without a zero must be positive")
        return poly
    return extract_psi(poly, q, location)


def approx_constant(f, q: int, location: str = "0") -> float:
    """``gamma* = max(psi) / min(psi)^2`` for the positive factor ``psi`` of ``f``."""
    lo, hi = min_max(psi_of(f, q, location))
    return hi / lo**2


def psi_chain(q: int, levels: int, psi0=None, p=None) -> list:
    """Iterates ``psi_{s+1} = Phi(psi_s)`` with ``p = (1 + cos)^q`` by default."""
    p = CosPoly([1.0, 1.0]) ** q if p is None else p
    psi = CosPoly([2.0**q]) if psi0 is None else (psi0 if isinstance(psi0, CosPoly) else CosPoly(psi0))
    out = [psi]
    for _ in range(levels):
        psi = psi_step(psi, q, p)
        out.append(psi)
    return out


def psi_fixed_point(q: int, psi0=None, p=None) -> CosPoly:
    """Fixed point of the linear map ``Phi`` on polynomials of degree ``q``.

    Computed as the eigenvector for the eigenvalue closest to 1, scaled so
    that ``psi(0)`` matches ``psi0(0)``, which ``Phi`` preserves.
    """
    p = CosPoly([1.0, 1.0]) ** q if p is None else p
    psi0 = CosPoly([2.0**q]) if psi0 is None else (psi0 if isinstance(psi0, CosPoly) else CosPoly(psi0))
    n = q + 1
    M = np.zeros((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        img = psi_step(CosPoly(e), q, p).coeffs
        M[: min(n, img.size), j] = img[:n]
    w, V = np.linalg.eig(M)
    k = int(np.argmin(np.abs(w - 1.0)))
    v = np.real(V[:, k])
    return CosPoly(v * (float(psi0(0.0)) / v.sum()))


@dataclass
class LevelTheory:
    s: int
    m: int
    q: int
    location: str
    omega_pre: float
    omega_post: float
    alpha: float
    beta: float
    gamma: float
    mu_inf: float
    M_psi: float
    m_psi: float
    lower_bound: float


@dataclass
class TheoryReport:
    """Per-level constants and the resulting V-cycle contraction bound."""

    levels: list
    accounting: str
    adjoint_swap: bool
    delta_pre: float
    delta_post: float
    bound: float
    mu_bounded: bool
    rho: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _mu_bounded(mus: list, tol: float = 1e-9) -> bool:
    """Bounded-growth test: increments non-increasing from the largest one onward."""
    if len(mus) < 3:
        return True
    inc = np.diff(mus)
    tail = inc[int(np.argmax(inc)) :]
    return bool(np.all(tail[1:] <= tail[:-1] + tol * max(1.0, max(mus))))


def levelwise_delta(h: Hierarchy, accounting: str = "post") -> TheoryReport:
    """Smoothing/approximation constants per level and the resulting bound.

    ``accounting`` picks which smoother enters the bound: ``"post"`` (pre
    ignored, ``bound = sqrt(1 - delta_post)``), ``"pre"`` (``1/sqrt(1 + delta_pre)``)
    or ``"both"``. The V-cycle with pre/post weights swapped is the A-adjoint
    of the original, so both have the same A-norm; when the configured
    post-smoother has ``beta = 0`` (weight ``2/||f||``) the roles are swapped.
    """
    if accounting not in ("post", "pre", "both"):
        raise UsageError(f"unknown accounting {accounting!r}")
    if len(h) < 2:
        raise UsageError("level-wise delta needs at least two levels")
    if h.dim != 1:
        raise UsageError("theory diagnostics are implemented for 1D hierarchies")
    swap = False
    if accounting != "pre":
        lvl = h.levels[0]
        swap = smoothing_constants(lvl.symbol, lvl.omega_post)[1] < smoothing_constants(lvl.symbol, lvl.omega_pre)[1]
    out = []
    for s, lvl in enumerate(h.levels[:-1]):
        w_pre, w_post = (lvl.omega_post, lvl.omega_pre) if swap else (lvl.omega_pre, lvl.omega_post)
        alpha = smoothing_constants(lvl.symbol, w_pre)[0]
        beta = smoothing_constants(lvl.symbol, w_post)[1]
        q, loc = (0, "none") if lvl.zero is None else (lvl.zero.q, lvl.zero.location[0])
        try:
            psi = psi_of(lvl.symbol, q, loc)
        except FactorizationError as exc:
            raise FactorizationError(f"level {s} (m={lvl.shape[0]}): {exc}") from exc
        lo, hi = min_max(psi)
        out.append(
            LevelTheory(
                s=s,
                m=lvl.shape[0],
                q=q,
                location=loc,
                omega_pre=w_pre,
                omega_post=w_post,
                alpha=alpha,
                beta=beta,
                gamma=hi / lo**2,
                mu_inf=hi / lo,
                M_psi=hi,
                m_psi=lo,
                lower_bound=1.0 / (2**q * (hi / lo) ** 2),
            )
        )
    d_pre = min(l.alpha / l.gamma for l in out) if accounting in ("pre", "both") else 0.0
    d_post = min(l.beta / l.gamma for l in out) if accounting in ("post", "both") else 0.0
    if d_post > 1 + 1e-12:
        raise StructuralError(f"delta_post = {d_post} exceeds 1")
    d_post = min(d_post, 1.0)
    bound = float(np.sqrt((1 - d_post) / (1 + d_pre)))
    mus = [l.mu_inf for l in out if l.location != "pi"]
    return TheoryReport(out, accounting, swap, d_pre, d_post, bound, _mu_bounded(mus))


def error_matrix(h: Hierarchy, exact_at: Optional[int] = None) -> np.ndarray:
    """Dense error propagation of one cycle (``b = 0``) applied to each basis vector."""
    A = h.levels[0].A
    n = A.size
    cols = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        cols.append(vcycle_once(h, e.reshape(A.shape), np.zeros(A.shape), exact_at=exact_at).ravel())
    return np.column_stack(cols)


def a_norm(E: np.ndarray, A: np.ndarray) -> float:
    """``||A^{1/2} E A^{-1/2}||_2`` for symmetric positive definite ``A``."""
    w, V = np.linalg.eigh(A)
    if w.min() <= 0:
        raise UsageError("operator is not positive definite")
    half = (V * np.sqrt(w)) @ V.T
    ihalf = (V / np.sqrt(w)) @ V.T
    return float(np.linalg.norm(half @ E @ ihalf, 2))


def measured_contraction(h: Hierarchy, cap: Optional[int] = None, exact_at: Optional[int] = None) -> float:
    """A-norm of the V-cycle (or two-grid, ``exact_at=1``) error operator, computed exactly by SVD."""
    A = h.levels[0].A
    cap = CONTRACTION_CAP[A.dim] if cap is None else cap
    if A.size > cap:
        raise UsageError(f"{A.size} unknowns exceed the dense cap {cap}")
    return a_norm(error_matrix(h, exact_at), A.dense_spectral())


@dataclass
class CuttingIdentity:
    """``T Q_m = Q_{m/2} [Phi, Theta Pi]`` with the resolved permutation and signs."""

    m: int
    residual: float
    phi: np.ndarray
    theta: np.ndarray
    perm: np.ndarray
    signs: np.ndarray


def verify_cutting_identity(m: int) -> CuttingIdentity:
    """Resolve the block structure of ``Q_{m/2}^T T Q_m`` and return the fit residual.

    The left block must be ``diag(cos(x_j / 2))``. Each column ``k`` of the
    right block is matched to the coarse row holding its largest entry; its
    magnitude must be ``sin(x_i / 2)`` for that row ``i``. A zero column is
    assigned to the remaining row, where ``sin(0) = 0``.
    """
    if m < 2 or m % 2 or m > 512:
        raise UsageError("m must be even and at most 512")
    n = m // 2
    M = transform.dct3_matrix(n).T @ cut_matrix(m) @ transform.dct3_matrix(m)
    x_fine = transform.grid(m)[:n]
    x_coarse = transform.grid(m)[:n]
    phi = np.cos(x_fine / 2)
    right = M[:, n:]
    perm = np.full(n, -1)
    signs = np.zeros(n)
    scale = np.max(np.abs(right), axis=0)
    for k in np.argsort(-scale):
        if scale[k] <= 1e-12:
            continue
        i = int(np.argmax(np.abs(right[:, k])))
        if i in perm:
            raise StructuralError(f"two columns map to coarse row {i}")
        perm[k] = i
        signs[k] = np.sign(right[i, k])
    free = sorted(set(range(n)) - set(perm.tolist()))
    for k in np.where(perm < 0)[0]:
        if not free:
            raise StructuralError("no consistent permutation")
        perm[k] = free.pop(0)
        signs[k] = 1.0
    theta = np.sin(x_coarse / 2)
    model = np.zeros_like(M)
    model[:, :n] = np.diag(phi)
    model[perm, n + np.arange(n)] = signs * theta[perm]
    residual = float(np.max(np.abs(M - model)))
    return CuttingIdentity(m, residual, phi, theta, perm, signs)


# ---- dense helpers for the inequality suites ----


def richardson_matrix(A: np.ndarray, omega: float, nu: int = 1) -> np.ndarray:
    S = np.eye(A.shape[0]) - omega * A
    return np.linalg.matrix_power(S, nu)


def coarse_grid_correction(A: np.ndarray, P: np.ndarray) -> np.ndarray:
    """``I - P^T (P A P^T)^{-1} P A``."""
    return np.eye(A.shape[0]) - P.T @ np.linalg.solve(P @ A @ P.T, P @ A)


def _norm2(x, M):
    return float(x @ (M @ x))


def smoothing_violations(A: np.ndarray, omega: float, alpha: float, beta: float, xs) -> tuple:
    """Largest relative violations of the pre- and post-smoothing inequalities."""
    V = richardson_matrix(A, omega)
    A2 = A @ A
    pre = post = 0.0
    for x in xs:
        vx = V @ x
        lhs = _norm2(vx, A)
        ref = _norm2(x, A)
        pre = max(pre, (lhs - (ref - alpha * _norm2(vx, A2))) / ref)
        post = max(post, (lhs - (ref - beta * _norm2(x, A2))) / ref)
    return pre, post


def approximation_violation(A: np.ndarray, P: np.ndarray, gamma: float, xs) -> float:
    """Largest relative violation of ``||CGC x||_A^2 <= gamma ||x||_{A^2}^2``."""
    W = coarse_grid_correction(A, P)
    A2 = A @ A
    worst = 0.0
    for x in xs:
        rhs = gamma * _norm2(x, A2)
        worst = max(worst, (_norm2(W @ x, A) - rhs) / max(rhs, 1e-300))
    return worst
