"""Reference iteration counts and the runner that reproduces them.

Each table is a grid of (zero, q, r) columns by finest sizes 16..512 (per
dimension), for the two-grid and the V-cycle method. ``None`` marks cells the
reference leaves empty. The V-cycle entry at 16 is always 1: that grid is the
coarsest one and is solved directly.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import UsageError
from .solver import SolveOptions, build_hierarchy, make_rhs, tgm_solve, vcycle_solve
from .symbol import CosPoly, ZeroInfo

SIZES = (16, 32, 64, 128, 256, 512)

# (zero location, q, r) -> counts over SIZES
TABLES = {
    1: {
        "dim": 1,
        "tgm": {
            ("0", 1, 1): [7, 7, 7, 7, 7, 7],
            ("0", 2, 1): [15, 16, 16, 16, 16, 16],
            ("0", 2, 2): [13, 15, 16, 16, 16, 16],
            ("0", 3, 2): [34, 35, 35, 35, 35, 35],
            ("0", 3, 3): [32, 34, 35, 35, 35, 35],
        },
        "vcycle": {
            ("0", 1, 1): [1, 7, 7, 7, 7, 7],
            ("0", 2, 1): [1, 16, 17, 18, 18, 18],
            ("0", 2, 2): [1, 15, 16, 16, 16, 16],
            ("0", 3, 2): [1, 34, 35, 35, 35, 35],
            ("0", 3, 3): [1, 32, 34, 35, 35, 35],
        },
    },
    2: {
        "dim": 2,
        "tgm": {
            ("0", 1, 1): [15, 16, 16, 16, 16, 16],
            ("0", 2, 1): [34, 36, 36, 36, 36, 36],
            ("0", 2, 2): [30, 35, 36, 36, 36, 36],
            ("0", 3, 2): [None, 71, 74, 74, 74, 74],
            ("0", 3, 3): [None, 67, 73, 73, 73, 73],
        },
        "vcycle": {
            ("0", 1, 1): [1, 16, 16, 16, 16, 16],
            ("0", 2, 1): [1, 36, 36, 36, 37, 37],
            ("0", 2, 2): [1, 35, 36, 36, 36, 36],
            ("0", 3, 2): [1, 71, 74, 74, 74, 74],
            ("0", 3, 3): [1, 67, 73, 73, 73, 73],
        },
    },
    3: {
        "dims": (1, 2),
        "tgm": {
            (1, "pi", 1, None): [15, 14, 12, 11, 10, 8],
            (2, "pi", 1, None): [7, 7, 7, 7, 7, 7],
        },
        "vcycle": {
            (1, "pi", 1, None): [1, 14, 13, 13, 12, 10],
            (2, "pi", 1, None): [1, 7, 7, 6, 6, 6],
        },
    },
}


def tolerance(table: int, q: int) -> int:
    """Allowed absolute deviation in iteration count."""
    if table == 3:
        return 3
    if table == 2 and q == 3:
        return 3
    return 2


def finest_symbol(dim: int, location: str, q: int) -> CosPoly:
    """``(2 -+ 2cos x)^q``, summed over the variables in 2D."""
    base = (CosPoly([2.0, -2.0 if location == "0" else 2.0]) ** q).coeffs
    if dim == 1:
        return CosPoly(base)
    c = np.zeros((base.size, base.size))
    c[:, 0] += base
    c[0, :] += base
    return CosPoly(c)


@dataclass
class Cell:
    table: int
    dim: int
    location: str
    q: int
    r: Optional[int]
    m: int
    method: str
    expected: Optional[int]
    tol: int
    iterations: Optional[int] = None
    converged: Optional[bool] = None
    elapsed_ms: Optional[float] = None

    @property
    def skipped(self) -> bool:
        return self.expected is None

    @property
    def passed(self) -> bool:
        if self.skipped:
            return True
        return bool(self.converged) and abs(self.iterations - self.expected) <= self.tol

    def label(self) -> str:
        r = "auto" if self.r is None else self.r
        size = f"{self.m}^2" if self.dim == 2 else str(self.m)
        return f"table {self.table} {self.dim}D zero={self.location} q={self.q} r={r} m={size} {self.method}"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        d["skipped"] = self.skipped
        return d


def cells(table: int, sizes=SIZES, methods=("tgm", "vcycle")) -> list:
    """All cells of a table, in a fixed order."""
    if table not in TABLES:
        raise UsageError(f"unknown table {table}; expected one of {sorted(TABLES)}")
    entry = TABLES[table]
    out = []
    for method in methods:
        for key, counts in entry[method].items():
            if table == 3:
                dim, loc, q, r = key
            else:
                dim = entry["dim"]
                loc, q, r = key
            for m, expected in zip(SIZES, counts):
                if m in sizes:
                    out.append(Cell(table, dim, loc, q, r, m, method, expected, tolerance(table, q)))
    return out


def run_cell(cell: Cell, rhs: str = "linear", seed: int = 42, tol: float = 1e-7, max_iters: int = 1000, **setup) -> Cell:
    """Solve one table cell and fill in its result."""
    if cell.skipped:
        return cell
    f = finest_symbol(cell.dim, cell.location, cell.q)
    zero = ZeroInfo.at(cell.location, 2 * cell.q, cell.dim)
    if cell.method == "tgm":
        h = build_hierarchy(f, zero, cell.m, r=cell.r, max_levels=2, coarsest=cell.m // 2, **setup)
        solve = tgm_solve
    else:
        h = build_hierarchy(f, zero, cell.m, r=cell.r, **setup)
        solve = vcycle_solve
    opts = SolveOptions(method=cell.method, tol=tol, max_iters=max_iters, rhs=rhs, seed=seed)
    rep = solve(h, make_rhs(h, rhs, seed), opts)
    cell.iterations, cell.converged, cell.elapsed_ms = rep.iterations, rep.converged, rep.elapsed_ms
    return cell


def _run(args):
    cell, kw = args
    return run_cell(cell, **kw)


def reproduce(table: int, sizes=SIZES, methods=("tgm", "vcycle"), jobs: int = 1, **kw) -> list:
    """Run every cell of ``table``; results come back in table order regardless of ``jobs``."""
    todo = cells(table, sizes, methods)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run, [(c, kw) for c in todo]))
    return [run_cell(c, **kw) for c in todo]
