import json

import numpy as np
import pytest

from dct3mg.errors import ConsistencyError, UsageError
from dct3mg.operator import from_symbol
from dct3mg.solver import (
    ExactSolver,
    SolveOptions,
    build_hierarchy,
    make_rhs,
    richardson,
    solve,
    tgm_solve,
    vcycle_once,
    vcycle_solve,
)
from dct3mg.symbol import CosPoly, Symbol, ZeroInfo

LAPLACE = CosPoly([2.0, -2.0])


def laplace_hierarchy(m, q=1, **kw):
    return build_hierarchy(LAPLACE**q, ZeroInfo.at("0", 2 * q), m, **kw)


def test_hierarchy_depth_and_masses():
    h = laplace_hierarchy(512)
    assert [lvl.shape[0] for lvl in h.levels] == [512, 256, 128, 64, 32, 16]
    assert h.levels[-1].P is None
    assert all(lvl.P is not None for lvl in h.levels[:-1])
    masses = [lvl.symbol.mass for lvl in h.levels]
    np.testing.assert_allclose(np.diff(np.log(masses)), np.log(16.0), rtol=1e-12)
    assert h.levels[0].omega_pre == pytest.approx(0.25)
    assert h.levels[0].omega_post == pytest.approx(0.5)


def test_two_grid_hierarchy():
    h = laplace_hierarchy(64, max_levels=2, coarsest=32)
    assert len(h) == 2 and h.shape == (64,) and h.dim == 1


def test_pi_zero_moves_to_origin():
    h = build_hierarchy(CosPoly([2.0, 2.0]), ZeroInfo.at("pi", 2), 64)
    assert h.levels[0].zero.location == ("pi",)
    assert h.levels[1].zero == ZeroInfo(("0",), 4)
    np.testing.assert_allclose(h.levels[1].symbol.coeffs, [3, -4, 1], atol=1e-12)
    assert h.levels[1].symbol.mass > 0


def test_hierarchy_2d():
    f = CosPoly(np.array([[4.0, -2.0], [-2.0, 0.0]]))
    h = build_hierarchy(f, ZeroInfo.at("0", 2, 2), (64, 64))
    assert [lvl.shape for lvl in h.levels] == [(64, 64), (32, 32), (16, 16)]


@pytest.mark.parametrize(
    "kwargs",
    [dict(size=100), dict(size=8), dict(size=64, omega_pre_scale=0), dict(size=64, omega_post_scale=2.5), dict(size=64, r=0)],
)
def test_hierarchy_usage_errors(kwargs):
    size = kwargs.pop("size")
    with pytest.raises(UsageError):
        build_hierarchy(LAPLACE, ZeroInfo.at("0", 2), size, **kwargs)


def test_hierarchy_rejects_wrong_zero():
    with pytest.raises((UsageError, ConsistencyError)):
        build_hierarchy(LAPLACE, ZeroInfo.at("pi", 2), 64)
    with pytest.raises((UsageError, ConsistencyError)):
        build_hierarchy(CosPoly([1.0, -2.0]), None, 64)


def test_richardson_examples():
    A = from_symbol(4, [1.0])
    b = np.arange(4.0)
    np.testing.assert_allclose(richardson(A, np.zeros(4), b, 1.0), b)
    np.testing.assert_allclose(richardson(A, np.zeros(4), b, 0.5, nu=2), 0.75 * b)


def test_exact_solver_dense_and_spectral_agree():
    A = from_symbol(64, Symbol([2.0, -2.0], 0.1))
    b = np.random.default_rng(0).normal(size=64)
    np.testing.assert_allclose(ExactSolver(A)(b), ExactSolver(A, dense_limit=0)(b), atol=1e-10)
    np.testing.assert_allclose(A.matvec(ExactSolver(A)(b)), b, atol=1e-10)


def test_zero_rhs_needs_no_iterations():
    h = laplace_hierarchy(64)
    rep = vcycle_solve(h, np.zeros(64))
    assert rep.iterations == 0 and rep.converged
    np.testing.assert_array_equal(rep.x, 0)


def test_frozen_iteration_counts():
    h = laplace_hierarchy(256, max_levels=2, coarsest=128)
    assert tgm_solve(h, make_rhs(h)).iterations == 7
    h = laplace_hierarchy(128, q=3, r=3, max_levels=2, coarsest=64)
    assert tgm_solve(h, make_rhs(h)).iterations == 35
    h = laplace_hierarchy(256, q=2, r=2)
    assert vcycle_solve(h, make_rhs(h)).iterations == 16


def test_converged_solution_is_accurate():
    h = laplace_hierarchy(128)
    u = np.arange(1, 129) / 128
    rep = vcycle_solve(h, make_rhs(h), SolveOptions(tol=1e-12))
    assert rep.converged
    np.testing.assert_allclose(rep.x, u, atol=1e-8)
    assert rep.final_relative_residual <= 1e-12


def test_a_norm_error_decreases_monotonically():
    h = laplace_hierarchy(64, q=2)
    A = h.levels[0].A
    u = np.random.default_rng(3).normal(size=64)
    b = A.matvec(u)
    x = np.zeros(64)
    prev = np.inf
    for _ in range(8):
        x = vcycle_once(h, x, b)
        e = x - u
        err = float(e @ A.matvec(e))
        assert err < prev
        prev = err


def test_exact_coarse_correction_kills_restricted_residual():
    h = laplace_hierarchy(64, max_levels=2, coarsest=32)
    lvl = h.levels[0]
    b = np.random.default_rng(4).normal(size=64)
    x = np.zeros(64)
    e = h.exact_solver(1)(lvl.P.restrict(b - lvl.A.matvec(x)))
    x = x + lvl.P.prolong(e)
    assert np.max(np.abs(lvl.P.restrict(b - lvl.A.matvec(x)))) <= 1e-10 * np.linalg.norm(b)


def test_deterministic():
    h = laplace_hierarchy(64)
    b = make_rhs(h, "random", seed=7)
    r1, r2 = solve(h, b), solve(h, b)
    assert r1.residual_history == r2.residual_history
    np.testing.assert_array_equal(r1.x, r2.x)


def test_make_rhs_modes():
    h = laplace_hierarchy(32)
    A = h.levels[0].A
    np.testing.assert_array_equal(make_rhs(h, "zero"), 0)
    np.testing.assert_allclose(make_rhs(h, "ones"), A.matvec(np.ones(32)))
    np.testing.assert_allclose(make_rhs(h, "linear"), A.matvec(np.arange(1, 33) / 32))
    np.testing.assert_array_equal(make_rhs(h, "random", 1), make_rhs(h, "random", 1))
    assert not np.array_equal(make_rhs(h, "random", 1), make_rhs(h, "random", 2))
    with pytest.raises(UsageError):
        make_rhs(h, "bogus")


def test_options_validation():
    with pytest.raises(UsageError):
        SolveOptions(method="w")
    with pytest.raises(UsageError):
        SolveOptions(tol=0)


def test_report_json():
    h = laplace_hierarchy(32)
    rep = solve(h, make_rhs(h), SolveOptions(method="tgm"))
    d = json.loads(rep.to_json())
    assert d["method"] == "tgm"
    assert d["iterations"] == len(d["residual_history"])
    assert d["converged"] is True
    assert len(d["levels"]) == len(h)
