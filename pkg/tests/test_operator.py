import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from dct3mg.errors import UsageError
from dct3mg.operator import dense_entries, from_symbol
from dct3mg.symbol import CosPoly, Symbol


def test_from_symbol_examples():
    np.testing.assert_allclose(from_symbol(2, [2, -2]).materialize_dense(), [[1, -1], [-1, 1]], atol=1e-15)
    A3 = from_symbol(3, [2, -2]).materialize_dense()
    np.testing.assert_allclose(A3, [[1, -1, 0], [-1, 2, -1], [0, -1, 1]], atol=1e-15)
    np.testing.assert_allclose(np.linalg.eigvalsh(A3), [0, 1, 3], atol=1e-14)
    np.testing.assert_allclose(from_symbol(3, [1]).materialize_dense(), np.eye(3))


def test_degree_and_size_checks():
    with pytest.raises(UsageError):
        from_symbol(2, [1, 1, 1])
    with pytest.raises(UsageError):
        from_symbol(1, [1])
    with pytest.raises(UsageError):
        from_symbol((4,), np.ones((2, 2)))


def test_eigenvalues_examples():
    np.testing.assert_allclose(from_symbol(4, [2, -2]).eigenvalues(), [0, 2 - np.sqrt(2), 2, 2 + np.sqrt(2)], atol=1e-15)
    lam = from_symbol(4, Symbol([2, -2], 0.7)).eigenvalues()
    assert lam[0] == pytest.approx(0.7)
    np.testing.assert_allclose(from_symbol(5, [1]).eigenvalues(), np.ones(5))


def test_matvec_examples():
    A = from_symbol(3, [2, -2])
    np.testing.assert_allclose(A.matvec(np.ones(3)), 0, atol=1e-15)
    v = np.random.default_rng(0).normal(size=7)
    np.testing.assert_allclose(from_symbol(7, [1]).matvec(v), v)
    B = from_symbol(2, Symbol([2, -2], 1.0))
    np.testing.assert_allclose(B.matvec([1.0, 0.0]), [1.5, -0.5])
    np.testing.assert_allclose((B @ np.array([1.0, 0.0])), [1.5, -0.5])


def test_matvec_size_mismatch():
    with pytest.raises(UsageError):
        from_symbol(4, [1]).matvec(np.ones(5))


def test_entry_formula_matches_spectral():
    rng = np.random.default_rng(1)
    for m in (4, 8, 16, 33):
        sym = Symbol(rng.normal(size=4), 0.2)
        A = from_symbol(m, sym)
        np.testing.assert_allclose(dense_entries(m, sym), A.dense_spectral(), atol=1e-12)
        np.testing.assert_allclose(A.materialize_dense(), dense_entries(m, sym), atol=1e-12)


symbols = st.tuples(
    st.lists(st.floats(-2, 2, allow_nan=False), min_size=1, max_size=5),
    st.sampled_from([0.0, 0.3]),
    st.sampled_from([4, 8, 16, 32, 64]),
)


@settings(max_examples=50, deadline=None)
@given(symbols, st.integers(0, 2**31 - 1))
def test_banded_matches_spectral(data, seed):
    coeffs, mass, m = data
    assume(len(coeffs) <= m)
    A = from_symbol(m, Symbol(coeffs, mass))
    v = np.random.default_rng(seed).normal(size=m)
    scale = max(1.0, np.abs(coeffs).sum() + mass)
    assert np.max(np.abs(A.matvec(v) - A.matvec_spectral(v))) <= 1e-10 * scale * np.linalg.norm(v)
    assert np.max(np.abs(A.matvec_spectral(v, dense=True) - A.matvec(v))) <= 1e-10 * scale * np.linalg.norm(v)


def test_2d_banded_matches_spectral():
    rng = np.random.default_rng(2)
    for shape in ((8, 8), (8, 4), (16, 8)):
        A = from_symbol(shape, Symbol(rng.normal(size=(3, 2)), 0.4))
        V = rng.normal(size=shape)
        np.testing.assert_allclose(A.matvec(V), A.matvec_spectral(V), atol=1e-10)
        np.testing.assert_allclose(A.materialize_dense(), A.dense_spectral(), atol=1e-10)


def test_symmetric_and_psd():
    rng = np.random.default_rng(3)
    for _ in range(10):
        A = from_symbol(16, Symbol(CosPoly([2, -2]) ** 2)).materialize_dense()
        assert np.allclose(A, A.T, atol=1e-13)
        assert np.linalg.eigvalsh(A).min() >= -1e-12 * 16
        v, w = rng.normal(size=(2, 16))
        assert v @ (A @ w) == pytest.approx(w @ (A @ v), rel=1e-12)


def test_positive_definite_with_mass():
    A = from_symbol(16, Symbol([2, -2], 0.1)).materialize_dense()
    assert np.linalg.eigvalsh(A).min() > 0


def test_bandwidth_and_flops_linear_in_m():
    f = CosPoly([2, -2]) ** 2
    assert from_symbol(32, f).bandwidth == 5
    assert from_symbol((8, 8), Symbol(np.ones((2, 3)))).bandwidth == (3, 5)
    per = [from_symbol(m, f).matvec_flops() / m for m in (64, 256, 1024, 4096)]
    assert max(per) <= 2 * min(per)


def test_dense_cap():
    with pytest.raises(UsageError):
        from_symbol(64, [1]).materialize_dense(cap=32)
