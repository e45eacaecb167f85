import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ultraweak.errors import DefinitenessError, FactorizationError, ShapeError, SymmetryError
from ultraweak.linsolve import (
    BlockRealSystem,
    check_hermitian,
    generalized_sym_eig_extremes,
    hermitian_eig_extremes,
    solve_block_real,
    solve_complex,
)


def random_hpd(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return A @ A.conj().T + n * np.eye(n)


@settings(max_examples=20, deadline=None)
@given(n=st.integers(1, 30), seed=st.integers(0, 10_000))
def test_block_real_matches_complex(n, seed):
    S = random_hpd(n, seed)
    g = np.random.default_rng(seed + 1).standard_normal(n) * (1 + 1j)
    a, b = solve_complex(S, g), solve_block_real(S, g)
    assert np.linalg.norm(a.u - b.u) <= 1e-10 * np.linalg.norm(a.u)
    assert a.relative_residual < 1e-12 and b.relative_residual < 1e-12


def test_block_roundtrip():
    S = random_hpd(4, 3)
    g = np.arange(4) + 1j
    blk = BlockRealSystem.from_complex(S, g)
    S2, g2 = blk.to_complex()
    np.testing.assert_array_equal(S2, S)
    np.testing.assert_array_equal(g2, g)
    assert blk.matrix.shape == (8, 8)


def test_singular_reports_pivot():
    S = np.diag([1.0, 2.0, 0.0, 3.0]).astype(complex)
    with pytest.raises(FactorizationError) as info:
        solve_complex(S, np.ones(4))
    assert info.value.pivot == 2
    with pytest.raises(FactorizationError):
        solve_block_real(S, np.ones(4))


def test_shape_error():
    with pytest.raises(ShapeError):
        solve_complex(np.ones((2, 3)), np.ones(2))


def test_residual_is_reported():
    S = random_hpd(5, 1)
    res = solve_complex(S, np.ones(5))
    assert res.residual == pytest.approx(np.linalg.norm(S @ res.u - 1), abs=1e-14)
    assert res.method == "complex"
    zero = solve_complex(S, np.zeros(5))
    assert zero.relative_residual == 0.0 and not np.any(zero.u)


def test_hermitian_checks():
    check_hermitian(random_hpd(3, 2))
    with pytest.raises(SymmetryError):
        check_hermitian(np.array([[1, 1j], [1j, 1]]))
    lo, hi = hermitian_eig_extremes(np.diag([3.0, 1.0, 2.0]))
    assert (lo, hi) == (1.0, 3.0)


def test_generalized_eig():
    A = np.diag([2.0, 8.0])
    B = np.diag([1.0, 2.0])
    assert generalized_sym_eig_extremes(A, B) == pytest.approx((2.0, 4.0))
    with pytest.raises(DefinitenessError):
        generalized_sym_eig_extremes(A, np.diag([1.0, -1.0]))
