import numpy as np
import pytest
import sympy as sp

from oracles import adjoint_images, brute_force_gram, gauss_points, scipy_basis
from ultraweak.assembly import (
    Factor,
    SeparablePotential,
    Variant,
    adjoint_image_terms,
    assemble_bundle,
    assemble_general_system,
    assemble_optimal_system,
    assemble_rhs,
    general_matrix,
    optimal_matrix,
)
from ultraweak.errors import IncompleteBundleError, InvalidOrderError, ShapeError
from ultraweak.quadrature import gauss_legendre
from ultraweak.reference import u0_nonsmooth, u0_smooth
from ultraweak.splines import Constraint, Mesh1D, SplineSpace, collocation, make_spatial_space, make_temporal_space

SINE = SeparablePotential(lambda t: 1.0 + t, lambda x: np.sin(np.pi * x), "sine")


def spaces(js, jt, pt=3, px=4):
    return make_temporal_space(jt, pt), make_spatial_space(js, px)


def test_linear_mass_stencil():
    xs = SplineSpace(Mesh1D(0, 1, 3), 2)
    x, w = gauss_points(0, 1, 8, 3)
    B = collocation(xs, x)
    M = B.T @ (w[:, None] * B)
    h = 1 / 8
    np.testing.assert_allclose(M[3, 2:5], h * np.array([1 / 6, 2 / 3, 1 / 6]), atol=1e-15)
    assert np.count_nonzero(np.abs(M) > 1e-15) == 3 * 9 - 2


def test_unit_potential_collapses_weights():
    ts, xs = spaces(2, 2)
    one = SeparablePotential(lambda t: 1.0 + 0 * t, lambda x: 1.0 + 0 * x)
    b = assemble_bundle(ts, xs, one)
    np.testing.assert_allclose(b.Theta_dt, b.N_t, atol=1e-14)
    np.testing.assert_allclose(b.Theta_m, b.M_t, atol=1e-14)
    np.testing.assert_allclose(b.Theta_sq, b.M_t, atol=1e-14)
    np.testing.assert_allclose(b.Xi_m, b.M_x, atol=1e-14)
    np.testing.assert_allclose(b.Xi_lap, b.N_x, atol=1e-14)
    np.testing.assert_allclose(b.Xi_sq, b.M_x, atol=1e-14)
    assert not assemble_bundle(ts, xs).has_potential


def test_laplacian_gram_symbolic():
    x = sp.symbols("x")
    knots = [0] * 4 + [sp.Rational(k, 4) for k in (1, 2, 3)] + [1] * 4
    basis = sp.bspline_basis_set(3, knots, x)[1:-1]
    d2 = [sp.diff(b, x, 2) for b in basis]
    edges = [sp.Rational(k, 4) for k in range(5)]

    def integrate(f):
        return sum(sp.integrate(f.subs(x, (lo + hi) / 2 + (x - (lo + hi) / 2)).rewrite(sp.Piecewise), (x, lo, hi))
                   for lo, hi in zip(edges[:-1], edges[1:]))

    b = assemble_bundle(make_temporal_space(1, 3), make_spatial_space(2, 4))
    for i in (0, 1):
        for j in (0, 1):
            assert b.A_x[i, j] == pytest.approx(float(integrate(d2[i] * d2[j])), abs=1e-10)


def test_bundle_invariants():
    ts, xs = spaces(3, 4)
    b = assemble_bundle(ts, xs)
    for M in (b.M_t, b.M_x):
        np.testing.assert_allclose(M, M.T, atol=1e-15)
        assert np.linalg.eigvalsh(M).min() > 0
    assert np.linalg.eigvalsh(b.A_t).min() > 0
    np.testing.assert_allclose(b.N_x, b.N_x.T, atol=1e-12)
    np.testing.assert_allclose(b.N_x, -b.K_x, atol=1e-12)
    np.testing.assert_allclose(b.N_t + b.N_t.T, -np.outer(b.r0, b.r0), atol=1e-12)


def test_unconstrained_time_gram_is_singular():
    ts = make_temporal_space(2, 3).with_constraint(Constraint.NONE)
    b = assemble_bundle(ts, make_spatial_space(2, 4))
    assert np.linalg.eigvalsh(b.A_t).min() < 1e-12


def test_free_particle_formula():
    ts, xs = spaces(2, 2)
    b = assemble_bundle(ts, xs)
    S = assemble_optimal_system(b).S
    k = np.kron
    expected = k(b.A_t, b.M_x) + 0.25 * k(b.M_t, b.A_x) + 0.5j * (k(b.N_t.T, b.N_x) - k(b.N_t, b.N_x.T))
    np.testing.assert_allclose(S, expected, atol=1e-14)


@pytest.mark.parametrize("js,jt", [(1, 0), (1, 1), (2, 1)])
def test_brute_force_gram_free(js, jt):
    ts, xs = spaces(js, jt)
    S = optimal_matrix(assemble_bundle(ts, xs))
    np.testing.assert_allclose(S, brute_force_gram(ts, xs, npts=8), atol=1e-12)


def test_brute_force_gram_potential():
    ts, xs = spaces(1, 1)
    q = gauss_legendre(10)
    S = optimal_matrix(assemble_bundle(ts, xs, SINE, q), SINE)
    np.testing.assert_allclose(S, brute_force_gram(ts, xs, SINE.theta, SINE.xi, npts=10), atol=1e-12)


@pytest.mark.parametrize("pot", [None, SINE])
def test_optimal_system_structure(pot):
    for js, jt in [(1, 0), (2, 3), (3, 2)]:
        ts, xs = spaces(js, jt)
        sys_ = assemble_optimal_system(assemble_bundle(ts, xs, pot), pot)
        assert sys_.variant is Variant.OPTIMAL_PETROV_GALERKIN
        S = sys_.S
        assert np.abs(S - S.conj().T).max() <= 1e-12 * max(1, np.abs(S).max())
        np.testing.assert_allclose(sys_.A_real, sys_.A_real.T, atol=1e-12 * np.abs(S).max())
        np.testing.assert_allclose(sys_.B_imag, -sys_.B_imag.T, atol=1e-12 * np.abs(S).max())
        assert np.linalg.eigvalsh(S).min() > 0


def test_kronecker_identity():
    ts, xs = spaces(3, 2)
    b = assemble_bundle(ts, xs)
    S = optimal_matrix(b)
    rng = np.random.default_rng(0)
    u = rng.standard_normal(S.shape[0]) + 1j * rng.standard_normal(S.shape[0])
    C = u.reshape(ts.dim, xs.dim)
    fact = (
        b.A_t @ C @ b.M_x.T
        + 0.25 * b.M_t @ C @ b.A_x.T
        + 0.5j * (b.N_t.T @ C @ b.N_x.T - b.N_t @ C @ b.N_x)
    ).ravel()
    np.testing.assert_allclose(S @ u, fact, atol=1e-12 * np.abs(S).max())


def test_general_assembly_reproduces_optimal():
    ts, xs = spaces(1, 1)
    for pot in (None, SINE):
        q = gauss_legendre(10)
        G = general_matrix(adjoint_image_terms(ts, xs, pot), ts, xs, pot, q)
        S = optimal_matrix(assemble_bundle(ts, xs, pot, q), pot)
        np.testing.assert_allclose(G, S, atol=1e-12)


def test_galerkin_free_formula():
    ts, xs = spaces(2, 2)
    b = assemble_bundle(ts, xs)
    sys_ = assemble_general_system(ts, xs, ts, xs)
    assert sys_.variant is Variant.GALERKIN_ON_TEST_SPACE
    # rows are test functions, so the time-derivative block is N_t, not its transpose
    expected = -1j * np.kron(b.N_t, b.M_x) + 0.5 * np.kron(b.M_t, b.N_x)
    np.testing.assert_allclose(sys_.S, expected, atol=1e-13)
    assert not np.any(sys_.S @ np.zeros(sys_.S.shape[1]))


def test_general_system_errors():
    ts, xs = spaces(2, 2)
    with pytest.raises(ShapeError):
        assemble_general_system(ts.with_constraint(Constraint.NONE), xs, ts, xs)
    with pytest.raises(ShapeError):
        assemble_general_system(ts, xs, ts.with_constraint(Constraint.NONE), xs)


def test_incomplete_bundle():
    ts, xs = spaces(1, 1)
    with pytest.raises(IncompleteBundleError):
        optimal_matrix(assemble_bundle(ts, xs), SINE)


def test_spatial_order_guard():
    with pytest.raises(InvalidOrderError):
        assemble_bundle(make_temporal_space(1, 3), make_spatial_space(2, 2))


def test_conjugation_structure():
    ts, xs = spaces(2, 2)
    Sp = optimal_matrix(assemble_bundle(ts, xs, SINE), SINE)
    neg = SINE.negated()
    Sn = optimal_matrix(assemble_bundle(ts, xs, neg), neg)
    b = assemble_bundle(ts, xs, SINE)
    U = np.kron(b.Theta_dt, b.Xi_m)
    V = np.kron(b.Theta_m, b.Xi_lap)
    np.testing.assert_allclose(Sp - Sn, -(V + V.T) + 2j * (U - U.T), atol=1e-12)


def test_rhs_smooth_case():
    ts, xs = spaces(2, 3)
    g = assemble_rhs(ts, xs, u0=u0_smooth)
    x, w = gauss_points(0, 1, 64, 8)
    load = scipy_basis(xs, x).T @ (w * u0_smooth(x))
    r0 = scipy_basis(ts, [0.0])[0]
    np.testing.assert_allclose(g, 1j * np.kron(r0, load), atol=1e-10)
    assert not np.any(assemble_rhs(ts, xs))


def test_rhs_discontinuous_u0_exact_with_splits():
    ts, xs = spaces(3, 2)
    g = assemble_rhs(ts, xs, u0=u0_nonsmooth, u0_splits=(0.25, 0.75))
    # exact: 2 * int_{1/4}^{3/4} phi_i, by a fine oracle cut at the jumps
    x, w = gauss_points(0.25, 0.75, 16, 6)
    load = 2 * scipy_basis(xs, x).T @ w
    r0 = scipy_basis(ts, [0.0])[0]
    np.testing.assert_allclose(g, 1j * np.kron(r0, load), atol=1e-14)


def test_rhs_source_term():
    ts, xs = spaces(2, 2)
    f = lambda t, x: t * np.sin(np.pi * x) + 0j
    g = assemble_rhs(ts, xs, g=f)
    t, wt = gauss_points(0, 1, 16, 6)
    x, wx = gauss_points(0, 1, 16, 6)
    P = np.einsum("ak,bi->kiab", scipy_basis(ts, t), scipy_basis(xs, x)).reshape(-1, t.size * x.size)
    np.testing.assert_allclose(g, P @ (np.outer(wt, wx).ravel() * f(t[:, None], x[None, :]).ravel()), atol=1e-12)
