"""Independent reference implementations used only by the tests."""

import numpy as np
from scipy.interpolate import BSpline


def scipy_basis(space, x, nu=0):
    """Retained basis functions of ``space`` evaluated with scipy, shape (len(x), dim)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    k = space.order - 1
    t = np.asarray(space.knots)
    n = len(t) - k - 1
    cols = []
    for i in range(space.first, space.first + space.dim):
        c = np.zeros(n)
        c[i] = 1.0
        spl = BSpline(t, c, k, extrapolate=False)
        vals = spl.derivative(nu)(x) if nu else spl(x)
        # scipy leaves x == b undefined for the half-open last interval
        vals = np.where(np.isnan(vals), BSpline(t, c, k).derivative(nu)(x) if nu else BSpline(t, c, k)(x), vals)
        cols.append(vals)
    return np.stack(cols, axis=1)


def gauss_points(a, b, nel, npts):
    g, w = np.polynomial.legendre.leggauss(npts)
    edges = np.linspace(a, b, nel + 1)
    h = np.diff(edges)
    x = (edges[:-1, None] + 0.5 * h[:, None] * (g[None, :] + 1)).ravel()
    wt = (0.5 * h[:, None] * w[None, :]).ravel()
    return x, wt


def adjoint_images(tspace, xspace, t, x, theta=None, xi=None):
    """Rows: S*(rho^k phi_i) sampled on the tensor grid t x x (flattened)."""
    R0, R1 = scipy_basis(tspace, t, 0), scipy_basis(tspace, t, 1)
    X0, X2 = scipy_basis(xspace, x, 0), scipy_basis(xspace, x, 2)
    psi = 1j * np.einsum("ak,bi->kiab", R1, X0) + 0.5 * np.einsum("ak,bi->kiab", R0, X2)
    if theta is not None:
        psi -= np.einsum("ak,bi->kiab", theta(t)[:, None] * R0, xi(x)[:, None] * X0)
    return psi.reshape(tspace.dim * xspace.dim, t.size * x.size)


def brute_force_gram(tspace, xspace, theta=None, xi=None, npts=10):
    """``G[nu, mu] = int psi_mu conj(psi_nu)`` by tensor Gauss quadrature."""
    t, wt = gauss_points(*tspace.interval, tspace.mesh.nelements, npts)
    x, wx = gauss_points(*xspace.interval, xspace.mesh.nelements, npts)
    P = adjoint_images(tspace, xspace, t, x, theta, xi)
    W = np.outer(wt, wx).ravel()
    return (P.conj() * W) @ P.T
