"""Gauss-Legendre quadrature on mesh elements."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .splines import Mesh1D


@dataclass(frozen=True)
class QuadratureRule1D:
    """Gauss-Legendre rule on the reference element ``[0, 1]``."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def npoints(self) -> int:
        return self.nodes.size

    def __hash__(self):
        return hash(self.npoints)

    def __eq__(self, other):
        return isinstance(other, QuadratureRule1D) and np.array_equal(
            self.nodes, other.nodes
        )


@lru_cache(maxsize=None)
def gauss_legendre(npoints: int) -> QuadratureRule1D:
    """``npoints``-point rule, exact for polynomials of degree ``2 * npoints - 1``."""
    if npoints < 1:
        raise ValueError("npoints must be positive")
    x, w = np.polynomial.legendre.leggauss(npoints)
    nodes, weights = 0.5 * (x + 1.0), 0.5 * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule1D(nodes, weights)


def default_rule(*orders: int) -> QuadratureRule1D:
    return gauss_legendre(max(orders) + 1)


def element_points(mesh: Mesh1D, rule: QuadratureRule1D, splits=()):
    """Mapped quadrature nodes and weights over all (sub)elements of ``mesh``.

    Elements are further cut at ``splits`` so that integrands with jumps at
    those points are integrated to full order.
    """
    edges = mesh.breakpoints
    splits = np.asarray(splits, dtype=float)
    if splits.size:
        inside = splits[(splits > mesh.a) & (splits < mesh.b)]
        edges = np.union1d(edges, inside)
    lo, hi = edges[:-1], edges[1:]
    width = hi - lo
    pts = lo[:, None] + width[:, None] * rule.nodes[None, :]
    wts = width[:, None] * rule.weights[None, :]
    return pts.ravel(), wts.ravel()


def integrate_1d(f, mesh: Mesh1D, rule: QuadratureRule1D, splits=()):
    """Integral of the vectorised function ``f`` over ``[mesh.a, mesh.b]``."""
    x, w = element_points(mesh, rule, splits)
    return np.sum(w * f(x))


def integrate_spacetime(f, tmesh: Mesh1D, xmesh: Mesh1D, rule: QuadratureRule1D):
    """Tensor Gauss quadrature of ``f(t, x)`` over all element pairs.

    ``f`` is called once with broadcastable arrays ``t[:, None]`` and
    ``x[None, :]``.
    """
    t, wt = element_points(tmesh, rule)
    x, wx = element_points(xmesh, rule)
    vals = np.broadcast_to(f(t[:, None], x[None, :]), (t.size, x.size))
    return wt @ vals @ wx
