"""Discrete space-time solutions and the norms computed from them."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .assembly import SeparablePotential
from .errors import DomainError, ShapeError
from .quadrature import QuadratureRule1D, element_points, gauss_legendre
from .splines import Mesh1D, SplineSpace, collocation


class Representation(enum.Enum):
    TRIAL_IS_ADJOINT_IMAGE = "adjoint-image"
    PLAIN_TENSOR = "plain-tensor"


@dataclass
class DiscreteSolution:
    """Coefficients bound to a tensor basis.

    For ``TRIAL_IS_ADJOINT_IMAGE`` the field is
    ``sum_{k,i} u_{k,i} S*(rho^k phi_i)``; for ``PLAIN_TENSOR`` it is
    ``sum_{k,i} c_{k,i} rho^k phi_i``.
    """

    coeffs: np.ndarray
    tspace: SplineSpace
    xspace: SplineSpace
    pot: Optional[SeparablePotential] = None
    representation: Representation = Representation.TRIAL_IS_ADJOINT_IMAGE
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.size != self.tspace.dim * self.xspace.dim:
            raise ShapeError(
                f"{self.coeffs.size} coefficients for a {self.tspace.dim} x {self.xspace.dim} basis"
            )

    @property
    def C(self) -> np.ndarray:
        return self.coeffs.reshape(self.tspace.dim, self.xspace.dim)

    @property
    def T(self) -> float:
        return self.tspace.mesh.b

    def _check(self, t, x):
        for arr, sp_, name in ((t, self.tspace, "t"), (x, self.xspace, "x")):
            a, b = sp_.interval
            if arr.size and (arr.min() < a - 1e-12 or arr.max() > b + 1e-12):
                raise DomainError(f"{name} outside [{a}, {b}]")

    def evaluate_grid(self, t, x) -> np.ndarray:
        """Field values on the tensor grid ``t x x``, shape ``(len(t), len(x))``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        x = np.atleast_1d(np.asarray(x, dtype=float))
        self._check(t, x)
        R0 = collocation(self.tspace, t, 0)
        X0 = collocation(self.xspace, x, 0)
        C = self.C
        if self.representation is Representation.PLAIN_TENSOR:
            return R0 @ C @ X0.T
        R1 = collocation(self.tspace, t, 1)
        X2 = collocation(self.xspace, x, 2)
        out = 1j * (R1 @ C @ X0.T) + 0.5 * (R0 @ C @ X2.T)
        if self.pot is not None:
            th = np.broadcast_to(self.pot.theta(t), t.shape)
            xi = np.broadcast_to(self.pot.xi(x), x.shape)
            out = out - th[:, None] * (R0 @ C @ X0.T) * xi[None, :]
        return out

    def evaluate(self, t: float, x: float) -> complex:
        return complex(self.evaluate_grid([t], [x])[0, 0])

    def __call__(self, t, x):
        return self.evaluate_grid(t, x)


def _rule(sol, quad):
    if quad is None:
        return gauss_legendre(max(sol.tspace.order, sol.xspace.order) + 2)
    return quad


def spatial_norm(sol: DiscreteSolution, t: float, quad: Optional[QuadratureRule1D] = None) -> float:
    """``||u(t, .)||_{L2(Omega)}``."""
    x, w = element_points(sol.xspace.mesh, _rule(sol, quad))
    vals = sol.evaluate_grid([t], x)[0]
    return float(np.sqrt(np.sum(w * np.abs(vals) ** 2)))


@dataclass
class NormDeviation:
    norm_0: float
    norm_T: float

    @property
    def deviation(self) -> float:
        return abs(self.norm_T - self.norm_0)

    @property
    def squared_deviation(self) -> float:
        return abs(self.norm_T**2 - self.norm_0**2)


def norm_deviation(sol: DiscreteSolution, quad=None) -> NormDeviation:
    a, b = sol.tspace.interval
    return NormDeviation(spatial_norm(sol, a, quad), spatial_norm(sol, b, quad))


def deviation_dT(sol: DiscreteSolution, quad: Optional[QuadratureRule1D] = None) -> float:
    """``| ||u(T)|| - ||u(0)|| |``, the deviation from norm preservation."""
    return norm_deviation(sol, quad).deviation


def _finer(m1: Mesh1D, m2: Optional[Mesh1D]) -> Mesh1D:
    if m2 is None or m1.level >= m2.level:
        return m1
    return m2


def l2_spacetime_error(
    sol: DiscreteSolution,
    ref,
    quad: Optional[QuadratureRule1D] = None,
    tmesh: Optional[Mesh1D] = None,
    xmesh: Optional[Mesh1D] = None,
    chunk: int = 256,
) -> float:
    """``||ref - u||_{L2(I x Omega)}``.

    ``ref`` is either a vectorised callable ``ref(t[:, None], x[None, :])`` or
    an object with ``evaluate_grid(t, x)``.  Quadrature runs over the finer of
    the solution meshes and the reference's own ``tmesh``/``xmesh`` attributes
    (when present) unless meshes are passed explicitly.
    """
    rule = _rule(sol, quad)
    if tmesh is None:
        tmesh = _finer(sol.tspace.mesh, getattr(ref, "tmesh", None))
    if xmesh is None:
        xmesh = _finer(sol.xspace.mesh, getattr(ref, "xmesh", None))
    t, wt = element_points(tmesh, rule)
    x, wx = element_points(xmesh, rule)
    if hasattr(ref, "evaluate_grid"):
        ref_grid = ref.evaluate_grid
    else:
        def ref_grid(tt, xx):
            return np.broadcast_to(ref(tt[:, None], xx[None, :]), (tt.size, xx.size))

    total = 0.0
    for s in range(0, t.size, chunk):
        tt = t[s : s + chunk]
        diff = ref_grid(tt, x) - sol.evaluate_grid(tt, x)
        total += wt[s : s + chunk] @ (np.abs(diff) ** 2 @ wx)
    return float(np.sqrt(total))
