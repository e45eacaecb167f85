"""Space-time system assembly.

Index layout is time-major throughout: the tensor basis function
``rho^k (x) phi_i`` has global index ``k * N_x + i``, so every separable
operator is ``np.kron(time_factor, space_factor)``.

Rows are indexed by test functions and columns by trial functions, i.e.
``S[nu, mu] = b(psi_mu, phi_nu)`` with the inner product linear in its first
argument.  With this layout ``S @ u == g`` is the discrete variational problem.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import IncompleteBundleError, InvalidOrderError, ShapeError
from .quadrature import QuadratureRule1D, default_rule, element_points
from .splines import Constraint, SplineSpace, collocation


@dataclass(frozen=True)
class SeparablePotential:
    """Potential of the form ``V(t, x) = theta(t) * xi(x)``.

    Both factors must be real valued and bounded; this is not checked.
    """

    theta: Callable[[np.ndarray], np.ndarray]
    xi: Callable[[np.ndarray], np.ndarray]
    descriptor: str = "custom"

    def __call__(self, t, x):
        return self.theta(t) * self.xi(x)

    def negated(self) -> "SeparablePotential":
        theta = self.theta
        return SeparablePotential(lambda t: -theta(t), self.xi, f"-({self.descriptor})")


def _eval_factor(f, x):
    return np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)


@dataclass
class OperatorBundle1D:
    """One-dimensional Gram matrices of the temporal and spatial test bases.

    ``A_t = (rho', rho')``, ``M_t = (rho, rho)``, ``N_t[l, k] = (rho'^l, rho^k)``;
    ``A_x = (phi'', phi'')``, ``M_x = (phi, phi)``, ``N_x[j, i] = (phi''_j, phi_i)``
    and the stiffness ``K_x = (phi', phi')``.  The weighted matrices are only
    present when a potential was supplied.
    """

    tspace: SplineSpace
    xspace: SplineSpace
    A_t: np.ndarray
    M_t: np.ndarray
    N_t: np.ndarray
    A_x: np.ndarray
    M_x: np.ndarray
    N_x: np.ndarray
    K_x: np.ndarray
    r0: np.ndarray
    # (theta rho'^l, rho^k), (rho^l, theta rho^k), (theta rho^l, theta rho^k)
    Theta_dt: Optional[np.ndarray] = None
    Theta_m: Optional[np.ndarray] = None
    Theta_sq: Optional[np.ndarray] = None
    # (xi phi_j, phi_i), (phi''_j, xi phi_i), (xi phi_j, xi phi_i)
    Xi_m: Optional[np.ndarray] = None
    Xi_lap: Optional[np.ndarray] = None
    Xi_sq: Optional[np.ndarray] = None
    potential: Optional[SeparablePotential] = None

    @property
    def has_potential(self) -> bool:
        return all(
            m is not None
            for m in (self.Theta_dt, self.Theta_m, self.Theta_sq, self.Xi_m, self.Xi_lap, self.Xi_sq)
        )

    @property
    def dims(self) -> tuple[int, int]:
        return self.tspace.dim, self.xspace.dim


def _require_laplacian(xspace):
    # S* needs the spatial Laplacian of the test functions in L2.
    if xspace.order < 3:
        raise InvalidOrderError(f"spatial order must be >= 3 for the adjoint image, got {xspace.order}")


def _gram(left, right, w):
    return left.T @ (w[:, None] * right)


def assemble_bundle(
    tspace: SplineSpace,
    xspace: SplineSpace,
    pot: Optional[SeparablePotential] = None,
    quad: Optional[QuadratureRule1D] = None,
) -> OperatorBundle1D:
    _require_laplacian(xspace)
    if quad is None:
        quad = default_rule(tspace.order, xspace.order)
    t, wt = element_points(tspace.mesh, quad)
    R0 = collocation(tspace, t, 0)
    R1 = collocation(tspace, t, 1)
    x, wx = element_points(xspace.mesh, quad)
    X0 = collocation(xspace, x, 0)
    X1 = collocation(xspace, x, 1)
    X2 = collocation(xspace, x, 2)

    bundle = OperatorBundle1D(
        tspace=tspace,
        xspace=xspace,
        A_t=_gram(R1, R1, wt),
        M_t=_gram(R0, R0, wt),
        N_t=_gram(R1, R0, wt),
        A_x=_gram(X2, X2, wx),
        M_x=_gram(X0, X0, wx),
        N_x=_gram(X2, X0, wx),
        K_x=_gram(X1, X1, wx),
        r0=collocation(tspace, [tspace.mesh.a], 0)[0],
    )
    if pot is not None:
        th = _eval_factor(pot.theta, t)
        xi = _eval_factor(pot.xi, x)
        bundle.Theta_dt = _gram(R1, R0, wt * th)
        bundle.Theta_m = _gram(R0, R0, wt * th)
        bundle.Theta_sq = _gram(R0, R0, wt * th * th)
        bundle.Xi_m = _gram(X0, X0, wx * xi)
        bundle.Xi_lap = _gram(X2, X0, wx * xi)
        bundle.Xi_sq = _gram(X0, X0, wx * xi * xi)
        bundle.potential = pot
    return bundle


class Variant(enum.Enum):
    OPTIMAL_PETROV_GALERKIN = "optimal"
    GENERAL_PAIR = "general"
    GALERKIN_ON_TEST_SPACE = "galerkin"


@dataclass
class SpaceTimeSystem:
    S: np.ndarray
    tspace: SplineSpace
    xspace: SplineSpace
    variant: Variant
    rhs: Optional[np.ndarray] = None
    potential: Optional[SeparablePotential] = None
    trial_spaces: Optional[tuple[SplineSpace, SplineSpace]] = None
    meta: dict = field(default_factory=dict)

    @property
    def A_real(self) -> np.ndarray:
        return self.S.real

    @property
    def B_imag(self) -> np.ndarray:
        return self.S.imag

    @property
    def ndofs(self) -> int:
        return self.S.shape[0]


def optimal_matrix(bundle: OperatorBundle1D, pot: Optional[SeparablePotential] = None):
    """Gram matrix of ``{S* (rho^k phi_i)}`` in ``L2(I x Omega)``.

    Expanding ``S* v = i v_t + v_xx / 2 - V v`` term by term gives::

        S = A_t (x) M_x + 1/4 M_t (x) A_x - 1/2 (V + V^T) + W
            + i [ 1/2 N_t^T (x) N_x - 1/2 N_t (x) N_x^T + U - U^T ]

    with ``U = Theta_dt (x) Xi_m``, ``V = Theta_m (x) Xi_lap``,
    ``W = Theta_sq (x) Xi_sq``.
    """
    kron = np.kron
    re = kron(bundle.A_t, bundle.M_x) + 0.25 * kron(bundle.M_t, bundle.A_x)
    im = 0.5 * (kron(bundle.N_t.T, bundle.N_x) - kron(bundle.N_t, bundle.N_x.T))
    if pot is not None:
        if not bundle.has_potential:
            raise IncompleteBundleError("potential given but bundle lacks weighted matrices")
        V = kron(bundle.Theta_m, bundle.Xi_lap)
        U = kron(bundle.Theta_dt, bundle.Xi_m)
        re = re - 0.5 * (V + V.T) + kron(bundle.Theta_sq, bundle.Xi_sq)
        im = im + (U - U.T)
    return re + 1j * im


def assemble_optimal_system(
    bundle: OperatorBundle1D, pot: Optional[SeparablePotential] = None
) -> SpaceTimeSystem:
    S = optimal_matrix(bundle, pot)
    return SpaceTimeSystem(
        S=S,
        tspace=bundle.tspace,
        xspace=bundle.xspace,
        variant=Variant.OPTIMAL_PETROV_GALERKIN,
        potential=pot,
    )


@dataclass(frozen=True)
class Factor:
    """A 1D family of functions: ``weight * d^derivative/dx^derivative`` of a spline basis."""

    space: SplineSpace
    derivative: int = 0
    weight: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def values(self, x):
        vals = collocation(self.space, x, self.derivative)
        if self.weight is not None:
            vals = vals * _eval_factor(self.weight, x)[:, None]
        return vals


def adjoint_image_terms(tspace, xspace, pot=None):
    """Trial functions ``S* (rho^l phi_j)`` written as a sum of tensor terms."""
    terms = [
        (1j, Factor(tspace, 1), Factor(xspace, 0)),
        (0.5, Factor(tspace, 0), Factor(xspace, 2)),
    ]
    if pot is not None:
        terms.append((-1.0, Factor(tspace, 0, pot.theta), Factor(xspace, 0, pot.xi)))
    return terms


def general_matrix(terms, test_t: SplineSpace, test_x: SplineSpace, pot=None, quad=None):
    """``M[nu, mu] = b(trial_mu, test_nu)`` for trial functions given as tensor terms.

    ``terms`` is a list of ``(coefficient, time_factor, space_factor)``; each
    trial function is ``sum_c c * f_t^l (x) f_x^j`` over the terms.  The matrix
    may be rectangular.
    """
    if quad is None:
        orders = [test_t.order, test_x.order] + [f.space.order for _, ft, fx in terms for f in (ft, fx)]
        quad = default_rule(*orders)
    t, wt = element_points(test_t.mesh, quad)
    x, wx = element_points(test_x.mesh, quad)
    R0 = collocation(test_t, t, 0)
    R1 = collocation(test_t, t, 1)
    X0 = collocation(test_x, x, 0)
    X2 = collocation(test_x, x, 2)
    if pot is not None:
        th = _eval_factor(pot.theta, t)
        xi = _eval_factor(pot.xi, x)

    out = None
    for c, ft, fx in terms:
        if ft.space.mesh != test_t.mesh or fx.space.mesh != test_x.mesh:
            raise ShapeError("trial and test factors must share meshes")
        Ft, Fx = ft.values(t), fx.values(x)
        # (f, S* w) = -i (f, w_t) + 1/2 (f, w_xx) - (f, V w); w real.
        blk = -1j * np.kron(_gram(R1, Ft, wt), _gram(X0, Fx, wx))
        blk = blk + 0.5 * np.kron(_gram(R0, Ft, wt), _gram(X2, Fx, wx))
        if pot is not None:
            blk = blk - np.kron(_gram(R0, Ft, wt * th), _gram(X0, Fx, wx * xi))
        out = c * blk if out is None else out + c * blk
    return out


def assemble_general_system(
    trial_t: SplineSpace,
    trial_x: SplineSpace,
    test_t: SplineSpace,
    test_x: SplineSpace,
    pot: Optional[SeparablePotential] = None,
    quad: Optional[QuadratureRule1D] = None,
) -> SpaceTimeSystem:
    """Petrov-Galerkin matrix for plain tensor-product spline trial functions."""
    if test_t.constraint not in (Constraint.ZERO_AT_RIGHT, Constraint.ZERO_BOTH_ENDS):
        raise ShapeError("temporal test space must vanish at the final time")
    ntrial, ntest = trial_t.dim * trial_x.dim, test_t.dim * test_x.dim
    if ntrial != ntest:
        raise ShapeError(f"trial dimension {ntrial} differs from test dimension {ntest}")
    terms = [(1.0, Factor(trial_t), Factor(trial_x))]
    same = trial_t == test_t and trial_x == test_x
    return SpaceTimeSystem(
        S=general_matrix(terms, test_t, test_x, pot, quad),
        tspace=test_t,
        xspace=test_x,
        variant=Variant.GALERKIN_ON_TEST_SPACE if same else Variant.GENERAL_PAIR,
        potential=pot,
        trial_spaces=(trial_t, trial_x),
    )


def spatial_load(xspace: SplineSpace, f, splits=(), quad=None) -> np.ndarray:
    """``[(f, phi_i)]_i`` with the quadrature cut at ``splits``."""
    if quad is None:
        quad = default_rule(xspace.order)
    x, w = element_points(xspace.mesh, quad, splits)
    fx = np.asarray(f(x))
    return collocation(xspace, x, 0).T @ (w * fx)


def assemble_rhs(
    test_t: SplineSpace,
    test_x: SplineSpace,
    g=None,
    u0=None,
    u0_splits=(),
    quad: Optional[QuadratureRule1D] = None,
) -> np.ndarray:
    """Load vector ``g[(k, i)] = (g, rho^k phi_i) + i rho^k(0) (u0, phi_i)``."""
    if test_t.constraint not in (Constraint.ZERO_AT_RIGHT, Constraint.ZERO_BOTH_ENDS):
        raise ShapeError("temporal test space must vanish at the final time")
    if quad is None:
        quad = default_rule(test_t.order, test_x.order)
    out = np.zeros(test_t.dim * test_x.dim, dtype=complex)
    if g is not None:
        t, wt = element_points(test_t.mesh, quad)
        x, wx = element_points(test_x.mesh, quad)
        G = np.broadcast_to(g(t[:, None], x[None, :]), (t.size, x.size))
        R0 = collocation(test_t, t, 0)
        X0 = collocation(test_x, x, 0)
        out += (R0.T @ (wt[:, None] * G * wx[None, :]) @ X0).ravel()
    if u0 is not None:
        r0 = collocation(test_t, [test_t.mesh.a], 0)[0]
        out += 1j * np.kron(r0, spatial_load(test_x, u0, u0_splits, quad))
    return out
