"""B-spline spaces on dyadic uniform meshes.

The temporal test space vanishes at the final time, the spatial one at both
ends of the interval.  Constraints are imposed by dropping the single clamped
basis function that is nonzero at a constrained endpoint.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sps

from .errors import (
    DegenerateSpaceError,
    DomainError,
    InvalidOrderError,
    UnsupportedDerivativeError,
)


class Constraint(enum.Enum):
    NONE = "none"
    ZERO_AT_LEFT = "zero-at-left"
    ZERO_AT_RIGHT = "zero-at-right"
    ZERO_BOTH_ENDS = "zero-both-ends"

    @property
    def drops_left(self) -> bool:
        return self in (Constraint.ZERO_AT_LEFT, Constraint.ZERO_BOTH_ENDS)

    @property
    def drops_right(self) -> bool:
        return self in (Constraint.ZERO_AT_RIGHT, Constraint.ZERO_BOTH_ENDS)


@dataclass(frozen=True)
class Mesh1D:
    """Uniform mesh of ``2**level`` elements on ``[a, b]``."""

    a: float
    b: float
    level: int

    def __post_init__(self):
        if self.level < 0:
            raise DegenerateSpaceError(f"mesh level must be >= 0, got {self.level}")
        if not self.b > self.a:
            raise DegenerateSpaceError(f"empty interval [{self.a}, {self.b}]")

    @property
    def nelements(self) -> int:
        return 2**self.level

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.nelements

    @cached_property
    def breakpoints(self) -> np.ndarray:
        k = np.arange(self.nelements + 1)
        return self.a + k * (self.b - self.a) / self.nelements

    def refined(self, levels: int = 1) -> "Mesh1D":
        return Mesh1D(self.a, self.b, self.level + levels)


@dataclass(frozen=True)
class SplineSpace:
    """Clamped B-spline space of the given ``order`` (degree ``order - 1``)."""

    mesh: Mesh1D
    order: int
    constraint: Constraint = Constraint.NONE
    knots: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.order < 1:
            raise InvalidOrderError(f"order must be >= 1, got {self.order}")
        bp = self.mesh.breakpoints
        knots = np.concatenate(
            [np.full(self.order - 1, bp[0]), bp, np.full(self.order - 1, bp[-1])]
        )
        knots.setflags(write=False)
        object.__setattr__(self, "knots", knots)
        if self.dim <= 0:
            raise DegenerateSpaceError(
                f"space of order {self.order} on level {self.mesh.level} "
                f"with constraint {self.constraint.value} is empty"
            )

    @property
    def degree(self) -> int:
        return self.order - 1

    @property
    def nfull(self) -> int:
        """Dimension before constraints are applied."""
        return self.mesh.nelements + self.order - 1

    @property
    def first(self) -> int:
        return 1 if self.constraint.drops_left else 0

    @property
    def dim(self) -> int:
        return self.nfull - self.first - (1 if self.constraint.drops_right else 0)

    @property
    def interval(self) -> tuple[float, float]:
        return self.mesh.a, self.mesh.b

    def with_constraint(self, constraint: Constraint) -> "SplineSpace":
        return SplineSpace(self.mesh, self.order, constraint)

    def __hash__(self):
        return hash((self.mesh, self.order, self.constraint))


def make_temporal_space(level: int, order: int, T: float = 1.0) -> SplineSpace:
    """Test space in time on ``(0, T)``: splines vanishing at ``t = T``."""
    if order < 2:
        raise InvalidOrderError(f"temporal order must be >= 2, got {order}")
    return SplineSpace(Mesh1D(0.0, T, level), order, Constraint.ZERO_AT_RIGHT)


def make_spatial_space(level: int, order: int, L: float = 1.0) -> SplineSpace:
    """Test space in space on ``(0, L)`` with homogeneous Dirichlet conditions."""
    if order < 2:
        raise InvalidOrderError(f"spatial order must be >= 2, got {order}")
    if level < 1 and order == 2:
        raise DegenerateSpaceError("order-2 Dirichlet space needs level >= 1")
    return SplineSpace(Mesh1D(0.0, L, level), order, Constraint.ZERO_BOTH_ENDS)


def _find_spans(space: SplineSpace, x: np.ndarray) -> np.ndarray:
    # Right-continuous at interior knots, left limit at x = b.
    m = space.mesh
    s = np.floor((x - m.a) / m.h).astype(np.int64)
    s = np.clip(s, 0, m.nelements - 1)
    bp = m.breakpoints
    # Guard floating point rounding near breakpoints.
    s = np.where((s < m.nelements - 1) & (x >= bp[np.minimum(s + 1, m.nelements)]), s + 1, s)
    s = np.where((s > 0) & (x < bp[s]), s - 1, s)
    return s + space.order - 1


def _local_derivatives(knots, p, spans, x, nder):
    """Values and derivatives of the ``p + 1`` nonzero B-splines at each point.

    Vectorised Cox-de Boor recursion with the derivative scheme of Piegl and
    Tiller.  Returns an array of shape ``(npts, nder + 1, p + 1)``.
    """
    npts = x.shape[0]
    ndu = np.zeros((p + 1, p + 1, npts))
    ndu[0, 0] = 1.0
    left = np.zeros((p + 1, npts))
    right = np.zeros((p + 1, npts))
    for j in range(1, p + 1):
        left[j] = x - knots[spans + 1 - j]
        right[j] = knots[spans + j] - x
        saved = np.zeros(npts)
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved

    ders = np.zeros((nder + 1, p + 1, npts))
    ders[0] = ndu[:, p]
    nd = min(nder, p)
    for r in range(p + 1):
        a = np.zeros((2, p + 1, npts))
        s1, s2 = 0, 1
        a[0, 0] = 1.0
        for k in range(1, nd + 1):
            d = np.zeros(npts)
            rk, pk = r - k, p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d = d + a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d = d + a[s2, k] * ndu[r, pk]
            ders[k, r] = d
            s1, s2 = s2, s1
    fac = float(p)
    for k in range(1, nd + 1):
        ders[k] *= fac
        fac *= p - k
    return np.moveaxis(ders, 2, 0)


def _check_args(space: SplineSpace, x: np.ndarray, derivative: int):
    if derivative < 0 or derivative > space.order - 1:
        raise UnsupportedDerivativeError(
            f"derivative {derivative} not supported for order {space.order}"
        )
    a, b = space.interval
    tol = 1e-12 * (b - a)
    if x.size and (x.min() < a - tol or x.max() > b + tol):
        raise DomainError(f"evaluation points outside [{a}, {b}]")
    return np.clip(x, a, b)


def collocation(space: SplineSpace, x, derivative: int = 0, sparse: bool = False):
    """Matrix of basis values ``[B_j^{(derivative)}(x_i)]`` of shape ``(len(x), dim)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float)).ravel()
    x = _check_args(space, x, derivative)
    p = space.degree
    spans = _find_spans(space, x)
    vals = _local_derivatives(space.knots, p, spans, x, derivative)[:, derivative, :]
    cols = spans[:, None] - p + np.arange(p + 1)[None, :] - space.first
    rows = np.broadcast_to(np.arange(x.size)[:, None], cols.shape)
    keep = (cols >= 0) & (cols < space.dim)
    mat = sps.csr_matrix(
        (vals[keep], (rows[keep], cols[keep])), shape=(x.size, space.dim)
    )
    return mat if sparse else mat.toarray()


def eval_basis(space: SplineSpace, x: float, derivative: int = 0) -> np.ndarray:
    """All basis functions (or a derivative of them) at the single point ``x``."""
    return collocation(space, [x], derivative)[0]


def interpolation_points(space: SplineSpace) -> np.ndarray:
    """Greville abscissae of the retained basis functions."""
    t, p = space.knots, space.degree
    if p == 0:
        g = 0.5 * (t[:-1] + t[1:])
    else:
        g = np.array([t[i + 1 : i + p + 1].mean() for i in range(space.nfull)])
    return g[space.first : space.first + space.dim]
