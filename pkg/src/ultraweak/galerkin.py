"""Galerkin discretization with trial = test tensor spline space."""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .assembly import Factor, SeparablePotential, general_matrix
from .diagnostics import eps_delta
from .errors import FactorizationError, StabilityError
from .field import DiscreteSolution, Representation
from .linsolve import solve_complex
from .quadrature import QuadratureRule1D
from .reference import _sparse_gram, l2_projection
from .splines import Constraint, SplineSpace, collocation


def solve_galerkin(
    tspace: SplineSpace,
    xspace: SplineSpace,
    pot: Optional[SeparablePotential] = None,
    u0: Optional[Callable] = None,
    u0_splits=(),
    terminal_constraint_on_trial: bool = False,
    quad: Optional[QuadratureRule1D] = None,
) -> DiscreteSolution:
    """Solve ``(v, S* w) = i (u0_h, w(0))`` for all tensor test functions ``w``.

    ``tspace`` is the temporal test space (it must vanish at the final time);
    ``u0_h`` is the L2 projection of ``u0`` onto ``xspace``.

    With ``terminal_constraint_on_trial`` the trial space equals the test
    space, so every trial function vanishes at the final time.  Without it the
    trial temporal space keeps the right-end function; the extra unknowns are
    fixed by the initial condition ``(v(0), phi_j) = (u0_h, phi_j)``.

    Returns a plain-tensor solution; ``info`` holds the projected initial
    norm and the solver residual.
    """
    if tspace.constraint is not Constraint.ZERO_AT_RIGHT:
        tspace = tspace.with_constraint(Constraint.ZERO_AT_RIGHT)
    trial_t = tspace if terminal_constraint_on_trial else tspace.with_constraint(Constraint.NONE)
    nx = xspace.dim

    if u0 is None:
        c0 = np.zeros(nx, dtype=complex)
    else:
        c0 = l2_projection(xspace, u0, u0_splits)
    Mx = _sparse_gram(xspace).toarray()
    load = Mx @ c0
    r0_test = collocation(tspace, [tspace.mesh.a], 0)[0]

    B = general_matrix([(1.0, Factor(trial_t), Factor(xspace))], tspace, xspace, pot, quad)
    rhs = 1j * np.kron(r0_test, load)
    if not terminal_constraint_on_trial:
        r0_trial = collocation(trial_t, [trial_t.mesh.a], 0)[0]
        B = np.vstack([B, np.kron(r0_trial, Mx)])
        rhs = np.concatenate([rhs, load])

    if not np.any(rhs):
        coeffs = np.zeros(B.shape[1], dtype=complex)
        residual = 0.0
    else:
        try:
            res = solve_complex(B, rhs)
        except FactorizationError as exc:
            eps = eps_delta(tspace, xspace, pot, quad)
            raise StabilityError(f"Galerkin system is singular ({exc})", eps_delta=eps) from exc
        coeffs, residual = res.u, res.relative_residual

    init_norm = float(np.sqrt(max((c0.conj() @ load).real, 0.0)))
    return DiscreteSolution(
        coeffs,
        trial_t,
        xspace,
        pot,
        Representation.PLAIN_TENSOR,
        info={
            "initial_norm": init_norm,
            "relative_residual": residual,
            "terminal_constraint_on_trial": terminal_constraint_on_trial,
        },
    )
