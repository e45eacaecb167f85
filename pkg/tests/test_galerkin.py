import numpy as np
import pytest

import ultraweak.galerkin as galerkin_mod
from ultraweak.assembly import SeparablePotential, assemble_bundle, assemble_optimal_system, assemble_rhs
from ultraweak.errors import FactorizationError, StabilityError
from ultraweak.field import DiscreteSolution, Representation, l2_spacetime_error, norm_deviation, spatial_norm
from ultraweak.galerkin import solve_galerkin
from ultraweak.linsolve import solve_complex
from ultraweak.reference import analytic_case_a, u0_smooth
from ultraweak.splines import Constraint, make_spatial_space, make_temporal_space


def spaces(j):
    return make_temporal_space(j, 3), make_spatial_space(j, 4)


def test_zero_initial_state():
    sol = solve_galerkin(*spaces(2), u0=lambda x: 0.0 * x)
    assert not np.any(sol.coeffs)
    assert sol.representation is Representation.PLAIN_TENSOR


def test_initial_condition_is_imposed_without_terminal_constraint():
    sol = solve_galerkin(*spaces(3), u0=u0_smooth)
    assert sol.tspace.constraint is Constraint.NONE
    assert spatial_norm(sol, 0.0) == pytest.approx(sol.info["initial_norm"], abs=1e-10)
    assert sol.info["relative_residual"] < 1e-12


def test_terminal_constraint_forces_zero_final_state():
    sol = solve_galerkin(*spaces(3), u0=u0_smooth, terminal_constraint_on_trial=True)
    assert spatial_norm(sol, 1.0) == 0.0


@pytest.mark.xfail(strict=True, reason="measured | ||v(T)|| - ||u0_h|| | = 7.8e-4 at level (3,3)")
def test_norm_preserved_level3():
    sol = solve_galerkin(*spaces(3), u0=u0_smooth)
    assert abs(norm_deviation(sol).norm_T - sol.info["initial_norm"]) <= 1e-8


def test_error_comparable_to_ultraweak():
    ts, xs = spaces(3)
    gal = solve_galerkin(ts, xs, u0=u0_smooth)
    S = assemble_optimal_system(assemble_bundle(ts, xs)).S
    uw = DiscreteSolution(solve_complex(S, assemble_rhs(ts, xs, u0=u0_smooth)).u, ts, xs)
    assert l2_spacetime_error(gal, analytic_case_a) <= 3 * l2_spacetime_error(uw, analytic_case_a)


def test_with_potential_runs():
    pot = SeparablePotential(lambda t: 1.0 + t, lambda x: np.sin(np.pi * x), "sine")
    sol = solve_galerkin(*spaces(2), pot=pot, u0=u0_smooth)
    assert np.all(np.isfinite(sol.coeffs))


def test_singular_system_reports_eps(monkeypatch):
    def boom(B, g):
        raise FactorizationError("zero pivot", pivot=0)

    monkeypatch.setattr(galerkin_mod, "solve_complex", boom)
    with pytest.raises(StabilityError) as info:
        solve_galerkin(*spaces(1), u0=u0_smooth)
    assert 0 < info.value.eps_delta < 1
