"""Inf-sup constants, maximal relative distance, conditioning and rate fits."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .assembly import (
    Factor,
    SeparablePotential,
    assemble_bundle,
    general_matrix,
    optimal_matrix,
)
from .errors import DefinitenessError, ShapeError
from .linsolve import check_hermitian, generalized_sym_eig_extremes, hermitian_eig_extremes
from .quadrature import QuadratureRule1D


@dataclass
class StabilityReport:
    beta_delta: float
    kappa2: float
    residual: float
    dims: tuple[int, int, int]
    eps_delta: Optional[float] = None
    kappa_matrix: str = "complex Hermitian S"
    timings: dict = field(default_factory=dict)


def _chol(M, what):
    check_hermitian(M)
    try:
        return sla.cholesky(0.5 * (M + M.conj().T), lower=True)
    except sla.LinAlgError as exc:
        raise DefinitenessError(f"{what} is not positive definite: {exc}") from exc


def infsup_pencil(B, M_trial, M_test) -> tuple[float, float]:
    """Extremes of ``B^H M_test^{-1} B x = lambda M_trial x``.

    ``B[nu, mu] = b(trial_mu, test_nu)``; the square roots of the extremes are
    the discrete inf-sup and continuity constants.
    """
    B = np.asarray(B)
    if B.shape != (M_test.shape[0], M_trial.shape[0]):
        raise ShapeError(
            f"B has shape {B.shape}, expected {(M_test.shape[0], M_trial.shape[0])}"
        )
    L = _chol(M_test, "test Gram matrix")
    X = sla.solve_triangular(L, B, lower=True)
    return generalized_sym_eig_extremes(X.conj().T @ X, M_trial)


def infsup_constant(B, M_trial, M_test) -> float:
    lo, _ = infsup_pencil(B, M_trial, M_test)
    return float(np.sqrt(max(lo, 0.0)))


def eps_delta_from_grams(G, C, M_U, M_V) -> float:
    """Worst-case U-distance from the test space to the trial space, relative to the V-norm.

    ``G[nu', nu] = (phi_nu, phi_nu')`` is the L2 Gram of the test basis,
    ``C[mu, nu] = (phi_nu, psi_mu)`` the mixed Gram, ``M_U`` the trial Gram and
    ``M_V`` the V-norm Gram of the test basis.
    """
    L = _chol(M_U, "trial Gram matrix")
    Y = sla.solve_triangular(L, C, lower=True)
    P = G - Y.conj().T @ Y
    _, hi = generalized_sym_eig_extremes(0.5 * (P + P.conj().T), M_V)
    return float(np.sqrt(max(hi, 0.0)))


def galerkin_matrix(tspace, xspace, pot=None, quad=None):
    """``b(phi_mu, phi_nu)`` with trial = test basis."""
    return general_matrix([(1.0, Factor(tspace), Factor(xspace))], tspace, xspace, pot, quad)


def eps_delta(
    tspace,
    xspace,
    pot: Optional[SeparablePotential] = None,
    quad: Optional[QuadratureRule1D] = None,
) -> float:
    """Maximal relative distance between ``V_delta`` and ``U_delta = S*(V_delta)``."""
    bundle = assemble_bundle(tspace, xspace, pot, quad)
    S = optimal_matrix(bundle, pot)
    G = np.kron(bundle.M_t, bundle.M_x)
    C = galerkin_matrix(tspace, xspace, pot, quad)
    return eps_delta_from_grams(G, C, S, S)


def galerkin_infsup(tspace, xspace, pot=None, quad=None) -> float:
    """Inf-sup constant of ``b`` restricted to ``V_delta x V_delta`` in the V-norm."""
    S = optimal_matrix(assemble_bundle(tspace, xspace, pot, quad), pot)
    return infsup_constant(galerkin_matrix(tspace, xspace, pot, quad), S, S)


def condition_number(S) -> float:
    lo, hi = hermitian_eig_extremes(S)
    if lo <= 0:
        raise DefinitenessError(f"smallest eigenvalue {lo:.3e} is not positive")
    return hi / lo


def fit_rate(points: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of ``log(err)`` against ``log(n)``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise ValueError("need at least two (n, err) points")
    if np.any(pts <= 0):
        raise ValueError("rate fit needs positive values")
    slope, _ = np.polyfit(np.log(pts[:, 0]), np.log(pts[:, 1]), 1)
    return float(slope)
