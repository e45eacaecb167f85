"""Dense direct solvers and Hermitian eigenvalue kernels."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DefinitenessError, FactorizationError, ShapeError, SymmetryError


@dataclass
class SolveResult:
    u: np.ndarray
    residual: float
    relative_residual: float
    method: str


@dataclass
class BlockRealSystem:
    """Real form ``[[A, -B], [B, A]] [x; y] = [b; c]`` of ``(A + iB)(x + iy) = b + ic``."""

    matrix: np.ndarray
    rhs: np.ndarray

    @classmethod
    def from_complex(cls, S, g):
        A, B = S.real, S.imag
        mat = np.block([[A, -B], [B, A]])
        return cls(mat, np.concatenate([g.real, g.imag]))

    @property
    def n(self) -> int:
        return self.matrix.shape[0] // 2

    def to_complex(self):
        n = self.n
        S = self.matrix[:n, :n] + 1j * self.matrix[n:, :n]
        return S, self.rhs[:n] + 1j * self.rhs[n:]


def _lu(S):
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ShapeError(f"matrix must be square, got shape {S.shape}")
    with warnings.catch_warnings():
        # singularity is detected from the pivots below, with their position
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(S, check_finite=True)
    diag = np.abs(np.diag(lu))
    if diag.min() == 0.0 or diag.min() <= np.finfo(float).eps * diag.max() * S.shape[0]:
        k = int(np.argmin(diag))
        raise FactorizationError(f"matrix is singular to working precision: zero pivot at position {k}", pivot=k)
    return lu, piv


def _result(S, g, u, method):
    r = np.linalg.norm(S @ u - g)
    gn = np.linalg.norm(g)
    return SolveResult(u, float(r), float(r / gn) if gn > 0 else float(r), method)


def solve_complex(S: np.ndarray, g: np.ndarray) -> SolveResult:
    """LU with partial pivoting on the complex matrix; residual is always reported."""
    S = np.asarray(S, dtype=complex)
    g = np.asarray(g, dtype=complex)
    u = sla.lu_solve(_lu(S), g)
    return _result(S, g, u, "complex")


def solve_block_real(S: np.ndarray, g: np.ndarray) -> SolveResult:
    S = np.asarray(S, dtype=complex)
    g = np.asarray(g, dtype=complex)
    blk = BlockRealSystem.from_complex(S, g)
    z = sla.lu_solve(_lu(blk.matrix), blk.rhs)
    n = blk.n
    u = z[:n] + 1j * z[n:]
    return _result(S, g, u, "block_real")


SOLVERS = {"complex": solve_complex, "block_real": solve_block_real}


def check_hermitian(S, tol=1e-10):
    if S.shape[0] != S.shape[1]:
        raise ShapeError(f"matrix must be square, got shape {S.shape}")
    scale = max(1.0, np.abs(S).max())
    dev = np.abs(S - S.conj().T).max()
    if dev > tol * scale:
        raise SymmetryError(f"matrix is not Hermitian: max |S - S^H| = {dev:.3e}")


def hermitian_eig_extremes(S: np.ndarray) -> tuple[float, float]:
    check_hermitian(S)
    ev = sla.eigvalsh(0.5 * (S + S.conj().T))
    return float(ev[0]), float(ev[-1])


def generalized_sym_eig_extremes(A: np.ndarray, B: np.ndarray) -> tuple[float, float]:
    """Extreme eigenvalues of ``A x = lambda B x`` for Hermitian ``A`` and HPD ``B``.

    Uses the Cholesky reduction ``L^{-1} A L^{-H}`` with ``B = L L^H``.
    """
    check_hermitian(A)
    check_hermitian(B)
    try:
        L = sla.cholesky(0.5 * (B + B.conj().T), lower=True)
    except sla.LinAlgError as exc:
        raise DefinitenessError(f"second matrix is not positive definite: {exc}") from exc
    X = sla.solve_triangular(L, 0.5 * (A + A.conj().T), lower=True)
    C = sla.solve_triangular(L, X.conj().T, lower=True)
    ev = sla.eigvalsh(0.5 * (C + C.conj().T))
    return float(ev[0]), float(ev[-1])
