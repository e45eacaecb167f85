"""Ground truth for the free particle on the unit interval.

Closed-form solution for the sine initial state, and semi-discrete spline /
time-stepping oracles (implicit Euler, Crank-Nicolson) for rougher data.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from .assembly import SeparablePotential
from .errors import ConfigError, FactorizationError
from .quadrature import element_points, gauss_legendre
from .splines import Mesh1D, SplineSpace, collocation, make_spatial_space

log = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)


def analytic_case_a(t, x):
    """``sqrt(2) sin(pi x) exp(-i pi^2 t / 2)``; broadcasts over arrays."""
    return SQRT2 * np.sin(np.pi * np.asarray(x)) * np.exp(-0.5j * np.pi**2 * np.asarray(t))


def u0_smooth(x):
    return SQRT2 * np.sin(np.pi * x) + 0j


def u0_sobolev(x):
    return -3.0 * np.abs(x - 0.5) + 1.5 + 0j


def u0_nonsmooth(x):
    return np.where((x >= 0.25) & (x <= 0.75), 2.0, 0.0) + 0j


@dataclass(frozen=True)
class InitialCondition:
    name: str
    func: Callable
    splits: tuple = ()


INITIAL_CONDITIONS = {
    "smooth_a": InitialCondition("smooth_a", u0_smooth),
    "sobolev_b": InitialCondition("sobolev_b", u0_sobolev, (0.5,)),
    "nonsmooth_c": InitialCondition("nonsmooth_c", u0_nonsmooth, (0.25, 0.75)),
}


class Scheme(enum.Enum):
    IMPLICIT_EULER = "implicit_euler"
    CRANK_NICOLSON = "crank_nicolson"


@dataclass(frozen=True)
class TimeStepperConfig:
    scheme: Scheme
    dt: float
    xspace: SplineSpace
    T: float = 1.0
    potential: Optional[SeparablePotential] = None
    store_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"time step must be positive, got {self.dt}")
        n = self.T / self.dt
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ConfigError(f"T = {self.T} is not an integer multiple of dt = {self.dt}")
        if self.store_every < 1 or self.nsteps % self.store_every:
            raise ConfigError("store_every must divide the number of steps")

    @property
    def nsteps(self) -> int:
        return int(round(self.T / self.dt))

    def key(self, initial: str = "") -> str:
        desc = {
            "scheme": self.scheme.value,
            "dt": repr(self.dt),
            "T": repr(self.T),
            "level": self.xspace.mesh.level,
            "order": self.xspace.order,
            "L": repr(self.xspace.mesh.b),
            "potential": None if self.potential is None else self.potential.descriptor,
            "store_every": self.store_every,
            "initial": initial,
        }
        blob = json.dumps(desc, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class ReferenceSolution:
    """Stored states of a semi-discrete trajectory.

    Evaluation is linear in time between stored states and spline evaluation
    in space.
    """

    times: np.ndarray
    states: np.ndarray  # (nstored, dim) complex
    xspace: SplineSpace
    steps: Optional[np.ndarray] = None
    mass_norms: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    @property
    def xmesh(self) -> Mesh1D:
        return self.xspace.mesh

    @property
    def tmesh(self) -> Optional[Mesh1D]:
        # Stored times are uniform; expose them as a dyadic mesh when possible.
        n = self.times.size - 1
        if n >= 1 and n & (n - 1) == 0:
            return Mesh1D(float(self.times[0]), float(self.times[-1]), n.bit_length() - 1)
        return None

    def state_at(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        tt = self.times
        idx = np.clip(np.searchsorted(tt, t, side="right") - 1, 0, tt.size - 2)
        lam = ((t - tt[idx]) / (tt[idx + 1] - tt[idx]))[:, None]
        return (1.0 - lam) * self.states[idx] + lam * self.states[idx + 1]

    def evaluate_grid(self, t, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        X = collocation(self.xspace, x, 0, sparse=True)
        return (X @ self.state_at(t).T).T

    def __call__(self, t, x):
        return self.evaluate_grid(t, x)

    def to_csv(self, path) -> None:
        path = Path(path)
        n = self.states.shape[1]
        steps = self.steps if self.steps is not None else np.arange(self.times.size)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["STEP", "TIME"] + [f"RE{i}" for i in range(n)] + [f"IM{i}" for i in range(n)])
            for s, t, y in zip(steps, self.times, self.states):
                w.writerow([int(s), repr(float(t))] + [repr(float(v)) for v in y.real] + [repr(float(v)) for v in y.imag])
        meta = dict(self.meta)
        meta.update(level=self.xspace.mesh.level, order=self.xspace.order, L=self.xspace.mesh.b)
        path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True))

    @classmethod
    def from_csv(cls, path) -> "ReferenceSolution":
        path = Path(path)
        meta = json.loads(path.with_suffix(".json").read_text())
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        n = (data.shape[1] - 2) // 2
        xspace = make_spatial_space(meta["level"], meta["order"], meta["L"])
        return cls(
            times=data[:, 1],
            states=data[:, 2 : 2 + n] + 1j * data[:, 2 + n :],
            xspace=xspace,
            steps=data[:, 0].astype(int),
            meta=meta,
        )


def l2_distance(ref: ReferenceSolution, exact, npoints: int = 5, chunk: int = 256) -> float:
    """``||ref - exact||_{L2(I x Omega)}`` on the reference's own meshes."""
    rule = gauss_legendre(npoints)
    tmesh = ref.tmesh
    if tmesh is None:
        raise ConfigError("stored times do not form a dyadic mesh")
    t, wt = element_points(tmesh, rule)
    x, wx = element_points(ref.xmesh, rule)
    total = 0.0
    for s in range(0, t.size, chunk):
        tt = t[s : s + chunk]
        d = ref.evaluate_grid(tt, x) - exact(tt[:, None], x[None, :])
        total += wt[s : s + chunk] @ (np.abs(d) ** 2 @ wx)
    return float(np.sqrt(total))


def _sparse_gram(xspace, weight=None, derivative=0, npoints=None):
    rule = gauss_legendre(npoints or xspace.order + 1)
    x, w = element_points(xspace.mesh, rule)
    if weight is not None:
        w = w * np.broadcast_to(weight(x), x.shape)
    B = collocation(xspace, x, derivative, sparse=True)
    return (B.T @ sps.diags(w) @ B).tocsc()


def l2_projection(xspace: SplineSpace, u0, splits=()) -> np.ndarray:
    """Coefficients of the L2(Omega) projection of ``u0`` onto ``xspace``."""
    rule = gauss_legendre(xspace.order + 2)
    x, w = element_points(xspace.mesh, rule, splits)
    B = collocation(xspace, x, 0, sparse=True)
    load = B.T @ (w * np.asarray(u0(x), dtype=complex))
    M = _sparse_gram(xspace)
    return spla.spsolve(M.astype(complex), load)


def _factor(A, step):
    try:
        lu = spla.splu(A.tocsc())
    except RuntimeError as exc:
        raise FactorizationError(f"singular step matrix: {exc}", step=step) from exc
    return lu


def run_timestepper(cfg: TimeStepperConfig, u0, u0_splits=(), progress=None) -> ReferenceSolution:
    """Integrate ``i M y' = K(t) y`` from the L2 projection of ``u0``.

    ``K = 1/2 (phi', phi') + theta(t) (xi phi, phi)``.
    """
    xs = cfg.xspace
    M = _sparse_gram(xs).astype(complex)
    K0 = 0.5 * _sparse_gram(xs, derivative=1).astype(complex)
    Kxi = None
    if cfg.potential is not None:
        Kxi = _sparse_gram(xs, weight=cfg.potential.xi, npoints=xs.order + 4).astype(complex)

    def K(t):
        if Kxi is None:
            return K0
        return K0 + float(cfg.potential.theta(t)) * Kxi

    y = l2_projection(xs, u0, u0_splits).astype(complex)
    dt, n = cfg.dt, cfg.nsteps
    iM = 1j * M
    times, states, steps, norms = [0.0], [y.copy()], [0], [float(np.sqrt((y.conj() @ (M @ y)).real))]
    time_dependent = Kxi is not None
    lu = None
    for step in range(1, n + 1):
        t_new = step * dt
        if cfg.scheme is Scheme.IMPLICIT_EULER:
            Kt = K(t_new)
            if lu is None or time_dependent:
                lu = _factor(iM - dt * Kt, step)
            rhs = iM @ y
        else:
            Kt = K(t_new - 0.5 * dt)
            if lu is None or time_dependent:
                lu = _factor(iM - 0.5 * dt * Kt, step)
            rhs = iM @ y + 0.5 * dt * (Kt @ y)
        y = lu.solve(rhs)
        if not np.all(np.isfinite(y)):
            raise FactorizationError("non-finite state", step=step)
        if step % cfg.store_every == 0:
            times.append(t_new)
            states.append(y.copy())
            steps.append(step)
            norms.append(float(np.sqrt((y.conj() @ (M @ y)).real)))
        if progress is not None and step % max(1, n // 16) == 0:
            progress(step, n)
    return ReferenceSolution(
        times=np.array(times),
        states=np.array(states),
        xspace=xs,
        steps=np.array(steps),
        mass_norms=np.array(norms),
        meta={"scheme": cfg.scheme.value, "dt": cfg.dt, "nsteps": n, "store_every": cfg.store_every},
    )


def default_reference_config(case: str, potential=None, store_every: int = 64) -> TimeStepperConfig:
    """Implicit Euler with dt = 2^-14 on spatial level 11 (order 2 for case b, else 3)."""
    order = 2 if case == "sobolev_b" else 3
    return TimeStepperConfig(
        scheme=Scheme.IMPLICIT_EULER,
        dt=2.0**-14,
        xspace=make_spatial_space(11, order),
        potential=potential,
        store_every=store_every,
    )


def cached_reference(cfg: TimeStepperConfig, initial: InitialCondition, cache_dir=None, progress=None):
    """Run the time stepper or load a previous run keyed by a hash of the configuration."""
    path = None
    if cache_dir is not None:
        cache_dir = Path(cache_dir)
        cache_dir.mkdir(parents=True, exist_ok=True)
        path = cache_dir / f"reference_{initial.name}_{cfg.key(initial.name)}.csv"
        if path.exists() and path.with_suffix(".json").exists():
            log.info("loading cached reference %s", path)
            return ReferenceSolution.from_csv(path)
    log.info("computing reference for %s (%d steps)", initial.name, cfg.nsteps)
    ref = run_timestepper(cfg, initial.func, initial.splits, progress=progress)
    ref.meta["initial"] = initial.name
    if path is not None:
        ref.to_csv(path)
    return ref
