"""Experiment driver: level sweeps, records, and CSV/JSON emission."""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .assembly import (
    SeparablePotential,
    adjoint_image_terms,
    assemble_bundle,
    assemble_optimal_system,
    assemble_rhs,
    general_matrix,
)
from .diagnostics import condition_number, galerkin_infsup, infsup_constant
from .errors import ConfigError
from .field import DiscreteSolution, deviation_dT, l2_spacetime_error
from .galerkin import solve_galerkin
from .linsolve import SOLVERS
from .quadrature import gauss_legendre
from .reference import INITIAL_CONDITIONS, InitialCondition, analytic_case_a, cached_reference, default_reference_config
from .splines import make_spatial_space, make_temporal_space

log = logging.getLogger(__name__)

CASES = ("smooth_a", "sobolev_b", "nonsmooth_c", "custom")
RELATIONS = {"time_minus1": -1, "equal": 0, "time_plus1": 1}
VARIANTS = ("ultraweak", "galerkin")
COLUMNS = ("JSPACE", "JTIME", "NDOFS", "L2ERROR", "L2DIFF", "COND", "BETA", "RESIDUAL", "WALL_MS")
INT_COLUMNS = ("JSPACE", "JTIME", "NDOFS")


def parse_potential(spec: Optional[str]) -> Optional[SeparablePotential]:
    """Named separable potentials.

    ``none``; ``sine`` (``(1 + t) sin(pi x)``); ``constant:c``;
    ``harmonic:w`` (``w^2 (x - 1/2)^2 / 2``).
    """
    if spec is None or spec == "none":
        return None
    name, _, arg = spec.partition(":")
    try:
        if name == "sine" and not arg:
            return SeparablePotential(lambda t: 1.0 + t, lambda x: np.sin(np.pi * x), spec)
        if name == "constant":
            c = float(arg)
            return SeparablePotential(lambda t: c + 0.0 * t, lambda x: 1.0 + 0.0 * x, spec)
        if name == "harmonic":
            w = float(arg)
            return SeparablePotential(lambda t: 1.0 + 0.0 * t, lambda x: 0.5 * w * w * (x - 0.5) ** 2, spec)
    except ValueError as exc:
        raise ConfigError(f"bad potential parameter in {spec!r}") from exc
    raise ConfigError(f"unknown potential {spec!r}")


@dataclass
class ExperimentConfig:
    """One level sweep.

    ``case="custom"`` needs ``custom_initial`` and ``custom_reference`` and is
    only available through the Python API.
    """

    case: str = "smooth_a"
    relation: str = "time_plus1"
    levels: tuple = (1, 2, 3, 4, 5)
    orders: tuple = (3, 4)
    potential: str = "none"
    quad_points: Optional[int] = None
    solver: str = "complex"
    variant: str = "ultraweak"
    with_cond: bool = False
    with_beta: bool = False
    out: Optional[str] = None
    cache_dir: Optional[str] = None
    deterministic: bool = False
    galerkin_terminal_constraint: bool = False
    reference_store_every: int = 64
    custom_initial: Optional[InitialCondition] = None
    custom_reference: Optional[Callable] = None

    def __post_init__(self):
        self.levels = tuple(int(j) for j in self.levels)
        self.orders = tuple(int(p) for p in self.orders)
        if self.case not in CASES:
            raise ConfigError(f"unknown case {self.case!r}; choose from {CASES}")
        if self.relation not in RELATIONS:
            raise ConfigError(f"unknown relation {self.relation!r}; choose from {tuple(RELATIONS)}")
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}")
        if self.solver not in SOLVERS:
            raise ConfigError(f"unknown solver {self.solver!r}")
        if len(self.orders) != 2 or self.orders[0] < 2 or self.orders[1] < 3:
            raise ConfigError(f"orders (time, space) must satisfy time >= 2, space >= 3; got {self.orders}")
        if any(j < 1 or j + RELATIONS[self.relation] < 0 for j in self.levels):
            raise ConfigError(f"levels {self.levels} invalid for relation {self.relation}")
        if self.case == "custom" and (self.custom_initial is None or self.custom_reference is None):
            raise ConfigError("custom case needs custom_initial and custom_reference")
        parse_potential(self.potential)

    @classmethod
    def from_mapping(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        return cls(**data)

    @property
    def pot(self) -> Optional[SeparablePotential]:
        return parse_potential(self.potential)

    @property
    def initial(self) -> InitialCondition:
        if self.case == "custom":
            return self.custom_initial
        return INITIAL_CONDITIONS[self.case]

    def spaces(self, jspace: int):
        jtime = jspace + RELATIONS[self.relation]
        return make_temporal_space(jtime, self.orders[0]), make_spatial_space(jspace, self.orders[1])


@dataclass
class ExperimentRecord:
    JSPACE: int
    JTIME: int
    NDOFS: int
    L2ERROR: float
    L2DIFF: float
    COND: float = math.nan
    BETA: float = math.nan
    RESIDUAL: float = math.nan
    WALL_MS: float = 0.0
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def row(self) -> dict:
        return {c: getattr(self, c) for c in COLUMNS}


def reference_for(cfg: ExperimentConfig, progress=None):
    """Analytic solution for the free smooth case, else a cached time-stepper run."""
    pot = cfg.pot
    if cfg.case == "custom":
        return cfg.custom_reference
    if cfg.case == "smooth_a" and pot is None:
        return analytic_case_a
    rcfg = default_reference_config(cfg.case, pot, store_every=cfg.reference_store_every)
    return cached_reference(rcfg, cfg.initial, cfg.cache_dir, progress=progress)


def _log_progress(step, n):
    log.info("reference time stepping: %d / %d", step, n)


def run_level(cfg: ExperimentConfig, jspace: int, ref=None) -> ExperimentRecord:
    ts, xs = cfg.spaces(jspace)
    pot = cfg.pot
    quad = gauss_legendre(cfg.quad_points) if cfg.quad_points else None
    init = cfg.initial
    if ref is None:
        ref = reference_for(cfg, _log_progress)
    start = time.perf_counter()
    if cfg.variant == "ultraweak":
        bundle = assemble_bundle(ts, xs, pot, quad)
        system = assemble_optimal_system(bundle, pot)
        system.rhs = assemble_rhs(ts, xs, None, init.func, init.splits, quad)
        res = SOLVERS[cfg.solver](system.S, system.rhs)
        sol = DiscreteSolution(res.u, ts, xs, pot)
        residual = res.relative_residual
        cond = condition_number(system.S) if cfg.with_cond else math.nan
        beta = math.nan
        if cfg.with_beta:
            B = general_matrix(adjoint_image_terms(ts, xs, pot), ts, xs, pot, quad)
            beta = infsup_constant(B, system.S, system.S)
    else:
        sol = solve_galerkin(
            ts, xs, pot, init.func, init.splits, cfg.galerkin_terminal_constraint, quad
        )
        residual = sol.info["relative_residual"]
        cond = math.nan
        beta = galerkin_infsup(ts, xs, pot, quad) if cfg.with_beta else math.nan
    wall = (time.perf_counter() - start) * 1e3
    return ExperimentRecord(
        JSPACE=jspace,
        JTIME=ts.mesh.level,
        NDOFS=int(sol.coeffs.size),
        L2ERROR=l2_spacetime_error(sol, ref, quad),
        L2DIFF=deviation_dT(sol, quad),
        COND=cond,
        BETA=beta,
        RESIDUAL=residual,
        WALL_MS=0.0 if cfg.deterministic else wall,
        extra={"solution": sol},
    )


def run_convergence(cfg: ExperimentConfig) -> list[ExperimentRecord]:
    if not cfg.levels:
        return []
    ref = reference_for(cfg, _log_progress)
    records = [run_level(cfg, j, ref) for j in sorted(cfg.levels)]
    for r in records:
        log.info("JSPACE=%d JTIME=%d NDOFS=%d L2ERROR=%.3e", r.JSPACE, r.JTIME, r.NDOFS, r.L2ERROR)
    return records


TABLE1_LEVELS = (1, 2, 3, 4, 5)


def run_table1(with_cond: bool = False, deterministic: bool = False, solver: str = "complex") -> list[ExperimentRecord]:
    """Free smooth case on all 15 level pairs of the inf-sup table, with ``BETA``."""
    records = []
    for rel in RELATIONS:
        cfg = ExperimentConfig(
            relation=rel,
            levels=TABLE1_LEVELS,
            with_beta=True,
            with_cond=with_cond,
            deterministic=deterministic,
            solver=solver,
        )
        records += run_convergence(cfg)
    return sort_records(records)


def sort_records(records: Sequence[ExperimentRecord]) -> list[ExperimentRecord]:
    return sorted(records, key=lambda r: (r.JSPACE, r.JTIME))


def _fmt(col, v):
    if col in INT_COLUMNS:
        return str(int(v))
    return "%.15e" % v


def _open(path):
    if path is None or str(path) == "-":
        return _NoClose(sys.stdout)
    return open(path, "w", newline="")


class _NoClose:
    def __init__(self, fh):
        self.fh = fh

    def __enter__(self):
        return self.fh

    def __exit__(self, *exc):
        self.fh.flush()


def emit_csv(records: Sequence[ExperimentRecord], path=None) -> None:
    """Write records as CSV (``path`` None or ``-`` means stdout), ascending level order."""
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in sort_records(records):
            w.writerow([_fmt(c, getattr(r, c)) for c in COLUMNS])


def read_csv(path) -> list[ExperimentRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [
        ExperimentRecord(**{c: int(row[c]) if c in INT_COLUMNS else float(row[c]) for c in COLUMNS})
        for row in rows
    ]


def emit_json(records: Sequence[ExperimentRecord], path=None) -> None:
    """JSON list of records; NaN (quantity not computed) becomes ``null``."""
    out = []
    for r in sort_records(records):
        row = r.row()
        out.append({k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in row.items()})
    with _open(path) as fh:
        json.dump(out, fh, indent=2)
        fh.write("\n")


def read_json(path) -> list[ExperimentRecord]:
    data = json.loads(Path(path).read_text())
    return [
        ExperimentRecord(**{k: (math.nan if v is None else v) for k, v in row.items()})
        for row in data
    ]
