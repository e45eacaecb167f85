"""Command-line interface: ``ultraweak <subcommand> [options]``.

Errors are reported on stderr as one JSON object ``{"error": category,
"message": ...}`` and mapped to a nonzero exit code.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .diagnostics import eps_delta, fit_rate
from .errors import EXIT_CODES, ConfigError, UltraweakError
from .experiments import (
    RELATIONS,
    ExperimentConfig,
    emit_csv,
    emit_json,
    parse_potential,
    run_convergence,
    run_table1,
)
from .reference import (
    INITIAL_CONDITIONS,
    Scheme,
    TimeStepperConfig,
    analytic_case_a,
    cached_reference,
    l2_distance,
)
from .splines import make_spatial_space

log = logging.getLogger(__name__)


def _levels(text: str) -> tuple:
    """``"1-5"``, ``"2,3,4"`` or ``"3"``."""
    try:
        if "-" in text:
            lo, hi = text.split("-")
            return tuple(range(int(lo), int(hi) + 1))
        return tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError as exc:
        raise ConfigError(f"bad level range {text!r}") from exc


def _orders(text: str) -> tuple:
    try:
        t, x = (int(s) for s in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"orders must be 'time,space', got {text!r}") from exc
    return (t, x)


def _load_config_file(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} not found")
    text = path.read_text()
    if path.suffix in (".yml", ".yaml"):
        import yaml

        data = yaml.safe_load(text) or {}
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a mapping")
    return data


def _config(args, **forced) -> ExperimentConfig:
    data = _load_config_file(args.config) if getattr(args, "config", None) else {}
    overrides = {
        "case": args.case,
        "relation": getattr(args, "relation", None),
        "levels": _levels(args.levels) if getattr(args, "levels", None) else None,
        "orders": _orders(args.orders) if getattr(args, "orders", None) else None,
        "potential": args.potential,
        "quad_points": args.quad_points,
        "solver": args.solver,
        "variant": getattr(args, "variant", None),
        "out": args.out,
        "cache_dir": args.cache_dir,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    for flag in ("with_cond", "with_beta", "deterministic", "galerkin_terminal_constraint"):
        if getattr(args, flag, False):
            data[flag] = True
    data.update(forced)
    if data.get("case") == "custom":
        raise ConfigError("the custom case is only available through the Python API")
    if "levels" in data and not data["levels"]:
        raise ConfigError("level range is empty")
    return ExperimentConfig.from_mapping(data)


def _emit(records, out, fmt):
    if fmt is None:
        fmt = "json" if out and str(out).endswith(".json") else "csv"
    (emit_json if fmt == "json" else emit_csv)(records, out)


def _report_slope(label, records, attr):
    pts = [(r.NDOFS, getattr(r, attr)) for r in records if np.isfinite(getattr(r, attr)) and getattr(r, attr) > 0]
    if len(pts) >= 2:
        log.info("%s: log-log slope of %s vs NDOFS = %.3f", label, attr, fit_rate(pts))


def cmd_table1(args):
    records = run_table1(with_cond=args.with_cond, deterministic=args.deterministic, solver=args.solver or "complex")
    _emit(records, args.out, args.format)


def cmd_converge(args):
    cfg = _config(args)
    records = run_convergence(cfg)
    _report_slope(cfg.relation, records, "L2ERROR")
    _report_slope(cfg.relation, records, "L2DIFF")
    _emit(records, cfg.out, args.format)


def _suffixed(out, rel):
    if out is None or out == "-":
        return out
    p = Path(out)
    return str(p.with_name(f"{p.stem}_{rel}{p.suffix}"))


def cmd_condition(args):
    rels = [args.relation] if args.relation else list(RELATIONS)
    for rel in rels:
        cfg = _config(args, relation=rel, with_cond=True)
        records = run_convergence(cfg)
        _report_slope(rel, records, "COND")
        _emit(records, cfg.out if len(rels) == 1 else _suffixed(cfg.out, rel), args.format)


def cmd_infsup(args):
    cfg = _config(args, with_beta=True)
    _emit(run_convergence(cfg), cfg.out, args.format)


def cmd_galerkin(args):
    cfg = _config(args, variant="galerkin", with_beta=True)
    records = run_convergence(cfg)
    pot = cfg.pot
    for r in records:
        ts, xs = cfg.spaces(r.JSPACE)
        eps = eps_delta(ts, xs, pot)
        log.info(
            "JSPACE=%d JTIME=%d eps_delta=%.4e galerkin_beta=%.4e 1-2eps=%.4e norm_deviation=%.3e",
            r.JSPACE, r.JTIME, eps, r.BETA, 1 - 2 * eps, r.L2DIFF,
        )
    _emit(records, cfg.out, args.format)


def cmd_reference(args):
    case = args.case or "smooth_a"
    if case not in INITIAL_CONDITIONS:
        raise ConfigError(f"reference runs need a built-in case, got {case!r}")
    init = INITIAL_CONDITIONS[case]
    order = args.space_order or (2 if case == "sobolev_b" else 3)
    cfg = TimeStepperConfig(
        scheme=Scheme(args.scheme),
        dt=2.0 ** -args.dt_level,
        xspace=make_spatial_space(args.space_level, order),
        potential=parse_potential(args.potential),
        store_every=args.store_every,
    )
    progress = (lambda s, n: log.info("step %d / %d", s, n)) if args.verbose else None
    ref = cached_reference(cfg, init, args.cache_dir, progress=progress)
    summary = {
        "case": case,
        "key": cfg.key(case),
        "scheme": cfg.scheme.value,
        "dt": cfg.dt,
        "space_level": args.space_level,
        "space_order": order,
        "stored_states": int(ref.times.size),
    }
    if ref.mass_norms is not None:
        summary["mass_norm_drift"] = float(np.max(np.abs(ref.mass_norms - ref.mass_norms[0])))
    if case == "smooth_a" and cfg.potential is None:
        summary["l2_error_vs_analytic"] = l2_distance(ref, analytic_case_a)
    json.dump(summary, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _common(p, levels=True):
    p.add_argument("--config", help="JSON or YAML file with ExperimentConfig fields")
    p.add_argument("--case", choices=["smooth_a", "sobolev_b", "nonsmooth_c"])
    if levels:
        p.add_argument("--relation", choices=list(RELATIONS))
        p.add_argument("--levels", help="spatial levels, e.g. 1-5 or 2,3,4")
        p.add_argument("--orders", help="spline orders 'time,space' (default 3,4)")
    p.add_argument("--potential", help="none | sine | constant:C | harmonic:W")
    p.add_argument("--quad-points", type=int, dest="quad_points")
    p.add_argument("--solver", choices=["complex", "block_real"])
    p.add_argument("--with-cond", action="store_true", dest="with_cond")
    p.add_argument("--with-beta", action="store_true", dest="with_beta")
    p.add_argument("--deterministic", action="store_true", help="write WALL_MS as 0 for reproducible output")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--cache-dir", dest="cache_dir", help="directory for cached reference solutions")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ultraweak", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table1", help="inf-sup constants and sizes for all 15 level pairs")
    _common(p, levels=False)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("converge", help="error and norm deviation over a level range")
    _common(p)
    p.add_argument("--variant", choices=["ultraweak", "galerkin"])
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("condition", help="spectral condition numbers (all relations by default)")
    _common(p)
    p.set_defaults(func=cmd_condition)

    p = sub.add_parser("infsup", help="discrete inf-sup constants")
    _common(p)
    p.set_defaults(func=cmd_infsup)

    p = sub.add_parser("galerkin", help="Galerkin variant with its stability diagnostics")
    _common(p)
    p.add_argument("--terminal-constraint", action="store_true", dest="galerkin_terminal_constraint",
                   help="keep the final-time constraint in the trial space")
    p.set_defaults(func=cmd_galerkin)

    p = sub.add_parser("reference", help="compute or load a time-stepping reference solution")
    p.add_argument("--case", choices=sorted(INITIAL_CONDITIONS))
    p.add_argument("--scheme", choices=[s.value for s in Scheme], default="implicit_euler")
    p.add_argument("--dt-level", type=int, default=14, dest="dt_level")
    p.add_argument("--space-level", type=int, default=11, dest="space_level")
    p.add_argument("--space-order", type=int, dest="space_order")
    p.add_argument("--store-every", type=int, default=64, dest="store_every")
    p.add_argument("--potential")
    p.add_argument("--cache-dir", dest="cache_dir")
    p.set_defaults(func=cmd_reference)
    return parser


def _fail(category: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": category, "message": message}) + "\n")
    return EXIT_CODES.get(category, 1)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    # Slope summaries are useful even without --verbose.
    log.setLevel(logging.INFO)
    try:
        args.func(args)
    except UltraweakError as exc:
        return _fail(exc.category, str(exc))
    except OSError as exc:
        return _fail("io", str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
