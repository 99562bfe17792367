"""Batch front door: every computation as a subcommand with file output.

Outputs are deterministic for a fixed configuration: JSON payloads are
written with sorted keys and repr floats, CSV rows with repr floats, and the
resolved configuration is embedded in every file so a run can be reproduced
from its own output.  The only field allowed to differ between identical
runs is the timestamp.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CknError, ParameterError
from .params import derive, kappa, validate

SCHEMA = "ckn/1"

_SUBCOMMANDS = ("params", "profile", "shoot", "minimize", "spectrum", "flow",
                "selection", "sweep")


def _resolved_config(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in vars(args).items()
           if k not in ("func", "config") and v is not None}
    out = cfg.get("out")
    if out is not None:
        cfg["out"] = str(out)
    return cfg


def _payload(args: argparse.Namespace, result: dict) -> dict:
    return {
        "schema": SCHEMA,
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
        "config": _resolved_config(args),
        "result": result,
    }


def _emit_json(args: argparse.Namespace, result: dict) -> None:
    text = json.dumps(_payload(args, result), sort_keys=True, indent=2,
                      default=float) + "\n"
    _write(args, text)


def _emit_csv(args: argparse.Namespace, header: list[str],
              rows: list[list], result_meta: dict | None = None) -> None:
    lines = [f"# schema={SCHEMA}"]
    cfg = _resolved_config(args)
    lines.append("# config=" + json.dumps(cfg, sort_keys=True, default=float))
    lines.append(f"# timestamp={time.strftime('%Y-%m-%dT%H:%M:%S', time.gmtime())}")
    if result_meta:
        lines.append("# meta=" + json.dumps(result_meta, sort_keys=True,
                                            default=float))
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(repr(float(x)) if isinstance(x, (int, float, np.floating))
                              else str(x) for x in row))
    _write(args, "\n".join(lines) + "\n")


def _write(args: argparse.Namespace, text: str) -> None:
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)


def parse_config_echo(text: str) -> dict:
    """Recover the resolved configuration from an output file."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return json.loads(text)["config"]
    for line in text.splitlines():
        if line.startswith("# config="):
            return json.loads(line[len("# config="):])
    raise ValueError("no embedded configuration found")


# -- subcommand handlers --------------------------------------------------------

def _cmd_params(args) -> None:
    pp = validate(args.d, args.gamma, args.p)
    ex = derive(pp)
    result = {"d": pp.d, "gamma": pp.gamma, "p": pp.p, "p_max": pp.p_max,
              "kappa": kappa(pp)}
    result.update(dataclasses.asdict(ex))
    if args.format == "json":
        _emit_json(args, result)
    else:
        keys = sorted(result)
        _emit_csv(args, keys, [[result[k] for k in keys]])


def _cmd_profile(args) -> None:
    from .profiles import default_grid, el_residual, w_gamma_star, w_star

    pp = validate(args.d, args.gamma, args.p)
    prof_fn = w_star(pp) if args.kind == "wstar" else w_gamma_star(pp)
    grid = default_grid(args.r_min, args.r_max, args.points_per_decade)
    prof = prof_fn.sample(grid)
    residual = el_residual(prof_fn, pp, radii=grid)
    if args.format == "json":
        _emit_json(args, {"kind": args.kind, "el_residual": residual,
                          "profile": json.loads(prof.to_json())})
    else:
        rows = list(zip(prof.radii, prof.values, prof.derivs))
        _emit_csv(args, ["r", "w", "dw"], rows,
                  result_meta={"el_residual": residual, "kind": args.kind})


def _cmd_shoot(args) -> None:
    from .shooting import find_ground_state, to_flat_variables

    pp = validate(args.d, args.gamma, args.p)
    d_gamma, c_map = to_flat_variables(pp)
    res = find_ground_state(pp, tol=args.tol, s_max=args.s_max)
    result = {
        "v0": res.v0,
        "classification": res.classification.value,
        "d_gamma": d_gamma,
        "c_map": c_map,
        "bisection_steps": len(res.bisection_history),
    }
    if args.format == "json":
        _emit_json(args, result)
    else:
        prof = res.profile
        rows = list(zip(prof.radii, prof.values))
        _emit_csv(args, ["r", "v"], rows, result_meta=result)


def _cmd_minimize(args) -> None:
    from .minimizer import GridConfig, best_constant_radial, minimize_radial

    pp = validate(args.d, args.gamma, args.p)
    grid = GridConfig(n=args.grid, r_min=args.r_min, r_max=args.r_max)
    rep = minimize_radial(pp, grid, solver_tol=args.solver_tol,
                          start=args.start, richardson=not args.no_richardson)
    c_star, J_closed = best_constant_radial(pp)
    result = {
        "best_quotient": rep.best_quotient,
        "reference_quotient": rep.reference,
        "closed_form_quotient": 1.0 / c_star,
        "J": rep.J,
        "J_closed_form": J_closed,
        "C_star": c_star,
        "mass": rep.mass,
        "iterations": rep.iterations,
        "gradient_norm": rep.gradient_norm,
        "dilation_balance": rep.dilation_balance,
        "err_estimate": rep.err_estimate,
        "grid_n": grid.n,
    }
    if args.format == "json":
        _emit_json(args, result)
    else:
        header = ["d", "gamma", "p", "CStar", "J", "gridN", "errEst"]
        row = [pp.d, pp.gamma, pp.p, c_star, rep.J, grid.n,
               rep.err_estimate if rep.err_estimate is not None else float("nan")]
        _emit_csv(args, header, [row], result_meta=result)


def _cmd_spectrum(args) -> None:
    from .profiles import w_gamma_star
    from .spectral import assemble, lowest_eigenvalue, mass_direction_constraint

    pp = validate(args.d, args.gamma, args.p)
    grid = np.geomspace(args.r_min, args.r_max, args.n)
    prof = w_gamma_star(pp)
    op = assemble(pp, prof, args.ell, grid)
    if args.ell == 0:
        op.constraints = [mass_direction_constraint(pp, prof, grid)]
    lam, _ = lowest_eigenvalue(op)
    result = {"ell": args.ell, "lambda_min": lam, "n": args.n,
              "r_max": args.r_max, "constrained": args.ell == 0}
    if args.format == "json":
        _emit_json(args, result)
    else:
        keys = sorted(result)
        _emit_csv(args, keys, [[result[k] for k in keys]])


def _cmd_flow(args) -> None:
    from .flow import fit_decay_rate, run_decay, stationary_profile
    from .profiles import RadialProfile

    if args.initial is not None:
        text = Path(args.initial).read_text()
        if text.lstrip().startswith("{"):
            datum = RadialProfile.from_json(text)
        else:
            datum = RadialProfile.from_csv(text)
    else:
        base = stationary_profile(args.m, args.gamma, args.d, args.mass)

        def datum(r):
            return base(r) * (1.0 + args.amplitude *
                              np.cos(np.log(np.maximum(r, 1e-12))))

    series = run_decay(datum, args.m, args.gamma, T=args.T, d=args.d,
                       n_cells=args.cells, r_out=args.r_out,
                       record_every=args.record_every)
    meta = {
        "rate_bound": (2.0 - args.gamma) ** 2,
        "stationary_C": series.stationary.C,
        "max_identity_residual": float(np.max(series.identity_residuals())),
    }
    try:
        meta["fitted_rate"] = fit_decay_rate(series)
    except ValueError:
        meta["fitted_rate"] = None
    if args.format == "json":
        result = dict(meta, t=series.t.tolist(), F=series.F.tolist(),
                      I=series.I.tolist(), mass=series.mass.tolist())
        _emit_json(args, result)
    else:
        rows = list(zip(series.t, series.F, series.I, series.mass, series.dt))
        _emit_csv(args, ["t", "F", "I", "mass", "dt"], rows, result_meta=meta)


def _cmd_selection(args) -> None:
    from .selection import (SelectionContext, F_selection, G_prime, ell,
                            inverse_square_integral, isotropy_matrix, m3_closed,
                            m_d, total_K_integral)

    ctx = SelectionContext(args.d, args.p)
    quad_val, closed = total_K_integral(ctx)
    inv2 = inverse_square_integral(ctx)
    T = isotropy_matrix(ctx)
    result = {
        "crossing_radius": ctx.crossing_radius,
        "total_K_quadrature": quad_val,
        "total_K_closed_form": closed,
        "inverse_square_integral": inv2,
        "isotropy_diagonal_factor": float(T[0, 0] / inv2),
    }
    if args.curve == "angular":
        s_grid = np.geomspace(args.s_min, args.s_max, args.s_points)
        header = ["s", "ell", "m_d"]
        rows = [[float(s), ell(float(s), args.d), m_d(float(s), args.d)]
                for s in s_grid]
        if args.d == 3:
            header.append("m3_closed")
            for row, s in zip(rows, s_grid):
                row.append(m3_closed(float(s)))
    elif args.curve == "gprime":
        t_grid = np.geomspace(args.s_min, args.s_max, args.s_points)
        header = ["t", "G_prime"]
        rows = [[float(t), G_prime(float(t), ctx)] for t in t_grid]
    elif args.curve == "fmap":
        y_grid = np.linspace(0.0, args.s_max, args.s_points)
        header = ["y", "F"]
        rows = [[float(y), F_selection(float(y), ctx)] for y in y_grid]
    else:
        raise ValueError(f"unknown curve {args.curve!r}")
    if args.format == "json":
        result["curve"] = args.curve
        result["columns"] = header
        result["rows"] = rows
        _emit_json(args, result)
    else:
        _emit_csv(args, header, rows, result_meta=result)


def _sweep_point(task):
    d, p, g, ell_idx, r_min, r_max, n = task
    from .profiles import w_gamma_star
    from .spectral import assemble, lowest_eigenvalue, mass_direction_constraint

    pp = validate(d, g, p)
    grid = np.geomspace(r_min, r_max, n)
    prof = w_gamma_star(pp)
    op = assemble(pp, prof, ell_idx, grid)
    if ell_idx == 0:
        op.constraints = [mass_direction_constraint(pp, prof, grid)]
    lam, _ = lowest_eigenvalue(op)
    return g, lam


def _cmd_sweep(args) -> None:
    lo, hi, count = args.gamma_start, args.gamma_stop, args.gamma_points
    gammas = np.linspace(lo, hi, count)
    tasks = [(args.d, args.p, float(g), args.ell, args.r_min, args.r_max,
              args.n) for g in gammas]
    if args.workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            points = list(pool.map(_sweep_point, tasks))
    else:
        points = [_sweep_point(t) for t in tasks]
    if args.per_point_dir is not None:
        outdir = Path(args.per_point_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        for g, lam in points:
            payload = _payload(args, {"gamma": g, "lambda_min": lam,
                                      "ell": args.ell, "n": args.n})
            (outdir / f"gamma_{g:.6f}.json").write_text(
                json.dumps(payload, sort_keys=True, indent=2, default=float) + "\n")
    rows = [[g, args.ell, lam, args.n, args.r_max] for g, lam in points]
    if args.format == "json":
        _emit_json(args, {"points": [{"gamma": g, "lambda_min": lam}
                                     for g, lam in points],
                          "ell": args.ell, "n": args.n, "r_max": args.r_max})
    else:
        _emit_csv(args, ["gamma", "ell", "lambdaMin", "gridN", "rMax"], rows)


# -- argument plumbing -------------------------------------------------------------

def _add_common(sp, *, need_p=True):
    sp.add_argument("--d", type=int, default=3)
    sp.add_argument("--gamma", type=float, default=0.0)
    if need_p:
        sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--out", type=Path, default=None)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--config", type=Path, default=None,
                    help="key=value file; command-line flags take precedence")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ckn",
        description="numerical laboratory for weighted interpolation "
                    "inequalities and the associated fast-diffusion flow")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    sp = sub.add_parser("params", help="validated parameters and derived exponents")
    _add_common(sp)
    sp.set_defaults(func=_cmd_params)

    sp = sub.add_parser("profile", help="sample an explicit optimizer profile")
    _add_common(sp)
    sp.add_argument("--kind", choices=("wstar", "optimizer"), default="optimizer")
    sp.add_argument("--r-min", type=float, default=1e-4)
    sp.add_argument("--r-max", type=float, default=1e4)
    sp.add_argument("--points-per-decade", type=int, default=64)
    sp.set_defaults(func=_cmd_profile)

    sp = sub.add_parser("shoot", help="ground state by bisection shooting")
    _add_common(sp)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--s-max", type=float, default=2e3)
    sp.set_defaults(func=_cmd_shoot)

    sp = sub.add_parser("minimize", help="radial best constant by descent")
    _add_common(sp)
    sp.add_argument("--grid", type=int, default=1024)
    sp.add_argument("--r-min", type=float, default=1e-3)
    sp.add_argument("--r-max", type=float, default=1e3)
    sp.add_argument("--solver-tol", type=float, default=1e-4)
    sp.add_argument("--start", choices=("warm", "cold"), default="warm")
    sp.add_argument("--no-richardson", action="store_true")
    sp.set_defaults(func=_cmd_minimize)

    sp = sub.add_parser("spectrum", help="lowest sector eigenvalue")
    _add_common(sp)
    sp.add_argument("--ell", type=int, default=1)
    sp.add_argument("--n", type=int, default=2000)
    sp.add_argument("--r-min", type=float, default=1e-4)
    sp.add_argument("--r-max", type=float, default=1e4)
    sp.set_defaults(func=_cmd_spectrum)

    sp = sub.add_parser("flow", help="weighted fast-diffusion decay run")
    _add_common(sp, need_p=False)
    sp.add_argument("--m", type=float, default=0.75)
    sp.add_argument("--T", type=float, default=3.0)
    sp.add_argument("--cells", type=int, default=400)
    sp.add_argument("--r-out", type=float, default=25.0)
    sp.add_argument("--mass", type=float, default=50.0)
    sp.add_argument("--amplitude", type=float, default=0.1)
    sp.add_argument("--record-every", type=int, default=10)
    sp.add_argument("--initial", type=Path, default=None,
                    help="initial datum as a profile file (JSON or CSV)")
    sp.set_defaults(func=_cmd_flow)

    sp = sub.add_parser("selection", help="selection-principle integrals")
    _add_common(sp)
    sp.add_argument("--curve", choices=("angular", "gprime", "fmap"),
                    default="angular")
    sp.add_argument("--s-min", type=float, default=1e-2)
    sp.add_argument("--s-max", type=float, default=1e2)
    sp.add_argument("--s-points", type=int, default=50)
    sp.set_defaults(func=_cmd_selection)

    sp = sub.add_parser("sweep", help="lowest eigenvalue along a gamma grid")
    _add_common(sp)
    sp.add_argument("--gamma-start", type=float, default=0.0)
    sp.add_argument("--gamma-stop", type=float, default=0.1)
    sp.add_argument("--gamma-points", type=int, default=20)
    sp.add_argument("--ell", type=int, default=1)
    sp.add_argument("--n", type=int, default=2000)
    sp.add_argument("--r-min", type=float, default=1e-4)
    sp.add_argument("--r-max", type=float, default=1e4)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--per-point-dir", type=Path, default=None,
                    help="also write one JSON file per sweep point here")
    sp.set_defaults(func=_cmd_sweep)

    return ap


def _apply_config_file(argv: list[str], ap: argparse.ArgumentParser) -> list[str]:
    """Insert key=value pairs from --config as defaults before the flags."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    path = Path(argv[idx + 1])
    extra: list[str] = []
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        extra.extend([f"--{key.strip().replace('_', '-')}", value.strip()])
    # subcommand first, then config-derived values, then explicit flags
    return argv[:1] + extra + argv[1:]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    if argv and argv[0] in _SUBCOMMANDS:
        argv = _apply_config_file(argv, ap)
    try:
        args = ap.parse_args(argv)
        args.func(args)
    except ParameterError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return 2
    except CknError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
