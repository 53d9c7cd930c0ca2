"""Command-line front end.

Exit codes: 0 success, 1 a validation criterion failed, 2 bad parameters,
3 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import __version__, asymptotics, atlas, bounds
from ._accel import backend_name
from .errors import DegenerateRatio, FlexMatchError, HypothesisViolated, NoConvergence
from .model import Allocation, scenario_model
from .montecarlo import monte_carlo_rate
from .rde import DEFAULT_ITERS, rde_matching_rate
from .variational import DEFAULT_GRID_N, allocation_results, maximize_F

EXIT_OK, EXIT_FAILED, EXIT_PARAMS, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def parse_side(text: str) -> tuple[Allocation, tuple[float, float] | None]:
    if text in ("one", "two"):
        return Allocation(text), None
    if text.startswith("custom:"):
        try:
            b_l, b_r = (float(v) for v in text[len("custom:"):].split(","))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad custom split {text!r}") from exc
        return Allocation.CUSTOM, (b_l, b_r)
    raise argparse.ArgumentTypeError(f"side must be one, two or custom:<bL>,<bR>, got {text!r}")


def _clean(obj):
    """JSON-safe copy: NaN and inf become null, tuples become lists."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func",)}
    if "side" in cfg and cfg["side"] is not None:
        alloc, split = cfg["side"]
        cfg["side"] = alloc.value if split is None else f"custom:{split[0]},{split[1]}"
    cfg["backend"] = backend_name()
    cfg["version"] = __version__
    return _clean(cfg)


def _emit(args, payload: dict) -> None:
    payload = _clean({"config": _config(args), **payload})
    if args.format == "csv":
        flat = {k: v for k, v in payload.items() if not isinstance(v, (dict, list))}
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(flat), lineterminator="\n")
        w.writeheader()
        w.writerow({k: ("" if v is None else v) for k, v in flat.items()})
        text = buf.getvalue()
        _write(args, text, payload["config"])
    else:
        _write(args, json.dumps(payload, indent=2) + "\n", None)


def _write(args, text: str, sidecar: dict | None) -> None:
    if args.out:
        Path(args.out).write_text(text)
        if sidecar is not None:
            Path(str(args.out) + ".meta.json").write_text(json.dumps(sidecar, indent=2) + "\n")
    else:
        sys.stdout.write(text)
        if sidecar is not None:
            sys.stderr.write("# config " + json.dumps(sidecar) + "\n")


def _model(args, side=None):
    alloc, split = side or args.side
    return scenario_model(args.budget, args.alpha, args.alpha_f, alloc, split)


def cmd_eval(args) -> int:
    os_res, ts_res = allocation_results(args.budget, args.alpha, args.alpha_f, args.grid_n)
    adv = os_res.eta / ts_res.eta if ts_res.eta > 0 else None
    payload = {
        "eta_os": os_res.eta,
        "eta_ts": ts_res.eta,
        "adv_os": adv,
        "verdict": atlas.verdict_of(os_res.eta, ts_res.eta, args.tie_tol).value,
        "t_star": {"os": list(os_res.t_star), "ts": list(ts_res.t_star)},
        "f_star": {"os": os_res.f_star, "ts": ts_res.f_star},
        "method": {"os": os_res.method.value, "ts": ts_res.method.value},
    }
    if adv is None:
        payload["note"] = str(DegenerateRatio("two-sided rate is zero; adv_os undefined"))
    if args.side is not None and args.side[0] is Allocation.CUSTOM:
        payload["custom"] = maximize_F(_model(args), grid_n=args.grid_n).as_dict()
    if args.crossover_max is not None:
        cross = atlas.crossover_alpha_f(args.budget, args.alpha, args.crossover_max, args.grid_n)
        payload["crossover_alpha_f"] = cross.alpha_f
        payload["crossover_other_sign_changes"] = cross.other_sign_changes
    _emit(args, payload)
    return EXIT_OK


def cmd_sweep(args) -> int:
    budgets = args.budgets if args.budgets else [args.budget]
    cells = atlas.sweep(budgets, args.alpha_grid, args.alpha_f_grid, args.tie_tol, args.grid_n, args.jobs)
    if args.format == "json":
        rows = [dict(zip(atlas.CSV_HEADER, c.row())) for c in cells]
        _write(args, json.dumps({"config": _config(args), "cells": rows}, indent=2) + "\n", None)
    else:
        buf = io.StringIO()
        atlas.write_csv(cells, buf)
        _write(args, buf.getvalue(), _config(args))
    return EXIT_OK


def cmd_simulate(args) -> int:
    model = _model(args)
    mc = monte_carlo_rate(model, args.n, args.trials, args.seed, args.jobs)
    eta = maximize_F(model, grid_n=args.grid_n).eta
    _emit(args, {"mean": mc.mean, "std_err": mc.std_err, "formula": eta, "abs_gap": abs(mc.mean - eta),
                 "fractions": list(mc.fractions)})
    return EXIT_OK


def cmd_rde(args) -> int:
    model = _model(args)
    est = rde_matching_rate(model, args.pop_size, args.iters, args.root_samples, args.seed, args.truncation)
    res = maximize_F(model, grid_n=args.grid_n)
    if args.dump_pop:
        est.state.dump(args.dump_pop)
    last = est.state.diagnostics[-1]
    _emit(args, {"eta_hat": est.eta_hat, "std_err": est.std_err, "formula": res.eta,
                 "abs_gap": abs(est.eta_hat - res.eta), "positivity": list(est.positivity),
                 "t_star": list(res.t_star), "final_cdf_distance": last.cdf_distance})
    return EXIT_OK


def _optional(fn, *a):
    try:
        return fn(*a)
    except HypothesisViolated:
        return None


def cmd_limits(args) -> int:
    rep = asymptotics.limit_unmatched(args.budget, args.alpha)
    z = _optional(asymptotics.solve_z, args.budget, args.alpha)
    _emit(args, {
        **rep.as_dict(),
        "b_star": asymptotics.b_star(),
        "c_B": asymptotics.solve_c_B(args.budget),
        "alpha_bar": asymptotics.solve_alpha_bar(args.budget),
        "alpha_low": asymptotics.alpha_low(args.budget),
        "y_star": _optional(asymptotics.solve_phiTS_maximizer, args.budget, args.alpha),
        "z": None if z is None else z[0],
        "y2_star": None if z is None else z[1],
    })
    return EXIT_OK


def cmd_bounds(args) -> int:
    _emit(args, bounds.fmz_bounds(args.budget, args.alpha, args.alpha_f).as_dict())
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validation import format_table, run_criterion

    results = []
    for k in args.only or range(1, 12):
        r = run_criterion(k)
        results.append(r)
        print(r.line() + f" ({r.seconds:.1f}s)", flush=True)
    print(format_table(results).splitlines()[-1])
    if args.out:
        Path(args.out).write_text(json.dumps(_clean({"config": _config(args), "results": [r.__dict__ for r in results]}),
                                             indent=2) + "\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


def _criteria_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad criterion list {text!r}") from exc
    if any(not 1 <= v <= 11 for v in vals):
        raise argparse.ArgumentTypeError("criteria are numbered 1 to 11")
    return vals


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="flexmatch", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, params=True, side=False, fmt="json"):
        if params:
            sp.add_argument("--budget", type=float, default=None)
            sp.add_argument("--alpha", type=float, default=None)
            sp.add_argument("--alpha-f", type=float, default=None)
        if side:
            sp.add_argument("--side", type=parse_side, default=(Allocation.ONE_SIDED, None))
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--grid-n", type=int, default=DEFAULT_GRID_N)
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--out", default=None)
        sp.add_argument("--format", choices=("json", "csv"), default=fmt)

    sp = sub.add_parser("eval", help="exact rates for both allocations")
    common(sp)
    sp.add_argument("--side", type=parse_side, default=None, help="also evaluate a custom split")
    sp.add_argument("--tie-tol", type=float, default=atlas.DEFAULT_TIE_TOL)
    sp.add_argument("--crossover-max", type=float, default=None)
    sp.set_defaults(func=cmd_eval, required=("budget", "alpha", "alpha_f"))

    sp = sub.add_parser("sweep", help="dominance grid as CSV")
    common(sp, fmt="csv")
    sp.add_argument("--budgets", type=_floats, default=None)
    sp.add_argument("--alpha-grid", default="0:5:50", help="start:stop:num")
    sp.add_argument("--alpha-f-grid", default="0:25:50", help="start:stop:num")
    sp.add_argument("--tie-tol", type=float, default=atlas.DEFAULT_TIE_TOL)
    sp.set_defaults(func=cmd_sweep, required=())

    sp = sub.add_parser("simulate", help="Monte-Carlo matched fraction")
    common(sp, side=True)
    sp.add_argument("--n", type=int, default=10_000)
    sp.add_argument("--trials", type=int, default=10)
    sp.set_defaults(func=cmd_simulate, required=("budget", "alpha", "alpha_f"))

    sp = sub.add_parser("rde", help="population-dynamics estimate")
    common(sp, side=True)
    sp.add_argument("--pop-size", type=int, default=100_000)
    sp.add_argument("--iters", type=int, default=DEFAULT_ITERS)
    sp.add_argument("--root-samples", type=int, default=1_000_000)
    sp.add_argument("--truncation", type=int, default=None)
    sp.add_argument("--dump-pop", default=None)
    sp.set_defaults(func=cmd_rde, required=("budget", "alpha", "alpha_f"))

    sp = sub.add_parser("limits", help="large-premium limits and thresholds")
    common(sp)
    sp.set_defaults(func=cmd_limits, required=("budget", "alpha"))

    sp = sub.add_parser("bounds", help="closed-form comparison bounds")
    common(sp)
    sp.set_defaults(func=cmd_bounds, required=("budget", "alpha", "alpha_f"))

    sp = sub.add_parser("validate", help="run the acceptance suite")
    sp.add_argument("--only", type=_criteria_list, default=None, help="comma-separated criterion numbers")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_validate, required=())
    return p


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    missing = [name for name in args.required if getattr(args, name, None) is None]
    if args.command == "sweep" and args.budgets is None and args.budget is None:
        missing.append("budget")
    if missing:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"flexmatch {args.command}: missing " + ", ".join("--" + m.replace("_", "-") for m in missing) + "\n")
        return EXIT_PARAMS
    del args.required
    try:
        return args.func(args)
    except (NoConvergence, DegenerateRatio, ArithmeticError, FloatingPointError) as exc:
        sys.stderr.write(f"numeric failure: {exc}\n")
        return EXIT_NUMERIC
    except (FlexMatchError, ValueError) as exc:
        sys.stderr.write(f"parameter error: {exc}\n")
        return EXIT_PARAMS


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
