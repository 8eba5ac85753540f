"""Command-line driver: single solves, paths, gap traces and parameter sweeps.

JSON goes to stdout (and ``--out``), CSV traces to ``--trace``. Exit status
is 0 when every solve is certified, 1 when a gap target is missed, 2 on bad
input and 3 when ``--verify`` finds a mismatch.
"""
import argparse
import csv
import json
import logging
import sys
import time

import numpy as np

from .celer import CelerConfig, GrowthPolicy, PathSpec, celer_solve, lasso_path
from .dataset import LassoProblem, load_csv, load_svmlight, preprocess, synthesize
from .objective import DualPoint, duality_gap, lambda_max, support
from .solvers import GAP_MET, SolverConfig, TraceRecord, solve_inner

log = logging.getLogger("celer_lasso")

EXIT_OK, EXIT_GAP, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2, 3
VERIFY_TOL = 1e-12


class InputError(Exception):
    pass


# ------------------------------------------------------------------ config


def parse_synthetic(spec):
    """``n=100,p=2000,s=20[,snr=3]`` -> dict."""
    out = {"snr": 3.0}
    keys = {"n": int, "p": int, "s": int, "snr": float}
    for part in spec.split(","):
        key, sep, val = part.partition("=")
        key = key.strip()
        if not sep or key not in keys:
            raise InputError(f"bad synthetic spec component {part!r}")
        try:
            out[key] = keys[key](val)
        except ValueError:
            raise InputError(f"bad value in synthetic spec: {part!r}") from None
    missing = {"n", "p", "s"} - out.keys()
    if missing:
        raise InputError(f"synthetic spec misses {sorted(missing)}")
    return out


def load_data(args):
    try:
        if args.data:
            X, y = load_svmlight(args.data)
        elif args.csv:
            X, y = load_csv(args.csv)
        else:
            spec = parse_synthetic(args.synthetic)
            X, y, _ = synthesize(spec["n"], spec["p"], spec["s"], spec["snr"], args.seed)
    except (OSError, ValueError) as exc:
        raise InputError(str(exc)) from None
    if args.preprocess:
        try:
            X, y, _ = preprocess(X, y, min_nnz=args.min_nnz, unit_norm_cols=True,
                                 center_y=True, unit_norm_y=True)
        except ValueError as exc:
            raise InputError(str(exc)) from None
    return X, y


def resolve_lambda(args, X, y):
    lmax = lambda_max(X, y)
    if args.lam is not None:
        if not args.lam > 0:
            raise InputError("--lambda must be positive")
        return args.lam, lmax
    if not 0 < args.lambda_ratio <= 1:
        raise InputError("--lambda-ratio must be in (0, 1]")
    if lmax == 0:
        raise InputError("lambda_max is zero; give --lambda explicitly")
    return args.lambda_ratio * lmax, lmax


def solver_config(args, **over):
    base = dict(eps=args.eps, max_epochs=args.max_epochs, f=args.f, K=args.K,
                use_accel=args.accel, use_screening=args.screen)
    base.update(over)
    return SolverConfig(**base)


def celer_config(args, **over):
    growth = GrowthPolicy.parse(args.growth) if args.growth else None
    base = dict(eps=args.eps, p_init=args.p_init, eps_inner_frac=args.eps_inner_frac,
                max_outer=args.max_outer, prune=args.prune, growth=growth,
                inner=solver_config(args, use_accel=True, use_screening=False))
    base.update(over)
    return CelerConfig(**base)


def run_solver(prob, args, solver=None, **over):
    solver = solver or args.solver
    if solver == "celer":
        return celer_solve(prob, None, celer_config(args, **over))
    return solve_inner(prob, None, solver_config(args, **over), algorithm=solver)


# ------------------------------------------------------------------ output


def result_json(prob, res, lmax, solver):
    return {
        "solver": solver,
        "lambda": prob.lam,
        "lambda_ratio": prob.lam / lmax if lmax else None,
        "gap": res.gap,
        "epochs": res.epochs,
        "coord_updates": res.coord_updates,
        "support_size": int(support(res.beta).size),
        "stop_reason": res.stop_reason,
    }


def solution_json(res):
    idx = support(res.beta)
    return {"beta": {"indices": idx.tolist(), "values": res.beta[idx].tolist(),
                     "n_features": int(res.beta.size)},
            "theta": res.theta.theta.tolist()}


def verify_solution(prob, payload):
    """Recompute gap and support from a saved (beta, theta) pair."""
    b = payload["beta"]
    beta = np.zeros(b["n_features"])
    beta[b["indices"]] = b["values"]
    theta = DualPoint.certify(prob.X, np.array(payload["theta"]))
    problems = []
    if not theta.feasible:
        problems.append("saved theta is not dual feasible")
    else:
        gap = duality_gap(prob, beta, theta)
        if abs(gap - payload["gap"]) > VERIFY_TOL:
            problems.append(f"gap mismatch: saved {payload['gap']!r}, recomputed {gap!r}")
    if support(beta).size != payload["support_size"]:
        problems.append("support size mismatch")
    return problems


def write_csv(path, header, rows):
    fh = sys.stdout if path == "-" else open(path, "w", newline="")
    try:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    finally:
        if fh is not sys.stdout:
            fh.close()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def trace_rows(trace, extra=None):
    for rec in trace:
        row = [getattr(rec, k) for k in TraceRecord.CSV_FIELDS]
        if extra is not None:
            row += extra(rec)
        yield row


def emit(obj, fh=None):
    line = json.dumps(obj)
    print(line)
    if fh is not None:
        fh.write(line + "\n")


# ---------------------------------------------------------------- commands


def cmd_solve(args):
    X, y = load_data(args)
    lam, lmax = resolve_lambda(args, X, y)
    prob = LassoProblem(X, y, lam)
    t0 = time.perf_counter()
    res = run_solver(prob, args)
    log.info("solve took %.3f s", time.perf_counter() - t0)
    out = result_json(prob, res, lmax, args.solver)
    payload = dict(out, **solution_json(res))
    emit(out)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(payload, fh)
    if args.trace:
        if args.solver == "celer":
            write_csv(args.trace, ["t", "g_t", "p_t", "support_size", "inner_epochs",
                                   "coord_updates_cumulative"],
                      ([o.t, o.gap, o.p_t, o.support_size, o.inner_epochs,
                        o.coord_updates_cumulative] for o in res.outer_trace))
        else:
            write_csv(args.trace, list(TraceRecord.CSV_FIELDS), trace_rows(res.trace))
    if args.verify:
        if args.out:
            with open(args.out) as fh:
                payload = json.load(fh)
        problems = verify_solution(prob, payload)
        if problems:
            for msg in problems:
                print(f"verify: {msg}", file=sys.stderr)
            return EXIT_VERIFY
    return EXIT_OK if res.stop_reason == GAP_MET else EXIT_GAP


def cmd_path(args):
    X, y = load_data(args)
    spec = PathSpec(n_points=args.grid, min_ratio=args.min_ratio)
    cfg = celer_config(args)
    if args.solver != "celer":
        # plain solvers read their settings from the inner config
        cfg = celer_config(args, inner=solver_config(args))
    t0 = time.perf_counter()
    path = lasso_path(X, y, spec, cfg, solver=args.solver, warm_start=args.warm_start)
    log.info("path took %.3f s", time.perf_counter() - t0)
    fh = open(args.out, "w") if args.out else None
    cumulative = 0
    lmax = lambda_max(X, y)
    try:
        for i, (lam, res) in enumerate(zip(path.lambdas, path.results)):
            cumulative += res.coord_updates
            row = result_json(LassoProblem(X, y, lam), res, lmax, args.solver)
            row.update(index=i, coord_updates_cumulative=cumulative)
            emit(row, fh)
        emit({"summary": True, "solver": args.solver, "n_points": len(path.lambdas),
              "n_solved": len(path.results), "complete": path.complete,
              "all_certified": all(r.gap <= args.eps for r in path.results),
              "total_coord_updates": path.total_coord_updates}, fh)
    finally:
        if fh:
            fh.close()
    return EXIT_OK if path.complete else EXIT_GAP


def cmd_gap_trace(args):
    X, y = load_data(args)
    lam, _ = resolve_lambda(args, X, y)
    prob = LassoProblem(X, y, lam)
    oracle = solve_inner(prob, None, solver_config(args, eps=args.oracle_eps,
                                                   use_screening=False, use_accel=True))
    if oracle.stop_reason != GAP_MET:
        print(f"oracle solve stopped at gap {oracle.gap:.3e} > {args.oracle_eps:g}",
              file=sys.stderr)
        return EXIT_GAP
    p_star = oracle.trace[-1].primal - oracle.gap
    res = solve_inner(prob, None, solver_config(args, use_accel=True, stop_on="res",
                                                track_res_screening=args.screen))
    header = list(TraceRecord.CSV_FIELDS) + ["subopt"]
    extra = lambda rec: [rec.primal - p_star]  # noqa: E731
    if args.screen:
        header.append("n_screened_res")
        extra = lambda rec: [rec.primal - p_star, rec.n_screened_res]  # noqa: E731
    write_csv(args.trace or "-", header, trace_rows(res.trace, extra))
    return EXIT_OK if res.stop_reason == GAP_MET else EXIT_GAP


def parse_sweep(text):
    param, sep, values = text.partition("=")
    if not sep or param not in ("f", "K", "growth"):
        raise InputError("--sweep must look like f=1,10,100 | K=3,5 | growth=prune,linear:10")
    vals = [v for v in values.split(",") if v]
    if not vals:
        raise InputError("--sweep needs at least one value")
    if param in ("f", "K"):
        try:
            vals = [int(v) for v in vals]
        except ValueError:
            raise InputError(f"--sweep {param} needs integers") from None
    else:
        try:
            vals = [GrowthPolicy.parse(v) for v in vals]
        except ValueError as exc:
            raise InputError(str(exc)) from None
    return param, vals


def cmd_sweep(args):
    param, values = parse_sweep(args.sweep)
    X, y = load_data(args)
    lam, _ = resolve_lambda(args, X, y)
    prob = LassoProblem(X, y, lam)
    rows = []
    ok = True
    for val in values:
        if param == "growth":
            res = celer_solve(prob, None, celer_config(args, growth=val))
            rows += [(param, str(val), o.t, o.p_t) for o in res.outer_trace]
            n_iter = len(res.outer_trace)
        else:
            res = solve_inner(prob, None, solver_config(args, **{param: val}, use_accel=True))
            rows += [(param, val, rec.epoch, rec.gap_accel) for rec in res.trace]
            n_iter = res.epochs
        ok &= res.stop_reason == GAP_MET
        emit({"param": param, "value": str(val), "gap": res.gap, "iterations": n_iter,
              "coord_updates": res.coord_updates, "stop_reason": res.stop_reason})
    write_csv(args.trace or "-", ["param", "value", "epoch", "metric"], rows)
    return EXIT_OK if ok else EXIT_GAP


# ------------------------------------------------------------------ parser


def build_parser():
    parser = argparse.ArgumentParser(prog="celer-lasso", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="svmlight/LIBSVM file")
    src.add_argument("--csv", help="dense CSV, last column is y")
    src.add_argument("--synthetic", help="n=100,p=2000,s=20[,snr=3]")
    common.add_argument("--preprocess", action=argparse.BooleanOptionalAction, default=True,
                        help="drop sparse columns, unit-norm columns, center and unit-norm y")
    common.add_argument("--min-nnz", type=int, default=3)
    lam = common.add_mutually_exclusive_group()
    lam.add_argument("--lambda", dest="lam", type=float)
    lam.add_argument("--lambda-ratio", type=float, default=0.05)
    common.add_argument("--solver", choices=["cd", "ista", "celer"], default="celer")
    common.add_argument("--eps", type=float, default=1e-6)
    common.add_argument("--K", type=int, default=5)
    common.add_argument("--f", type=int, default=10)
    common.add_argument("--max-epochs", type=int, default=100_000)
    common.add_argument("--max-outer", type=int, default=100)
    common.add_argument("--p-init", type=int, default=100)
    common.add_argument("--eps-inner-frac", type=float, default=0.3)
    common.add_argument("--prune", action=argparse.BooleanOptionalAction, default=True)
    common.add_argument("--growth", help="prune | doubling | geometric:G | linear:G")
    common.add_argument("--screen", action=argparse.BooleanOptionalAction, default=False)
    common.add_argument("--accel", action=argparse.BooleanOptionalAction, default=True)
    common.add_argument("--trace", help="CSV trace output path ('-' for stdout)")
    common.add_argument("--out", help="JSON output path")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--verify", action="store_true",
                        help="recompute gap and support from the saved solution")

    sub.add_parser("solve", parents=[common], help="solve for one lambda")
    p_path = sub.add_parser("path", parents=[common], help="solve along a lambda grid")
    p_path.add_argument("--grid", type=int, default=100)
    p_path.add_argument("--min-ratio", type=float, default=1e-2)
    p_path.add_argument("--warm-start", action=argparse.BooleanOptionalAction, default=True)
    p_gap = sub.add_parser("gap-trace", parents=[common],
                           help="CD gap trace with both dual points and true suboptimality")
    p_gap.add_argument("--oracle-eps", type=float, default=1e-14)
    p_sw = sub.add_parser("sweep", parents=[common], help="sweep f, K or growth policy")
    p_sw.add_argument("--sweep", required=True)
    return parser


COMMANDS = {"solve": cmd_solve, "path": cmd_path, "gap-trace": cmd_gap_trace,
            "sweep": cmd_sweep}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
