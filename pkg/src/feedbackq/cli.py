"""Command line front end.

Exit codes: 0 success, 2 invalid parameters, 3 threshold unbounded,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import platform
import sys
import time

import numpy as np

from . import __version__
from .errors import FeedbackQueueError, InvalidParameterError
from .model import X_MAX, ModelParams, make_strategy
from .qbd import build_matrix

DEFAULTS = {
    "x_max": X_MAX,
    "z_tol": 1e-10,
    "x_tol": 1e-8,
    "deadline_x_tol": 1e-3,
    "inversion_terms": 16,
    "inversion_accuracy": 1e-6,
    "replications": 100_000,
    "seed": 20250101,
    "horizon": 2000.0,
    "stationary_paths": 200,
}


def _floats(text: str) -> list:
    """``a,b,c`` or ``start:stop:num`` (inclusive linspace)."""
    if ":" in text:
        start, stop, num = text.split(":")
        return np.linspace(float(start), float(stop), int(num)).tolist()
    return [float(t) for t in text.split(",") if t.strip()]


def _axis(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUES, got {text!r}")
    name, values = text.split("=", 1)
    name = {"lambda": "lam", "reward": "reward_scale"}.get(name.strip(), name.strip())
    return name, _floats(values)


def _add_params(p: argparse.ArgumentParser, defaults: dict | None = None) -> None:
    d = {"lam": None, "mu": None, "q": None, "alpha": 0.0, "v": 0.0, "reward": 1.0, **(defaults or {})}
    p.add_argument("--lambda", dest="lam", type=float, default=d["lam"], required=d["lam"] is None)
    p.add_argument("--mu", type=float, default=d["mu"], required=d["mu"] is None)
    p.add_argument("--q", type=float, default=d["q"], required=d["q"] is None)
    p.add_argument("--alpha", type=float, default=d["alpha"])
    p.add_argument("--v", type=float, default=d["v"])
    p.add_argument("--reward", dest="reward_scale", type=float, default=d["reward"])


def _add_tolerances(p: argparse.ArgumentParser) -> None:
    p.add_argument("--z-tol", type=float, default=DEFAULTS["z_tol"], help="payoff tolerance for N and R cases")
    p.add_argument("--x-tol", type=float, help="threshold bisection tolerance (default depends on case)")


def _tolerances(args) -> dict:
    return {"z_tol": args.z_tol, "x_tol": args.x_tol}


def _add_output(p: argparse.ArgumentParser, default: str) -> None:
    p.add_argument("--format", choices=("text", "json", "csv"), default=default)
    p.add_argument("--out", help="write the table here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="feedbackq", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--show-config", action="store_true", help="print default tolerances and exit")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("solve", help="equilibrium threshold and stationary payoff")
    _add_params(p)
    p.add_argument("--case", choices=("n", "r", "deadline"), default="n")
    p.add_argument("--gamma", type=float)
    p.add_argument("--xi", type=float)
    p.add_argument("--x-max", type=float, default=X_MAX)
    _add_tolerances(p)
    _add_output(p, "text")

    p = sub.add_parser("sweep", help="grid of equilibria with paradox flags")
    _add_params(p)
    p.add_argument("--case", choices=("n", "r", "deadline"), default="n")
    p.add_argument("--axis", action="append", type=_axis, required=True,
                   help="NAME=a,b,c or NAME=start:stop:num; NAME in alpha, v, q, gamma, xi")
    p.add_argument("--gamma", type=float)
    p.add_argument("--xi", type=float)
    p.add_argument("--x-max", type=float, default=X_MAX)
    p.add_argument("--jobs", type=int, default=1)
    _add_tolerances(p)
    _add_output(p, "csv")

    p = sub.add_parser("sojourn-cdf", help="sojourn-time CDF by Laplace inversion")
    _add_params(p)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--position", type=int, required=True)
    p.add_argument("--times", type=_floats, required=True, help="a,b,c or start:stop:num")
    p.add_argument("--accuracy", type=float, default=DEFAULTS["inversion_accuracy"])
    _add_output(p, "csv")

    p = sub.add_parser("reproduce", help="recompute a table or figure")
    p.add_argument("exhibit", choices=("table1", "table2", "table3", "table4", "fig1", "fig2"))
    _add_output(p, "text")

    p = sub.add_parser("simulate", help="Monte Carlo estimates")
    _add_params(p)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--case", choices=("n", "r"), default="n")
    p.add_argument("--mode", choices=("tagged-sojourn", "killed-indicator", "stationary-occupancy"),
                   default="tagged-sojourn")
    p.add_argument("--position", type=int, default=1)
    p.add_argument("--total", type=int)
    p.add_argument("--replications", type=int, default=DEFAULTS["replications"])
    p.add_argument("--seed", type=int, default=DEFAULTS["seed"])
    p.add_argument("--horizon", type=float, default=DEFAULTS["horizon"])
    p.add_argument("--dump-samples", metavar="PATH", help="write raw sojourn times, one per line")
    _add_output(p, "json")

    p = sub.add_parser("matrix", help="dump the assembled jump-chain matrix as CSV")
    _add_params(p)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--case", choices=("n", "r"), default="n")
    p.add_argument("--out")

    p = sub.add_parser("rerun", help="re-run the configuration recorded in a JSON output")
    p.add_argument("path")
    p.add_argument("--out")
    return parser


def _params(args) -> ModelParams:
    return ModelParams(args.lam, args.mu, args.q, args.alpha, args.v, args.reward_scale)


def _rows_csv(rows: list) -> str:
    buf = io.StringIO()
    fields = list(dict.fromkeys(k for row in rows for k in row))
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _cell(row.get(k)) for k in fields})
    return buf.getvalue()


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return " ".join(str(v) for v in value)
    return value


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _config(args) -> dict:
    skip = {"format", "out", "show_config", "dump_samples"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def _emit(args, config: dict, results: list, started: float, text_lines: list | None = None) -> None:
    fmt = getattr(args, "format", "json")
    if fmt == "json":
        meta = {"version": __version__, "python": platform.python_version(), "numpy": np.__version__,
                "runtime_s": round(time.perf_counter() - started, 6)}
        payload = json.dumps(_jsonable({"config": config, "results": results, "meta": meta}), indent=2)
    elif fmt == "csv":
        payload = _rows_csv(_jsonable(results))
    else:
        payload = "\n".join(text_lines if text_lines is not None else [json.dumps(_jsonable(r)) for r in results])
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(payload if payload.endswith("\n") else payload + "\n")
    else:
        sys.stdout.write(payload if payload.endswith("\n") else payload + "\n")


def cmd_solve(args, started):
    from .reports import solve

    res = solve(_params(args), args.case, args.gamma, args.xi, args.x_max, **_tolerances(args))
    lines = [f"case            {args.case}",
             f"threshold       {res['threshold']:.10g}",
             f"kind            {res['kind']}" + (f" (m={res['m']})" if res["kind"] != "zero" else ""),
             f"payoff V        {res['stationary_payoff']:.6g}"]
    lines += [f"  {k:<14}{v:.6g}" for k, v in res["certificates"].items()]
    _emit(args, _config(args), [res], started, lines)


def cmd_sweep(args, started):
    from .reports import sweep

    axes = dict(args.axis)
    rows = sweep(_params(args), axes, args.case, args.gamma, args.xi, args.x_max, args.jobs,
                 **_tolerances(args))
    lines = [json.dumps(_jsonable(r)) for r in rows]
    _emit(args, _config(args), rows, started, lines)


def cmd_sojourn_cdf(args, started):
    from .sojourn import invert_cdf

    report = invert_cdf(_params(args), args.x, args.position, args.times, args.accuracy)
    rows = [{"w": w, "cdf": c} for w, c in zip(args.times, report.values.tolist())]
    config = {**_config(args), "terms": report.terms, "error_estimate": report.error_estimate}
    _emit(args, config, rows, started, [f"{r['w']:.6g}\t{r['cdf']:.10f}" for r in rows])


def cmd_reproduce(args, started):
    from .reports import EXHIBITS

    data = EXHIBITS[args.exhibit]()
    if isinstance(data, dict):
        keys = list(data)
        rows = [dict(zip(keys, vals)) for vals in zip(*data.values())]
        if args.format == "text":
            args.format = "csv"
        _emit(args, _config(args), rows, started)
        return
    lines = [f"{r['quantity']:<34}{r['computed']:>12.5f}{r['published']:>10}  {r['status']}" for r in data]
    _emit(args, _config(args), data, started, lines)
    if any(r["status"] == "fail" for r in data):
        raise SystemExit(1)


def cmd_simulate(args, started):
    from .sim import SimConfig, sample_sojourns, simulate_killed, simulate_stationary, simulate_tagged

    params = _params(args)
    config = SimConfig(params, make_strategy(args.x), args.case.upper(), args.replications, args.seed, args.mode)
    if args.mode == "stationary-occupancy":
        est = simulate_stationary(config, args.horizon)
        result = {"probs": est.probs, "std_error": est.std_error, "arrival_probs": est.arrival_probs,
                  "arrival_std_error": est.arrival_std_error, "paths": est.n_paths, "events": est.events}
    elif args.mode == "killed-indicator":
        est = simulate_killed(config, args.position, args.total)
        result = {"estimate": est.point, "std_error": est.std_error, "n": est.n}
    else:
        est = simulate_tagged(config, args.position, args.total)
        result = {"estimate": est.point, "std_error": est.std_error, "n": est.n, **est.extras}
        if args.dump_samples:
            samples = sample_sojourns(config, args.position, args.total)
            np.savetxt(args.dump_samples, samples, fmt="%.12g")
    if args.format == "csv":
        args.format = "json"
    _emit(args, _config(args), [result], started)


def cmd_matrix(args, started):
    P = build_matrix(_params(args), make_strategy(args.x), case=args.case.upper())
    text = P.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_rerun(args, started):
    with open(args.path, encoding="utf-8") as fh:
        config = json.load(fh)["config"]
    config = {k: v for k, v in config.items() if k not in {"terms", "error_estimate"}}
    if config.get("axis"):
        config["axis"] = [tuple(a) for a in config["axis"]]
    ns = argparse.Namespace(**config, format="json", out=args.out, show_config=False, dump_samples=None)
    COMMANDS[ns.command](ns, started)


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "sojourn-cdf": cmd_sojourn_cdf,
    "reproduce": cmd_reproduce,
    "simulate": cmd_simulate,
    "matrix": cmd_matrix,
    "rerun": cmd_rerun,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.show_config:
        print(json.dumps(DEFAULTS, indent=2))
        return 0
    if args.command is None:
        parser.print_help()
        return 2
    started = time.perf_counter()
    try:
        COMMANDS[args.command](args, started)
    except FeedbackQueueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return InvalidParameterError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
