"""Command-line interface.

Data goes to stdout, diagnostics to stderr.  Exit codes: 0 success,
1 numerical failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from typing import Any, Sequence

import numpy as np

from . import lattice, lyapunov, volume
from .quad import ContourParams, RngState
from .selftest import run_selftest

SCHEMA_VERSION = "1.0"

DEFAULTS_HELP = """\
defaults: laplace tolerance ~1e-8 (Talbot contour, 64 nodes), fourier tolerance
1e-5, Monte Carlo samples 1e6.  Randomized commands need --seed with
--format json or csv."""


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    return format(x, ".17g")


def dumps(obj: Any) -> str:
    """JSON text with every float written to 17 significant digits."""
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return json.dumps(None)
        return _fmt(x)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def output_record(command: str, inputs: dict, results: dict, err_est: float,
                  seed: int | None = None) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command, "inputs": inputs,
            "results": results, "err_est": err_est, "seed": seed}


def _write_csv(out, header: Sequence[str], rows) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _require_seed(args, randomized: bool) -> int:
    if randomized and args.seed is None:
        if args.format in ("json", "csv"):
            raise UsageError("--seed is required for randomized output in json/csv mode")
        return 0
    return 0 if args.seed is None else args.seed


def _emit(args, record: dict, csv_header=None, csv_rows=None) -> None:
    if args.format == "csv" and csv_header is not None:
        _write_csv(sys.stdout, csv_header, csv_rows)
    elif args.format in ("json", "csv"):
        sys.stdout.write(dumps(record) + "\n")
    else:
        res = record["results"]
        for k, v in res.items():
            if isinstance(v, (list, tuple, np.ndarray)):
                continue
            sys.stdout.write(f"{k}: {_fmt(v) if isinstance(v, float) else v}\n")
        if record.get("err_est") is not None:
            sys.stdout.write(f"err_est: {_fmt(record['err_est'])}\n")


def _cmd_cdf(args) -> int:
    randomized = args.method == "mc"
    seed = _require_seed(args, randomized)
    est = volume.cdf(args.n, args.s, args.method, tol=args.tol, terms=args.terms,
                     samples=args.samples, rng=RngState(seed) if randomized else None)
    inputs = {"n": args.n, "s": args.s, "method": args.method}
    results = {"value": est.value, "method": est.method,
               **{k: v for k, v in est.params.items() if isinstance(v, (int, float, bool, str))}}
    rec = output_record("cdf", inputs, results, est.err_est, seed if randomized else None)
    _emit(args, rec, ["n", "s", "F", "err_est", "method"],
          [[args.n, float(args.s), est.value, est.err_est, est.method]])
    return 0


def _cmd_pdf(args) -> int:
    val = volume.pdf_closed(args.n, args.s)
    rec = output_record("pdf", {"n": args.n, "s": args.s}, {"value": val}, 0.0)
    _emit(args, rec, ["n", "s", "f"], [[args.n, float(args.s), val]])
    return 0


def _cmd_table(args) -> int:
    randomized = args.method == "mc"
    seed = _require_seed(args, randomized)
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    grid = np.linspace(args.s_min, args.s_max, args.steps + 1) if args.steps > 1 else np.array([args.s_min])
    rows = []
    for i, s in enumerate(grid):
        s = float(s)
        est = volume.cdf(args.n, s, args.method, tol=args.tol,
                         rng=RngState(seed, i) if randomized else None, samples=args.samples)
        f = volume.pdf_closed(args.n, s) if args.n in (2, 3) else ""
        rows.append([s, est.value, f])
    rec = output_record("table", {"n": args.n, "s_min": args.s_min, "s_max": args.s_max,
                                  "steps": args.steps, "method": args.method},
                        {"s": [r[0] for r in rows], "F": [r[1] for r in rows],
                         "f": [r[2] if r[2] != "" else None for r in rows]},
                        None, seed if randomized else None)
    if args.format == "text":
        args.format = "csv"
    _emit(args, rec, ["s", "F", "f"], rows)
    return 0


def _cmd_vol_box(args) -> int:
    box = volume.BoxSpec.parse(args.bounds)
    randomized = args.method == "mc"
    seed = _require_seed(args, randomized)
    if randomized:
        res = volume.box_ball_volume_mc(box, args.samples or 10**6, RngState(seed))
    else:
        res = volume.box_ball_volume_est(box, ContourParams())
    rec = output_record("vol-box", {"bounds": args.bounds, "method": args.method},
                        {"volume": res.value, "fraction": res.value / box.measure,
                         "box_measure": box.measure}, res.err_est, seed if randomized else None)
    _emit(args, rec, ["volume", "err_est"], [[res.value, res.err_est]])
    return 0


def _cmd_lyapunov(args) -> int:
    randomized = args.method == "mc"
    seed = _require_seed(args, randomized)
    if randomized:
        r = lyapunov.lyapunov_mc(args.ensemble, args.m, args.trials, RngState(seed))
    else:
        r = lyapunov.lyapunov_exact(args.ensemble)
    rec = output_record("lyapunov", {"ensemble": args.ensemble, "method": args.method,
                                     "m": args.m if randomized else None,
                                     "trials": args.trials if randomized else None},
                        {"two_mu1": r.two_mu1, "mu1": r.mu1}, r.err_est, seed if randomized else None)
    _emit(args, rec, ["two_mu1", "mu1", "err_est"], [[r.two_mu1, r.mu1, r.err_est]])
    return 0


def _cmd_lattice(args) -> int:
    seed = _require_seed(args, True)
    r = lattice.lattice_experiment(args.samples, args.bins, RngState(seed))
    rec = output_record("lattice-exp", {"samples": args.samples, "bins": args.bins},
                        {"t": r["centers"], "empirical": r["empirical"], "analytic": r["analytic"],
                         "ks": r["ks"], "ks_critical": r["ks_critical"],
                         "normalization": r["normalization"]}, None, seed)
    if args.format == "text":
        args.format = "csv"
    rows = zip(r["centers"], r["empirical"], r["analytic"])
    _emit(args, rec, ["t", "empirical", "analytic"], rows)
    if args.format == "csv":
        sys.stderr.write(f"ks={_fmt(r['ks'])} critical={_fmt(r['ks_critical'])}\n")
    return 0


def _cmd_selftest(args) -> int:
    report = run_selftest(args.level)
    if args.format == "text":
        for c in report["checks"]:
            sys.stdout.write(f"{c['status']:<15} {c['name']} ({c['seconds']:.2f}s)\n")
        sys.stdout.write(f"laguerre: {report['laguerre_status']}\n")
    else:
        sys.stdout.write(dumps(output_record("selftest", {"level": args.level}, report, None)) + "\n")
    return 0 if report["passed"] else 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cubeball", description="Sum of squares of uniforms / cube-ball volumes.",
                epilog=DEFAULTS_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, formats=("text", "json", "csv")):
        sp.add_argument("--format", choices=formats, default="text")
        return sp

    c = common(sub.add_parser("cdf", help="F_n(s) by any method", epilog=DEFAULTS_HELP))
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--s", type=float, required=True)
    c.add_argument("--method", default="auto", choices=("auto",) + volume.METHODS)
    c.add_argument("--tol", type=float)
    c.add_argument("--terms", type=int)
    c.add_argument("--samples", type=int)
    c.add_argument("--seed", type=int)
    c.set_defaults(func=_cmd_cdf)

    c = common(sub.add_parser("pdf", help="density F_n'(s), n = 2 or 3"))
    c.add_argument("--n", type=int, required=True, choices=(2, 3))
    c.add_argument("--s", type=float, required=True)
    c.set_defaults(func=_cmd_pdf)

    c = common(sub.add_parser("table", help="CSV table s,F,f"))
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--s-min", type=float, required=True)
    c.add_argument("--s-max", type=float, required=True)
    c.add_argument("--steps", type=int, required=True)
    c.add_argument("--method", default="auto", choices=("auto",) + volume.METHODS)
    c.add_argument("--tol", type=float)
    c.add_argument("--samples", type=int)
    c.add_argument("--seed", type=int)
    c.set_defaults(func=_cmd_table)

    c = common(sub.add_parser("vol-box", help="volume of a box inside the unit ball"))
    c.add_argument("--bounds", required=True, help='"a1,b1;a2,b2;..."')
    c.add_argument("--method", default="laplace", choices=("laplace", "mc"))
    c.add_argument("--samples", type=int)
    c.add_argument("--seed", type=int)
    c.set_defaults(func=_cmd_vol_box)

    c = common(sub.add_parser("lyapunov", help="top Lyapunov exponent, 2 mu_1"))
    c.add_argument("--ensemble", required=True, type=str.lower, choices=("u2b", "u3s"))
    c.add_argument("--method", default="exact", choices=("exact", "mc"))
    c.add_argument("--m", type=int, default=10_000)
    c.add_argument("--trials", type=int, default=100)
    c.add_argument("--seed", type=int)
    c.set_defaults(func=_cmd_lyapunov)

    c = common(sub.add_parser("lattice-exp", help="shortest-vector histogram vs density"))
    c.add_argument("--samples", type=int, required=True)
    c.add_argument("--bins", type=int, required=True)
    c.add_argument("--seed", type=int)
    c.set_defaults(func=_cmd_lattice)

    c = common(sub.add_parser("selftest", help="consistency matrix and invariants"), ("text", "json"))
    c.add_argument("--level", choices=("quick", "full"), default="quick")
    c.set_defaults(func=_cmd_selftest)
    return p


def _glue_negative_values(argv: list[str]) -> list[str]:
    # "--bounds -1,1;..." would otherwise be read as an unknown option
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok == "--bounds":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--bounds={nxt}")
        else:
            out.append(tok)
    return out


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(_glue_negative_values(argv))
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(str(exc).rstrip() + "\n")
        return 2
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
