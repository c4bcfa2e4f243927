"""Command-line front end.

Every subcommand emits records as JSON lines (default) or CSV with a fixed
header. Non-finite floats are written as the strings "inf", "-inf" and "nan"
so that JSON output stays strict. Exit codes: 0 success, 2 invalid usage or
parameters, 3 numerical failure (pre-asymptotic horizon, quadrature or
solver breakdown).

A ``--config`` file of ``key = value`` lines supplies defaults for the flags
of the chosen subcommand; flags on the command line take precedence.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import cgf, montecarlo, rates, sldp, spectral
from .estimators import suff_stats
from .exceptions import ConsistencyError, DegeneratePathError, DomainError, PreAsymptoticError
from .ou_model import ModelParams, SimGrid, simulate_path


class UsageError(Exception):
    pass


def _negative(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
    if not value < 0:
        raise argparse.ArgumentTypeError(f"theta must be strictly negative (stable OU), got {value:g}")
    return value


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _count(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _range(text: str) -> np.ndarray:
    """lo:hi:step, both ends included."""
    try:
        lo, hi, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"range must be lo:hi:step, got {text!r}") from None
    if not step > 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"range needs lo <= hi and step > 0, got {text!r}")
    n = int(math.floor((hi - lo) / step + 1e-9))
    return lo + step * np.arange(n + 1)


def _read_config(path: str) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _common(parser: argparse.ArgumentParser, *, theta: bool = True) -> None:
    if theta:
        parser.add_argument("--theta", type=_negative, help="drift parameter, must be < 0")
        parser.add_argument("--gamma", type=float, default=0.0, help="shift parameter")
    parser.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    parser.add_argument("--output", help="write records here instead of stdout")
    parser.add_argument("--config", help="file of 'key = value' defaults")


def _mc_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dt", type=_positive, default=1e-2)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=_count, default=1)
    parser.add_argument("--estimator", choices=("mle", "tilde"), default="mle")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oushift", description=__doc__.splitlines()[0], allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rate", allow_abbrev=False, help="rate functions I_theta, I_(theta,gamma), I_gamma")
    _common(p)
    p.add_argument("--c", type=float, action="append", help="drift value (repeatable)")
    p.add_argument("--c-range", type=_range, help="lo:hi:step grid of drift values")
    p.add_argument("--d", type=float, action="append", help="shift value (repeatable)")
    p.add_argument("--d-range", type=_range, help="lo:hi:step grid of shift values")

    p = sub.add_parser("tail", allow_abbrev=False, help="sharp large deviation approximation of P(theta_hat >= c)")
    _common(p)
    p.add_argument("--c", type=float, required=False)
    p.add_argument("--T", type=_positive, required=False)
    p.add_argument("--mc", type=int, default=0, help="number of Monte Carlo paths")
    p.add_argument("--is", dest="importance", action="store_true", help="importance sampling")
    p.add_argument("--tilt", type=_negative, help="IS drift; defaults to c")
    p.add_argument("--exact-c0", action="store_true", help="exact quadrature (c = 0 only)")
    p.add_argument("--printed-constant", action="store_true", help="c = 0 with the e^2 constant variant")
    _mc_flags(p)

    p = sub.add_parser("cgf", allow_abbrev=False, help="exact normalized CGF L_T(a, b) and its expansion")
    _common(p)
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=0.0)
    p.add_argument("--T", type=_positive)
    p.add_argument("--mc", type=int, default=0, help="add a Monte Carlo estimate with this many paths")
    _mc_flags(p)

    p = sub.add_parser("spectral", allow_abbrev=False, help="chaos decomposition and spectral moments of Z_T(a, b)")
    _common(p)
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--T", type=_positive)
    p.add_argument("--steps", type=_count, default=2000)
    p.add_argument("--p", type=int, action="append", help="moment order >= 2 (repeatable)")
    p.add_argument("--x", type=float, help="also evaluate the series CGF at x")

    p = sub.add_parser("simulate", allow_abbrev=False, help="exact OU sample paths")
    _common(p)
    p.add_argument("--T", type=_positive)
    p.add_argument("--steps", type=_count, default=1000)
    p.add_argument("--paths", type=_count, default=1)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("estimate", allow_abbrev=False, help="MLE and surrogate estimates on simulated paths")
    _common(p)
    p.add_argument("--T", type=_positive)
    p.add_argument("--paths", type=_count, default=1)
    p.add_argument("--dt", type=_positive, default=1e-2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_count, default=1)
    return parser


def _finite_or_text(v):
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return v


def emit(records: list[dict], fmt: str, stream) -> None:
    if not records:
        return
    rows = [{k: _finite_or_text(v) for k, v in r.items()} for r in records]
    if fmt == "jsonl":
        for r in rows:
            stream.write(json.dumps(r, allow_nan=False) + "\n")
        return
    writer = csv.DictWriter(stream, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: "" if v is None else v for k, v in r.items()})


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _as_list(v) -> list:
    # repeatable flags arrive as scalars when they come from a config file
    if v is None:
        return []
    return np.atleast_1d(v).tolist()


def cmd_rate(args) -> list[dict]:
    params = ModelParams(args.theta, args.gamma)
    cs = [float(c) for c in _as_list(args.c) + _as_list(args.c_range)]
    ds = [float(d) for d in _as_list(args.d) + _as_list(args.d_range)]
    if not cs and not ds:
        raise UsageError("give at least one of --c, --c-range, --d, --d-range")
    c_vals = cs or [None]
    d_vals = ds or [None]
    rows = []
    for c in c_vals:
        i_theta = rates.rate_theta(args.theta, c) if c is not None else None
        for d in d_vals:
            rows.append(
                {
                    "c": c,
                    "d": d,
                    "I_joint": rates.rate_joint(params, c, d) if c is not None and d is not None else None,
                    "I_theta": i_theta,
                    "I_gamma": rates.rate_gamma(params, d) if d is not None else None,
                }
            )
    return rows


def cmd_tail(args) -> list[dict]:
    _require(args, "c", "T")
    params = ModelParams(args.theta, args.gamma)
    report = sldp.tail_approx(params, args.c, args.T, printed_zero_constant=args.printed_constant)
    rec = report.as_dict()
    if args.exact_c0:
        if args.c != 0:
            raise UsageError("--exact-c0 requires --c 0")
        exact = sldp.tail_exact_c0(params, args.T)
        rec.update(exact_prob=exact, ratio_exact=report.approx_prob / exact)
    if args.mc:
        cfg = montecarlo.McConfig(
            args.mc, dt=args.dt, seed=args.seed, estimator=args.estimator, tilt=args.tilt, workers=args.workers
        )
        lower = report.regime is sldp.Regime.LOWER_TAIL
        if args.importance:
            est = montecarlo.estimate_tail_is(params, args.c, args.T, cfg, lower=lower)
        else:
            est = montecarlo.estimate_tail(params, args.c, args.T, cfg, lower=lower)
        rec.update({f"mc_{k}": v for k, v in est.as_dict().items()})
        rec["ratio"] = report.approx_prob / est.p_hat if est.p_hat > 0 else math.inf
    return [rec]


def cmd_cgf(args) -> list[dict]:
    _require(args, "T")
    params = ModelParams(args.theta, args.gamma)
    res = cgf.cgf_exact(params, args.a, args.b, args.T)
    rec = {
        "theta": args.theta,
        "gamma": args.gamma,
        "a": args.a,
        "b": args.b,
        "T": args.T,
        "value_exact": res.value_exact,
        "L": res.leading,
        "H": res.correction,
        "R_T": res.remainder,
        "log_det_M": res.log_det_m,
    }
    if args.mc:
        cfg = montecarlo.McConfig(args.mc, dt=args.dt, seed=args.seed, workers=args.workers)
        est = montecarlo.mc_cgf(params, args.a, args.b, args.T, cfg)
        rec.update(mc_value=est.value, mc_stderr=est.stderr, mc_n_paths=est.n_paths)
    return [rec]


def cmd_spectral(args) -> list[dict]:
    _require(args, "T")
    params = ModelParams(args.theta, args.gamma)
    dec = spectral.decompose(params, args.a, args.b, SimGrid(args.T, args.steps))
    series = spectral.series_cgf(dec, args.x) if args.x is not None else None
    rows = []
    for p in _as_list(args.p) or [2]:
        moment = spectral.spectral_moment(dec, p)
        limit = spectral.spectral_limit(args.theta, args.b, p)
        rows.append(
            {
                "theta": args.theta,
                "gamma": args.gamma,
                "a": args.a,
                "b": args.b,
                "T": args.T,
                "steps": args.steps,
                "p": p,
                "moment": moment,
                "limit": limit,
                "ratio": moment / limit if limit else None,
                "mean": dec.mean,
                "max_abs_alpha": dec.bound_alpha,
                "sum_beta_sq": dec.bound_beta,
                "x": args.x,
                "series_cgf": series,
            }
        )
    return rows


def cmd_simulate(args) -> list[dict]:
    _require(args, "T")
    params = ModelParams(args.theta, args.gamma)
    grid = SimGrid(args.T, args.steps)
    rows = []
    for i in range(args.paths):
        x = simulate_path(params, grid, np.random.SeedSequence(args.seed, spawn_key=(i,)))
        rows.extend({"path": i, "t": float(t), "x": float(v)} for t, v in zip(grid.times, x))
    return rows


def cmd_estimate(args) -> list[dict]:
    _require(args, "T")
    params = ModelParams(args.theta, args.gamma)
    rows = []
    if args.paths < 100:
        grid = SimGrid.from_dt(args.T, args.dt)
        stats = [
            suff_stats(simulate_path(params, grid, np.random.SeedSequence(args.seed, spawn_key=(i,))), grid)
            for i in range(args.paths)
        ]
        x_T = np.array([s.x_T for s in stats])
        int_x = np.array([s.int_x for s in stats])
        int_x2 = np.array([s.int_x2 for s in stats])
        T = grid.T
    else:
        cfg = montecarlo.McConfig(args.paths, dt=args.dt, seed=args.seed, workers=args.workers)
        batch = montecarlo.simulate_batch(params.theta, args.T, cfg)
        x_T, int_x, int_x2 = batch.suff(params.gamma)
        T = batch.grid.T
    th, gh = montecarlo.estimator_arrays(x_T, int_x, int_x2, T, "mle")
    tt, gt = montecarlo.estimator_arrays(x_T, int_x, int_x2, T, "tilde")
    for i in range(x_T.size):
        rows.append(
            {
                "path": i,
                "T": T,
                "theta_hat": float(th[i]),
                "gamma_hat": float(gh[i]),
                "theta_tilde": float(tt[i]),
                "gamma_tilde": float(gt[i]),
                "X_T": float(x_T[i]),
                "int_X": float(int_x[i]),
                "int_X2": float(int_x2[i]),
            }
        )
    return rows


COMMANDS = {
    "rate": cmd_rate,
    "tail": cmd_tail,
    "cgf": cmd_cgf,
    "spectral": cmd_spectral,
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
}


def _attach_ranges(argv: list[str]) -> list[str]:
    # "--d-range -1:5:0.1" would read the value as an option; glue it to its flag
    out, it = [], iter(argv)
    for tok in it:
        if tok in ("--c-range", "--d-range"):
            out.append(f"{tok}={next(it, '')}")
        else:
            out.append(tok)
    return out


def _parse(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    argv = _attach_ranges(sys.argv[1:] if argv is None else list(argv))
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            defaults = _read_config(known.config)
        except (OSError, UsageError) as exc:
            parser.error(str(exc))
        # string defaults go through each option's type conversion and checks
        for action in parser._subparsers._group_actions[0].choices.values():
            action.set_defaults(**defaults)
    args = parser.parse_args(argv)
    if getattr(args, "theta", 0.0) is None:
        parser.error("--theta is required (in flags or --config)")
    return args


def main(argv=None) -> int:
    parser = build_parser()
    args = _parse(parser, argv)
    try:
        records = COMMANDS[args.command](args)
    except (UsageError, DomainError) as exc:
        print(f"oushift {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (PreAsymptoticError, ConsistencyError, DegeneratePathError, ArithmeticError) as exc:
        print(f"oushift {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"oushift {args.command}: error: {exc}", file=sys.stderr)
        return 2
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            emit(records, args.format, fh)
    else:
        emit(records, args.format, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
