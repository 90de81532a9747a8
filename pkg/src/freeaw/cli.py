"""Command-line front end.

Single-value commands print one JSON object with a ``meta`` record; sweeps
print CSV preceded by ``#`` metadata lines. Nothing time-dependent is written,
so a rerun with the same arguments reproduces the output byte for byte.

Exit codes: 0 success, 1 a check failed, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

import numpy as np

from . import __version__
from .asymptotics import (
    Region,
    laplace_transform,
    mean_density,
    phase_limit,
    phase_transform_limit,
    poisson_check,
    series_in_z,
    series_truncated,
)
from .aw_functional import ChebPolyKernel, PowerKernel, evaluate
from .checks import SUITES, run_suite
from .config import DEFAULTS, Tolerances
from .errors import FreeAwError
from .lpp_gibbs import LppConfig
from .lpp_sim import stationarity_test
from .moment_functional import ChebPoly


class InputError(ValueError):
    pass


def _floats(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"expected comma-separated numbers, got {text!r}") from exc


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise InputError(f"not a number: {text!r}") from exc


def parse_kernel(spec: str):
    """``power:v:n`` or ``cheb:c0,c1,...`` (coefficients in the U basis)."""
    kind, _, rest = spec.partition(":")
    if kind == "power":
        parts = rest.split(":")
        if len(parts) != 2:
            raise InputError("power kernel spec is power:v:n")
        n = int(parts[1])
        if n < 0:
            raise InputError("power kernel needs n >= 0")
        return PowerKernel(_complex(parts[0]), n)
    if kind == "cheb":
        if not rest:
            raise InputError("cheb kernel needs coefficients")
        return ChebPolyKernel(ChebPoly([_complex(x) for x in rest.split(",")]))
    raise InputError(f"unknown kernel kind {kind!r}")


def parse_grid(text: str) -> List[float]:
    """``start:stop:count`` for a linear grid, or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InputError("grid spec is start:stop:count")
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1:
            raise InputError("grid needs at least one point")
        return [float(x) for x in np.linspace(lo, hi, n)]
    return _floats(text)


def _tolerances(args) -> Tolerances:
    return DEFAULTS.with_overrides(
        rel_tol=args.rel_tol, nodes_max=args.nodes_max, nested_nodes_max=args.nested_nodes_max
    )


def _meta(args) -> dict:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}
    return {"tool": "freeaw", "version": __version__, "command": args.command, "params": params}


def _jnum(x: float):
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, record: dict):
    record = {"meta": _meta(args), **record}
    _emit(args, json.dumps(record, sort_keys=False) + "\n")


def _emit_csv(args, header: List[str], rows: List[list]):
    buf = io.StringIO()
    buf.write("# " + json.dumps(_meta(args)) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    _emit(args, buf.getvalue())


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("FREEAW_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# Commands


def cmd_eval(args) -> int:
    tol = _tolerances(args)
    params = [_complex(x) for x in (args.a, args.b, args.c, args.d) if x is not None]
    f = parse_kernel(args.kernel)
    ev = evaluate(params, f, method=args.method, tol=tol)
    v = ev.value
    _emit_json(
        args,
        {
            "value_re": _jnum(v.real),
            "value_im": _jnum(v.imag),
            "log_abs": _jnum(ev.log_abs()),
            "method": ev.method,
            "est_error": _jnum(ev.est_error),
        },
    )
    return 0


def cmd_check(args) -> int:
    kw = {"seed": args.seed} if args.seed is not None else {}
    if args.trials is not None:
        kw["points" if args.suite in ("recurrence", "series") else "trials"] = args.trials
    if args.max_N is not None and args.suite in ("oracle-triangle", "theorem14", "gb-integral"):
        kw["max_N"] = args.max_N
    if args.d is not None:
        if args.suite == "swap":
            kw["d"] = args.d
        elif args.suite in ("oracle-triangle", "theorem14"):
            kw["max_d"] = args.d
    res = run_suite(args.suite, **kw)
    rows = [[c.label, f"{c.residual:.3e}", f"{c.threshold:.1e}", "PASS" if c.passed else "FAIL"] for c in res.cases]
    _emit_csv(args, ["case", "residual", "threshold", "status"], rows)
    sys.stderr.write(f"{args.suite}: {sum(c.passed for c in res.cases)}/{len(res.cases)} passed\n")
    return 0 if res.passed else 1


def _phase_cell(a, c1, c2, N, tol):
    try:
        res = phase_limit(a, c1, c2, tol.tie_tol)
    except FreeAwError as exc:
        return [c1, c2, "error", "", "", "", "", "", str(exc)]
    low = "" if res.low is None else repr(res.low)
    high = "" if res.high is None else repr(res.high)
    try:
        num = mean_density(N, a, c1, c2, h=tol.density_step, tol=tol)
    except FreeAwError as exc:
        return [c1, c2, res.region.value, "" if res.density is None else repr(res.density), "", "", low, high, str(exc)]
    if res.region is Region.Coexistence:
        pred, err = "", ""
    else:
        pred, err = repr(res.density), repr(abs(num - res.density))
    flag = "boundary" if res.boundary else ("tie" if res.tie else "")
    return [c1, c2, res.region.value, pred, repr(num), err, low, high, flag]


def cmd_phase_diagram(args) -> int:
    tol = _tolerances(args)
    c1s, c2s = parse_grid(args.c1), parse_grid(args.c2)
    if not (0 < args.a < 1):
        raise InputError("a must lie in (0, 1)")
    for c in c1s + c2s:
        if not (0 < c < 1 / args.a):
            raise InputError(f"grid value {c} outside (0, 1/a)")
    cells = [(c1, c2) for c1 in c1s for c2 in c2s]
    work = lambda cc: _phase_cell(args.a, cc[0], cc[1], args.N, tol)  # noqa: E731
    if _threads() > 1:
        with ThreadPoolExecutor(_threads()) as ex:
            rows = list(ex.map(work, cells))
    else:
        rows = [work(cc) for cc in cells]
    header = ["c1", "c2", "region", "rho_predicted", "rho_numeric_N", "abs_err", "rho_low", "rho_high", "note"]
    _emit_csv(args, header, [[repr(r[0]), repr(r[1])] + r[2:] for r in rows])
    return 0


def cmd_laplace(args) -> int:
    tol = _tolerances(args)
    val = laplace_transform(args.N, args.s, args.a, args.c1, args.c2, tol)
    res = phase_limit(args.a, args.c1, args.c2)
    _emit_json(args, {"phi_N": _jnum(val), "limit": _jnum(phase_transform_limit(args.a, args.c1, args.c2, args.s)), "region": res.region.value})
    return 0


def cmd_simulate(args) -> int:
    cfg = LppConfig(args.a, args.c1, args.c2, args.N)
    res = stationarity_test(cfg, args.samples, args.cap, args.seed, initial=args.initial, tol=_tolerances(args))
    _emit_json(
        args,
        {
            "tv": _jnum(res.tv),
            "truncation_correction": _jnum(res.correction),
            "outside_fraction": _jnum(res.outside),
            "samples": res.samples,
            "initial": res.initial,
            "rng": "numpy Philox, SeedSequence(seed).spawn per chunk",
        },
    )
    return 0


def cmd_poisson(args) -> int:
    t = _floats(args.t)
    x = _floats(args.x) if args.x else None
    res = poisson_check(args.scaling, args.lam, args.N, t, x, theta=args.theta, c_fixed=args.c_fixed, tol=_tolerances(args))
    _emit_json(
        args,
        {
            "ratio": _jnum(res.ratio),
            "target": _jnum(res.target),
            "rel_dev": _jnum(res.rel_dev),
            "a": _jnum(res.a),
            "c1": _jnum(res.c1),
            "c2": _jnum(res.c2),
            "blocks": list(res.blocks),
        },
    )
    return 0


def cmd_series(args) -> int:
    closed = series_in_z(args.z, args.t, args.a, args.c1, args.c2)
    trunc = series_truncated(args.z, args.t, args.a, args.c1, args.c2, args.truncate, _tolerances(args))
    rel = abs(trunc - closed) / abs(closed)
    _emit_json(args, {"closed_form": _jnum(closed), "truncated": _jnum(trunc), "rel_err": _jnum(rel), "terms": args.truncate})
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="freeaw", description="Free Askey-Wilson functionals and geometric LPP on a strip.")
    ap.add_argument("--version", action="version", version=f"freeaw {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write to this path instead of stdout")
    common.add_argument("--rel-tol", type=float, default=None, help=f"quadrature tolerance (default {DEFAULTS.rel_tol})")
    common.add_argument("--nodes-max", type=int, default=None)
    common.add_argument("--nested-nodes-max", type=int, default=None)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate L^{a,b,c}[f]")
    for name in ("a", "b", "c", "d"):
        p.add_argument(f"--{name}", default=None, help="parameter (complex allowed, e.g. 0.3+0.2j)")
    p.add_argument("--kernel", required=True, help="power:v:n or cheb:c0,c1,...")
    p.add_argument("--method", default="auto", choices=["auto", "contour", "representation"])
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("check", parents=[common], help="run an identity suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--max-N", dest="max_N", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("phase-diagram", parents=[common], help="sweep L1(N)/N over a (c1, c2) grid")
    p.add_argument("--a", type=float, default=0.4)
    p.add_argument("--N", type=int, default=200)
    p.add_argument("--c1", default="0.1:2.4:11", help="start:stop:count or a list")
    p.add_argument("--c2", default="0.1:2.4:11")
    p.set_defaults(func=cmd_phase_diagram)

    p = sub.add_parser("laplace", parents=[common], help="phi_N(s) and its large-N limit")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--c1", type=float, required=True)
    p.add_argument("--c2", type=float, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--s", type=float, default=1.0)
    p.set_defaults(func=cmd_laplace)

    p = sub.add_parser("simulate", parents=[common], help="one-step stationarity test")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--c1", type=float, required=True)
    p.add_argument("--c2", type=float, required=True)
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--cap", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--initial", default="stationary", choices=["stationary", "zero"])
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("poisson", parents=[common], help="finite-N Poisson-limit ratio")
    p.add_argument("--scaling", required=True, choices=["a", "b", "A", "B"])
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--t", required=True, help="comma-separated increasing times")
    p.add_argument("--x", default=None, help="comma-separated grid ending at 1")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--c-fixed", dest="c_fixed", type=float, default=0.5)
    p.set_defaults(func=cmd_poisson)

    p = sub.add_parser("series", parents=[common], help="generating series in z")
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--c1", type=float, required=True)
    p.add_argument("--c2", type=float, required=True)
    p.add_argument("--truncate", type=int, default=60)
    p.set_defaults(func=cmd_series)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FreeAwError, ValueError, KeyError, OverflowError, ZeroDivisionError) as exc:
        err = {"error": type(exc).__name__, "reason": str(exc), "command": args.command}
        sys.stderr.write(json.dumps(err) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
