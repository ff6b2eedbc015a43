"""``gapcert`` command-line interface.

Exit codes: 0 success, 1 bad input, 2 numerical failure, 3 a certificate
pre-condition failed. ``GAPCERT_THREADS`` caps the number of worker
processes used by ``experiment``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds
from .coprime import bezout_residual, bezout_solve, factor_residual, inner_residual, nrcf
from .errors import DimensionError, DomainError, FactorizationError, NumericalError
from .gap import directed_gap, gap_metric
from .hinfnorm import hinf_norm_peak
from .io import bundled_configs, load_config, load_system, signed_controller, system_to_dict
from .lti import is_stable
from .mc import run_experiment, threads_from_env
from .perf import bpc

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_PRECONDITION = 0, 1, 2, 3


class PreconditionFailed(Exception):
    pass


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _emit(obj) -> None:
    print(json.dumps(_jsonable(obj), indent=2, sort_keys=True))


# ------------------------------------------------------------------ commands


def cmd_gap(args) -> int:
    p1, p2 = load_system(args.sys1), load_system(args.sys2)
    if args.directed:
        res = directed_gap(p1, p2, args.tol, method=args.method)
    else:
        res = gap_metric(p1, p2, args.tol, method=args.method)
    _emit(res.as_dict())
    return EXIT_OK


def cmd_bpc(args) -> int:
    P = load_system(args.plant)
    C = signed_controller(load_system(args.controller), args.feedback_sign)
    b = bpc(P, C)
    _emit({"b": b, "internally_stable": bool(b > 0), "feedback_sign": args.feedback_sign})
    return EXIT_OK


def cmd_hinf(args) -> int:
    sys_ = load_system(args.system)
    if not is_stable(sys_):
        raise PreconditionFailed("H-infinity norm requires a stable system")
    value, w = hinf_norm_peak(sys_, args.tol)
    _emit({"hinf_norm": value, "peak_frequency": w, "tol": args.tol})
    return EXIT_OK


def cmd_nrcf(args) -> int:
    gs = nrcf(load_system(args.system))
    out = {
        "graph_symbol": system_to_dict(gs.g),
        "n_rows_N": gs.n_rows_N,
        "inner_residual": inner_residual(gs),
        "factor_residual": factor_residual(gs),
    }
    try:
        pair = bezout_solve(gs)
        out["bezout"] = {"X": system_to_dict(pair.x), "Y": system_to_dict(pair.y),
                         "residual": bezout_residual(gs, pair)}
    except FactorizationError as exc:
        out["bezout"] = {"error": str(exc)}
    _emit(out)
    return EXIT_OK


def _parse_value(text: str):
    try:
        v = float(text)
    except ValueError as exc:
        raise DomainError(f"not a number: {text!r}") from exc
    return int(v) if v.is_integer() and "." not in text and "e" not in text.lower() else v


def cmd_bounds(args) -> int:
    inputs = {}
    for item in args.inputs:
        if "=" not in item:
            raise DomainError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        inputs[k.strip().replace("-", "_")] = _parse_value(v.strip())
    try:
        rep = bounds.evaluate(args.name, **inputs)
    except TypeError as exc:
        raise DomainError(f"bad arguments for {args.name}: {exc}") from exc
    _emit(rep.as_dict())
    return EXIT_OK if rep.valid else EXIT_PRECONDITION


def write_samples_csv(path: Path, result) -> None:
    p = result.config.theta.p
    lines = [",".join(["index", *(f"theta_{k + 1}" for k in range(p)), "gap", "stable", "bpc", "tnorm"])]
    for r in result.stats.samples:
        row = [str(r.index), *(repr(float(t)) for t in r.theta), repr(float(r.gap)), str(int(r.stable)),
               repr(float(r.bpc)), repr(float(r.tnorm))]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def histogram_svg(hist: dict, title: str = "gap density") -> str:
    """Static SVG bar chart of a density histogram on [0, 1]."""
    dens = hist["density"]
    W, H, pad = 640, 360, 40
    top = max(max(dens), 1e-12)
    bw = (W - 2 * pad) / len(dens)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
             f'<rect width="{W}" height="{H}" fill="white"/>',
             f'<text x="{W / 2:.1f}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{title}</text>']
    for k, d in enumerate(dens):
        h = (H - 2 * pad) * d / top
        parts.append(f'<rect x="{pad + k * bw:.2f}" y="{H - pad - h:.2f}" width="{bw * 0.95:.2f}" '
                     f'height="{h:.2f}" fill="steelblue"/>')
    parts.append(f'<line x1="{pad}" y1="{H - pad}" x2="{W - pad}" y2="{H - pad}" stroke="black"/>')
    for x in (0.0, 0.25, 0.5, 0.75, 1.0):
        px = pad + x * (W - 2 * pad)
        parts.append(f'<text x="{px:.1f}" y="{H - pad + 16}" text-anchor="middle" font-family="sans-serif" '
                     f'font-size="11">{x:g}</text>')
    parts.append(f'<text x="{pad}" y="{pad - 6}" font-family="sans-serif" font-size="11">max density {top:.3g}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_experiment(args) -> int:
    if args.list:
        print("\n".join(bundled_configs()))
        return EXIT_OK
    if not args.config:
        raise DomainError("experiment needs a config path or bundled name")
    cfg = load_config(args.config, samples=args.samples, seed=args.seed)
    result = run_experiment(cfg, threads=threads_from_env())
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_samples_csv(out / "samples.csv", result)
    (out / "summary.json").write_text(json.dumps(_jsonable(result.summary()), indent=2, sort_keys=True) + "\n")
    if args.histogram:
        (out / "histogram.svg").write_text(histogram_svg(result.histogram, f"{cfg.name}: gap density"))
    est = result.estimates
    _emit({"out": str(out), "e_gap": est["e_gap"], "alpha_hat": est["alpha_hat"], "l_gap": est["l_gap"],
           "p_gap_below_b": est["p_gap_below_b"], "e_tnorm": est["e_tnorm"],
           "valid": {k: v.valid for k, v in result.bounds.items()}})
    return EXIT_OK


# ------------------------------------------------------------------- parsing


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gapcert", description="Gap-metric robustness certificates.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gap", help="gap metric between two systems")
    g.add_argument("sys1")
    g.add_argument("sys2")
    g.add_argument("--tol", type=float, default=1e-5)
    g.add_argument("--method", choices=("riccati", "basis"), default="riccati")
    g.add_argument("--directed", action="store_true", help="directed gap from sys1 to sys2 only")
    g.set_defaults(func=cmd_gap)

    b = sub.add_parser("bpc", help="generalized stability margin of a plant/controller pair")
    b.add_argument("plant")
    b.add_argument("controller")
    b.add_argument("--feedback-sign", choices=("neg", "pos"), default="neg",
                   help="neg: controller file is K in u = -K y (default); pos: u = C y")
    b.set_defaults(func=cmd_bpc)

    h = sub.add_parser("hinf", help="H-infinity norm of a stable system")
    h.add_argument("system")
    h.add_argument("--tol", type=float, default=1e-6)
    h.set_defaults(func=cmd_hinf)

    n = sub.add_parser("nrcf", help="normalized right coprime factorization")
    n.add_argument("system")
    n.set_defaults(func=cmd_nrcf)

    bd = sub.add_parser("bounds", help="evaluate a certificate formula")
    bd.add_argument("name", choices=sorted(bounds.REGISTRY))
    bd.add_argument("inputs", nargs="*", help="key=value pairs")
    bd.set_defaults(func=cmd_bounds)

    e = sub.add_parser("experiment", help="run a Monte-Carlo experiment")
    e.add_argument("config", nargs="?", help="config path or bundled name")
    e.add_argument("--samples", type=int)
    e.add_argument("--seed", type=int)
    e.add_argument("--out", default="gapcert-out")
    e.add_argument("--histogram", action="store_true", help="also write histogram.svg")
    e.add_argument("--list", action="store_true", help="list bundled configs")
    e.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PreconditionFailed as exc:
        print(f"gapcert: precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (DomainError, DimensionError, FileNotFoundError, KeyError, TypeError, ValueError) as exc:
        print(f"gapcert: bad input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"gapcert: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
