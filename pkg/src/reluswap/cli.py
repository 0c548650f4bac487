"""Command line interface: classify, gadget, transpile, verify, constants, curve.

Exit codes: 0 success, 1 tolerance or constant failure, 2 usage or contract error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from reluswap import errors as E
from reluswap.activations import classify, get_activation
from reluswap.gadgets import (
    derivative_gadget, estimate_gap_constants, identity_gadget, product_gadget, relu_gadget,
)
from reluswap.gadgets.base import Gadget
from reluswap.gadgets.relu import a2_net, a2tilde_net
from reluswap.net_ir import Box, eval_network, parse, serialize, sup_distance_report
from reluswap.published import PUBLISHED_GAPS, PUBLISHED_TOLERANCE, published_constants
from reluswap.transpiler import transpile

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# failures of the numerics rather than of the caller
_FAIL_ERRORS = (E.NotInA, E.CalibrationFailed, E.LimitMismatch, E.Unbounded)

CURVE_POINTS = 2001


def _params(items: list[str] | None) -> dict[str, float]:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise E.ParameterDomainError(f"expected key=value, got {item!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise E.ParameterDomainError(f"parameter {key!r}: {value!r} is not a number") from None
    return out


def _spec(args):
    return get_activation(args.act, _params(args.param))


def _emit(args, payload: dict, text: str) -> None:
    print(json.dumps(payload, indent=2) if args.json else text)


def _write(path: str | None, data: bytes | str) -> None:
    if path:
        mode = "wb" if isinstance(data, bytes) else "w"
        with open(path, mode, **({} if mode == "wb" else {"newline": ""})) as fh:
            fh.write(data)


# classify

def cmd_classify(args) -> int:
    cls = classify(_spec(args))
    print(json.dumps(cls.to_json(), indent=2))
    return EXIT_OK


# gadget

def _build_gadget(args) -> Gadget:
    spec = _spec(args)
    if args.target == "relu":
        return relu_gadget(classify(spec), args.M, args.tol, force_class=args.force_class)
    if args.scale is None:
        raise E.ParameterDomainError(f"--scale is required for target {args.target}")
    if args.target == "derivative":
        return derivative_gadget(spec, args.k, args.scale, M=args.M)
    if args.target == "identity":
        return identity_gadget(spec, args.scale, M=args.M)
    return product_gadget(spec, args.scale, M=args.M)


def cmd_gadget(args) -> int:
    g = _build_gadget(args)
    _write(args.out, g.to_json())
    meta = g.metadata() | {"width": g.width, "depth": g.depth}
    text = "\n".join(f"{k}: {v}" for k, v in meta.items())
    _emit(args, meta, text)
    return EXIT_OK


# transpile

def cmd_transpile(args) -> int:
    net = parse(Path(args.inp).read_bytes())
    spec = _spec(args)
    out, report = transpile(net, spec, Box(args.A, net.input_dim), args.eps, seed=args.seed,
                            n_samples=args.samples, force_class=args.force_class)
    _write(args.out, serialize(out))
    rep = report.to_json()
    _write(args.report, json.dumps(rep, indent=2))
    text = (f"sampled sup error {report.sup_error_sampled:.6g} (eps {args.eps:g}) on "
            f"{report.n_verify_points} points; factors {report.factors[0]:g} x {report.factors[1]:g}; "
            f"rounds {report.rounds}; {'ok' if report.success else 'FAILED'}")
    _emit(args, rep, text)
    return EXIT_OK if report.success else EXIT_FAIL


# verify

def cmd_verify(args) -> int:
    a = parse(Path(args.a).read_bytes())
    b = parse(Path(args.b).read_bytes())
    rep = sup_distance_report(a, b, Box(args.A, a.input_dim), args.samples, args.seed)
    text = (f"sampled sup distance {rep['sup_error_sampled']!r} over {rep['n_points']} points "
            f"(lattice {rep['n_lattice']}, corners {rep['n_corners']}, random {rep['n_random']}, seed {args.seed})")
    _emit(args, rep, text)
    return EXIT_OK


# constants

def cmd_constants(args) -> int:
    names = args.names or list(PUBLISHED_GAPS)
    rows, worst = [], 0.0
    for name in names:
        spec = get_activation(name)
        cls = classify(spec)
        if cls.s_decomp is None or not cls.s_decomp.tilde:
            raise E.NotA2tilde(f"{name} is not a single-neuron activation")
        gc = estimate_gap_constants(cls)
        ref = published_constants(name, spec.param_dict)
        row = {"name": name, "m": gc.m, "M_sup": gc.M_sup, "flags": list(gc.flags)}
        if ref is not None:
            dev = max(abs(gc.m - ref[0]), abs(gc.M_sup - ref[1]))
            worst = max(worst, dev)
            row |= {"reference_m": ref[0], "reference_M_sup": ref[1], "deviation": dev,
                    "pass": dev <= PUBLISHED_TOLERANCE}
        rows.append(row)
    ok = worst <= PUBLISHED_TOLERANCE
    lines = [f"{'activation':<18} {'m':>10} {'M_sup':>10} {'ref m':>10} {'ref M':>10} {'dev':>9}"]
    for r in rows:
        pm = f"{r['reference_m']:>10.4f} {r['reference_M_sup']:>10.4f} {r['deviation']:>9.2e}" if "reference_m" in r else ""
        lines.append(f"{r['name']:<18} {r['m']:>10.5f} {r['M_sup']:>10.5f} {pm}")
    lines.append(f"tolerance {PUBLISHED_TOLERANCE:g}: {'pass' if ok else 'FAIL'}")
    _emit(args, {"rows": rows, "tolerance": PUBLISHED_TOLERANCE, "pass": ok}, "\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


# curve

def _curve_net(args):
    cls = classify(_spec(args))
    if args.K is None:
        g = relu_gadget(cls, args.M, args.tol, force_class=args.force_class)
        return g.net, g.construction, g.scale_param
    if cls.s_decomp is None:
        raise E.ParameterDomainError("--K applies to the S-shaped constructions only; use --tol instead")
    if cls.s_decomp.tilde and args.force_class in (None, "A2tilde"):
        return a2tilde_net(cls, args.K), "A2tilde", args.K
    return a2_net(cls, args.K, args.M), "A2", args.K


def cmd_curve(args) -> int:
    net, construction, scale = _curve_net(args)
    x = np.linspace(-args.M, args.M, CURVE_POINTS)
    phi = eval_network(net, x[:, None])[:, 0]
    relu = np.maximum(x, 0.0)
    if args.out:
        with open(args.out, "w", newline="", encoding="ascii") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "phi", "relu"])
            w.writerows((repr(float(a)), repr(float(b)), repr(float(c))) for a, b, c in zip(x, phi, relu))
    gap = float(np.max(np.abs(phi - relu)))
    info = {"points": CURVE_POINTS, "M": args.M, "construction": construction, "scale_param": scale,
            "max_abs_gap": gap, "out": args.out}
    _emit(args, info, f"{CURVE_POINTS} points on [-{args.M:g}, {args.M:g}], {construction} scale {scale:g}, "
                      f"max |phi - relu| = {gap:.6g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="reluswap", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version="reluswap 0.1.0")
    sub = p.add_subparsers(dest="command", required=True)

    def act(sp, required=True):
        sp.add_argument("--act", required=required, help="activation name, e.g. gelu")
        sp.add_argument("--param", action="append", metavar="KEY=VALUE", help="activation parameter (repeatable)")

    def common(sp):
        sp.add_argument("--json", action="store_true", help="machine-readable output on stdout")

    sp = sub.add_parser("classify", help="class memberships and witnesses (JSON)")
    act(sp)
    common(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("gadget", help="build one gadget")
    act(sp)
    sp.add_argument("--target", choices=["relu", "derivative", "identity", "product"], default="relu")
    sp.add_argument("--M", type=float, default=1.0, help="domain half width")
    sp.add_argument("--tol", type=float, default=1e-2, help="tolerance for relu gadgets")
    sp.add_argument("--scale", type=float, help="eta / eps_g for the building-block gadgets")
    sp.add_argument("--k", type=int, default=1, help="derivative order")
    sp.add_argument("--force-class", dest="force_class")
    sp.add_argument("--out", help="write the gadget network (JSON with metadata)")
    common(sp)
    sp.set_defaults(func=cmd_gadget)

    sp = sub.add_parser("transpile", help="rewrite a ReLU network over another activation")
    sp.add_argument("--in", dest="inp", required=True)
    act(sp)
    sp.add_argument("--A", type=float, default=1.0, help="box half width")
    sp.add_argument("--eps", type=float, default=1e-2)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--samples", type=int, default=10_000, help="range samples; verification uses ten times more")
    sp.add_argument("--force-class", dest="force_class")
    sp.add_argument("--out")
    sp.add_argument("--report")
    common(sp)
    sp.set_defaults(func=cmd_transpile)

    sp = sub.add_parser("verify", help="sampled sup distance between two networks")
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    sp.add_argument("--A", type=float, default=1.0)
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("constants", help="single-neuron gap constants against the published values")
    sp.add_argument("names", nargs="*")
    common(sp)
    sp.set_defaults(func=cmd_constants)

    sp = sub.add_parser("curve", help="CSV of a ReLU gadget against ReLU")
    act(sp)
    sp.add_argument("--K", type=float, help="fixed scale for the S-shaped constructions")
    sp.add_argument("--M", type=float, default=2.0)
    sp.add_argument("--tol", type=float, default=1e-2)
    sp.add_argument("--force-class", dest="force_class")
    sp.add_argument("--out")
    common(sp)
    sp.set_defaults(func=cmd_curve)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    warnings.simplefilter("ignore")
    try:
        return args.func(args)
    except (E.ReluSwapError, OSError, ValueError) as e:
        code = EXIT_FAIL if isinstance(e, _FAIL_ERRORS) else EXIT_USAGE
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        if getattr(args, "json", False):
            best = getattr(e, "best_error", None)
            payload = {"error": type(e).__name__, "message": str(e), "exit_code": code}
            if best is not None and math.isfinite(best):
                payload["best_error"] = best
            print(json.dumps(payload))
        return code


if __name__ == "__main__":
    sys.exit(main())
