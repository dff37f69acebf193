"""Command line entry point: ``fracconf <subcommand> ...``."""

from __future__ import annotations

import argparse
import io
import json
import sys
from pathlib import Path

from . import bounds as B
from .counting import brute_force_count, count_gap_graph_report, count_pinned
from .dimension import (ad_failure_witness, ad_ratio_closed_form, ad_witness_direct, box_dimension,
                        dyadic_scales, fubini_slice_check, regularity_audit)
from .constructions import LatticeParams
from .errors import FracConfError
from .experiment import (CONSTRUCTIONS, PRESETS, _float_list, _int_list, _shape_from, build_construction,
                         load_config, run_experiment, write_outputs)
from .geometry import GapGraph, PointCloud
from .metrics import get_metric, phong_stein_audit, sample_level_set


def _emit(obj):
    print(json.dumps(obj, indent=2, default=float))


def _floats(s):
    return [float(v) for v in s.split(",") if v.strip()]


def _parse_shape(args) -> GapGraph:
    if args.shape:
        text = args.shape
        p = Path(text)
        if p.exists():
            text = p.read_text()
        return _shape_from(json.loads(text))
    if args.chain:
        return GapGraph.chain(_floats(args.chain), args.pin)
    if args.star:
        return GapGraph.star(_floats(args.star), args.pin)
    if args.triangle:
        return GapGraph.triangle(*_floats(args.triangle), pin=args.pin)
    if args.kite:
        return GapGraph.kite(_floats(args.kite), args.pin)
    raise FracConfError("give a shape: --shape, --chain, --star, --triangle or --kite")


# ---------------------------------------------------------------- handlers


def cmd_build(args):
    spec = CONSTRUCTIONS[args.construction][1]
    params = {p: getattr(args, p) for p, _, _ in spec if getattr(args, p) is not None}
    if "seed" in {p for p, _, _ in spec} and args.seed is not None:
        params["seed"] = args.seed
    cloud = build_construction(args.construction, params)
    if args.out:
        cloud.to_csv(args.out)
        _emit({"points": len(cloud), "resolution": cloud.resolution, "out": args.out})
    else:
        buf = io.StringIO()
        cloud.to_csv(buf)
        sys.stdout.write(buf.getvalue())
    return 0


def cmd_count(args):
    cloud = PointCloud.from_csv(args.cloud)
    shape = _parse_shape(args)
    metric = get_metric(args.metric, cloud.ambient_dim)
    if args.pin_point:
        n = count_pinned(cloud, shape, _floats(args.pin_point), metric, args.delta, threads=args.threads)
        _emit({"count": n, "pinned": True})
        return 0
    rep = count_gap_graph_report(cloud, shape, metric, args.delta, threads=args.threads)
    if args.check:
        rep["brute_force"] = brute_force_count(cloud, shape, metric, args.delta)
    _emit(rep)
    return 0


def cmd_dimfit(args):
    cloud = PointCloud.from_csv(args.cloud)
    scales = None
    if args.scales:
        a, b = (int(v) for v in args.scales.split(":"))
        scales = dyadic_scales(a, b)
    _emit(box_dimension(cloud, scales, trim=args.trim).to_dict())
    return 0


def cmd_audit(args):
    if args.kind == "lattice-witness":
        q = tuple(int(v) for v in args.q.split(","))
        params = LatticeParams(args.d, args.alpha, q, len(q))
        rows = []
        for i in range(1, len(q)):
            direct = ad_witness_direct(params, i)
            rows.append({"level": i, "w": ad_failure_witness(params, i),
                         "closed_form": ad_ratio_closed_form(args.d, args.alpha, q[i - 1]), **direct})
        _emit(rows)
        return 0
    cloud = PointCloud.from_csv(args.cloud)
    if args.kind == "regularity":
        delta = args.delta if args.delta else cloud.resolution
        rep = regularity_audit(cloud, delta, args.alpha, args.epsilon, x_sample_count=args.samples,
                               seed=args.seed or 0)
        _emit(rep.to_dict())
        return 0
    rep = fubini_slice_check(cloud, args.slice_coords, tolerance=args.tolerance, seed=args.seed or 0)
    _emit(rep.to_dict())
    return 0 if rep.passes else 1


def cmd_audit_phi(args):
    metric = get_metric(args.metric, args.d)
    samples = sample_level_set(args.metric, args.t, args.samples, args.d, args.seed or 0)
    rep = phong_stein_audit(metric, args.t, samples, h=args.h, tol_onset=args.tol, threads=args.threads)
    out = rep.to_dict()
    out["passes"] = rep.passes(args.tol)
    _emit(out)
    return 0


def cmd_bounds(args):
    if args.table:
        rows = []
        for name in B.BOUND_NAMES:
            try:
                rows.append(B.evaluate(name, args.k, args.d, args.alpha, args.tau).to_dict())
            except (FracConfError, TypeError) as exc:
                rows.append({"name": name, "error": str(exc)})
        _emit(rows)
        return 0
    if not args.which:
        raise FracConfError("give --which NAME or --table")
    _emit(B.evaluate(args.which, args.k, args.d, args.alpha, args.tau).to_dict())
    return 0


def cmd_experiment(args):
    if args.preset:
        raw = json.loads(json.dumps(PRESETS[args.preset]))
    elif args.config:
        raw = load_config(args.config)
    else:
        raise FracConfError("give a config file or --preset")
    if args.seed is not None:
        raw["seed"] = args.seed
    rep = run_experiment(raw, out_dir=None, threads=args.threads)
    out = args.out or rep.config["output"].get("dir")
    paths = write_outputs(rep, out) if out else {}
    _emit({"name": rep.config["name"], "fitted_exponent": rep.fitted_exponent,
           "exponent_stderr": rep.exponent_stderr, "verdict": rep.verdict,
           "bounds": [b.to_dict() for b in rep.theory_bounds],
           "per_scale": rep.per_scale, "outputs": paths})
    return 2 if rep.verdict == "violates_upper" else 0


# ---------------------------------------------------------------- parser


def _add_shape_args(p):
    g = p.add_argument_group("shape")
    g.add_argument("--shape", help="gap graph JSON (inline or file)")
    g.add_argument("--chain", help="comma separated gaps of a k-chain")
    g.add_argument("--star", help="comma separated gaps of a star centred at vertex 1")
    g.add_argument("--triangle", help="gaps t12,t13,t23")
    g.add_argument("--kite", help="gaps for edges 12,13,23,24,45")
    g.add_argument("--pin", type=int, help="pinned vertex (1-based)")


def _param_type(kind):
    if kind in (_float_list,):
        return _floats
    if kind in (_int_list,):
        return lambda s: [int(v) for v in s.split(",")]
    return kind


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracconf", description="Point configurations in fractal sets.")
    ap.add_argument("--threads", type=int, default=None, help="cap on worker threads")
    ap.add_argument("--seed", type=int, default=None)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a construction and write its point cloud as CSV")
    bsub = p.add_subparsers(dest="construction", required=True)
    for name, (_, spec) in CONSTRUCTIONS.items():
        q = bsub.add_parser(name)
        for pname, kind, default in spec:
            if pname == "seed":
                continue
            q.add_argument(f"--{pname.replace('_', '-')}", dest=pname, type=_param_type(kind), default=None,
                           help=f"default {default}")
        q.add_argument("--out", help="CSV path (stdout if omitted)")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("count", help="count delta-approximate configurations")
    p.add_argument("cloud", help="point cloud CSV")
    _add_shape_args(p)
    p.add_argument("--metric", default="euclidean")
    p.add_argument("--delta", type=float, default=1e-9)
    p.add_argument("--pin-point", help="comma separated coordinates of the pin")
    p.add_argument("--check", action="store_true", help="also run the brute-force oracle")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("dimfit", help="box-counting dimension fit")
    p.add_argument("cloud")
    p.add_argument("--scales", help="dyadic exponent range j_min:j_max")
    p.add_argument("--trim", type=int, default=2)
    p.set_defaults(func=cmd_dimfit)

    p = sub.add_parser("audit", help="regularity, slicing or lattice-witness audits")
    p.add_argument("kind", choices=("regularity", "fubini", "lattice-witness"))
    p.add_argument("--cloud")
    p.add_argument("--delta", type=float)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--samples", type=int)
    p.add_argument("--slice-coords", type=int, default=1)
    p.add_argument("--tolerance", type=float, default=0.1)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--q", default="4,16,256")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("audit-phi", help="Phong-Stein rotational curvature audit")
    p.add_argument("--metric", default="euclidean")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--h", type=float, default=1e-5)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_audit_phi)

    p = sub.add_parser("bounds", help="evaluate closed-form dimension bounds")
    p.add_argument("--which", choices=B.BOUND_NAMES)
    p.add_argument("--table", action="store_true")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--tau", type=float)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("experiment", help="run a config-driven pipeline")
    p.add_argument("config", nargs="?", help="TOML or JSON config")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--out", help="output directory for report.json and scales.csv")
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except FracConfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
