"""Command-line surface: generate | cluster | eval | diagnose."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .core import Params, ParameterError, PipelineError, PointCloud
from .datasets import (KINDS, ShapeSpec, generate, load_csv, load_labels,
                       save_csv, save_labels)
from .evaluate import accuracy, gap_report, simplex_classes
from .pipeline import run


def _jsonable(obj):
    """Recursively convert to JSON-safe values; non-finite floats become
    their str() form ("inf", "-inf", "nan")."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    return obj


def _write_json(path, doc):
    """Atomic JSON write: UTF-8, LF, trailing newline."""
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def _params_doc(params):
    return {f: getattr(params, f) for f in (
        "d", "tau", "e", "q", "r0", "B", "kappa", "eta", "k", "m",
        "weight_mode", "delta", "nu", "seed")}


def _limit_threads(threads):
    """Bound internal (BLAS) parallelism; 0 keeps the hardware count."""
    if threads <= 0:
        return
    try:
        from threadpoolctl import threadpool_limits
        threadpool_limits(limits=threads)
    except ImportError:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ[var] = str(threads)


def _add_param_flags(sub):
    sub.add_argument("--d", type=int, help="intrinsic dimension")
    sub.add_argument("--tau", type=float, help="noise level")
    sub.add_argument("--e", type=float, help="minimal simplex edge length")
    sub.add_argument("--q", type=float, help="edge-distortion ratio in (0,1)")
    sub.add_argument("--r0", type=float, help="volume distortion floor")
    sub.add_argument("--B", type=int, help="annular neighbor count")
    sub.add_argument("--kappa", type=int, help="denoising neighbor count")
    sub.add_argument("--eta", type=float, help="denoising threshold")
    sub.add_argument("--k", type=int, help="number of profile scales")
    sub.add_argument("--m", type=int, help="cluster count (omit = auto)")
    sub.add_argument("--weight-mode", choices=("one-sided", "two-sided"),
                     default="one-sided")
    sub.add_argument("--delta", type=float, help="numerical weight floor")
    sub.add_argument("--nu", type=float,
                     help="nontrivial-component size fraction")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--threads", type=int, default=0,
                     help="internal parallelism bound (0 = hardware count)")


def _params_from_args(args):
    return Params(d=args.d, tau=args.tau, e=args.e, q=args.q, r0=args.r0,
                  B=args.B, kappa=args.kappa, eta=args.eta, k=args.k,
                  m=args.m, weight_mode=args.weight_mode, delta=args.delta,
                  nu=args.nu, seed=args.seed)


def _require_scale(parser, args):
    if args.d is None:
        parser.error("--d is required (intrinsic dimension estimation is "
                     "out of scope)")
    if args.tau is None and args.e is None:
        parser.error("supply --tau or --e (noise/scale estimation is out of "
                     "scope; with --tau 0 the edge scale falls back to "
                     "neighbor distances)")


def cmd_generate(args):
    spec = ShapeSpec(kind=args.kind, d=args.d, D=args.D, n=args.n,
                     theta=args.theta, sigma=args.sigma, seed=args.seed)
    cloud = generate(spec)
    os.makedirs(args.out, exist_ok=True)
    points_path = os.path.join(args.out, "points.csv")
    labels_path = os.path.join(args.out, "labels.txt")
    save_csv(points_path, cloud)
    save_labels(labels_path, cloud.truth)
    manifest = {
        "command": "generate",
        "version": __version__,
        "shape_spec": {"kind": spec.kind, "d": spec.d, "D": spec.D,
                       "n": spec.n, "theta": spec.theta, "sigma": spec.sigma,
                       "seed": spec.seed},
        "outputs": {"points": points_path, "labels": labels_path},
    }
    _write_json(os.path.join(args.out, "manifest"), manifest)
    print(f"wrote {points_path} ({cloud.n}x{cloud.dim}) and {labels_path}")
    return 0


def cmd_cluster(parser, args):
    _require_scale(parser, args)
    _limit_threads(args.threads)
    cloud = load_csv(args.points, labels_path=args.labels)
    params = _params_from_args(args)
    result = run(cloud, params)
    os.makedirs(args.out, exist_ok=True)
    result_path = os.path.join(args.out, "result.json")
    labels_path = os.path.join(args.out, "labels.txt")
    save_labels(labels_path, result.point_labels)
    doc = {
        "m_hat": result.m_hat,
        "eta": result.eta,
        "point_labels": result.point_labels,
        "simplex_count": result.diagnostics["simplex_count"],
        "survivor_count": result.diagnostics["survivor_count"],
        "diagnostics": result.diagnostics,
        "timings_ms": result.timings_ms,
    }
    _write_json(result_path, doc)
    manifest = {
        "command": "cluster",
        "version": __version__,
        "params": _params_doc(result.params),
        "seed": result.params.seed,
        "threads": args.threads,
        "inputs": {"points": args.points, "labels": args.labels},
        "outputs": {"result": result_path, "labels": labels_path},
        "timings_ms": result.timings_ms,
    }
    _write_json(os.path.join(args.out, "manifest"), manifest)
    print(f"m_hat = {result.m_hat}")
    print(f"survivors = {result.diagnostics['survivor_count']} / "
          f"{result.diagnostics['simplex_count']} simplices")
    for stage, ms in result.timings_ms.items():
        print(f"  {stage}: {ms:.1f} ms")
    return 0


def cmd_eval(args):
    pred = load_labels(args.pred)
    truth = load_labels(args.truth)
    if pred.shape[0] != truth.shape[0]:
        raise ValueError("pred and truth files have different lengths")
    acc = accuracy(pred, truth)
    print(f"{acc:.4f}")
    if args.manifest:
        with open(args.manifest, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
        manifest["accuracy"] = acc
        _write_json(args.manifest, manifest)
    return 0


def cmd_diagnose(parser, args):
    _require_scale(parser, args)
    _limit_threads(args.threads)
    cloud = load_csv(args.points, labels_path=args.labels)
    if cloud.truth is None:
        parser.error("diagnose requires --labels (ground truth)")
    params = _params_from_args(args)
    result = run(cloud, params)
    doc = {
        "eta": result.eta,
        "m_hat": result.m_hat,
        "wlapd": result.diagnostics["wlapd"],
        "blapd": result.diagnostics["blapd"],
        "wlapd_dns": result.diagnostics["wlapd_dns"],
        "blapd_dns": result.diagnostics["blapd_dns"],
        "mixed_count": result.diagnostics["mixed_count"],
        "knn_quantiles": result.diagnostics["knn_quantiles"],
        "survivor_count": result.diagnostics["survivor_count"],
        "simplex_count": result.diagnostics["simplex_count"],
    }
    text = json.dumps(_jsonable(doc), indent=2, sort_keys=True)
    if args.out:
        _write_json(args.out, doc)
    print(text)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="anglepath",
        description="Multi-manifold clustering by largest-angle path "
                    "distances over local simplex graphs.")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("generate", help="sample a synthetic point cloud")
    gen.add_argument("--kind", choices=KINDS, required=True)
    gen.add_argument("--d", type=int, required=True)
    gen.add_argument("--D", type=int, required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--theta", type=float, default=math.pi / 2)
    gen.add_argument("--sigma", type=float, default=0.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output directory")

    clu = subs.add_parser("cluster", help="cluster a point cloud CSV")
    clu.add_argument("--points", required=True)
    clu.add_argument("--labels", help="optional ground truth for diagnostics")
    clu.add_argument("--out", required=True, help="output directory")
    _add_param_flags(clu)

    ev = subs.add_parser("eval", help="score predicted labels against truth")
    ev.add_argument("--pred", required=True)
    ev.add_argument("--truth", required=True)
    ev.add_argument("--manifest", help="append the accuracy to this manifest")

    dia = subs.add_parser("diagnose",
                          help="report class-separation diagnostics")
    dia.add_argument("--points", required=True)
    dia.add_argument("--labels", required=True)
    dia.add_argument("--out", help="optional output file for the report")
    _add_param_flags(dia)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "generate":
            return cmd_generate(args)
        if args.command == "cluster":
            return cmd_cluster(parser, args)
        if args.command == "eval":
            return cmd_eval(args)
        if args.command == "diagnose":
            return cmd_diagnose(parser, args)
    except PipelineError as exc:
        print(f"error in stage {exc.stage}: {exc}", file=sys.stderr)
        return 1
    except (ParameterError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    parser.error(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
