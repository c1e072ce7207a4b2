"""Command-line front end: ``clid score | rank | transfer | synth``."""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from dataclasses import asdict
from pathlib import Path

import numpy as np

from clid.errors import ClidError
from clid.io import load_manifest, read_embeddings, read_labels, write_embeddings, write_labels
from clid.pipeline import (
    ScoreSettings,
    parse_sweep,
    rank_models,
    score_embeddings,
    score_manifest,
    sweep,
    transfer,
)
from clid.synth import SynthSpec, generate


def _add_score_flags(p: argparse.ArgumentParser) -> None:
    d = ScoreSettings()
    p.add_argument("--metric", choices=["cosine", "euclidean"], default=d.metric)
    p.add_argument("--clusters", default=d.clusters, help="'auto' (ceil(sqrt(N))), an integer, or a ratio such as 0.01")
    p.add_argument("--neighbors", type=int, default=d.neighbors)
    p.add_argument("--chunk-size", type=int, default=d.chunk_size)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--discard-fraction", type=float, default=d.discard_fraction)
    p.add_argument("--eps-sq", type=float, default=d.eps_sq)
    p.add_argument("--mle-k", type=int, default=d.mle_k)
    p.add_argument("--alpha", type=float, default=d.alpha)
    p.add_argument("--t", type=float, default=d.t)
    p.add_argument("--pair-budget", type=int, default=d.pair_budget)
    p.add_argument("--pretext-k", type=int, default=d.pretext_k)
    p.add_argument("--pretext-test-fraction", type=float, default=d.pretext_test_fraction)
    p.add_argument("--max-iter", type=int, default=d.max_iter)
    p.add_argument("--tol", type=float, default=d.tol)
    p.add_argument("--smoothing", type=float, default=d.smoothing)
    p.add_argument("--csv-has-header", action="store_true")
    p.add_argument("--out", help="output path (default: stdout)")


def _settings(args) -> ScoreSettings:
    return ScoreSettings(
        metric=args.metric,
        clusters=str(args.clusters),
        neighbors=args.neighbors,
        chunk_size=args.chunk_size,
        seed=args.seed,
        discard_fraction=args.discard_fraction,
        eps_sq=args.eps_sq,
        mle_k=args.mle_k,
        alpha=args.alpha,
        t=args.t,
        pair_budget=args.pair_budget,
        pretext_k=args.pretext_k,
        pretext_test_fraction=args.pretext_test_fraction,
        max_iter=args.max_iter,
        tol=args.tol,
        smoothing=args.smoothing,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clid", description="Label-free representation quality metrics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="all metrics for one embedding file")
    p.add_argument("--input", required=True)
    p.add_argument("--paired", help="second augmented view, row-aligned with --input")
    p.add_argument("--labels", help="integer labels, one per row, for pretext KNN accuracy")
    _add_score_flags(p)

    p = sub.add_parser("rank", help="correlate predictors with model accuracies")
    p.add_argument("--manifest", required=True)
    p.add_argument("--fit-wclid", action="store_true")
    p.add_argument("--loo", action="store_true", help="leave-one-out W-CLID scores")
    p.add_argument("--sweep", nargs="+", metavar="AXIS=V1,V2", help="e.g. neighbors=1,5,10 clusters=0.001,0.01,sqrt,0.1")
    _add_score_flags(p)

    p = sub.add_parser("transfer", help="predict target-task rankings from source embeddings")
    p.add_argument("--source", required=True, help="source manifest (embeddings, optional accuracies)")
    p.add_argument("--target", required=True, action="append", help="target manifest with accuracies; repeatable")
    p.add_argument("--fit-wclid", action="store_true")
    _add_score_flags(p)

    p = sub.add_parser("synth", help="write a synthetic embedding file")
    p.add_argument("--kind", choices=["hypercube", "blobs", "subspace"], required=True)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--intrinsic-dim", type=int)
    p.add_argument("--ambient-dim", type=int, default=64)
    p.add_argument("--n-blobs", type=int, default=2)
    p.add_argument("--separation", type=float, default=20.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dtype", choices=["float32", "float64"], default="float64")
    p.add_argument("--out", required=True)
    p.add_argument("--labels-out")
    return parser


def cmd_score(args) -> dict:
    s = _settings(args)
    e = read_embeddings(args.input, args.csv_has_header)
    paired = read_embeddings(args.paired, args.csv_has_header) if args.paired else None
    labels = read_labels(args.labels) if args.labels else None
    if labels is not None and labels.size != e.n:
        raise ClidError(f"{args.labels}: {labels.size} labels for {e.n} rows")
    return {
        "command": "score",
        "input": str(args.input),
        "n_rows": e.n,
        "n_cols": e.m,
        "provenance": s.provenance(),
        "metrics": score_embeddings(e, s, paired, labels),
    }


def cmd_rank(args) -> dict:
    s = _settings(args)
    manifest = load_manifest(args.manifest)
    if len(manifest.models) < 2:
        raise ClidError("rank needs a manifest with at least 2 models")
    scored = score_manifest(manifest, s, args.csv_has_header)
    report = {"command": "rank", "manifest": str(args.manifest), "provenance": s.provenance(), "models": scored}
    report.update(rank_models(scored, fit_w=args.fit_wclid, loo=args.loo))
    if args.sweep:
        report["sweep"] = sweep(manifest, s, parse_sweep(args.sweep), scored, args.csv_has_header)
    return report


def cmd_transfer(args) -> dict:
    s = _settings(args)
    source = load_manifest(args.source)
    targets = [load_manifest(t, require_embeddings=False) for t in args.target]
    scored = score_manifest(source, s, args.csv_has_header)
    report = {
        "command": "transfer",
        "source": str(args.source),
        "targets": [str(t) for t in args.target],
        "provenance": s.provenance(),
        "models": scored,
    }
    report.update(transfer(scored, targets, source.names, fit_w=args.fit_wclid))
    return report


def cmd_synth(args) -> dict:
    spec = SynthSpec(
        kind=args.kind,
        n=args.n,
        intrinsic_dim=args.intrinsic_dim,
        ambient_dim=args.ambient_dim,
        n_blobs=args.n_blobs,
        separation=args.separation,
        sigma=args.sigma,
        seed=args.seed,
    )
    e, labels = generate(spec)
    write_embeddings(args.out, e, np.dtype(args.dtype))
    if args.labels_out:
        if labels is None:
            raise ClidError(f"--labels-out given but {args.kind} data has no labels")
        write_labels(args.labels_out, labels)
    spec_doc = {k: (v.value if hasattr(v, "value") else v) for k, v in asdict(spec).items()}
    return {
        "command": "synth",
        "spec": spec_doc,
        "out": str(args.out),
        "labels_out": args.labels_out,
        "n_rows": e.n,
        "n_cols": e.m,
        "ground_truth_id": None if args.kind == "blobs" else spec.intrinsic_dim,
    }


COMMANDS = {"score": cmd_score, "rank": cmd_rank, "transfer": cmd_transfer, "synth": cmd_synth}


def _origin_module(exc: BaseException) -> str:
    tb = exc.__traceback__
    name = "clid"
    for frame, _ in traceback.walk_tb(tb):
        mod = frame.f_globals.get("__name__", "")
        if mod.startswith("clid"):
            name = mod
    return name


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = COMMANDS[args.command](args)
    except ClidError as exc:
        sys.stderr.write(dumps({"error": {**exc.to_dict(), "module": _origin_module(exc)}}))
        return 1
    except OSError as exc:
        err = {"type": type(exc).__name__, "message": str(exc), "module": _origin_module(exc)}
        sys.stderr.write(dumps({"error": err}))
        return 1
    text = dumps(report)
    if args.command != "synth" and getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
