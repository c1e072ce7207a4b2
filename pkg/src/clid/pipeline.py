"""Per-model scoring and population-level ranking used by the CLI."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from clid import __version__
from clid.baselines import (
    AlignUnifParams,
    CodingRateParams,
    PairedEmbeddings,
    alignment_loss,
    pretext_knn_accuracy,
    rate_reduction,
    uniformity,
)
from clid.embeddings import EmbeddingSet, Metric, as_embedding_set, knn_query
from clid.errors import AllTied, BadManifest, ClidError, NameMismatch, RankDeficient, TooFewPoints, ZeroVariance
from clid.intrinsic_dim import knn_entropy, mle_local_id, twonn_id
from clid.io import Manifest, read_embeddings, read_labels
from clid.kmeans import kmeans
from clid.learnability import PrequentialConfig, prequential_knn, resolve_clusters
from clid.predictors import ModelMetrics, clid_score, fit_wclid, wclid_loo, wclid_score
from clid.rank_stats import compare, kendall_tau

THREADS_ENV = "CLID_NUM_THREADS"


@dataclass(frozen=True)
class ScoreSettings:
    metric: str = "cosine"
    clusters: str = "auto"
    neighbors: int = 1
    chunk_size: int = 10_000
    seed: int = 0
    discard_fraction: float = 0.1
    eps_sq: float = 0.5
    mle_k: int = 20
    alpha: float = 2.0
    t: float = 2.0
    pair_budget: int = 1_000_000
    pretext_k: int = 1
    pretext_test_fraction: float = 0.5
    max_iter: int = 100
    tol: float = 1e-4
    smoothing: float = 1.0

    def provenance(self) -> dict:
        return {"tool": "clid", "tool_version": __version__, **asdict(self)}


def _learnability(e: EmbeddingSet, s: ScoreSettings, metric: Metric, clusters, neighbors: int, cache: dict | None = None):
    k = resolve_clusters(clusters, e.n)
    if cache is not None and k in cache:
        part = cache[k]
    else:
        part = kmeans(e, k, metric, seed=s.seed, max_iter=s.max_iter, tol=s.tol)
        if cache is not None:
            cache[k] = part
    cfg = PrequentialConfig(n_neighbors=neighbors, chunk_size=s.chunk_size, seed=s.seed, smoothing=s.smoothing)
    return part, prequential_knn(e, part.labels, metric, cfg)


def _split(n: int, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    perm = np.random.default_rng(seed).permutation(n)
    n_test = min(n - 1, max(1, int(round(fraction * n))))
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def score_embeddings(e, s: ScoreSettings = ScoreSettings(), paired=None, labels=None) -> dict:
    """Every metric computable from the inputs; absent inputs give absent keys."""
    e = as_embedding_set(e)
    metric = Metric.parse(s.metric)
    part, pre = _learnability(e, s, metric, s.clusters, s.neighbors)
    fit = twonn_id(e, metric, s.discard_fraction)
    k_mle = min(s.mle_k, e.n - 1)
    mle = mle_local_id(knn_query(e, k_mle, metric), k_mle)
    ent = knn_entropy(e, k_mle, metric)
    rr = rate_reduction(e, part, CodingRateParams(s.eps_sq))
    out = {
        "cl": pre.cl,
        "codelength": pre.codelength,
        "n_clusters": part.k,
        "id": fit.id,
        "id_n_used": fit.n_used,
        "id_n_duplicates": fit.n_duplicates,
        "id_mle": mle.global_id,
        "entropy": ent.entropy,
        "clid_raw": pre.cl + fit.id,
        "R": rr.r,
        "R_c": rr.r_c,
        "delta_R": rr.delta_r,
    }
    params = AlignUnifParams(s.alpha, s.t)
    if paired is not None:
        pair = PairedEmbeddings(e, as_embedding_set(paired))
        unif = uniformity(e, params, pair_budget=s.pair_budget, seed=s.seed)
        out["l_align"] = alignment_loss(pair, params)
        out["l_unif"] = unif.value
        out["l_unif_pairs"] = unif.n_pairs
        out["contrastive"] = -(out["l_align"] + out["l_unif"])
    if labels is not None:
        labels = np.asarray(labels)
        tr, te = _split(e.n, s.pretext_test_fraction, s.seed)
        out["pretext_acc"] = pretext_knn_accuracy(
            e.data[tr], labels[tr], e.data[te], labels[te], min(s.pretext_k, tr.size), metric
        )
    return out


def _load_entry(entry, csv_has_header=False):
    e = read_embeddings(entry.embeddings_path, csv_has_header)
    paired = read_embeddings(entry.paired_path, csv_has_header) if entry.paired_path else None
    labels = None
    if entry.labels_path:
        labels = read_labels(entry.labels_path)
        if labels.size != e.n:
            raise BadManifest(f"{entry.name}: {labels.size} labels for {e.n} rows")
    return e, paired, labels


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def score_manifest(manifest: Manifest, s: ScoreSettings, csv_has_header=False) -> list[dict]:
    """Score every model; failures are recorded per model. Sorted by name."""

    def one(entry):
        try:
            e, paired, labels = _load_entry(entry, csv_has_header)
            return {"name": entry.name, "accuracy": entry.accuracy, "metrics": score_embeddings(e, s, paired, labels)}
        except ClidError as exc:
            return {"name": entry.name, "accuracy": entry.accuracy, "error": exc.to_dict()}

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(one, manifest.models))
    return sorted(results, key=lambda r: r["name"])


# name, metric key, sign (+1 keeps the metric, -1 negates it)
PREDICTORS = [
    ("CL", "cl", 1),
    ("ID", "id", 1),
    ("ID-MLE", "id_mle", 1),
    ("Entropy", "entropy", 1),
    ("-L_preq", "codelength", -1),
    ("-L_align", "l_align", -1),
    ("-L_unif", "l_unif", -1),
    ("-L_contrast", "contrastive", 1),
    ("R", "R", 1),
    ("-R_c", "R_c", -1),
    ("delta_R", "delta_R", 1),
    ("Pretext", "pretext_acc", 1),
]


def _float(v):
    return None if v is None or not math.isfinite(v) else float(v)


def _correlate(scores, acc) -> dict:
    row = {"pearson": None, "kendall": None}
    try:
        rep = compare(scores, acc)
        row["pearson"], row["kendall"] = _float(rep.pearson), _float(rep.kendall)
    except (ZeroVariance, AllTied) as exc:
        row["note"] = f"{exc.code}: {exc}"
        try:
            row["kendall"] = _float(kendall_tau(scores, acc))
        except AllTied:
            pass
    return row


def _check_accuracies(acc: np.ndarray) -> None:
    if acc.size < 2:
        raise BadManifest("ranking needs accuracies for at least 2 successfully scored models")
    if np.all(acc == acc[0]):
        raise AllTied(
            "all reference accuracies are identical, so Kendall tau is undefined; "
            "supply accuracies that differ between models"
        )


def _population(models: list[dict]) -> list[ModelMetrics]:
    return [ModelMetrics(m["name"], m["metrics"]["cl"], m["metrics"]["id"], m["accuracy"]) for m in models]


def predictor_scores(
    models: list[dict], fit_w: bool = False, loo: bool = False, tolerant: bool = False
) -> tuple[dict, dict | None]:
    """Score vectors (higher is better) for each available predictor.

    With ``tolerant`` a failed W-CLID fit is reported in the returned dict
    under ``"error"`` instead of raising.
    """
    pop = _population(models)
    scores = {}
    for label, key, sign in PREDICTORS[:2]:
        scores[label] = np.array([sign * m["metrics"][key] for m in models])
    if len(pop) >= 2:
        scores["CLID"] = clid_score(pop)
    scores["CLID (raw)"] = clid_score(pop, "raw")
    wclid = None
    if fit_w:
        try:
            weights = fit_wclid(pop)
        except (RankDeficient, TooFewPoints) as exc:
            if not tolerant:
                raise
            return _rest(models, scores), {"error": exc.to_dict()}
        wclid = {"w": [float(v) for v in weights.w], "rss": weights.rss, "n_models": weights.n_models, "loo": loo}
        scores["W-CLID"] = wclid_loo(pop) if loo else np.array([wclid_score(weights, p) for p in pop])
    return _rest(models, scores), wclid


def _rest(models: list[dict], scores: dict) -> dict:
    for label, key, sign in PREDICTORS[2:]:
        vals = [m["metrics"].get(key) for m in models]
        if all(v is not None for v in vals):
            scores[label] = sign * np.array(vals, dtype=np.float64)
    return scores


def rank_models(scored: list[dict], fit_w: bool = False, loo: bool = False) -> dict:
    ok = [m for m in scored if "metrics" in m and m["accuracy"] is not None]
    acc = np.array([m["accuracy"] for m in ok], dtype=np.float64)
    _check_accuracies(acc)
    scores, wclid = predictor_scores(ok, fit_w, loo)
    table = [{"predictor": name, **_correlate(v, acc)} for name, v in scores.items()]
    return {"predictors": table, "wclid": wclid, "n_models": len(ok)}


def parse_sweep(items) -> dict:
    """``["neighbors=1,5,10", "clusters=0.001,sqrt"]`` -> axis lists."""
    axes = {"neighbors": None, "clusters": None}
    for item in items or []:
        key, _, vals = item.partition("=")
        key = key.strip()
        if key not in axes or not vals:
            raise BadManifest(f"bad --sweep entry {item!r}; use neighbors=1,5 or clusters=0.01,sqrt")
        values = [v.strip() for v in vals.split(",") if v.strip()]
        axes[key] = [int(v) for v in values] if key == "neighbors" else values
    return axes


def sweep(manifest: Manifest, s: ScoreSettings, axes: dict, scored: list[dict], csv_has_header=False) -> dict:
    """CL / CLID / W-CLID correlations over a neighbors x clusters grid.

    ID does not depend on the grid and is reused from ``scored``.
    """
    neighbors = axes.get("neighbors") or [s.neighbors]
    clusters = axes.get("clusters") or [s.clusters]
    metric = Metric.parse(s.metric)
    ok = {m["name"]: m for m in scored if "metrics" in m and m["accuracy"] is not None}
    entries = [entry for entry in manifest.models if entry.name in ok]
    entries.sort(key=lambda en: en.name)
    acc = np.array([ok[en.name]["accuracy"] for en in entries], dtype=np.float64)
    _check_accuracies(acc)

    def cells_for(entry):
        e = read_embeddings(entry.embeddings_path, csv_has_header)
        cache = {}
        return {(nb, cs): _learnability(e, s, metric, cs, nb, cache)[1].cl for cs in clusters for nb in neighbors}

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        per_model = list(pool.map(cells_for, entries))
    cells = []
    for cs in clusters:
        for nb in neighbors:
            models = [
                {"name": en.name, "accuracy": ok[en.name]["accuracy"], "metrics": {**ok[en.name]["metrics"], "cl": cl[(nb, cs)]}}
                for en, cl in zip(entries, per_model)
            ]
            scores, wclid = predictor_scores(models, fit_w=len(models) >= 3, tolerant=True)
            preds = {name: _correlate(scores[name], acc) for name in ("CL", "CLID", "W-CLID") if name in scores}
            if wclid and "error" in wclid:
                preds["W-CLID"] = {"pearson": None, "kendall": None, "note": f"{wclid['error']['type']}: {wclid['error']['message']}"}
            cells.append({"neighbors": nb, "clusters": cs, "predictors": preds})
    return {"neighbors": neighbors, "clusters": clusters, "cells": cells}


def _tau_or_none(scores, acc):
    try:
        return _float(kendall_tau(scores, acc))
    except AllTied:
        return None


def transfer(source_scored: list[dict], targets: list[Manifest], source_names: list[str], fit_w: bool = False) -> dict:
    """Kendall tau of predictor-only and joint (predictor x source accuracy) rankings per target task."""
    for t in targets:
        if t.names != source_names:
            raise NameMismatch(
                f"target {t.task or t.path} lists models {t.names}, source lists {source_names}; "
                "names and order must match",
            )
    by_name = {m["name"]: m for m in source_scored}
    failed = [n for n in source_names if "metrics" not in by_name[n]]
    if failed:
        raise BadManifest(f"source models failed to score: {failed}")
    models = [by_name[n] for n in source_names]
    have_src = all(m["accuracy"] is not None for m in models)
    scores, wclid = predictor_scores(models, fit_w=fit_w and have_src)
    src_acc = np.array([m["accuracy"] for m in models], dtype=np.float64) if have_src else None
    tasks = []
    for t in targets:
        tgt = [m.accuracy for m in t.models]
        if any(v is None for v in tgt):
            raise BadManifest(f"target {t.task or t.path}: every model needs an accuracy")
        tgt = np.array(tgt, dtype=np.float64)
        _check_accuracies(tgt)
        row = {"task": t.task or (t.path.stem if t.path else "target"), "predictor_only": {}, "joint": {}}
        for name, v in scores.items():
            row["predictor_only"][name] = _tau_or_none(v, tgt)
            if src_acc is not None:
                try:
                    row["joint"][name] = _float(compare(v, tgt, ref_for_joint=src_acc).kendall)
                except AllTied:
                    row["joint"][name] = None
        if src_acc is not None:
            row["source_accuracy"] = _float(kendall_tau(src_acc, tgt))
        tasks.append(row)
    avg = {"predictor_only": {}, "joint": {}}
    for regime in ("predictor_only", "joint"):
        for name in scores:
            vals = [r[regime][name] for r in tasks if r[regime].get(name) is not None]
            if vals:
                avg[regime][name] = float(np.mean(vals))
    if src_acc is not None:
        avg["source_accuracy"] = float(np.mean([r["source_accuracy"] for r in tasks]))
    return {"tasks": tasks, "average": avg, "wclid": wclid}


def with_overrides(s: ScoreSettings, **kw) -> ScoreSettings:
    return replace(s, **{k: v for k, v in kw.items() if v is not None})
