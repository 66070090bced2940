"""Metrics and the experiment harness: ROC-AUC, precision/recall/F1,
benchmark rows over datasets and seeds, and the sweep experiments
(ensemble size, fixed subsample size, degradation, score curves)."""
from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import rankdata

from .data import Dataset
from .errors import InvalidInputError, MetricError
from .network import NetworkConfig, degrade, fit_network, fit_single, predict

log = logging.getLogger(__name__)

SINGLE = "single_neuron"
NETWORK = "network"


def roc_auc(scores, labels) -> float:
    """Mann-Whitney AUC with average ranks (ties count one half)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise InvalidInputError("scores and labels must have the same length")
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = int(labels.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise MetricError("AUC needs at least one positive and one negative label")
    ranks = rankdata(scores)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def prf1(decisions, labels) -> tuple[float, float, float]:
    """Precision, recall, F1; zero denominators yield 0 (logged)."""
    decisions = np.asarray(decisions).astype(np.int64)
    labels = np.asarray(labels).astype(np.int64)
    if decisions.shape != labels.shape:
        raise InvalidInputError("decisions and labels must have the same length")
    tp = int(((decisions == 1) & (labels == 1)).sum())
    fp = int(((decisions == 1) & (labels == 0)).sum())
    fn = int(((decisions == 0) & (labels == 1)).sum())
    if tp + fp == 0 or tp + fn == 0:
        log.warning("degenerate confusion counts (tp=%d fp=%d fn=%d); scores set to 0",
                    tp, fp, fn)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


@dataclass(frozen=True)
class EvalRow:
    dataset: str
    method: str
    seed: int | None
    auc: float
    precision: float | None
    recall: float | None
    f1: float | None
    runtime_seconds: float


def _single_row(ds: Dataset, decimals: int | None) -> EvalRow:
    t0 = time.perf_counter()
    model = fit_single(ds.matrix, decimals=decimals)
    scores = model.scores(ds.matrix)
    decisions = scores > 0.0
    rt = time.perf_counter() - t0
    p, r, f1 = prf1(decisions.astype(int), ds.labels)
    return EvalRow(ds.name, SINGLE, None, roc_auc(scores, ds.labels), p, r, f1, rt)


def _network_row(ds: Dataset, config: NetworkConfig, seed: int,
                 threads: int | None) -> EvalRow:
    cfg = replace(config, seed=seed)
    t0 = time.perf_counter()
    model = fit_network(ds.matrix, cfg, threads=threads)
    out = predict(model, ds.matrix, threads=threads)
    rt = time.perf_counter() - t0
    p, r, f1 = prf1(out.anomaly.astype(int), ds.labels)
    return EvalRow(ds.name, NETWORK, seed, roc_auc(out.score_sum, ds.labels),
                   p, r, f1, rt)


def run_benchmark(datasets, methods=(SINGLE, NETWORK), seeds=tuple(range(10)),
                  config: NetworkConfig = NetworkConfig(), threads: int | None = None,
                  external_scores: dict[str, dict[str, np.ndarray]] | None = None,
                  ) -> list[EvalRow]:
    """One row per (dataset, method[, seed]); unlabeled datasets are skipped
    with a notice. ``external_scores`` maps dataset name -> method name ->
    score vector and is joined as extra AUC-only rows."""
    if NETWORK in methods and not seeds:
        raise InvalidInputError("network evaluation needs at least one seed")
    rows: list[EvalRow] = []
    for ds in datasets:
        if ds.labels is None:
            log.warning("dataset %s has no labels; skipped", ds.name)
            continue
        if SINGLE in methods:
            rows.append(_single_row(ds, config.decimals))
        if NETWORK in methods:
            for seed in seeds:
                rows.append(_network_row(ds, config, int(seed), threads))
        for method, scores in (external_scores or {}).get(ds.name, {}).items():
            scores = np.asarray(scores, dtype=np.float64)
            if scores.size != ds.n_obs:
                raise InvalidInputError(
                    f"external scores for {ds.name}/{method}: expected {ds.n_obs} "
                    f"values, got {scores.size}"
                )
            rows.append(EvalRow(ds.name, method, None, roc_auc(scores, ds.labels),
                                None, None, None, 0.0))
    return rows


def mean_metrics(rows, dataset: str, method: str) -> dict[str, float]:
    """Seed-averaged metrics for one (dataset, method) cell."""
    sel = [r for r in rows if r.dataset == dataset and r.method == method]
    if not sel:
        raise InvalidInputError(f"no rows for {dataset}/{method}")
    out = {"auc": float(np.mean([r.auc for r in sel])),
           "runtime_seconds": float(np.mean([r.runtime_seconds for r in sel]))}
    for key in ("precision", "recall", "f1"):
        vals = [getattr(r, key) for r in sel if getattr(r, key) is not None]
        if vals:
            out[key] = float(np.mean(vals))
    return out


def write_report(rows, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["dataset", "method", "seed", "auc", "precision", "recall",
                    "f1", "runtime_seconds"])
        for r in rows:
            w.writerow([
                r.dataset, r.method, "" if r.seed is None else r.seed,
                f"{r.auc:.9g}",
                "" if r.precision is None else f"{r.precision:.9g}",
                "" if r.recall is None else f"{r.recall:.9g}",
                "" if r.f1 is None else f"{r.f1:.9g}",
                f"{r.runtime_seconds:.9g}",
            ])


def markdown_summary(rows) -> str:
    """Seed-averaged AUC/F1/runtime table, one dataset per row."""
    datasets = sorted({r.dataset for r in rows})
    methods = sorted({r.method for r in rows})
    lines = ["| dataset | " + " | ".join(
        f"{m} AUC | {m} F1 | {m} s" for m in methods) + " |"]
    lines.append("|" + "---|" * (1 + 3 * len(methods)))
    for ds in datasets:
        cells = [ds]
        for m in methods:
            try:
                mm = mean_metrics(rows, ds, m)
            except InvalidInputError:
                cells += ["-", "-", "-"]
                continue
            cells.append(f"{mm['auc']:.2f}")
            cells.append(f"{mm['f1']:.3f}" if "f1" in mm else "-")
            cells.append(f"{mm['runtime_seconds']:.3f}")
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SweepCurve:
    """A sweep result: y mean and spread per x, over ``seeds_used`` seeds."""

    x: np.ndarray
    y_mean: np.ndarray
    y_std: np.ndarray
    seeds_used: int

    def write_csv(self, path, x_name: str = "x") -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(f"{x_name},y_mean,y_std\n")
            for x, m, s in zip(self.x, self.y_mean, self.y_std):
                fh.write(f"{x:.9g},{m:.9g},{s:.9g}\n")


def _require_labels(ds: Dataset):
    if ds.labels is None:
        raise InvalidInputError(f"dataset {ds.name} has no labels")


def _validate_axis(values, name: str) -> list:
    values = list(values)
    if not values or any(b <= a for a, b in zip(values, values[1:])):
        raise InvalidInputError(f"{name} must be non-empty and strictly increasing")
    return values


def sweep_neuron_count(ds: Dataset, counts, seeds, config: NetworkConfig = NetworkConfig(),
                       threads: int | None = None) -> SweepCurve:
    """Mean and std of the ensemble AUC per unit count."""
    _require_labels(ds)
    counts = _validate_axis(counts, "counts")
    means, stds = [], []
    for c in counts:
        cfg = replace(config, n_neurons=int(c))
        aucs = [_network_row(ds, cfg, int(s), threads).auc for s in seeds]
        means.append(float(np.mean(aucs)))
        stds.append(float(np.std(aucs)))
    return SweepCurve(np.array(counts, dtype=float), np.array(means),
                      np.array(stds), seeds_used=len(list(seeds)))


def sweep_subsample_size(ds: Dataset, sizes, seeds,
                         config: NetworkConfig = NetworkConfig(),
                         threads: int | None = None) -> SweepCurve:
    """Mean and std of the ensemble AUC with every draw forced to one size."""
    _require_labels(ds)
    sizes = _validate_axis(sizes, "sizes")
    for s in sizes:
        if s > ds.n_obs:
            raise InvalidInputError(f"subsample size {s} exceeds N={ds.n_obs}")
    means, stds = [], []
    for s in sizes:
        cfg = replace(config, fixed_size=int(s))
        aucs = [_network_row(ds, cfg, int(sd), threads).auc for sd in seeds]
        means.append(float(np.mean(aucs)))
        stds.append(float(np.std(aucs)))
    return SweepCurve(np.array(sizes, dtype=float), np.array(means),
                      np.array(stds), seeds_used=len(list(seeds)))


def sweep_degrade(ds: Dataset, keeps, seeds, config: NetworkConfig = NetworkConfig(),
                  threads: int | None = None) -> SweepCurve:
    """Mean and std of the AUC after randomly dropping units down to each
    ``keep`` count; the full ensemble is trained once per seed."""
    _require_labels(ds)
    keeps = _validate_axis(keeps, "keeps")
    if keeps[-1] > config.n_neurons:
        raise InvalidInputError(f"keep {keeps[-1]} exceeds n_neurons={config.n_neurons}")
    per_keep: dict[int, list[float]] = {int(k): [] for k in keeps}
    for seed in seeds:
        cfg = replace(config, seed=int(seed))
        model = fit_network(ds.matrix, cfg, threads=threads)
        for k in keeps:
            rng = np.random.default_rng(np.random.SeedSequence((int(seed), int(k))))
            sub = degrade(model, int(k), rng)
            out = predict(sub, ds.matrix, threads=threads)
            per_keep[int(k)].append(roc_auc(out.score_sum, ds.labels))
    means = [float(np.mean(per_keep[int(k)])) for k in keeps]
    stds = [float(np.std(per_keep[int(k)])) for k in keeps]
    return SweepCurve(np.array(keeps, dtype=float), np.array(means),
                      np.array(stds), seeds_used=len(list(seeds)))
