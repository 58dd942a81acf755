"""Experiment runner: feature modes x algorithms x split ratios x spectral dims.

Builds node features in any of four input modes, trains the four classifiers
on stratified splits, and aggregates accuracy over repeated runs into a report
with CSV and plain-text renderings.  Everything is seeded: each (run,
consumer) pair draws its seed from a hash of the master seed, so adding or
removing one algorithm never perturbs another's randomness.
"""

from __future__ import annotations

import copy
import hashlib
import itertools
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import baselines, cnn, dae, features
from .graph import (GeneratorConfig, SignedGraph, generate_planted_graph,
                    load_edge_list, load_labels)
from .nn import TrainConfig
from .spectral import eigen_top_k, normalize_coordinates

ALGORITHMS = ("dae", "cnn", "knn", "svm")
INPUT_MODES = ("spectral-vector", "spectral-matrix", "adjacency-row", "alpha-only")


def child_seed(master: int, run: int, tag: str) -> int:
    """Stable 63-bit seed for one consumer of randomness within one run."""
    digest = hashlib.sha256(f"{master}:{run}:{tag}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def stratified_split(labels, ratio: float, seed: int,
                     stratify: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Sample ratio% of nodes for training, the rest for test.

    Stratified by default: each class contributes its share of the train
    budget via largest-remainder allocation, so class balance survives even
    5% splits.  ``stratify=False`` samples uniformly instead.  Returns sorted
    (train_ids, test_ids); deterministic per seed.
    """
    labels = np.asarray(labels)
    n = len(labels)
    if not 0.0 < ratio < 100.0:
        raise ValueError(f"ratio must lie in (0, 100), got {ratio}")
    classes = np.unique(labels)
    if len(classes) < 2:
        raise ValueError("need both classes present to split")
    rng = np.random.default_rng(seed)
    total = min(max(int(round(ratio / 100.0 * n)), 1), n - 1)

    if not stratify:
        perm = rng.permutation(n)
        train = np.sort(perm[:total])
        missing = np.setdiff1d(classes, labels[train])
        if len(missing):
            raise ValueError(
                f"{ratio}% split left class(es) {missing.tolist()} without training nodes")
        return train, np.sort(perm[total:])

    members = [np.flatnonzero(labels == c) for c in classes]
    exact = [ratio / 100.0 * len(m) for m in members]
    counts = [int(np.floor(e)) for e in exact]
    while sum(counts) < total:
        rem = [e - c if c < len(m) else -np.inf
               for e, c, m in zip(exact, counts, members)]
        counts[int(np.argmax(rem))] += 1
    for c, cnt in zip(classes, counts):
        if cnt == 0:
            raise ValueError(f"{ratio}% split leaves class {c} without training nodes")
    train_parts = []
    for m, cnt in zip(members, counts):
        order = m[rng.permutation(len(m))]
        train_parts.append(order[:cnt])
    train = np.sort(np.concatenate(train_parts))
    test = np.setdiff1d(np.arange(n), train)
    return train, test


def accuracy(predictions, truth) -> float:
    """Fraction of exact matches between two equal-length label sequences."""
    predictions = np.asarray(predictions)
    truth = np.asarray(truth)
    if predictions.shape != truth.shape:
        raise ValueError(f"length mismatch: {predictions.shape} vs {truth.shape}")
    if len(truth) == 0:
        raise ValueError("cannot score an empty prediction set")
    return float(np.mean(predictions == truth))


# ---------------------------------------------------------------------------
# configuration / report types
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """Full description of one experiment grid.

    The graph comes from ``graph_path`` (+ ``labels_path``) if given,
    otherwise from the planted-fraud generator; with ``regenerate_per_run``
    run r draws a fresh graph from seed ``generator_seed + r``.  The report
    covers the cross-product algorithms x input_modes x ratios x ks.
    ``measure_time`` keeps wall-clock out of the report by default so that
    repeated runs are byte-identical.
    """

    algorithms: tuple = ALGORITHMS
    input_modes: tuple = ("spectral-vector",)
    ratios: tuple = (5.0, 10.0, 15.0, 20.0)
    ks: tuple = (30,)
    s: int = 1
    runs: int = 10
    master_seed: int = 0
    stratify: bool = True
    measure_time: bool = False
    # graph source
    graph_path: str | None = None
    labels_path: str | None = None
    n_benign: int = 1000
    n_fraud: int = 1000
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    generator_seed: int = 1
    regenerate_per_run: bool = True
    # model hyperparameters
    train: TrainConfig = field(default_factory=TrainConfig)
    pretrain_mode: str = "greedy"
    dae_hidden: tuple = (128, 64)
    cnn_filters: int = 300
    cnn_widths: tuple = (1, 2, 3)
    knn_k: int = 3
    svm_c: float = 1.0
    svm_gamma: float | None = None
    eigen_tol: float = 1e-8

    def __post_init__(self):
        self.algorithms = tuple(self.algorithms)
        self.input_modes = tuple(self.input_modes)
        self.ratios = tuple(float(r) for r in self.ratios)
        self.ks = tuple(int(k) for k in self.ks)
        unknown = set(self.algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms {sorted(unknown)}; pick from {ALGORITHMS}")
        unknown = set(self.input_modes) - set(INPUT_MODES)
        if unknown:
            raise ValueError(f"unknown input modes {sorted(unknown)}; pick from {INPUT_MODES}")
        if not self.algorithms or not self.input_modes or not self.ratios or not self.ks:
            raise ValueError("algorithms, input_modes, ratios and ks must be non-empty")
        if any(not 0.0 < r < 100.0 for r in self.ratios):
            raise ValueError(f"ratios must lie in (0, 100), got {self.ratios}")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if any(k < 1 for k in self.ks):
            raise ValueError("spectral dimensions must be >= 1")
        if self.s < 0:
            raise ValueError("s must be >= 0")


@dataclass
class CellResult:
    """Per-run accuracies of one (algorithm, input_mode, ratio, k) cell."""

    algorithm: str
    input_mode: str
    ratio: float
    k: int
    accuracies: list = field(default_factory=list)
    epoch_seconds: list = field(default_factory=list)
    error: str | None = None

    @property
    def mean_acc(self) -> float:
        return float(np.mean(self.accuracies)) if self.accuracies else float("nan")

    @property
    def std_acc(self) -> float:
        """Population std over runs (0 for a single run)."""
        return float(np.std(self.accuracies)) if self.accuracies else float("nan")

    @property
    def mean_epoch_seconds(self) -> float:
        return float(np.mean(self.epoch_seconds)) if self.epoch_seconds else 0.0


CSV_HEADER = "algorithm,input_mode,ratio,k,mean_acc,std_acc,epoch_seconds"


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    cells: list

    @property
    def ok(self) -> bool:
        return all(c.error is None for c in self.cells)

    def cell(self, algorithm: str, input_mode: str, ratio: float, k: int) -> CellResult:
        for c in self.cells:
            if (c.algorithm == algorithm and c.input_mode == input_mode
                    and c.ratio == float(ratio) and c.k == int(k)):
                return c
        raise KeyError(f"no cell ({algorithm}, {input_mode}, {ratio}, {k})")

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for c in self.cells:
            lines.append(f"{c.algorithm},{c.input_mode},{c.ratio:g},{c.k},"
                         f"{c.mean_acc:.6f},{c.std_acc:.6f},{c.mean_epoch_seconds:.6f}")
        return "\n".join(lines) + "\n"

    def to_table(self) -> str:
        headers = ["algorithm", "input_mode", "ratio", "k", "mean_acc",
                   "std_acc", "epoch_s", "note"]
        rows = [[c.algorithm, c.input_mode, f"{c.ratio:g}", str(c.k),
                 f"{c.mean_acc:.4f}", f"{c.std_acc:.4f}",
                 f"{c.mean_epoch_seconds:.4f}",
                 "" if c.error is None else f"ERROR: {c.error}"]
                for c in self.cells]
        widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
                  for i, h in enumerate(headers)]
        def fmt(row):
            return "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
        return "\n".join([fmt(headers), fmt(["-" * w for w in widths]),
                          *(fmt(r) for r in rows)]) + "\n"


# ---------------------------------------------------------------------------
# the runner
# ---------------------------------------------------------------------------

def load_experiment_graph(config: ExperimentConfig, run: int) -> SignedGraph:
    """Graph for one run: loaded from disk, or sampled from the generator."""
    if config.graph_path is not None:
        graph = load_edge_list(config.graph_path)
        if config.labels_path is None:
            raise ValueError("a file-sourced experiment needs labels_path")
        labels = load_labels(config.labels_path, n=graph.n,
                             node_names=graph.node_names)
        return graph.with_labels(labels)
    seed = config.generator_seed + (run if config.regenerate_per_run else 0)
    return generate_planted_graph(config.n_benign, config.n_fraud,
                                  config.generator, seed=seed)


def _mode_key(mode: str) -> str:
    # spectral-vector and spectral-matrix are two shapes of the same numbers
    return "spectral" if mode.startswith("spectral") else mode


def build_features(config, graph, mode, k, emb_cache=None, feat_cache=None):
    """(flat (n, d), stacked (n, rows, cols)) feature views for one mode."""
    if emb_cache is None:
        emb_cache = {}
    if feat_cache is None:
        feat_cache = {}
    key = (_mode_key(mode), k if mode != "adjacency-row" else 0)
    if key in feat_cache:
        return feat_cache[key]
    if mode == "adjacency-row":
        flat = features.adjacency_dataset(graph)
        pair = (flat, flat[:, None, :])
    else:
        emb = emb_cache.get(k)
        if emb is None:
            emb = normalize_coordinates(eigen_top_k(graph, k, tol=config.eigen_tol))
            emb_cache[k] = emb
        if mode == "alpha-only":
            flat = emb.coordinates
            pair = (flat, flat[:, None, :])
        else:
            mats = features.matrix_dataset(graph, emb, s=config.s)
            pair = (mats.reshape(len(mats), -1), mats)
    feat_cache[key] = pair
    return pair


def _pretrained_stack(config, flat, cache_key, run, cache):
    """Greedy-pretrained DAE for this run's features; fresh copy per caller."""
    if cache_key not in cache:
        seed = child_seed(config.master_seed, run, "dae")
        stack = dae.AutoencoderStack(flat.shape[1], config.dae_hidden, seed=seed)
        dae.pretrain(stack, flat, replace(config.train, seed=seed),
                     mode=config.pretrain_mode)
        cache[cache_key] = stack
    return copy.deepcopy(cache[cache_key])


def _run_cell(config, algo, flat, mats, labels, train_ids, test_ids,
              run, pretrain_cache, feat_key):
    """Train one algorithm on one split; returns (accuracy, epoch_seconds)."""
    y_tr, y_te = labels[train_ids], labels[test_ids]
    seed = child_seed(config.master_seed, run, algo)
    tcfg = replace(config.train, seed=seed)

    if algo == "dae":
        stack = _pretrained_stack(config, flat, feat_key, run, pretrain_cache)
        t0 = time.perf_counter()
        history = dae.fine_tune(stack, flat[train_ids], y_tr, tcfg)
        elapsed = time.perf_counter() - t0
        preds = np.argmax(dae.predict(stack, flat[test_ids]), axis=1)
        epochs = history["epochs_run"]
    elif algo == "cnn":
        rows, cols = mats.shape[1], mats.shape[2]
        widths = tuple(w for w in config.cnn_widths if w <= rows) or (1,)
        bank = cnn.ConvFilterBank(rows, cols, widths, config.cnn_filters, seed=seed)
        t0 = time.perf_counter()
        history = cnn.train(bank, mats[train_ids], y_tr, tcfg)
        elapsed = time.perf_counter() - t0
        preds = np.argmax(bank.predict_proba(mats[test_ids]), axis=1)
        epochs = history["epochs_run"]
    elif algo == "knn":
        t0 = time.perf_counter()
        model = baselines.KnnModel(flat[train_ids], y_tr, k=config.knn_k)
        elapsed = time.perf_counter() - t0
        preds = baselines.knn_predict_many(model, flat[test_ids])
        epochs = 1
    elif algo == "svm":
        t0 = time.perf_counter()
        model = baselines.svm_train(flat[train_ids], y_tr, C=config.svm_c,
                                    gamma=config.svm_gamma)
        elapsed = time.perf_counter() - t0
        preds = baselines.svm_predict(model, flat[test_ids])
        epochs = 1
    else:  # pragma: no cover - guarded by ExperimentConfig
        raise ValueError(f"unknown algorithm {algo!r}")

    per_epoch = elapsed / max(epochs, 1) if config.measure_time else 0.0
    return accuracy(preds, y_te), per_epoch


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Run the full grid; failures are confined to their cell.

    Per run: one graph, one spectral embedding per k, one split per ratio
    shared by every algorithm (paired comparisons), one DAE pretraining per
    feature set.  A cell that raises is tagged with the error and skipped in
    later runs; all other cells complete.
    """
    grid = list(itertools.product(config.algorithms, config.input_modes,
                                  config.ratios, config.ks))
    cells = {key: CellResult(*key) for key in grid}

    for r in range(config.runs):
        graph = load_experiment_graph(config, r)
        if graph.labels is None:
            raise ValueError("experiment graph has no labels")
        labels = np.asarray(graph.labels, dtype=np.int64)
        emb_cache, feat_cache, pretrain_cache = {}, {}, {}
        splits = {}
        for ratio in config.ratios:
            try:
                splits[ratio] = stratified_split(
                    labels, ratio,
                    child_seed(config.master_seed, r, f"split:{ratio:g}"),
                    config.stratify)
            except Exception as exc:
                splits[ratio] = exc

        for mode, k in itertools.product(config.input_modes, config.ks):
            targets = [cells[(a, mode, ratio, k)] for a, ratio
                       in itertools.product(config.algorithms, config.ratios)]
            if all(t.error is not None for t in targets):
                continue
            try:
                flat, mats = build_features(config, graph, mode, k,
                                             emb_cache, feat_cache)
            except Exception as exc:  # embedding failure poisons the column
                for t in targets:
                    if t.error is None:
                        t.error = f"run {r}: {type(exc).__name__}: {exc}"
                continue
            feat_key = (_mode_key(mode), k if mode != "adjacency-row" else 0)
            for algo, ratio in itertools.product(config.algorithms, config.ratios):
                cell = cells[(algo, mode, ratio, k)]
                if cell.error is not None:
                    continue
                if isinstance(splits[ratio], Exception):
                    exc = splits[ratio]
                    cell.error = f"run {r}: {type(exc).__name__}: {exc}"
                    continue
                train_ids, test_ids = splits[ratio]
                try:
                    acc, per_epoch = _run_cell(config, algo, flat, mats, labels,
                                               train_ids, test_ids, r,
                                               pretrain_cache, feat_key)
                except Exception as exc:
                    cell.error = f"run {r}: {type(exc).__name__}: {exc}"
                    continue
                cell.accuracies.append(acc)
                cell.epoch_seconds.append(per_epoch)

    return ExperimentReport(config, [cells[key] for key in grid])
