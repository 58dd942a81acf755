"""Experiment harness: seeding, splits, report plumbing, grid runs."""

import numpy as np
import pytest

from signet import features
from signet.graph import (GeneratorConfig, generate_planted_graph,
                          save_edge_list, save_labels)
from signet.harness import (
    ALGORITHMS,
    CSV_HEADER,
    CellResult,
    ExperimentConfig,
    ExperimentReport,
    accuracy,
    build_features,
    child_seed,
    load_experiment_graph,
    run_experiment,
    stratified_split,
)
from signet.nn import TrainConfig
from signet.spectral import eigen_top_k, normalize_coordinates

GEN = GeneratorConfig(block_pos_prob=0.3, cross_neg_prob=0.05, fraud_degree=5)


def small_config(**kw):
    base = dict(n_benign=30, n_fraud=30, generator=GEN, ks=(5,),
                ratios=(30.0,), runs=2,
                train=TrainConfig(epochs=3, batch_size=16))
    base.update(kw)
    return ExperimentConfig(**base)


class TestChildSeed:
    def test_deterministic(self):
        assert child_seed(0, 3, "dae") == child_seed(0, 3, "dae")

    def test_sensitive_to_each_argument(self):
        base = child_seed(0, 0, "dae")
        assert child_seed(1, 0, "dae") != base
        assert child_seed(0, 1, "dae") != base
        assert child_seed(0, 0, "cnn") != base

    def test_range(self):
        for run in range(20):
            s = child_seed(7, run, "split:5")
            assert 0 <= s < 2 ** 63


class TestStratifiedSplit:
    def test_partition(self):
        labels = np.random.default_rng(0).integers(0, 2, 100)
        train, test = stratified_split(labels, 20.0, seed=1)
        assert np.array_equal(np.sort(np.concatenate([train, test])), np.arange(100))
        assert np.array_equal(train, np.sort(train))
        assert len(train) == 20

    def test_deterministic_and_seed_sensitive(self):
        labels = np.random.default_rng(1).integers(0, 2, 80)
        a = stratified_split(labels, 25.0, seed=5)
        b = stratified_split(labels, 25.0, seed=5)
        c = stratified_split(labels, 25.0, seed=6)
        assert np.array_equal(a[0], b[0])
        assert not np.array_equal(a[0], c[0])

    def test_largest_remainder_allocation(self):
        # classes of 7 and 13 at 50%: floors 3+6, last seat goes to the .5
        # remainder with the lower index
        labels = np.array([0] * 7 + [1] * 13)
        train, _ = stratified_split(labels, 50.0, seed=0)
        assert np.sum(labels[train] == 0) == 4
        assert np.sum(labels[train] == 1) == 6

    def test_minority_survives_small_ratio(self):
        labels = np.array([0] * 180 + [1] * 20)
        for seed in range(5):
            train, _ = stratified_split(labels, 5.0, seed=seed)
            assert np.sum(labels[train] == 1) == 1
            assert np.sum(labels[train] == 0) == 9

    def test_train_size_clamped(self):
        big = np.array([0, 1] * 150)
        train, _ = stratified_split(big, 0.5, seed=0)
        assert len(train) == 2  # floor allocation still seats one per class
        small = np.array([0, 1] * 10)
        _, test = stratified_split(small, 99.9, seed=0)
        assert len(test) >= 1

    def test_class_left_empty_raises(self):
        labels = np.array([0] * 99 + [1])
        with pytest.raises(ValueError, match="without training nodes"):
            stratified_split(labels, 5.0, seed=0)

    def test_ratio_bounds(self):
        labels = np.array([0, 1, 0, 1])
        for ratio in (0.0, 100.0, -5.0):
            with pytest.raises(ValueError, match="ratio"):
                stratified_split(labels, ratio, seed=0)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError, match="both classes"):
            stratified_split(np.zeros(10, dtype=int), 20.0, seed=0)

    def test_unstratified_partition(self):
        labels = np.random.default_rng(2).integers(0, 2, 60)
        train, test = stratified_split(labels, 30.0, seed=3, stratify=False)
        assert np.array_equal(np.sort(np.concatenate([train, test])), np.arange(60))
        assert len(train) == 18

    def test_unstratified_can_lose_minority(self):
        labels = np.array([0] * 50 + [1])
        hit = False
        for seed in range(40):
            try:
                stratified_split(labels, 10.0, seed=seed, stratify=False)
            except ValueError:
                hit = True
                break
        assert hit


class TestAccuracy:
    def test_value(self):
        assert accuracy([1, 0, 1, 1], [1, 0, 0, 1]) == 0.75

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            accuracy([1, 0], [1, 0, 1])

    def test_empty(self):
        with pytest.raises(ValueError, match="empty"):
            accuracy([], [])


class TestExperimentConfigValidation:
    def test_unknown_algorithm(self):
        with pytest.raises(ValueError, match="unknown algorithms"):
            ExperimentConfig(algorithms=("gbm",))

    def test_unknown_mode(self):
        with pytest.raises(ValueError, match="unknown input modes"):
            ExperimentConfig(input_modes=("raw",))

    def test_empty_grid_axes(self):
        with pytest.raises(ValueError, match="non-empty"):
            ExperimentConfig(ratios=())

    def test_bad_scalars(self):
        with pytest.raises(ValueError, match="ratios"):
            ExperimentConfig(ratios=(0.0,))
        with pytest.raises(ValueError, match="runs"):
            ExperimentConfig(runs=0)
        with pytest.raises(ValueError, match="dimensions"):
            ExperimentConfig(ks=(0,))
        with pytest.raises(ValueError, match="s must"):
            ExperimentConfig(s=-1)

    def test_coercion(self):
        cfg = ExperimentConfig(algorithms=["knn"], ratios=[5], ks=[10.0])
        assert cfg.algorithms == ("knn",)
        assert cfg.ratios == (5.0,)
        assert cfg.ks == (10,)


class TestReportTypes:
    def make_report(self):
        good = CellResult("knn", "spectral-vector", 5.0, 30,
                          accuracies=[0.5, 0.7], epoch_seconds=[0.0, 0.0])
        bad = CellResult("svm", "spectral-vector", 5.0, 30, error="run 0: boom")
        return ExperimentReport(small_config(), [good, bad])

    def test_cell_stats(self):
        c = CellResult("knn", "spectral-vector", 5.0, 30, accuracies=[0.5, 0.7])
        assert np.isclose(c.mean_acc, 0.6)
        assert np.isclose(c.std_acc, 0.1)
        assert c.mean_epoch_seconds == 0.0
        assert np.isnan(CellResult("knn", "spectral-vector", 5.0, 30).mean_acc)

    def test_ok_and_lookup(self):
        rep = self.make_report()
        assert not rep.ok
        assert rep.cell("knn", "spectral-vector", 5, 30).mean_acc == 0.6
        with pytest.raises(KeyError):
            rep.cell("dae", "spectral-vector", 5, 30)

    def test_csv_shape(self):
        rep = self.make_report()
        lines = rep.to_csv().strip().split("\n")
        assert lines[0] == CSV_HEADER
        assert lines[1] == "knn,spectral-vector,5,30,0.600000,0.100000,0.000000"
        assert len(lines) == 3

    def test_table_notes_errors(self):
        text = self.make_report().to_table()
        assert "ERROR: run 0: boom" in text
        assert text.startswith("algorithm")


class TestBuildFeatures:
    def setup_method(self):
        self.graph = generate_planted_graph(30, 30, GEN, seed=2)
        self.config = small_config()

    def test_spectral_vector_shapes_and_consistency(self):
        flat, mats = build_features(self.config, self.graph, "spectral-vector", 5)
        assert flat.shape == (60, 15)
        assert mats.shape == (60, 3, 5)
        assert np.array_equal(flat, mats.reshape(60, -1))
        emb = normalize_coordinates(eigen_top_k(self.graph, 5))
        assert np.allclose(flat, features.vector_dataset(self.graph, emb, s=1))

    def test_alpha_only(self):
        flat, mats = build_features(self.config, self.graph, "alpha-only", 5)
        assert flat.shape == (60, 5)
        assert mats.shape == (60, 1, 5)
        emb = normalize_coordinates(eigen_top_k(self.graph, 5))
        assert np.array_equal(flat, emb.coordinates)

    def test_adjacency_row(self):
        flat, mats = build_features(self.config, self.graph, "adjacency-row", 5)
        assert flat.shape == (60, 60)
        assert mats.shape == (60, 1, 60)
        dense = self.graph.adjacency_matrix().toarray()
        assert np.array_equal(flat, dense)

    def test_caches_reused(self):
        emb_cache, feat_cache = {}, {}
        flat1, _ = build_features(self.config, self.graph, "spectral-vector", 5,
                                  emb_cache, feat_cache)
        flat2, mats2 = build_features(self.config, self.graph, "spectral-matrix", 5,
                                      emb_cache, feat_cache)
        assert flat1 is flat2  # one entry serves both spectral shapes
        assert list(emb_cache) == [5]
        build_features(self.config, self.graph, "alpha-only", 5,
                       emb_cache, feat_cache)
        assert list(emb_cache) == [5]  # alpha-only reuses the embedding too


class TestLoadExperimentGraph:
    def test_generator_reseeds_per_run(self):
        cfg = small_config()
        g0 = load_experiment_graph(cfg, 0)
        g0_again = load_experiment_graph(cfg, 0)
        g1 = load_experiment_graph(cfg, 1)
        assert list(g0.edges()) == list(g0_again.edges())
        assert list(g0.edges()) != list(g1.edges())

    def test_fixed_graph_ignores_run(self):
        cfg = small_config(regenerate_per_run=False)
        g0, g5 = load_experiment_graph(cfg, 0), load_experiment_graph(cfg, 5)
        assert list(g0.edges()) == list(g5.edges())

    def test_file_source(self, tmp_path):
        g = generate_planted_graph(30, 30, GEN, seed=4)
        edges, labels = tmp_path / "g.tsv", tmp_path / "y.tsv"
        save_edge_list(g, edges)
        save_labels(g.labels, labels)
        cfg = small_config(graph_path=str(edges), labels_path=str(labels))
        loaded = load_experiment_graph(cfg, 0)
        assert list(loaded.edges()) == list(g.edges())
        assert np.array_equal(loaded.labels, g.labels)

    def test_file_source_needs_labels(self, tmp_path):
        g = generate_planted_graph(30, 30, GEN, seed=4)
        edges = tmp_path / "g.tsv"
        save_edge_list(g, edges)
        with pytest.raises(ValueError, match="labels_path"):
            load_experiment_graph(small_config(graph_path=str(edges)), 0)


class TestRunExperiment:
    def test_full_grid(self):
        cfg = small_config(algorithms=ALGORITHMS)
        rep = run_experiment(cfg)
        assert rep.ok
        assert len(rep.cells) == 4
        for c in rep.cells:
            assert len(c.accuracies) == 2
            assert 0.0 <= c.mean_acc <= 1.0
            assert c.epoch_seconds == [0.0, 0.0]  # measure_time off

    def test_csv_byte_identical(self):
        cfg = small_config(algorithms=("knn", "dae"))
        assert run_experiment(cfg).to_csv() == run_experiment(cfg).to_csv()

    def test_measure_time_records_positive(self):
        cfg = small_config(algorithms=("dae",), measure_time=True, runs=1)
        rep = run_experiment(cfg)
        assert rep.cells[0].epoch_seconds[0] > 0.0

    def test_cell_errors_confined(self):
        cfg = small_config(algorithms=("knn",), ks=(5, 100))
        rep = run_experiment(cfg)
        assert not rep.ok
        good = rep.cell("knn", "spectral-vector", 30, 5)
        bad = rep.cell("knn", "spectral-vector", 30, 100)
        assert good.error is None and len(good.accuracies) == 2
        assert bad.error.startswith("run 0:")
        assert bad.accuracies == []

    def test_cells_independent_of_algorithm_list(self):
        # seeds hang off (run, consumer), so dropping other algorithms must
        # not move a cell's numbers
        full = run_experiment(small_config(algorithms=("knn", "svm", "dae")))
        solo = run_experiment(small_config(algorithms=("knn",)))
        assert (full.cell("knn", "spectral-vector", 30, 5).accuracies
                == solo.cell("knn", "spectral-vector", 30, 5).accuracies)
