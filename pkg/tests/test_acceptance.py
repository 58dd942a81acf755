"""End-to-end acceptance suite.

One test per shipping criterion; each prints a single
``[criterion N] PASS/FAIL`` line with its measured numbers (the line goes
straight to the terminal, bypassing capture). The benchmark criteria
(6, 7, 8) share session-scoped experiment grids on 2000-node planted-fraud
graphs and are marked ``slow``; criterion 9 additionally needs a real
dataset supplied via environment variables.
"""

import os
import time

import numpy as np
import pytest

from oracles import (
    adjacency_dict,
    class_mean_oracle,
    knn_oracle,
    random_signed_edges,
    signed_classes_oracle,
)
from signet import baselines, cnn, dae, features, nn
from signet.graph import SignedGraph, generate_planted_graph, load_edge_list
from signet.harness import ExperimentConfig, run_experiment
from signet.nn import TrainConfig
from signet.spectral import eigen_top_k, normalize_coordinates

# benchmark protocol: fixed master seed and one declared training
# configuration shared by both deep models (architecture, k, s, baselines
# and the generator are never tuned)
MASTER = 0
DAE_TRAIN = TrainConfig(epochs=300, batch_size=8, optimizer="sgd",
                        learning_rate=0.03, validation_fraction=0.15,
                        early_stop_patience=40)
CNN_TRAIN = DAE_TRAIN
RATIOS = (5.0, 10.0, 15.0, 20.0)


def report(capsys, num, ok, detail):
    with capsys.disabled():
        print(f"\n[criterion {num:2d}] {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, f"criterion {num}: {detail}"


def bench(algorithms, train, ratios=RATIOS, ks=(30,), **kw):
    t0 = time.perf_counter()
    rep = run_experiment(ExperimentConfig(
        algorithms=algorithms, train=train, master_seed=MASTER,
        ratios=ratios, ks=ks, **kw))
    for c in rep.cells:
        assert c.error is None, f"{c.algorithm}/{c.input_mode}: {c.error}"
    return rep, time.perf_counter() - t0


# --- shared benchmark grids (computed once) ---------------------------------

@pytest.fixture(scope="session")
def grid_main():
    """Spectral-feature accuracies for all four algorithms + adjacency CNN."""
    base, t_base = bench(("knn", "svm"), TrainConfig())
    dae_rep, t_dae = bench(("dae",), DAE_TRAIN)
    cnn_rep, t_cnn = bench(("cnn",), CNN_TRAIN)
    adj_rep, t_adj = bench(("cnn",), CNN_TRAIN, ratios=(5.0,),
                           input_modes=("adjacency-row",))
    return {"base": base, "dae": dae_rep, "cnn": cnn_rep, "adj": adj_rep,
            "seconds": t_base + t_dae + t_cnn + t_adj}


@pytest.fixture(scope="session")
def grid_alpha():
    """Coordinate-only ablation at the 20% split."""
    dae_rep, _ = bench(("dae",), DAE_TRAIN, input_modes=("alpha-only",))
    cnn_rep, _ = bench(("cnn",), CNN_TRAIN, input_modes=("alpha-only",))
    return {"dae": dae_rep, "cnn": cnn_rep}


@pytest.fixture(scope="session")
def grid_ks():
    """Spectral-dimension sweep at the 20% split."""
    dae_rep, _ = bench(("dae",), DAE_TRAIN, ks=(10, 20, 30, 40, 50))
    cnn_rep, _ = bench(("cnn",), CNN_TRAIN, ks=(10, 20, 30, 40, 50))
    return {"dae": dae_rep, "cnn": cnn_rep}


def acc(rep, algo, ratio, mode="spectral-vector", k=30):
    return rep.cell(algo, mode, ratio, k).mean_acc


# --- criteria ---------------------------------------------------------------

def test_criterion_1_eigensolver_oracle(capsys):
    rng = np.random.default_rng(101)
    elapsed = 0.0
    checked_vectors = 0
    worst_eval = 0.0
    worst_cos = 1.0
    for _ in range(100):
        n, edges = random_signed_edges(rng)
        graph = SignedGraph(n, edges)
        k = int(rng.integers(1, min(8, n) + 1))
        t0 = time.perf_counter()
        emb = eigen_top_k(graph, k)
        elapsed += time.perf_counter() - t0

        dense = np.zeros((n, n))
        for u, v, s in edges:
            dense[u, v] = dense[v, u] = s
        w, V = np.linalg.eigh(dense)
        w, V = w[::-1], V[:, ::-1]

        worst_eval = max(worst_eval, float(np.max(np.abs(emb.eigenvalues - w[:k]))))
        for i in range(k):
            gap = np.min(np.abs(np.delete(w, i) - w[i])) if n > 1 else np.inf
            if gap < 1e-10:
                continue  # within a degenerate cluster, single vectors are not identifiable
            cos = abs(float(emb.coordinates[:, i] @ V[:, i]))
            worst_cos = min(worst_cos, cos)
            checked_vectors += 1
    ok = worst_eval < 1e-8 and worst_cos >= 1 - 1e-8 and elapsed < 5.0
    report(capsys, 1, ok,
           f"100 graphs: max |Δλ| = {worst_eval:.2e}, min |cos| = "
           f"{1 - worst_cos:.2e} from 1 over {checked_vectors} vectors, "
           f"solver time {elapsed:.2f}s < 5s")


def test_criterion_2_gradient_checks(capsys):
    rng = np.random.default_rng(202)
    X = rng.standard_normal((6, 10))
    y = rng.integers(0, 2, 6)
    Xmat = rng.standard_normal((6, 3, 4))
    t0 = time.perf_counter()
    worst = {"pretrain": 0.0, "fine-tune": 0.0, "cnn": 0.0}
    for seed in range(20):
        stack = dae.AutoencoderStack(10, (6,), seed=seed)
        pair = dae._PairAutoencoder(stack.encoders[0], stack.decoders[0])
        worst["pretrain"] = max(worst["pretrain"], nn.grad_check(pair, X, X))

        stack2 = dae.AutoencoderStack(10, (6, 4), seed=seed)
        clf = dae._EncoderClassifier(stack2)
        worst["fine-tune"] = max(worst["fine-tune"], nn.grad_check(clf, X, y))

        for widths in ((1, 2, 3), (1,), (2,), (3,)):
            per = 6 if len(widths) == 3 else 4
            bank = cnn.ConvFilterBank(3, 4, widths=widths, filters=per, seed=seed)
            worst["cnn"] = max(worst["cnn"], nn.grad_check(bank, Xmat, y))
    elapsed = time.perf_counter() - t0
    peak = max(worst.values())
    ok = peak <= 1e-4 and elapsed < 30.0
    report(capsys, 2, ok,
           f"20 seeds, widths {{1,2,3}}: rel. err pretrain {worst['pretrain']:.1e}, "
           f"fine-tune {worst['fine-tune']:.1e}, cnn {worst['cnn']:.1e} "
           f"(all ≤ 1e-4), {elapsed:.1f}s < 30s")


def test_criterion_3_dimension_contracts(capsys):
    graph = generate_planted_graph(60, 60, seed=5)
    cases = 0
    for s in (1, 2):
        for k in (10, 30):
            emb = normalize_coordinates(eigen_top_k(graph, k))
            vecs = features.vector_dataset(graph, emb, s=s)
            mats = features.matrix_dataset(graph, emb, s=s)
            assert vecs.shape == (graph.n, (2 * s + 1) * k)
            assert mats.shape == (graph.n, 2 * s + 1, k)
            for m in range(1, 2 * s + 2):
                h = cnn.convolve(np.zeros((m, k)), 0.0, mats[0])
                assert h.shape == (2 * s - m + 2,)
                cases += 1
    report(capsys, 3, True,
           f"vector length (2s+1)·k and conv length 2s−m+2 exact for "
           f"s∈{{1,2}}, k∈{{10,30}}, m∈{{1..2s+1}} ({cases} conv cases)")


def test_criterion_4_feature_oracle(capsys):
    rng = np.random.default_rng(404)
    graphs = classes = 0
    worst_mean = 0.0
    for _ in range(50):
        n, edges = random_signed_edges(rng)
        graph = SignedGraph(n, edges)
        adj = adjacency_dict(n, edges)
        emb = normalize_coordinates(eigen_top_k(graph, min(4, n)))
        nodes = rng.choice(n, size=min(4, n), replace=False)
        for u in nodes:
            for s in (1, 2):
                pos, neg = features.signed_neighbors_at(graph, int(u), s)
                opos, oneg = signed_classes_oracle(adj, int(u), s)
                assert set(pos.tolist()) == opos and set(neg.tolist()) == oneg
                for sign, ids in ((1, opos), (-1, oneg)):
                    mean = features.neighbor_mean(graph, emb, int(u), s, sign)
                    oracle = class_mean_oracle(emb.coordinates, ids)
                    worst_mean = max(worst_mean, float(np.max(np.abs(mean - oracle))))
                classes += 2
        graphs += 1
    ok = worst_mean < 1e-12
    report(capsys, 4, ok,
           f"{graphs} graphs, {classes} sign classes: BFS classes exactly "
           f"equal, means within {worst_mean:.1e} of the loop oracle")


def test_criterion_5_baseline_oracles(capsys):
    rng = np.random.default_rng(505)
    queries = 0
    for _ in range(50):
        n, edges = random_signed_edges(rng)
        graph = SignedGraph(n, edges)
        emb = normalize_coordinates(eigen_top_k(graph, min(6, n)))
        X = emb.coordinates
        y = rng.integers(0, 2, n)
        if len(np.unique(y)) < 2:
            y[0] = 1 - y[0]
        k = int(rng.choice([1, 3]))
        model = baselines.KnnModel(X, y, k=min(k, n))
        for q in rng.standard_normal((4, X.shape[1])) * 0.5:
            assert baselines.knn_predict(model, q) == knn_oracle(X, y, model.k, q)
            queries += 1
    assert queries == 200

    xor_X = np.array([[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]])
    xor_y = np.array([0, 0, 1, 1])
    xor = baselines.svm_train(xor_X, xor_y, C=10.0, gamma=1.0)
    xor_acc = np.mean(baselines.svm_predict(xor, xor_X) == xor_y)
    worst_kkt = baselines.kkt_violation(xor)
    for seed in range(5):
        r = np.random.default_rng(seed)
        yb = r.integers(0, 2, 50)
        Xb = r.standard_normal((50, 3))
        Xb[:, 0] += 1.5 * (2 * yb - 1)
        worst_kkt = max(worst_kkt,
                        baselines.kkt_violation(baselines.svm_train(Xb, yb)))
    ok = xor_acc == 1.0 and worst_kkt <= 1e-3
    report(capsys, 5, ok,
           f"knn = scan on {queries} queries; XOR at {xor_acc:.0%}; "
           f"max KKT violation {worst_kkt:.2e} ≤ 1e-3")


@pytest.mark.slow
def test_criterion_6_synthetic_benchmark(capsys, grid_main):
    lines = []
    ok = True

    floor = min(acc(grid_main["dae"], "dae", 20.0),
                acc(grid_main["cnn"], "cnn", 20.0))
    ok &= floor >= 0.85
    lines.append(f"(a) min deep accuracy at 20% = {floor:.4f} ≥ 0.85")

    worst_margin, worst_tag = np.inf, ""
    for model, rep in (("dae", grid_main["dae"]), ("cnn", grid_main["cnn"])):
        for base in ("knn", "svm"):
            for ratio in RATIOS:
                margin = (acc(rep, model, ratio)
                          - acc(grid_main["base"], base, ratio))
                if margin < worst_margin:
                    worst_margin, worst_tag = margin, f"{model}−{base}@{ratio:g}%"
    ok &= worst_margin >= 0.01
    lines.append(f"(b) worst margin over baselines = {worst_margin * 100:+.2f}pt "
                 f"({worst_tag}) ≥ 1pt")

    spectral5 = acc(grid_main["cnn"], "cnn", 5.0)
    adj5 = acc(grid_main["adj"], "cnn", 5.0, mode="adjacency-row")
    ok &= spectral5 - adj5 >= 0.02
    lines.append(f"(c) spectral vs adjacency CNN at 5% = "
                 f"{(spectral5 - adj5) * 100:+.2f}pt ≥ 2pt")

    seconds = grid_main["seconds"]
    ok &= seconds < 600.0
    lines.append(f"runtime {seconds:.0f}s < 600s")
    report(capsys, 6, ok, "; ".join(lines))


@pytest.mark.slow
def test_criterion_7_neighbor_ablation(capsys, grid_main, grid_alpha):
    """Directional ablation: the neighbor blocks must not hurt accuracy.

    Known red on the synthetic benchmark: at the saturating 20% operating
    point the coordinates alone already separate the classes, and the
    smaller coordinate-only models generalize a hair better.  The deficit
    is deterministic and far inside one run-to-run standard deviation.
    """
    lines = []
    ok = True
    for model in ("dae", "cnn"):
        full = grid_main[model].cell(model, "spectral-vector", 20.0, 30)
        alpha = grid_alpha[model].cell(model, "alpha-only", 20.0, 30)
        delta = full.mean_acc - alpha.mean_acc
        ok &= delta >= 0.0
        lines.append(f"{model} {delta * 100:+.2f}pt (run-to-run std "
                     f"{full.std_acc * 100:.2f}pt)")
    report(capsys, 7, ok,
           "full features minus coordinates only at 20%: "
           + ", ".join(lines) + " (each required ≥ 0)")


@pytest.mark.slow
def test_criterion_8_k_stability(capsys, grid_ks):
    ranges = {}
    for model in ("dae", "cnn"):
        accs = [acc(grid_ks[model], model, 20.0, k=k)
                for k in (10, 20, 30, 40, 50)]
        ranges[model] = max(accs) - min(accs)
    ok = all(r <= 0.03 for r in ranges.values())
    report(capsys, 8, ok,
           "accuracy range over k∈{10..50} at 20%: "
           + ", ".join(f"{m} {r * 100:.2f}pt" for m, r in ranges.items())
           + " (each ≤ 3pt)")


@pytest.mark.slow
def test_criterion_9_wikieditor(capsys):
    edges_path = os.environ.get("SIGNET_WIKIEDITOR_EDGES")
    labels_path = os.environ.get("SIGNET_WIKIEDITOR_LABELS")
    if not edges_path or not labels_path:
        with capsys.disabled():
            print("\n[criterion  9] SKIP — set SIGNET_WIKIEDITOR_EDGES and "
                  "SIGNET_WIKIEDITOR_LABELS to run the real-data grid")
        pytest.skip("WikiEditor dataset not supplied")
    graph = load_edge_list(edges_path)
    counts = (graph.n, graph.edge_count, graph.pos_edge_count,
              graph.neg_edge_count)
    if counts != (18992, 81316, 52139, 29177):
        pytest.skip(f"dataset counts {counts} do not match the expected "
                    "(18992, 81316, 52139, 29177)")
    src = dict(graph_path=edges_path, labels_path=labels_path,
               regenerate_per_run=False)
    base, _ = bench(("knn", "svm"), TrainConfig(), **src)
    dae_rep, _ = bench(("dae",), DAE_TRAIN, **src)
    cnn_rep, _ = bench(("cnn",), CNN_TRAIN, **src)
    cnn20 = acc(cnn_rep, "cnn", 20.0)
    gap = abs(cnn20 - 0.8261)
    report(capsys, 9, True,
           f"full grid completed; CNN at 20% = {cnn20:.4f} "
           f"({gap * 100:.2f}pt from the 82.61% reference — reported, not gated)")


def test_criterion_10_determinism(capsys):
    from signet.graph import GeneratorConfig
    cfg = dict(
        algorithms=("dae", "cnn", "knn", "svm"), ratios=(20.0, 30.0), ks=(5,),
        runs=2, n_benign=30, n_fraud=30, master_seed=3,
        generator=GeneratorConfig(block_pos_prob=0.3, cross_neg_prob=0.05,
                                  fraud_degree=5),
        train=TrainConfig(epochs=3, batch_size=16))
    first = run_experiment(ExperimentConfig(**cfg)).to_csv()
    second = run_experiment(ExperimentConfig(**cfg)).to_csv()
    ok = first == second
    report(capsys, 10, ok,
           f"same master seed twice: CSV reports byte-identical "
           f"({len(first)} bytes)")
