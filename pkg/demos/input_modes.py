"""
Why spectral inputs beat raw adjacency rows
===========================================

A node can be described to a classifier either by its raw adjacency row
(n numbers, almost all zero) or by its coordinates in the spectral space
of the adjacency matrix (k numbers). With few labels the difference is
dramatic: the filter-bank network overfits the sparse high-dimensional
rows but generalizes well from the dense low-dimensional coordinates.
"""

import numpy as np

import signet
from signet import cnn, features, nn
from signet.harness import accuracy, stratified_split

graph = signet.generate_planted_graph(
    300, 300,
    signet.GeneratorConfig(block_pos_prob=0.08, cross_neg_prob=0.008,
                           fraud_degree=12),
    seed=11)
y = np.asarray(graph.labels)
train_ids, test_ids = stratified_split(y, 10.0, seed=0)
tcfg = nn.TrainConfig(epochs=80, batch_size=8, seed=0, validation_fraction=0.0)
print(f"{graph.n} nodes, training on {len(train_ids)} labels (10%)\n")

# --- adjacency-row input: one 1 x n matrix per node -------------------------
rows = features.adjacency_dataset(graph)[:, None, :]
bank = cnn.adjacency_bank(graph.n, filters=300, seed=0)
cnn.train(bank, rows[train_ids], y[train_ids], tcfg)
adj_acc = accuracy(np.argmax(bank.predict_proba(rows[test_ids]), 1), y[test_ids])
print(f"adjacency rows  ({rows.shape[2]} columns): accuracy {adj_acc:.3f}")

# --- spectral input: (2s+1) x k feature matrix per node ---------------------
emb = signet.normalize_coordinates(signet.eigen_top_k(graph, k=10))
mats = features.matrix_dataset(graph, emb, s=1)
bank = cnn.ConvFilterBank(mats.shape[1], mats.shape[2], widths=(1, 2, 3),
                          filters=300, seed=0)
cnn.train(bank, mats[train_ids], y[train_ids], tcfg)
spec_acc = accuracy(np.argmax(bank.predict_proba(mats[test_ids]), 1), y[test_ids])
print(f"spectral matrix ({mats.shape[1]}x{mats.shape[2]} inputs):  "
      f"accuracy {spec_acc:.3f}")

print(f"\nspectral advantage: {100 * (spec_acc - adj_acc):+.1f} accuracy points")
# the gap widens as the label budget shrinks; the experiment harness runs
# this comparison systematically (input_modes=("spectral-vector",
# "adjacency-row"))
