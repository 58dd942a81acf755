"""Classifier inputs built from spectral coordinates and signed neighborhoods.

Three input modes:

* vector: a node's own coordinates followed by the positive- and negative-
  class neighbor means for steps 1..s, concatenated into one (2s+1)*k vector;
* matrix: the same blocks stacked vertically into a (2s+1) x k matrix;
* adjacency: the node's raw signed adjacency row of length n.

A step-s neighbor is a node at shortest-path distance exactly s (on the
unsigned skeleton).  For s = 1 its class is the sign of the connecting edge.
For s > 1 it is classified by the sign product along shortest paths: positive
if ANY shortest path has positive product, negative otherwise.  An empty
class contributes a zero vector.

Neighbor means average coordinate rows in ascending node-id order, so results
are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import SignedGraph
from .spectral import SpectralEmbedding


@dataclass
class FeatureInput:
    mode: str  # "spectral-vector" | "spectral-matrix" | "adjacency-row"
    data: np.ndarray
    s: int
    k: int


def signed_neighbors_at(graph: SignedGraph, u: int, step: int) -> tuple[np.ndarray, np.ndarray]:
    """Node ids at distance exactly ``step`` from u, split into (positive, negative).

    Layered BFS tracking, per frontier node, whether some shortest path from u
    reaches it with positive sign product and whether some reaches it with
    negative product; "any positive path" wins the classification.
    """
    if step < 1:
        raise ValueError("step must be >= 1")
    if step == 1:  # distance-1 class is just the sign of the direct edge
        return graph.pos_neighbors(u), graph.neg_neighbors(u)
    n = graph.n
    dist = np.full(n, -1, dtype=np.int64)
    dist[u] = 0
    can_pos = np.zeros(n, dtype=bool)
    can_neg = np.zeros(n, dtype=bool)
    can_pos[u] = True
    frontier = [u]
    for d in range(step):
        nxt: set[int] = set()
        for x in frontier:
            for v in graph.pos_neighbors(x):
                if dist[v] in (-1, d + 1):
                    dist[v] = d + 1
                    nxt.add(int(v))
                    can_pos[v] |= can_pos[x]
                    can_neg[v] |= can_neg[x]
            for v in graph.neg_neighbors(x):
                if dist[v] in (-1, d + 1):
                    dist[v] = d + 1
                    nxt.add(int(v))
                    can_pos[v] |= can_neg[x]
                    can_neg[v] |= can_pos[x]
        frontier = sorted(nxt)
        if not frontier:
            break
    layer = np.array(frontier if len(frontier) and dist[frontier[0]] == step else [],
                     dtype=np.int64)
    if layer.size == 0:
        empty = np.array([], dtype=np.int64)
        return empty, empty
    pos_mask = can_pos[layer]
    return layer[pos_mask], layer[~pos_mask]


def neighbor_mean(graph: SignedGraph, emb: SpectralEmbedding, u: int,
                  step: int = 1, sign: int = 1) -> np.ndarray:
    """Mean coordinate row over u's step-distance neighbors in one sign class.

    ``sign`` is +1 or -1.  Returns the zero vector when the class is empty.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    pos_ids, neg_ids = signed_neighbors_at(graph, u, step)
    ids = pos_ids if sign == 1 else neg_ids
    if ids.size == 0:
        return np.zeros(emb.k)
    return np.mean(emb.coordinates[ids], axis=0)


def _blocks(graph, emb, u, s):
    rows = [emb.coordinates[u]]
    for step in range(1, s + 1):
        pos_ids, neg_ids = signed_neighbors_at(graph, u, step)
        for ids in (pos_ids, neg_ids):
            if ids.size == 0:
                rows.append(np.zeros(emb.k))
            else:
                rows.append(np.mean(emb.coordinates[ids], axis=0))
    return rows


def build_vector_input(graph: SignedGraph, emb: SpectralEmbedding, u: int,
                       s: int = 1) -> FeatureInput:
    """Length-(2s+1)*k vector [alpha_u, beta_u^{1+}, beta_u^{1-}, ..., beta_u^{s-}]."""
    if not emb.normalized:
        raise ValueError("vector inputs are built from the normalized embedding")
    data = np.concatenate(_blocks(graph, emb, u, s))
    return FeatureInput("spectral-vector", data, s=s, k=emb.k)


def build_matrix_input(graph: SignedGraph, emb: SpectralEmbedding, u: int,
                       s: int = 1) -> FeatureInput:
    """(2s+1) x k matrix with the same blocks as build_vector_input, stacked as rows."""
    if not emb.normalized:
        raise ValueError("matrix inputs are built from the normalized embedding")
    data = np.vstack(_blocks(graph, emb, u, s))
    return FeatureInput("spectral-matrix", data, s=s, k=emb.k)


def build_adjacency_input(graph: SignedGraph, u: int) -> FeatureInput:
    """The raw signed adjacency row of node u (length n, entries in {-1, 0, +1})."""
    return FeatureInput("adjacency-row", graph.adjacency_row(u), s=0, k=graph.n)


def vector_dataset(graph: SignedGraph, emb: SpectralEmbedding, s: int = 1) -> np.ndarray:
    """(n, (2s+1)*k) array of vector inputs for every node."""
    return np.stack([build_vector_input(graph, emb, u, s).data for u in range(graph.n)])


def matrix_dataset(graph: SignedGraph, emb: SpectralEmbedding, s: int = 1) -> np.ndarray:
    """(n, 2s+1, k) array of matrix inputs for every node."""
    return np.stack([build_matrix_input(graph, emb, u, s).data for u in range(graph.n)])


def adjacency_dataset(graph: SignedGraph) -> np.ndarray:
    """(n, n) dense signed adjacency, one row per node."""
    return np.stack([graph.adjacency_row(u) for u in range(graph.n)])
