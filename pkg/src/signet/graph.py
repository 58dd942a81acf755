"""Signed undirected graphs: construction, file I/O, and synthetic generation.

A signed graph stores at most one edge per unordered node pair, each edge
carrying a sign of +1 or -1.  Adjacency is kept as per-node neighbor lists
partitioned by sign, which makes signed-neighbor iteration O(degree).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp


class EdgeListError(Exception):
    """Malformed edge-list input (message carries the offending line number)."""


class ConflictingSignError(EdgeListError):
    """The same node pair appears with both a positive and a negative sign."""


class GraphBuildError(Exception):
    """Graph construction produced an empty or degenerate result."""


META_PAGE_PREFIXES = ("User:", "Talk:", "User talk:", "Wikipedia:")


@dataclass(frozen=True)
class EditRecord:
    """One edit-log entry: a user touched a page, and the edit was or was not reverted."""

    user: str
    page_title: str
    reverted: bool

    def __post_init__(self):
        if not self.page_title:
            raise ValueError("page_title must be non-empty")


class SignedGraph:
    """Immutable symmetric signed graph with dense integer node ids in [0, n).

    Edges are supplied once at construction as (u, v, sign) triples; either
    orientation (or both, with equal sign) may appear.  Self-loops and pairs
    with conflicting signs are rejected.  Instances are safe to share across
    threads after construction.
    """

    def __init__(self, n: int, edges: Iterable[tuple[int, int, int]],
                 labels: Optional[Sequence[int]] = None,
                 node_names: Optional[Sequence[str]] = None):
        if n < 1:
            raise ValueError(f"node count must be >= 1, got {n}")
        self.n = int(n)

        sign_of: dict[tuple[int, int], int] = {}
        for u, v, s in edges:
            u, v, s = int(u), int(v), int(s)
            if u == v:
                raise EdgeListError(f"self-loop on node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise EdgeListError(f"node id out of range: ({u}, {v}) with n={n}")
            if s not in (1, -1):
                raise EdgeListError(f"edge sign must be +1 or -1, got {s}")
            key = (u, v) if u < v else (v, u)
            prev = sign_of.get(key)
            if prev is None:
                sign_of[key] = s
            elif prev != s:
                raise ConflictingSignError(
                    f"pair ({key[0]}, {key[1]}) has both +1 and -1 edges")

        pos: list[list[int]] = [[] for _ in range(n)]
        neg: list[list[int]] = [[] for _ in range(n)]
        for (u, v), s in sign_of.items():
            target = pos if s == 1 else neg
            target[u].append(v)
            target[v].append(u)
        self._pos = [np.array(sorted(a), dtype=np.int64) for a in pos]
        self._neg = [np.array(sorted(a), dtype=np.int64) for a in neg]

        self.edge_count = len(sign_of)
        self.pos_edge_count = sum(1 for s in sign_of.values() if s == 1)
        self.neg_edge_count = self.edge_count - self.pos_edge_count

        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64)
            if labels.shape != (n,):
                raise ValueError(f"labels must have shape ({n},), got {labels.shape}")
            if not np.isin(labels, (0, 1)).all():
                raise ValueError("labels must be 0 (benign) or 1 (fraud)")
        self.labels = labels
        self.node_names = list(node_names) if node_names is not None else None

    def pos_neighbors(self, u: int) -> np.ndarray:
        return self._pos[u]

    def neg_neighbors(self, u: int) -> np.ndarray:
        return self._neg[u]

    def degree(self, u: int) -> int:
        return len(self._pos[u]) + len(self._neg[u])

    def edges(self):
        """Yield each edge once as (u, v, sign) with u < v, in sorted order."""
        for u in range(self.n):
            for v in self._pos[u]:
                if u < v:
                    yield u, int(v), 1
            for v in self._neg[u]:
                if u < v:
                    yield u, int(v), -1

    def adjacency_matrix(self) -> sp.csr_array:
        """Symmetric signed adjacency as a sparse CSR array."""
        rows, cols, vals = [], [], []
        for u, v, s in self.edges():
            rows += [u, v]
            cols += [v, u]
            vals += [s, s]
        return sp.csr_array(
            (np.array(vals, dtype=np.float64),
             (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64))),
            shape=(self.n, self.n))

    def adjacency_row(self, u: int) -> np.ndarray:
        """Dense signed row of the adjacency matrix, entries in {-1, 0, +1}."""
        row = np.zeros(self.n)
        row[self._pos[u]] = 1.0
        row[self._neg[u]] = -1.0
        return row

    def with_labels(self, labels: Sequence[int]) -> "SignedGraph":
        """Copy of this graph with per-node labels attached."""
        g = SignedGraph(self.n, [], labels=labels, node_names=self.node_names)
        g._pos, g._neg = self._pos, self._neg
        g.edge_count = self.edge_count
        g.pos_edge_count = self.pos_edge_count
        g.neg_edge_count = self.neg_edge_count
        return g

    def __repr__(self):
        return (f"SignedGraph(n={self.n}, edges={self.edge_count} "
                f"[{self.pos_edge_count}+ / {self.neg_edge_count}-])")


def load_edge_list(path) -> SignedGraph:
    """Read a graph from a tab-separated edge list.

    Each non-comment line is ``u<TAB>v<TAB>sign`` with sign ``+1`` or ``-1``.
    Lines starting with ``#`` are ignored.  Node count is max id + 1.
    """
    edges = []
    max_id = -1
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise EdgeListError(f"{path}:{lineno}: expected 'u<TAB>v<TAB>sign', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
                s = int(parts[2])
            except ValueError as exc:
                raise EdgeListError(f"{path}:{lineno}: {exc}") from None
            if u == v:
                raise EdgeListError(f"{path}:{lineno}: self-loop on node {u}")
            if s not in (1, -1):
                raise EdgeListError(f"{path}:{lineno}: sign must be +1 or -1, got {parts[2]}")
            if u < 0 or v < 0:
                raise EdgeListError(f"{path}:{lineno}: negative node id")
            edges.append((u, v, s))
            max_id = max(max_id, u, v)
    if max_id < 0:
        raise EdgeListError(f"{path}: no edges found")
    return SignedGraph(max_id + 1, edges)


def save_edge_list(graph: SignedGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for u, v, s in graph.edges():
            fh.write(f"{u}\t{v}\t{'+1' if s == 1 else '-1'}\n")


def load_labels(path, n: Optional[int] = None,
                node_names: Optional[Sequence[str]] = None) -> np.ndarray:
    """Read per-node labels from ``node<TAB>{0|1}`` lines.

    The first column is an integer node id, or a node name when ``node_names``
    is given.  Nodes absent from the file default to label 0.
    """
    name_to_id = None
    if node_names is not None:
        name_to_id = {name: i for i, name in enumerate(node_names)}
        n = len(node_names)
    if n is None:
        raise ValueError("either n or node_names is required")
    labels = np.zeros(n, dtype=np.int64)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise EdgeListError(f"{path}:{lineno}: expected 'node<TAB>label'")
            if name_to_id is not None and parts[0] in name_to_id:
                node = name_to_id[parts[0]]
            else:
                try:
                    node = int(parts[0])
                except ValueError:
                    raise EdgeListError(f"{path}:{lineno}: unknown node {parts[0]!r}") from None
            label = int(parts[1])
            if label not in (0, 1):
                raise EdgeListError(f"{path}:{lineno}: label must be 0 or 1")
            if not 0 <= node < n:
                raise EdgeListError(f"{path}:{lineno}: node id {node} out of range")
            labels[node] = label
    return labels


def save_labels(labels: Sequence[int], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, y in enumerate(labels):
            fh.write(f"{i}\t{int(y)}\n")


def load_edit_log(path) -> list[EditRecord]:
    """Read ``user<TAB>page_title<TAB>{0|1}`` edit records (1 = reverted)."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3 or parts[2] not in ("0", "1"):
                raise EdgeListError(
                    f"{path}:{lineno}: expected 'user<TAB>page<TAB>{{0|1}}', got {line!r}")
            records.append(EditRecord(parts[0], parts[1], parts[2] == "1"))
    return records


def build_coedit_graph(records: Sequence[EditRecord]) -> SignedGraph:
    """Build a signed co-edit graph from an edit log.

    Edits on meta pages (titles starting with one of META_PAGE_PREFIXES) are
    dropped.  A user's category on a page is "revert" if any of their edits to
    that page was reverted.  For each user pair sharing at least one page, a
    positive edge is added when the pair's same-category pages outnumber their
    different-category pages, a negative edge when they are outnumbered, and
    no edge on a tie.  Users left without any edge are removed; node ids are
    assigned to the surviving users in order of first appearance in the log.
    """
    if not records:
        raise ValueError("records must be non-empty")

    # user -> page -> reverted-on-that-page
    per_user: dict[str, dict[str, bool]] = {}
    user_order: list[str] = []
    for rec in records:
        if rec.page_title.startswith(META_PAGE_PREFIXES):
            continue
        pages = per_user.get(rec.user)
        if pages is None:
            pages = per_user[rec.user] = {}
            user_order.append(rec.user)
        pages[rec.page_title] = pages.get(rec.page_title, False) or rec.reverted

    # invert to page -> [(user, category)]
    per_page: dict[str, list[tuple[str, bool]]] = {}
    for user, pages in per_user.items():
        for page, cat in pages.items():
            per_page.setdefault(page, []).append((user, cat))

    # same-category minus different-category page count per user pair
    balance: dict[tuple[str, str], int] = {}
    for editors in per_page.values():
        for i in range(len(editors)):
            ui, ci = editors[i]
            for j in range(i + 1, len(editors)):
                uj, cj = editors[j]
                key = (ui, uj) if ui < uj else (uj, ui)
                balance[key] = balance.get(key, 0) + (1 if ci == cj else -1)

    linked: set[str] = set()
    signed_pairs = []
    for (ua, ub), diff in balance.items():
        if diff == 0:
            continue
        signed_pairs.append((ua, ub, 1 if diff > 0 else -1))
        linked.add(ua)
        linked.add(ub)

    if not linked:
        raise GraphBuildError("all users are isolated after co-edit filtering")

    names = [u for u in user_order if u in linked]
    ids = {u: i for i, u in enumerate(names)}
    edges = [(ids[a], ids[b], s) for a, b, s in signed_pairs]
    return SignedGraph(len(names), edges, node_names=names)


@dataclass
class GeneratorConfig:
    """Knobs for the planted-fraud generator.

    Benign nodes form two communities with dense positive edges inside each
    and sparse negative edges across; fraud nodes fire edges at uniformly
    random targets, mostly negative.
    """

    block_pos_prob: float = 0.02
    cross_neg_prob: float = 0.002
    fraud_degree: int = 20
    fraud_neg_fraction: float = 0.8
    benign_noise_prob: float = 0.0  # extra uniform-random noise edges per benign pair

    def expected_edge_counts(self, n_benign: int, n_fraud: int) -> tuple[float, float]:
        """Analytic expected (positive, negative) edge counts, ignoring collisions."""
        b1 = n_benign // 2
        b2 = n_benign - b1
        within = self.block_pos_prob * (b1 * (b1 - 1) / 2 + b2 * (b2 - 1) / 2)
        cross = self.cross_neg_prob * b1 * b2
        fraud_edges = n_fraud * min(self.fraud_degree, n_benign + n_fraud - 1)
        fraud_neg = fraud_edges * self.fraud_neg_fraction
        fraud_pos = fraud_edges - fraud_neg
        noise = self.benign_noise_prob * n_benign * (n_benign - 1) / 2
        return within + fraud_pos + noise / 2, cross + fraud_neg + noise / 2


def generate_planted_graph(n_benign: int, n_fraud: int,
                           params: Optional[GeneratorConfig] = None,
                           seed: int = 0) -> SignedGraph:
    """Sample a labeled signed graph with two benign communities and planted fraudsters.

    Nodes 0..n_benign-1 are benign (label 0, communities of size
    ceil/floor(n_benign/2)); the remaining n_fraud nodes are fraud (label 1).
    When a fraud edge lands on a pair that already has an edge, the earlier
    sign wins.  Deterministic per seed.
    """
    if n_benign < 1 or n_fraud < 1:
        raise ValueError("n_benign and n_fraud must both be >= 1")
    params = params or GeneratorConfig()
    for p in (params.block_pos_prob, params.cross_neg_prob,
              params.fraud_neg_fraction, params.benign_noise_prob):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probabilities must lie in [0, 1], got {p}")

    n = n_benign + n_fraud
    b1 = n_benign // 2
    exp_benign_deg = (params.block_pos_prob * (max(b1, n_benign - b1) - 1)
                      + params.cross_neg_prob * b1
                      + n_fraud * params.fraud_degree / max(n - 1, 1))
    if min(exp_benign_deg, params.fraud_degree) < 1:
        raise GraphBuildError(
            f"degenerate generator config: expected degree {min(exp_benign_deg, params.fraud_degree):.3f} < 1")

    rng = np.random.default_rng(seed)
    sign_of: dict[tuple[int, int], int] = {}

    def add_pairs(us, vs, sign):
        for u, v in zip(us, vs):
            key = (int(u), int(v)) if u < v else (int(v), int(u))
            if key not in sign_of:
                sign_of[key] = sign

    # within-block positive edges
    for lo, hi in ((0, b1), (b1, n_benign)):
        size = hi - lo
        if size >= 2:
            iu, iv = np.triu_indices(size, k=1)
            keep = rng.random(len(iu)) < params.block_pos_prob
            add_pairs(iu[keep] + lo, iv[keep] + lo, 1)

    # cross-block negative edges
    if b1 >= 1 and n_benign - b1 >= 1:
        grid_u, grid_v = np.meshgrid(np.arange(0, b1), np.arange(b1, n_benign),
                                     indexing="ij")
        keep = rng.random(grid_u.shape) < params.cross_neg_prob
        add_pairs(grid_u[keep], grid_v[keep], -1)

    # optional uniform noise among benign nodes, random sign
    if params.benign_noise_prob > 0 and n_benign >= 2:
        iu, iv = np.triu_indices(n_benign, k=1)
        keep = rng.random(len(iu)) < params.benign_noise_prob
        for u, v in zip(iu[keep], iv[keep]):
            key = (int(u), int(v))
            if key not in sign_of:
                sign_of[key] = 1 if rng.random() < 0.5 else -1

    # fraud attachment: each fraud node hits fraud_degree random targets
    deg = min(params.fraud_degree, n - 1)
    for f in range(n_benign, n):
        targets = rng.choice(n - 1, size=deg, replace=False)
        targets[targets >= f] += 1  # skip self
        signs = np.where(rng.random(deg) < params.fraud_neg_fraction, -1, 1)
        for t, s in zip(targets, signs):
            key = (int(f), int(t)) if f < t else (int(t), int(f))
            if key not in sign_of:
                sign_of[key] = int(s)

    labels = np.zeros(n, dtype=np.int64)
    labels[n_benign:] = 1
    edges = [(u, v, s) for (u, v), s in sign_of.items()]
    return SignedGraph(n, edges, labels=labels)
