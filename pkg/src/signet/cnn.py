"""Convolutional classifier over the stacked spectral-coordinate matrix.

Each filter of width m holds an m x k weight matrix plus one shared bias and
slides down the rows of the input (stride 1, no padding), producing
rows - m + 1 activations that are average-pooled into a single scalar.  With
q filters the pooled scalars form the representation vector fed to the
softmax head.  Filters are split evenly across the configured widths.

The same machinery covers adjacency-row inputs: a 1 x n input with width-1
filters of length n, where pooling over the single window is the identity.
"""

from __future__ import annotations

import numpy as np

from . import nn
from .nn import SoftmaxHead, TrainConfig, glorot_uniform


def convolve(filter_w: np.ndarray, bias: float, X: np.ndarray,
             activation: str = "relu") -> np.ndarray:
    """Feature vector h of one filter on one input matrix.

    ``filter_w`` is (m, k), ``X`` is (rows, k) with m <= rows; entry j is
    activation(<W, X[j:j+m]> + b) for the Frobenius inner product, giving
    rows - m + 1 entries.
    """
    m, k = filter_w.shape
    rows = X.shape[0]
    if m > rows:
        raise ValueError(f"filter width {m} exceeds input rows {rows}")
    if X.shape[1] != k:
        raise ValueError(f"filter has {k} columns, input has {X.shape[1]}")
    pre = np.array([np.sum(filter_w * X[j:j + m]) + bias for j in range(rows - m + 1)])
    return nn._act(activation, pre)


def average_pool(h: np.ndarray) -> float:
    """Mean of a feature vector (one scalar per filter)."""
    h = np.asarray(h)
    if h.size == 0:
        raise ValueError("cannot pool an empty feature vector")
    return float(np.mean(h))


class ConvFilterBank:
    """q filters split evenly over the given widths, plus the softmax head.

    ``rows`` and ``k`` fix the input shape.  Implements the model protocol of
    :mod:`signet.nn`, so ``nn.train_epochs`` and ``nn.grad_check`` apply
    directly; inputs are (batch, rows, k) arrays.
    """

    def __init__(self, rows: int, k: int, widths=(1, 2, 3), filters: int = 300,
                 seed: int = 0, activation: str = "relu", n_classes: int = 2):
        widths = tuple(widths)
        if not widths:
            raise ValueError("need at least one filter width")
        if any(m < 1 or m > rows for m in widths):
            raise ValueError(f"widths {widths} must lie in [1, rows={rows}]")
        if filters % len(widths) != 0:
            raise ValueError(
                f"filter count {filters} must split evenly over {len(widths)} widths")
        rng = np.random.default_rng(seed)
        per = filters // len(widths)
        self.rows, self.k = rows, k
        self.widths = widths
        self.per_width = per
        self.activation = activation
        self.seed = seed
        # weights per width: (per, m, k); one shared bias per filter
        self.W = [glorot_uniform(rng, per, m * k).reshape(per, m, k) for m in widths]
        self.b = [np.zeros(per) for _ in widths]
        self.head = SoftmaxHead(rng, filters, n_classes)
        self.dW = [np.zeros_like(w) for w in self.W]
        self.db = [np.zeros_like(b) for b in self.b]
        self.trained = False
        self._cache = None

    @property
    def filters(self):
        return self.per_width * len(self.widths)

    # -- model protocol -----------------------------------------------------

    def params(self):
        return [*self.W, *self.b, self.head.U, self.head.b]

    def grads(self):
        return [*self.dW, *self.db, self.head.dU, self.head.db]

    def _represent(self, Xb, keep_cache=False):
        """Pooled representation z (batch, q) for a (batch, rows, k) input."""
        B = Xb.shape[0]
        zs = []
        cache = []
        for wi, m in enumerate(self.widths):
            nw = self.rows - m + 1
            windows = np.stack([Xb[:, j:j + m, :] for j in range(nw)], axis=1)
            flat = windows.reshape(B, nw, m * self.k)
            pre = flat @ self.W[wi].reshape(self.per_width, -1).T + self.b[wi]
            h = nn._act(self.activation, pre)
            zs.append(h.mean(axis=1))
            if keep_cache:
                cache.append((flat, pre, h, nw))
        if keep_cache:
            self._cache = cache
        return np.concatenate(zs, axis=1)

    def predict_proba(self, Xb):
        Xb = self._check_input(Xb)
        z = self._represent(Xb)
        return nn.softmax_probs(z @ self.head.U.T + self.head.b)

    def loss(self, Xb, y):
        return nn.cross_entropy(self.predict_proba(Xb), y)

    def loss_and_grads(self, Xb, y):
        Xb = self._check_input(Xb)
        for g in self.grads():
            g[...] = 0.0
        z = self._represent(Xb, keep_cache=True)
        probs = nn.softmax_probs(self.head.logits(z))
        loss = nn.cross_entropy(probs, y)
        dz = self.head.backward_logits(nn.softmax_xent_grad(probs, y))
        col = 0
        for wi, _ in enumerate(self.widths):
            flat, pre, h, nw = self._cache[wi]
            dz_w = dz[:, col:col + self.per_width]
            col += self.per_width
            dh = np.repeat(dz_w[:, None, :], nw, axis=1) / nw
            dpre = dh * nn._act_grad(self.activation, pre, h)
            self.dW[wi] += np.einsum("bnf,bnd->fd", dpre, flat).reshape(self.dW[wi].shape)
            self.db[wi] += dpre.sum(axis=(0, 1))
        self._cache = None
        return loss

    # -- conveniences -------------------------------------------------------

    def _check_input(self, Xb):
        Xb = np.asarray(Xb, dtype=np.float64)
        if Xb.shape[-2:] != (self.rows, self.k):
            raise ValueError(
                f"expected inputs shaped (..., {self.rows}, {self.k}), got {Xb.shape}")
        return Xb.reshape(-1, self.rows, self.k)


def forward(bank: ConvFilterBank, X: np.ndarray) -> np.ndarray:
    """Class probabilities for a single (rows, k) input matrix."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape != (bank.rows, bank.k):
        raise ValueError(f"expected shape ({bank.rows}, {bank.k}), got {X.shape}")
    return bank.predict_proba(X[None])[0]


def represent(bank: ConvFilterBank, X: np.ndarray) -> np.ndarray:
    """Pooled representation vector z of length q for one input matrix."""
    X = np.asarray(X, dtype=np.float64)
    return bank._represent(X[None])[0]


def train(bank: ConvFilterBank, X: np.ndarray, y: np.ndarray,
          config: TrainConfig) -> dict:
    """Cross-entropy training of filters and head via nn.train_epochs."""
    history = nn.train_epochs(bank, np.asarray(X, dtype=np.float64),
                              np.asarray(y, dtype=np.int64), config)
    bank.trained = True
    return history


def adjacency_bank(n: int, filters: int = 300, seed: int = 0,
                   n_classes: int = 2) -> ConvFilterBank:
    """Bank for adjacency-row inputs: 1 x n matrices under width-1 filters of length n."""
    return ConvFilterBank(rows=1, k=n, widths=(1,), filters=filters, seed=seed,
                          n_classes=n_classes)


def adjacency_mode_forward(bank: ConvFilterBank, row: np.ndarray) -> np.ndarray:
    """Class probabilities for one signed adjacency row (length n)."""
    row = np.asarray(row, dtype=np.float64)
    if bank.rows != 1:
        raise ValueError("bank is not configured for adjacency rows (rows != 1)")
    if row.shape != (bank.k,):
        raise ValueError(f"expected a length-{bank.k} row, got shape {row.shape}")
    return forward(bank, row[None, :])


def save_cnn(bank: ConvFilterBank, path, extra_meta: dict | None = None) -> None:
    arrays = {}
    for i in range(len(bank.widths)):
        arrays[f"W{i}"], arrays[f"b{i}"] = bank.W[i], bank.b[i]
    arrays["head_U"], arrays["head_b"] = bank.head.U, bank.head.b
    meta = {"rows": bank.rows, "k": bank.k, "widths": list(bank.widths),
            "filters": bank.filters, "seed": bank.seed,
            "activation": bank.activation, "n_classes": bank.head.n_classes,
            "trained": bank.trained}
    meta.update(extra_meta or {})
    nn.save_checkpoint(path, "cnn", arrays, meta)


def load_cnn(path) -> tuple[ConvFilterBank, dict]:
    kind, arrays, meta = nn.load_checkpoint(path)
    if kind != "cnn":
        raise ValueError(f"checkpoint holds a {kind!r} model, not a CNN")
    bank = ConvFilterBank(meta["rows"], meta["k"], tuple(meta["widths"]),
                          meta["filters"], seed=meta["seed"],
                          activation=meta["activation"], n_classes=meta["n_classes"])
    for i in range(len(bank.widths)):
        bank.W[i][...] = arrays[f"W{i}"]
        bank.b[i][...] = arrays[f"b{i}"]
    bank.head.U[...] = arrays["head_U"]
    bank.head.b[...] = arrays["head_b"]
    bank.trained = bool(meta["trained"])
    return bank, meta
