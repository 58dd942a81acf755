"""From-scratch neural network kernels shared by the autoencoder and CNN classifiers.

Everything here is plain numpy in double precision with hand-written
backpropagation.  A "model" is any object exposing

    params()            -> list of parameter arrays (updated in place)
    grads()             -> matching list of gradient arrays
    loss_and_grads(X, y) -> scalar loss, filling grads()
    loss(X, y)          -> scalar loss only

which is what ``train_epochs`` and ``grad_check`` operate on.  Classifiers
additionally expose ``predict_proba(X)``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, asdict

import numpy as np


class TrainingDivergedError(Exception):
    """Training or validation loss became non-finite."""


class GradientError(Exception):
    """Analytic gradient contains non-finite entries."""


# ---------------------------------------------------------------------------
# activations / init
# ---------------------------------------------------------------------------

def _act(name, pre):
    if name == "tanh":
        return np.tanh(pre)
    if name == "relu":
        return np.maximum(pre, 0.0)
    if name == "linear":
        return pre
    raise ValueError(f"unknown activation {name!r}")


def _act_grad(name, pre, out):
    """d(activation)/d(pre), using whichever of pre/out is cheaper."""
    if name == "tanh":
        return 1.0 - out * out
    if name == "relu":
        return (pre > 0).astype(pre.dtype)
    if name == "linear":
        return np.ones_like(pre)
    raise ValueError(f"unknown activation {name!r}")


def glorot_uniform(rng, n_out: int, n_in: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (n_in + n_out))
    return rng.uniform(-limit, limit, size=(n_out, n_in))


class DenseLayer:
    """Affine map plus activation; W is (out, in), bias (out,)."""

    def __init__(self, rng, n_in: int, n_out: int, activation: str = "tanh"):
        self.W = glorot_uniform(rng, n_out, n_in)
        self.b = np.zeros(n_out)
        self.activation = activation
        self.dW = np.zeros_like(self.W)
        self.db = np.zeros_like(self.b)
        self._x = None
        self._pre = None
        self._out = None

    @property
    def n_in(self):
        return self.W.shape[1]

    @property
    def n_out(self):
        return self.W.shape[0]

    def forward(self, x: np.ndarray) -> np.ndarray:
        """x is (batch, n_in); caches intermediates for backward."""
        self._x = x
        self._pre = x @ self.W.T + self.b
        self._out = _act(self.activation, self._pre)
        return self._out

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Forward pass without touching the backward cache."""
        return _act(self.activation, x @ self.W.T + self.b)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        """dout is dL/d(output); accumulates exact dW, db and returns dL/dx."""
        dpre = dout * _act_grad(self.activation, self._pre, self._out)
        self.dW += dpre.T @ self._x
        self.db += dpre.sum(axis=0)
        return dpre @ self.W


class SoftmaxHead:
    """Linear classifier head: per-class weight vectors and biases feeding a softmax."""

    def __init__(self, rng, n_in: int, n_classes: int = 2):
        if n_classes < 2:
            raise ValueError("need at least 2 classes")
        self.U = glorot_uniform(rng, n_classes, n_in)
        self.b = np.zeros(n_classes)
        self.dU = np.zeros_like(self.U)
        self.db = np.zeros_like(self.b)
        self._z = None

    @property
    def n_classes(self):
        return len(self.b)

    def logits(self, z: np.ndarray) -> np.ndarray:
        self._z = z
        return z @ self.U.T + self.b

    def backward_logits(self, dlogits: np.ndarray) -> np.ndarray:
        self.dU += dlogits.T @ self._z
        self.db += dlogits.sum(axis=0)
        return dlogits @ self.U


def softmax_probs(logits: np.ndarray) -> np.ndarray:
    """Row-wise stable softmax (max subtraction before exponentiation)."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_predict(head: SoftmaxHead, z: np.ndarray) -> np.ndarray:
    """Class probabilities for a single feature vector z."""
    z = np.asarray(z, dtype=np.float64)
    return softmax_probs(z @ head.U.T + head.b)


def cross_entropy(preds: np.ndarray, labels: np.ndarray) -> float:
    """Mean negative log-probability of the true class.

    ``preds`` is (N, C) rows of class probabilities, ``labels`` integer class
    ids.  Probabilities are clamped at 1e-12 before taking logs.
    """
    preds = np.atleast_2d(np.asarray(preds, dtype=np.float64))
    labels = np.atleast_1d(np.asarray(labels))
    if len(preds) != len(labels):
        raise ValueError(f"got {len(preds)} predictions for {len(labels)} labels")
    p_true = preds[np.arange(len(labels)), labels]
    return float(-np.mean(np.log(np.maximum(p_true, 1e-12))))


def softmax_xent_grad(probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """dL/dlogits for mean cross-entropy over the batch: (P - onehot) / N."""
    g = probs.copy()
    g[np.arange(len(labels)), labels] -= 1.0
    return g / len(labels)


# ---------------------------------------------------------------------------
# optimizers
# ---------------------------------------------------------------------------

@dataclass
class TrainConfig:
    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 1e-3
    optimizer: str = "adam"  # "adam" | "sgd"
    early_stop_patience: int = 5
    validation_fraction: float = 0.1
    weight_decay: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not 0.0 <= self.validation_fraction < 0.5:
            raise ValueError("validation_fraction must lie in [0, 0.5)")
        if self.weight_decay < 0.0:
            raise ValueError("weight_decay must be >= 0")


class Adam:
    """Adam with decoupled weight decay (the loss itself stays unpenalized)."""

    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8,
                 weight_decay=0.0):
        self.params = params
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.weight_decay = weight_decay
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            mhat = m / (1 - b1 ** self.t)
            vhat = v / (1 - b2 ** self.t)
            if self.weight_decay and p.ndim >= 2:  # never decay biases
                p *= 1.0 - self.lr * self.weight_decay
            p -= self.lr * mhat / (np.sqrt(vhat) + self.eps)


class Sgd:
    def __init__(self, params, lr=1e-3, weight_decay=0.0):
        self.params = params
        self.lr = lr
        self.weight_decay = weight_decay

    def step(self, grads):
        for p, g in zip(self.params, grads):
            if self.weight_decay and p.ndim >= 2:
                p *= 1.0 - self.lr * self.weight_decay
            p -= self.lr * g


def make_optimizer(params, config: TrainConfig):
    if config.optimizer == "adam":
        return Adam(params, lr=config.learning_rate,
                    weight_decay=config.weight_decay)
    if config.optimizer == "sgd":
        return Sgd(params, lr=config.learning_rate,
                   weight_decay=config.weight_decay)
    raise ValueError(f"unknown optimizer {config.optimizer!r}")


# ---------------------------------------------------------------------------
# training loop
# ---------------------------------------------------------------------------

def train_epochs(model, X: np.ndarray, y, config: TrainConfig) -> dict:
    """Mini-batch training with validation-based early stopping.

    A validation slice of ``validation_fraction`` is held out of (X, y); the
    epoch loop stops once validation loss has not improved for
    ``early_stop_patience`` consecutive epochs, and the best-validation
    parameters are restored before returning.  With no validation slice the
    final parameters are kept.  ``y`` may be None for unsupervised losses.

    Returns a history dict with per-epoch train/val losses and the epoch of
    the restored parameters.  Fully deterministic for a fixed config.
    """
    N = len(X)
    if N == 0:
        raise ValueError("dataset must be non-empty")
    rng = np.random.default_rng(config.seed)

    n_val = int(round(config.validation_fraction * N))
    if n_val > 0 and N - n_val >= 1:
        perm = rng.permutation(N)
        val_ids, train_ids = perm[:n_val], perm[n_val:]
    else:
        val_ids, train_ids = np.array([], dtype=np.int64), np.arange(N)

    def subset(ids):
        return X[ids], (None if y is None else y[ids])

    X_val, y_val = subset(val_ids)
    params = model.params()
    opt = make_optimizer(params, config)

    best_val = np.inf
    best_params = None
    best_epoch = -1
    bad_epochs = 0
    history = {"train": [], "val": [], "best_epoch": None, "epochs_run": 0}

    for epoch in range(config.epochs):
        order = train_ids[rng.permutation(len(train_ids))]
        for start in range(0, len(order), config.batch_size):
            bX, by = subset(order[start:start + config.batch_size])
            batch_loss = model.loss_and_grads(bX, by)
            if not np.isfinite(batch_loss):
                raise TrainingDivergedError(f"batch loss {batch_loss} at epoch {epoch}")
            opt.step(model.grads())

        train_loss = model.loss(*subset(train_ids))
        history["train"].append(train_loss)
        history["epochs_run"] = epoch + 1
        if not np.isfinite(train_loss):
            raise TrainingDivergedError(f"training loss {train_loss} at epoch {epoch}")

        if len(val_ids):
            val_loss = model.loss(X_val, y_val)
            history["val"].append(val_loss)
            if not np.isfinite(val_loss):
                raise TrainingDivergedError(f"validation loss {val_loss} at epoch {epoch}")
            if val_loss < best_val:
                best_val = val_loss
                best_params = [p.copy() for p in params]
                best_epoch = epoch
                bad_epochs = 0
            else:
                bad_epochs += 1
                if bad_epochs >= config.early_stop_patience:
                    break

    if best_params is not None:
        for p, bp in zip(params, best_params):
            p[...] = bp
        history["best_epoch"] = best_epoch
    else:
        history["best_epoch"] = history["epochs_run"] - 1
    return history


# ---------------------------------------------------------------------------
# gradient checking
# ---------------------------------------------------------------------------

def grad_check(model, X: np.ndarray, y, eps: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    Every entry of every parameter array is perturbed by +-eps; the relative
    error uses max(|analytic|, |numeric|, 1e-8) as denominator.  Models must
    be in double precision for the default eps to be meaningful.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    model.loss_and_grads(X, y)
    analytic = [g.copy() for g in model.grads()]
    if any(not np.isfinite(g).all() for g in analytic):
        raise GradientError("analytic gradient has non-finite entries")

    worst = 0.0
    for p, g in zip(model.params(), analytic):
        flat_p = p.reshape(-1)
        flat_g = g.reshape(-1)
        for i in range(flat_p.size):
            orig = flat_p[i]
            flat_p[i] = orig + eps
            up = model.loss(X, y)
            flat_p[i] = orig - eps
            down = model.loss(X, y)
            flat_p[i] = orig
            numeric = (up - down) / (2.0 * eps)
            denom = max(abs(flat_g[i]), abs(numeric), 1e-8)
            worst = max(worst, abs(flat_g[i] - numeric) / denom)
    return worst


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

CHECKPOINT_VERSION = 1


def config_hash(meta: dict) -> str:
    return hashlib.sha256(json.dumps(meta, sort_keys=True).encode()).hexdigest()[:16]


def save_checkpoint(path, kind: str, arrays: dict, meta: dict) -> None:
    """Write a versioned npz checkpoint: float64 arrays plus a JSON header.

    The header carries the model kind, a hash of ``meta``, and ``meta`` itself
    (shapes, hyperparameters).  Arrays round-trip bit-exactly.
    """
    header = {"version": CHECKPOINT_VERSION, "kind": kind,
              "config_hash": config_hash(meta), "meta": meta}
    payload = {f"arr_{name}": np.asarray(a, dtype=np.float64)
               for name, a in arrays.items()}
    payload["header"] = np.frombuffer(json.dumps(header).encode(), dtype=np.uint8)
    np.savez(path, **payload)


def load_checkpoint(path) -> tuple[str, dict, dict]:
    """Read a checkpoint; returns (kind, arrays, meta)."""
    with np.load(path) as data:
        header = json.loads(bytes(data["header"]).decode())
        if header.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {header.get('version')}")
        if header.get("config_hash") != config_hash(header["meta"]):
            raise ValueError("checkpoint header hash mismatch")
        arrays = {name[4:]: data[name] for name in data.files if name.startswith("arr_")}
    return header["kind"], arrays, header["meta"]


def train_config_meta(config: TrainConfig) -> dict:
    return asdict(config)
