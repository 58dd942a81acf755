"""Deep autoencoder classifier: stacked encoders pretrained on reconstruction,
then fine-tuned end to end under a softmax head.

Pretraining is unsupervised (it never sees labels) and by default greedy
layerwise: each (encoder, mirror decoder) pair learns to reconstruct the
frozen output of the preceding encoders, minimizing the mean squared
reconstruction error.  ``pretrain_mode="joint"`` instead trains the full
encoder/decoder stack on reconstruction in one go.  Decoders are discarded at
classification time.
"""

from __future__ import annotations

import numpy as np

from . import nn
from .nn import DenseLayer, SoftmaxHead, TrainConfig


class AutoencoderStack:
    """L encoders, L mirrored decoders, and a softmax head on the deepest code.

    Encoder dims run input -> hidden_dims; decoders mirror them back so that
    encoder l's output width equals the matching decoder's input width.
    Encoders use ``activation``; decoders do too except the final one, which
    is linear (reconstruction targets are unbounded reals).
    """

    def __init__(self, input_dim: int, hidden_dims=(128, 64), seed: int = 0,
                 activation: str = "tanh", n_classes: int = 2):
        if not hidden_dims:
            raise ValueError("need at least one hidden dim")
        rng = np.random.default_rng(seed)
        dims = [input_dim, *hidden_dims]
        self.encoders = [DenseLayer(rng, dims[i], dims[i + 1], activation)
                         for i in range(len(hidden_dims))]
        rev = dims[::-1]
        self.decoders = [
            DenseLayer(rng, rev[i], rev[i + 1],
                       "linear" if i == len(hidden_dims) - 1 else activation)
            for i in range(len(hidden_dims))
        ]
        self.head = SoftmaxHead(rng, hidden_dims[-1], n_classes)
        self.input_dim = input_dim
        self.hidden_dims = tuple(hidden_dims)
        self.activation = activation
        self.seed = seed
        self.pretrained = False
        self.fine_tuned = False

    @property
    def depth(self):
        return len(self.encoders)

    def check_mirror(self):
        """Raise if encoder/decoder widths have drifted out of mirror symmetry."""
        L = self.depth
        for l, enc in enumerate(self.encoders):
            dec = self.decoders[L - 1 - l]
            if enc.n_out != dec.n_in:
                raise AssertionError(
                    f"encoder {l} out={enc.n_out} != mirror decoder in={dec.n_in}")
            if enc.n_in != dec.n_out:
                raise AssertionError(
                    f"encoder {l} in={enc.n_in} != mirror decoder out={dec.n_out}")

    def encode(self, X: np.ndarray) -> np.ndarray:
        for enc in self.encoders:
            X = enc.apply(X)
        return X


def _mse(recon, target):
    d = recon - target
    return float(np.mean(np.sum(d * d, axis=1)))


class _PairAutoencoder:
    """One greedy pretraining unit: a single encoder/decoder pair."""

    def __init__(self, enc: DenseLayer, dec: DenseLayer):
        self.enc, self.dec = enc, dec

    def params(self):
        return [self.enc.W, self.enc.b, self.dec.W, self.dec.b]

    def grads(self):
        return [self.enc.dW, self.enc.db, self.dec.dW, self.dec.db]

    def _zero(self):
        for g in self.grads():
            g[...] = 0.0

    def loss(self, X, y=None):
        return _mse(self.dec.apply(self.enc.apply(X)), X)

    def loss_and_grads(self, X, y=None):
        self._zero()
        z = self.enc.forward(X)
        recon = self.dec.forward(z)
        diff = recon - X
        loss = float(np.mean(np.sum(diff * diff, axis=1)))
        dz = self.dec.backward(2.0 * diff / len(X))
        self.enc.backward(dz)
        return loss


class _JointAutoencoder:
    """All encoders and decoders trained together on reconstruction."""

    def __init__(self, stack: AutoencoderStack):
        self.layers = [*stack.encoders, *stack.decoders]

    def params(self):
        return [a for layer in self.layers for a in (layer.W, layer.b)]

    def grads(self):
        return [a for layer in self.layers for a in (layer.dW, layer.db)]

    def loss(self, X, y=None):
        out = X
        for layer in self.layers:
            out = layer.apply(out)
        return _mse(out, X)

    def loss_and_grads(self, X, y=None):
        for g in self.grads():
            g[...] = 0.0
        out = X
        for layer in self.layers:
            out = layer.forward(out)
        diff = out - X
        loss = float(np.mean(np.sum(diff * diff, axis=1)))
        grad = 2.0 * diff / len(X)
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return loss


class _EncoderClassifier:
    """Encoders plus softmax head under mean cross-entropy (the fine-tune objective)."""

    def __init__(self, stack: AutoencoderStack):
        self.encoders = stack.encoders
        self.head = stack.head

    def params(self):
        out = [a for enc in self.encoders for a in (enc.W, enc.b)]
        out += [self.head.U, self.head.b]
        return out

    def grads(self):
        out = [a for enc in self.encoders for a in (enc.dW, enc.db)]
        out += [self.head.dU, self.head.db]
        return out

    def predict_proba(self, X):
        z = X
        for enc in self.encoders:
            z = enc.apply(z)
        return nn.softmax_probs(z @ self.head.U.T + self.head.b)

    def loss(self, X, y):
        return nn.cross_entropy(self.predict_proba(X), y)

    def loss_and_grads(self, X, y):
        for g in self.grads():
            g[...] = 0.0
        z = X
        for enc in self.encoders:
            z = enc.forward(z)
        probs = nn.softmax_probs(self.head.logits(z))
        loss = nn.cross_entropy(probs, y)
        dz = self.head.backward_logits(nn.softmax_xent_grad(probs, y))
        for enc in reversed(self.encoders):
            dz = enc.backward(dz)
        return loss


def pretrain(stack: AutoencoderStack, X: np.ndarray, config: TrainConfig,
             mode: str = "greedy") -> list[dict]:
    """Unsupervised reconstruction pretraining; returns one loss history per unit.

    Greedy mode trains pairs (encoder l, mirror decoder) in order, each on the
    frozen output of the encoders before it, with the full epoch budget and
    early stopping per pair.  Joint mode trains the whole stack at once.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != stack.input_dim:
        raise ValueError(f"inputs must be (N, {stack.input_dim}), got {X.shape}")
    if mode == "greedy":
        histories = []
        cur = X
        L = stack.depth
        for l in range(L):
            pair = _PairAutoencoder(stack.encoders[l], stack.decoders[L - 1 - l])
            histories.append(nn.train_epochs(pair, cur, None, config))
            cur = stack.encoders[l].apply(cur)
    elif mode == "joint":
        histories = [nn.train_epochs(_JointAutoencoder(stack), X, None, config)]
    else:
        raise ValueError(f"pretrain mode must be 'greedy' or 'joint', got {mode!r}")
    stack.pretrained = True
    stack.check_mirror()
    return histories


def fine_tune(stack: AutoencoderStack, X: np.ndarray, y: np.ndarray,
              config: TrainConfig, from_scratch: bool = False) -> dict:
    """Supervised cross-entropy training of encoders + head (decoders untouched).

    Requires a pretrained stack unless ``from_scratch=True`` explicitly skips
    the pretraining contract (ablation use).
    """
    if not stack.pretrained and not from_scratch:
        raise ValueError("stack is not pretrained; pass from_scratch=True to override")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    history = nn.train_epochs(_EncoderClassifier(stack), X, y, config)
    stack.fine_tuned = True
    stack.check_mirror()
    return history


def predict(stack: AutoencoderStack, X: np.ndarray) -> np.ndarray:
    """Class probabilities, one row per input; decoders play no part."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    z = stack.encode(X)
    return nn.softmax_probs(z @ stack.head.U.T + stack.head.b)


def save_dae(stack: AutoencoderStack, path, extra_meta: dict | None = None) -> None:
    arrays = {}
    for i, enc in enumerate(stack.encoders):
        arrays[f"enc{i}_W"], arrays[f"enc{i}_b"] = enc.W, enc.b
    for i, dec in enumerate(stack.decoders):
        arrays[f"dec{i}_W"], arrays[f"dec{i}_b"] = dec.W, dec.b
    arrays["head_U"], arrays["head_b"] = stack.head.U, stack.head.b
    meta = {"input_dim": stack.input_dim, "hidden_dims": list(stack.hidden_dims),
            "activation": stack.activation, "seed": stack.seed,
            "n_classes": stack.head.n_classes,
            "pretrained": stack.pretrained, "fine_tuned": stack.fine_tuned}
    meta.update(extra_meta or {})
    nn.save_checkpoint(path, "dae", arrays, meta)


def load_dae(path) -> tuple[AutoencoderStack, dict]:
    kind, arrays, meta = nn.load_checkpoint(path)
    if kind != "dae":
        raise ValueError(f"checkpoint holds a {kind!r} model, not a DAE")
    stack = AutoencoderStack(meta["input_dim"], tuple(meta["hidden_dims"]),
                             seed=meta["seed"], activation=meta["activation"],
                             n_classes=meta["n_classes"])
    for i, enc in enumerate(stack.encoders):
        enc.W[...] = arrays[f"enc{i}_W"]
        enc.b[...] = arrays[f"enc{i}_b"]
    for i, dec in enumerate(stack.decoders):
        dec.W[...] = arrays[f"dec{i}_W"]
        dec.b[...] = arrays[f"dec{i}_b"]
    stack.head.U[...] = arrays["head_U"]
    stack.head.b[...] = arrays["head_b"]
    stack.pretrained = bool(meta["pretrained"])
    stack.fine_tuned = bool(meta["fine_tuned"])
    return stack, meta
