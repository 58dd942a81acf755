"""
Auditing every hand-written gradient with finite differences
============================================================

All backward passes in this package are derived and coded by hand, so each
loss is audited against central finite differences. The check perturbs every
parameter both ways and compares the numeric slope with the analytic
gradient; relative errors near 1e-7 mean the implementation is correct to
floating-point accuracy.
"""

import numpy as np

from signet import cnn, dae, nn

rng = np.random.default_rng(0)
X = rng.standard_normal((12, 20))
y = rng.integers(0, 2, 12)
Xmat = rng.standard_normal((12, 3, 5))

print(f"{'loss':34s}{'worst rel. error over 10 seeds'}")

# --- autoencoder reconstruction (one encoder/decoder pair) ------------------
worst = 0.0
for seed in range(10):
    stack = dae.AutoencoderStack(20, hidden_dims=(8,), seed=seed)
    pair = dae._PairAutoencoder(stack.encoders[0], stack.decoders[0])
    worst = max(worst, nn.grad_check(pair, X, X))
print(f"{'reconstruction (greedy pair)':34s}{worst:.2e}")

# --- fine-tune cross-entropy through the encoder stack ----------------------
worst = 0.0
for seed in range(10):
    stack = dae.AutoencoderStack(20, hidden_dims=(8, 4), seed=seed)
    clf = dae._EncoderClassifier(stack)
    worst = max(worst, nn.grad_check(clf, X, y))
print(f"{'classifier (encoders + softmax)':34s}{worst:.2e}")

# --- convolution + pooling + softmax, all filter widths ---------------------
worst = 0.0
for seed in range(10):
    bank = cnn.ConvFilterBank(3, 5, widths=(1, 2, 3), filters=6, seed=seed)
    worst = max(worst, nn.grad_check(bank, Xmat, y))
print(f"{'filter bank (widths 1,2,3)':34s}{worst:.2e}")

# anything above ~1e-5 would indicate a broken backward pass; training-level
# symptoms (slow loss decay) show up far later than this audit does
