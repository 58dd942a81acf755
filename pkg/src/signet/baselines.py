"""Classical baseline classifiers: k-nearest neighbors and a soft-margin RBF SVM.

Both operate on the same flat feature vectors as the deep models.  k-NN is an
exhaustive Euclidean search with fully specified tie rules, so its output is
exactly reproducible against a brute-force oracle.  The SVM solves the
soft-margin dual with a deterministic sequential minimal optimization (SMO)
loop and validates the Karush-Kuhn-Tucker conditions at convergence.
"""

from __future__ import annotations

import warnings

import numpy as np


class SvmConvergenceWarning(UserWarning):
    """SMO exhausted its pass budget with KKT violations remaining."""


# ---------------------------------------------------------------------------
# k-nearest neighbors
# ---------------------------------------------------------------------------

class KnnModel:
    """Training set held verbatim; k nearest by Euclidean distance vote.

    Ties are deterministic: equal distances prefer the lower training index,
    and a tied vote (possible only for even k in the binary case) goes to the
    class with the smaller mean distance among its voting members.
    """

    def __init__(self, X: np.ndarray, y: np.ndarray, k: int = 3):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if X.ndim != 2 or len(X) != len(y):
            raise ValueError("X must be (n, d) with one label per row")
        if not 1 <= k <= len(X):
            raise ValueError(f"k={k} must lie in [1, {len(X)}]")
        self.X = X
        self.y = y
        self.k = k


def _vote(dists_row: np.ndarray, model: KnnModel) -> int:
    # stable argsort realizes the lower-training-index rule on distance ties
    nearest = np.argsort(dists_row, kind="stable")[:model.k]
    labels = model.y[nearest]
    counts = np.bincount(labels)
    top = np.flatnonzero(counts == counts.max())
    if len(top) == 1:
        return int(top[0])
    means = [dists_row[nearest[labels == c]].mean() for c in top]
    return int(top[np.argmin(means)])


def knn_predict(model: KnnModel, x: np.ndarray) -> int:
    """Majority label among the k nearest training points to x."""
    x = np.asarray(x, dtype=np.float64)
    d2 = np.sum((model.X - x) ** 2, axis=1)
    return _vote(d2, model)


def knn_predict_many(model: KnnModel, X: np.ndarray) -> np.ndarray:
    """Row-wise knn_predict with chunked distance evaluation.

    Distances use the same subtract-square-sum arithmetic as the scalar path
    (not the quadratic expansion), so tie orderings are bit-identical.
    """
    X = np.asarray(X, dtype=np.float64)
    out = np.empty(len(X), dtype=np.int64)
    chunk = max(1, int(4_000_000 // max(model.X.size, 1)))
    for start in range(0, len(X), chunk):
        block = X[start:start + chunk]
        d2 = np.sum((block[:, None, :] - model.X[None, :, :]) ** 2, axis=2)
        for r in range(len(block)):
            out[start + r] = _vote(d2[r], model)
    return out


# ---------------------------------------------------------------------------
# RBF-kernel SVM via sequential minimal optimization
# ---------------------------------------------------------------------------

def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """K[i, j] = exp(-gamma * ||A_i - B_j||^2)."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    d2 = (np.sum(A ** 2, axis=1)[:, None] + np.sum(B ** 2, axis=1)
          - 2.0 * A @ B.T)
    return np.exp(-gamma * np.maximum(d2, 0.0))


class SvmModel:
    """Soft-margin RBF SVM state after SMO training.

    ``classes`` maps the two original labels to internal y = -1/+1 in sorted
    order; a decision value of exactly zero predicts ``classes[0]``.
    """

    def __init__(self, X, y_signed, alpha, bias, gamma, C, classes, converged):
        self.X = X
        self.y_signed = y_signed
        self.alpha = alpha
        self.bias = bias
        self.gamma = gamma
        self.C = C
        self.classes = classes
        self.converged = converged

    @property
    def support_indices(self):
        return np.flatnonzero(self.alpha > 0.0)


def svm_decision(model: SvmModel, X: np.ndarray):
    """f(x) = sum_i alpha_i y_i K(x_i, x) + b; scalar for a single point."""
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    K = rbf_kernel(np.atleast_2d(X), model.X, model.gamma)
    vals = K @ (model.alpha * model.y_signed) + model.bias
    return float(vals[0]) if single else vals


def svm_predict(model: SvmModel, X: np.ndarray):
    """Label by the sign of the decision value (0 falls to classes[0])."""
    vals = svm_decision(model, X)
    if np.isscalar(vals):
        return int(model.classes[1] if vals > 0 else model.classes[0])
    return np.where(vals > 0, model.classes[1], model.classes[0]).astype(np.int64)


_BOUND_EPS = 1e-8  # alpha this close to 0 or C counts as at the bound


def kkt_violation(model: SvmModel) -> float:
    """Largest violation of the dual KKT conditions over the training set.

    alpha=0 demands margin >= 1, alpha=C demands margin <= 1, interior alpha
    demands margin = 1; the return value is how far the worst point strays.
    """
    margins = model.y_signed * svm_decision(model, model.X)
    a, C = model.alpha, model.C
    worst = 0.0
    at_zero = a <= _BOUND_EPS * C
    at_C = a >= C * (1.0 - _BOUND_EPS)
    interior = ~at_zero & ~at_C
    if at_zero.any():
        worst = max(worst, float(np.max(1.0 - margins[at_zero], initial=0.0)))
    if at_C.any():
        worst = max(worst, float(np.max(margins[at_C] - 1.0, initial=0.0)))
    if interior.any():
        worst = max(worst, float(np.max(np.abs(margins[interior] - 1.0))))
    return worst


def svm_train(X: np.ndarray, labels: np.ndarray, C: float = 1.0,
              gamma: float | None = None, tol: float = 1e-3,
              max_passes: int = 10, max_total_passes: int = 1000) -> SvmModel:
    """SMO solver for the soft-margin dual with an RBF kernel.

    ``gamma`` defaults to 1/d.  Deterministic: the first multiplier is taken
    in index order and its partner maximizes |E_i - E_j|.  Terminates after
    ``max_passes`` consecutive sweeps without an alpha update; if KKT
    violations above ``tol`` remain (or ``max_total_passes`` is hit first) the
    best iterate is returned under an SvmConvergenceWarning.
    """
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if X.ndim != 2 or len(X) != len(labels):
        raise ValueError("X must be (n, d) with one label per row")
    classes = np.unique(labels)
    if len(classes) != 2:
        raise ValueError(f"need exactly two classes, got {classes.tolist()}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if gamma is None:
        gamma = 1.0 / X.shape[1]

    n = len(X)
    y = np.where(labels == classes[1], 1.0, -1.0)
    K = rbf_kernel(X, X, gamma)
    alpha = np.zeros(n)
    b = 0.0
    E = -y.copy()  # f(x) - y with all alpha zero

    def take_step(i, j):
        nonlocal b, E
        if i == j:
            return False
        if y[i] != y[j]:
            L = max(0.0, alpha[j] - alpha[i])
            H = min(C, C + alpha[j] - alpha[i])
        else:
            L = max(0.0, alpha[i] + alpha[j] - C)
            H = min(C, alpha[i] + alpha[j])
        if L >= H:
            return False
        eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
        if eta >= 0:
            return False
        aj_new = np.clip(alpha[j] - y[j] * (E[i] - E[j]) / eta, L, H)
        if abs(aj_new - alpha[j]) < 1e-7 * (aj_new + alpha[j] + 1e-7):
            return False
        ai_new = alpha[i] + y[i] * y[j] * (alpha[j] - aj_new)
        # snap to the box so bound tests stay exact (1-ulp drift otherwise
        # leaves points classified as interior that no step can move)
        if aj_new < _BOUND_EPS * C:
            aj_new = 0.0
        elif aj_new > C * (1.0 - _BOUND_EPS):
            aj_new = C
        if ai_new < _BOUND_EPS * C:
            ai_new = 0.0
        elif ai_new > C * (1.0 - _BOUND_EPS):
            ai_new = C
        d_i, d_j = ai_new - alpha[i], aj_new - alpha[j]
        b1 = b - E[i] - y[i] * d_i * K[i, i] - y[j] * d_j * K[i, j]
        b2 = b - E[j] - y[i] * d_i * K[i, j] - y[j] * d_j * K[j, j]
        if 0.0 < ai_new < C:
            b_new = b1
        elif 0.0 < aj_new < C:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)
        E += y[i] * d_i * K[i] + y[j] * d_j * K[j] + (b_new - b)
        alpha[i], alpha[j] = ai_new, aj_new
        b = b_new
        return True

    quiet_passes = 0
    total = 0
    while quiet_passes < max_passes and total < max_total_passes:
        changed = 0
        for i in range(n):
            r = y[i] * E[i]
            if (r < -tol and alpha[i] < C) or (r > tol and alpha[i] > 0):
                j = int(np.argmax(np.abs(E[i] - E)))
                if take_step(i, j):
                    changed += 1
                    continue
                # second-choice heuristic failed; sweep partners in order
                for j in range(n):
                    if take_step(i, j):
                        changed += 1
                        break
        total += 1
        quiet_passes = 0 if changed else quiet_passes + 1

    model = SvmModel(X, y, alpha, b, gamma, C, classes,
                     converged=total < max_total_passes)
    if kkt_violation(model) > tol:
        model.converged = False
        warnings.warn(
            f"SMO stopped after {total} passes with max KKT violation "
            f"{kkt_violation(model):.2e} > tol {tol:g}; returning best iterate",
            SvmConvergenceWarning, stacklevel=2)
    return model
