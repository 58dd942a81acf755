"""Top-k eigenpairs of the signed adjacency matrix and per-node spectral coordinates.

The solver is a Lanczos iteration with full reorthogonalization.  Full
reorthogonalization is the simple cure for the loss of orthogonality that
plain Lanczos suffers in floating point; it costs O(n * m^2) for a basis of
size m, which is cheap at the scale this package targets (k of a few dozen,
n up to a few tens of thousands).

Row u of the resulting coordinate matrix is node u's projection onto the
k leading eigenvectors.  Eigenvectors are sign-canonicalized (largest-
magnitude entry positive, first index on ties) so the embedding is a
deterministic function of the graph.
"""

from __future__ import annotations

import numpy as np

from .graph import SignedGraph


class EigenConvergenceError(Exception):
    """Lanczos failed to reach the residual tolerance within the iteration budget."""

    def __init__(self, msg, residuals=None):
        super().__init__(msg)
        self.residuals = residuals


class SpectralEmbedding:
    """Eigenvalues (descending) and per-node coordinates of a k-dimensional spectral space."""

    def __init__(self, eigenvalues: np.ndarray, coordinates: np.ndarray,
                 normalized: bool = False):
        self.eigenvalues = np.asarray(eigenvalues, dtype=np.float64)
        self.coordinates = np.asarray(coordinates, dtype=np.float64)
        self.normalized = normalized
        if self.coordinates.ndim != 2 or self.coordinates.shape[1] != len(self.eigenvalues):
            raise ValueError("coordinates must be (n, k) with one column per eigenvalue")

    @property
    def k(self) -> int:
        return len(self.eigenvalues)

    @property
    def n(self) -> int:
        return self.coordinates.shape[0]

    def __repr__(self):
        return (f"SpectralEmbedding(n={self.n}, k={self.k}, "
                f"normalized={self.normalized})")


def _canonicalize_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-|.| entry is positive (ties: lowest index)."""
    out = vectors.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        if col[np.argmax(np.abs(col))] < 0:
            out[:, j] = -col
    return out


_EXHAUSTIVE_MAX_N = 512


def eigen_top_k(graph: SignedGraph, k: int, tol: float = 1e-8,
                max_iter: int | None = None,
                order: str = "algebraic",
                exhaustive: bool | None = None) -> SpectralEmbedding:
    """Compute the k leading eigenpairs of the signed adjacency matrix.

    ``order="algebraic"`` keeps the k algebraically largest eigenvalues;
    ``order="magnitude"`` keeps the k largest in |.|.  Either way the returned
    eigenvalues are sorted descending by algebraic value, and every returned
    pair satisfies ||A v - lambda v||_2 <= tol.

    The Lanczos start vector is pseudo-random but seeded from (n, edge count),
    so repeated calls on the same graph give identical output.  On breakdown
    (invariant subspace found early) the basis is extended with a fresh
    orthogonalized random vector from the same stream.

    A single-vector Krylov sweep surfaces one copy of each eigenvalue, so
    stopping at the first residual-converged top-k can undercount exact
    multiplicities (disconnected twins, isolated nodes).  With
    ``exhaustive=True`` the basis is instead grown to the full iteration
    budget before extraction, which resolves multiplicities whenever the
    budget reaches n.  Default: exhaustive for n <= 512, early-exit above.

    Raises EigenConvergenceError if the tolerance is not met within max_iter
    basis vectors (default 10 * n, capped at n).
    """
    n = graph.n
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= n={n}, got {k}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if order not in ("algebraic", "magnitude"):
        raise ValueError(f"order must be 'algebraic' or 'magnitude', got {order!r}")
    if max_iter is None:
        max_iter = 10 * n
    if exhaustive is None:
        exhaustive = n <= _EXHAUSTIVE_MAX_N
    m_cap = min(n, max(max_iter, k))  # a basis smaller than k can never produce k pairs

    A = graph.adjacency_matrix()
    matvec = lambda x: A @ x
    rng = np.random.default_rng([n, graph.edge_count])

    def fresh_vector(Q_cols):
        # random vector orthogonalized (twice) against the existing basis
        for _ in range(50):
            q = rng.standard_normal(n)
            for _ in range(2):
                if Q_cols:
                    Qm = np.column_stack(Q_cols)
                    q -= Qm @ (Qm.T @ q)
            norm = np.linalg.norm(q)
            if norm > 1e-8:
                return q / norm
        raise EigenConvergenceError("could not extend Lanczos basis")

    Q: list[np.ndarray] = []
    alphas: list[float] = []
    betas: list[float] = []  # betas[i] couples vector i and i+1; 0 marks a restart

    q = fresh_vector(Q)
    scale = max(1.0, float(np.max(np.abs(A.data))) if A.nnz else 1.0)

    def ritz_pairs():
        m = len(alphas)
        T = np.diag(alphas)
        for i, b in enumerate(betas[:m - 1]):
            T[i, i + 1] = T[i + 1, i] = b
        theta, Y = np.linalg.eigh(T)  # ascending
        return theta, Y

    def try_extract():
        theta, Y = ritz_pairs()
        if order == "magnitude":
            sel = np.argsort(-np.abs(theta), kind="stable")[:k]
        else:
            sel = np.argsort(-theta, kind="stable")[:k]
        sel = sel[np.argsort(-theta[sel], kind="stable")]  # algebraic descending
        Qm = np.column_stack(Q)
        V = Qm @ Y[:, sel]
        lam = theta[sel]
        resid = np.linalg.norm(np.column_stack([matvec(V[:, i]) for i in range(k)])
                               - V * lam, axis=0)
        return lam, V, resid

    check_at = k
    while True:
        u = matvec(q)
        alpha = float(q @ u)
        Q.append(q)
        alphas.append(alpha)
        m = len(Q)

        done_basis = m >= m_cap
        if (not exhaustive and m >= check_at and m >= k) or done_basis:
            lam, V, resid = try_extract()
            if np.all(resid <= tol):
                V = _canonicalize_signs(V)
                return SpectralEmbedding(lam, V, normalized=False)
            if done_basis:
                if m >= n:
                    # full basis: only roundoff keeps us above tol
                    raise EigenConvergenceError(
                        f"residuals {resid} exceed tol={tol} at full basis size {m}",
                        residuals=resid)
                raise EigenConvergenceError(
                    f"no convergence after {m} Lanczos vectors (max_iter={max_iter}); "
                    f"achieved residuals {resid}", residuals=resid)
            check_at = min(m + max(8, k), m_cap)

        r = u - alpha * q
        if m >= 2 and betas[m - 2] != 0.0:
            r -= betas[m - 2] * Q[m - 2]
        # full reorthogonalization against the whole basis
        Qm = np.column_stack(Q)
        r -= Qm @ (Qm.T @ r)
        r -= Qm @ (Qm.T @ r)
        beta = float(np.linalg.norm(r))
        if beta > 1e-12 * scale:
            betas.append(beta)
            q = r / beta
        else:
            # invariant subspace: restart with a fresh direction
            betas.append(0.0)
            q = fresh_vector(Q)


def normalize_coordinates(emb: SpectralEmbedding) -> SpectralEmbedding:
    """Scale each node's coordinate row to unit L2 norm.

    Rows with negligible norm (a node orthogonal to the whole top-k subspace,
    up to solver roundoff) are left as-is instead of being blown up to unit
    length in a noise direction.
    """
    if emb.normalized:
        raise ValueError("embedding is already normalized")
    norms = np.linalg.norm(emb.coordinates, axis=1, keepdims=True)
    tiny = 1e-12 * max(1.0, float(norms.max()))
    safe = np.where(norms > tiny, norms, 1.0)
    return SpectralEmbedding(emb.eigenvalues.copy(), emb.coordinates / safe,
                             normalized=True)


def reconstruction_residual(graph: SignedGraph, emb: SpectralEmbedding) -> float:
    """Relative Frobenius error of the rank-k reconstruction sum(lambda_i v_i v_i^T).

    Computed matrix-free:  ||A - V L V^T||_F^2 expands into ||A||_F^2
    - 2 sum_i lambda_i v_i^T A v_i + sum_ij lambda_i lambda_j (v_i^T v_j)^2.
    Requires the raw (unnormalized) embedding.
    """
    if emb.normalized:
        raise ValueError("reconstruction_residual needs the unnormalized embedding")
    if graph.edge_count == 0:
        raise ValueError("graph has no edges (zero adjacency matrix)")
    A = graph.adjacency_matrix()
    V = emb.coordinates
    lam = emb.eigenvalues
    fro2 = 2.0 * graph.edge_count  # every edge contributes two +-1 entries
    AV = A @ V
    t1 = float(np.sum(lam * np.einsum("ij,ij->j", V, AV)))
    G = V.T @ V
    t2 = float(lam @ ((G * G) @ lam))
    resid2 = max(fro2 - 2.0 * t1 + t2, 0.0)
    return float(np.sqrt(resid2) / np.sqrt(fro2))


def save_embedding(emb: SpectralEmbedding, path) -> None:
    """Write ``node<TAB>c1<TAB>...<TAB>ck`` rows at full decimal precision."""
    with open(path, "w", encoding="utf-8") as fh:
        for u in range(emb.n):
            coords = "\t".join(repr(float(c)) for c in emb.coordinates[u])
            fh.write(f"{u}\t{coords}\n")
