"""Adjacency spectral embedding (RDPG and signed GRDPG) and elbow-based dimension selection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .graph import Graph, signature_signs

# Above this size the extremal eigenpairs come from ARPACK instead of a full
# dense decomposition.
DENSE_MAX_N = 1000


class EmbeddingError(ValueError):
    """The requested embedding cannot be computed."""


@dataclass(frozen=True)
class Embedding:
    """Estimated latent positions ``Xhat = Uhat |diag(eigvals)|^(1/2)``.

    ``eigvals`` lists the ``d_plus`` largest positive eigenvalues in
    descending order followed by the ``d_minus`` most negative ones in order
    of decreasing magnitude.
    """

    Xhat: np.ndarray
    eigvals: np.ndarray
    Uhat: np.ndarray
    d_plus: int
    d_minus: int = 0

    @property
    def n(self) -> int:
        return self.Xhat.shape[0]

    @property
    def d(self) -> int:
        return self.Xhat.shape[1]

    @property
    def signature(self) -> tuple[int, int]:
        return (self.d_plus, self.d_minus)

    @property
    def signs(self) -> np.ndarray:
        return signature_signs(self.d_plus, self.d_minus)


def _orient(V: np.ndarray) -> np.ndarray:
    # largest-magnitude entry positive; argmax returns the lowest index on ties
    idx = np.argmax(np.abs(V), axis=0)
    s = np.sign(V[idx, np.arange(V.shape[1])])
    s[s == 0] = 1.0
    return V * s


def _arpack_v0(n: int) -> np.ndarray:
    # fixed start vector keeps ARPACK output reproducible
    return np.random.default_rng(20240531).standard_normal(n)


def _zero_tol(n, scale):
    # eigenvalues this small are round-off, not signal of either sign
    return n * np.finfo(float).eps * max(scale, 1.0)


def _dense_pairs(M, d_plus, d_minus):
    w, V = scipy.linalg.eigh(M)
    tol = _zero_tol(M.shape[0], np.max(np.abs(w)))
    pos = np.flatnonzero(w > tol)[::-1]
    neg = np.flatnonzero(w < -tol)
    if pos.size < d_plus or neg.size < d_minus:
        raise EmbeddingError(
            f"requested signature ({d_plus}, {d_minus}) but the matrix has "
            f"{pos.size} positive and {neg.size} negative eigenvalues"
        )
    order = np.concatenate([pos[:d_plus], neg[:d_minus]]).astype(int)
    return w[order], V[:, order]


def _arpack_side(M, k, which):
    n = M.shape[0]
    if k == 0:
        return np.empty(0), np.empty((n, 0))
    try:
        w, V = scipy.sparse.linalg.eigsh(M, k=k, which=which, v0=_arpack_v0(n), tol=0)
    except scipy.sparse.linalg.ArpackNoConvergence as exc:
        raise EmbeddingError(f"eigensolver did not converge: {exc}") from exc
    order = np.argsort(w)[::-1] if which == "LA" else np.argsort(w)
    return w[order], V[:, order]


def _arpack_pairs(M, d_plus, d_minus):
    wp, Vp = _arpack_side(M, d_plus, "LA")
    wn, Vn = _arpack_side(M, d_minus, "SA")
    tol = _zero_tol(M.shape[0], np.max(np.abs(np.concatenate([wp, wn, [0.0]]))))
    if np.any(wp <= tol) or np.any(wn >= -tol):
        raise EmbeddingError(
            f"requested signature ({d_plus}, {d_minus}) but found "
            f"{int(np.sum(wp > 0))} positive and {int(np.sum(wn < 0))} negative eigenvalues"
        )
    return np.concatenate([wp, wn]), np.hstack([Vp, Vn])


def embed_matrix(M, d_plus: int, d_minus: int = 0, solver: str = "auto") -> Embedding:
    """Spectral embedding of any real symmetric matrix.

    Used directly on noiseless probability matrices in tests; :func:`embed`
    is the graph front end.

    Parameters
    ----------
    M : (n, n) array_like
        Symmetric matrix.
    d_plus, d_minus : int
        Number of positive / negative eigenpairs to keep.
    solver : {"auto", "dense", "arpack"}
        ``auto`` picks dense for ``n <= DENSE_MAX_N``.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    d = d_plus + d_minus
    if d_plus < 0 or d_minus < 0 or not 1 <= d <= n:
        raise EmbeddingError(f"need 1 <= d_plus + d_minus <= n, got ({d_plus}, {d_minus}) with n={n}")
    if solver == "auto":
        solver = "dense" if n <= DENSE_MAX_N else "arpack"
    # ARPACK requires k < n
    if solver == "arpack" and max(d_plus, d_minus) >= n - 1:
        solver = "dense"
    if solver == "dense":
        w, V = _dense_pairs(M, d_plus, d_minus)
    elif solver == "arpack":
        w, V = _arpack_pairs(M, d_plus, d_minus)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    V = _orient(V)
    return Embedding(V * np.sqrt(np.abs(w)), w, V, d_plus, d_minus)


def embed(g: Graph, d_plus: int, d_minus: int = 0, solver: str = "auto") -> Embedding:
    """Adjacency spectral embedding of ``g`` with signature ``(d_plus, d_minus)``."""
    return embed_matrix(g.adj.astype(float), d_plus, d_minus, solver=solver)


def scree(M) -> np.ndarray:
    """All eigenvalues of a symmetric matrix (or graph), sorted by decreasing magnitude."""
    if isinstance(M, Graph):
        M = M.adj.astype(float)
    w = scipy.linalg.eigvalsh(np.asarray(M, dtype=float))
    return w[np.argsort(-np.abs(w), kind="stable")]


def profile_loglik(values, q: int) -> float:
    """Two-group Gaussian profile log-likelihood of splitting ``values`` after ``q`` entries.

    Each group gets its own mean; the variance is pooled with ``p - 2``
    degrees of freedom as in Zhu and Ghodsi (2006).
    """
    x = np.asarray(values, dtype=float)
    p = x.size
    a, b = x[:q], x[q:]
    ss = np.sum((a - a.mean()) ** 2) + np.sum((b - b.mean()) ** 2)
    var = ss / max(p - 2, 1)
    if var <= 0:
        return np.inf
    return -0.5 * p * np.log(2 * np.pi * var) - ss / (2 * var)


def select_dimension(eigvals_all, max_d: int | None = None) -> int:
    """Elbow of a scree plot by maximising the profile log-likelihood.

    ``eigvals_all`` is sorted by decreasing magnitude; only magnitudes are
    used. Returns the split point in ``[1, max_d]`` (``max_d`` defaults to
    ``len(eigvals_all) - 1``). A flat scree returns 1.
    """
    x = np.abs(np.asarray(eigvals_all, dtype=float))
    if x.size == 0:
        raise ValueError("eigvals_all is empty")
    if x.size == 1:
        return 1
    if max_d is None:
        max_d = x.size - 1
    if not 1 <= max_d <= x.size - 1:
        raise ValueError(f"max_d must lie in [1, {x.size - 1}], got {max_d}")
    if np.ptp(x) == 0:
        return 1
    ll = np.array([profile_loglik(x, q) for q in range(1, max_d + 1)])
    return int(np.argmax(ll)) + 1
