"""Vertex-wise shift estimation and testing with a known seed set.

The per-vertex covariance of an estimated shift row is a sum of two
sandwich terms, one per network::

    H_i[k] = I (X'X)^-1 X' diag(Xi_i[k]) X (X'X)^-1 I      (X = Xhat_i)
    Gamma[k] = H_2[k] + W' H_1[k] W

where ``Xi_i[k, l] = P_i[k, l] (1 - P_i[k, l])`` and ``I`` is the signature
matrix (identity for RDPG). All ``n`` sandwiches come out of one
``(n, n) @ (n, d*d)`` product, so the full table costs ``O(n^2 d^2)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .align import AlignmentMap, align
from .embed import Embedding, embed
from .graph import Graph, ShiftScenario

VAR_FLOOR = 1e-10
COND_MAX = 1e12
SINGULAR_TOL = 1e-12


class SingularEmbeddingError(ValueError):
    """``Xhat' Xhat`` is numerically singular."""


class CovarianceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ShiftReport:
    """Outcome of one seeded run.

    ``unshifted`` holds the sorted indices of the estimated unshifted set;
    ``T`` and ``p`` may contain NaN for vertices whose covariance could not
    be inverted (those are never counted as unshifted).
    """

    Yhat: np.ndarray
    T: np.ndarray
    p: np.ndarray
    unshifted: np.ndarray
    alignment: AlignmentMap
    dof: int
    alpha: float

    @property
    def n(self) -> int:
        return self.Yhat.shape[0]

    @property
    def unshifted_mask(self) -> np.ndarray:
        m = np.zeros(self.n, dtype=bool)
        m[self.unshifted] = True
        return m

    @property
    def shifted(self) -> np.ndarray:
        return np.flatnonzero(~self.unshifted_mask)


@dataclass(frozen=True)
class CovarianceEstimate:
    Gamma_hat: np.ndarray  # (n, d, d)
    Xi1: np.ndarray  # (n, n); row k is the variance diagonal for vertex k in network 1
    Xi2: np.ndarray


def _signature(dim) -> tuple[int, int]:
    if isinstance(dim, (int, np.integer)):
        return int(dim), 0
    dp, dm = dim
    return int(dp), int(dm)


def estimate_shifts(e1: Embedding, e2: Embedding, amap: AlignmentMap) -> np.ndarray:
    """``Yhat = Xhat2 - Xhat1 @ W``."""
    if e1.n != e2.n:
        raise ValueError(f"embeddings have different vertex counts ({e1.n} vs {e2.n})")
    W = amap.W
    if W.shape != (e1.d, e2.d):
        raise ValueError(f"alignment is {W.shape}, embeddings need ({e1.d}, {e2.d})")
    return e2.Xhat - e1.Xhat @ W


def estimate_probability(e: Embedding) -> np.ndarray:
    """``Xhat I Xhat'`` clipped entrywise to [0, 1]."""
    X = e.Xhat
    P = (X * e.signs) @ X.T if e.d_minus else X @ X.T
    return np.clip(P, 0.0, 1.0, out=P)


def variance_table(P: np.ndarray, floor: float = 0.0) -> np.ndarray:
    V = P * (1.0 - P)
    if floor > 0:
        np.maximum(V, floor, out=V)
    return V


def _gram_inverse(X):
    G = X.T @ X
    w, Q = np.linalg.eigh(G)
    if w[-1] <= 0 or w[0] < SINGULAR_TOL * w[-1]:
        raise SingularEmbeddingError(f"X'X is singular (eigenvalues {w})")
    return (Q / w) @ Q.T


def sandwich_terms(X: np.ndarray, Xi: np.ndarray, signs=None) -> np.ndarray:
    """``I (X'X)^-1 X' diag(Xi[k]) X (X'X)^-1 I`` for every row ``k`` of ``Xi``.

    ``Xi`` may be ``(n, n)`` or a single ``(n,)`` row; the output is
    ``(rows, d, d)`` or ``(d, d)`` accordingly.
    """
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    Gi = _gram_inverse(X)
    if signs is not None:
        Gi = Gi * np.asarray(signs, dtype=float)  # right-multiply by I
    outer = (X[:, :, None] * X[:, None, :]).reshape(n, d * d)
    S = (np.asarray(Xi) @ outer).reshape(*np.shape(Xi)[:-1], d, d)
    H = Gi.T @ S @ Gi
    return 0.5 * (H + np.swapaxes(H, -1, -2))


def combine_terms(H1: np.ndarray, H2: np.ndarray, W: np.ndarray) -> np.ndarray:
    """``H2 + W' H1 W`` (batched over the leading axis)."""
    G = H2 + W.T @ H1 @ W
    return 0.5 * (G + np.swapaxes(G, -1, -2))


def gamma_hat(e1: Embedding, e2: Embedding, amap: AlignmentMap, k: int) -> np.ndarray:
    """Plug-in covariance of the shift estimate for vertex ``k``."""
    P1, P2 = estimate_probability(e1), estimate_probability(e2)
    xi1 = variance_table(P1[k], VAR_FLOOR)
    xi2 = variance_table(P2[k], VAR_FLOOR)
    H1 = sandwich_terms(e1.Xhat, xi1, e1.signs if e1.d_minus else None)
    H2 = sandwich_terms(e2.Xhat, xi2, e2.signs if e2.d_minus else None)
    return combine_terms(H1, H2, amap.W)


def covariance_estimate(e1: Embedding, e2: Embedding, amap: AlignmentMap) -> CovarianceEstimate:
    """Plug-in covariances for all vertices at once."""
    pair = EmbeddedPair(e1, e2)
    return CovarianceEstimate(pair.gammas(amap.W), pair.Xi1, pair.Xi2)


def gamma_true(scenario: ShiftScenario, k: int) -> np.ndarray:
    """Population covariance for vertex ``k`` from the true latent positions."""
    m1, m2 = scenario.model1, scenario.model2
    xi1 = variance_table(np.clip(m1.probability()[k], 0, 1))
    xi2 = variance_table(np.clip(m2.probability()[k], 0, 1))
    H1 = sandwich_terms(m1.X, xi1, m1.signs if m1.d_minus else None)
    H2 = sandwich_terms(m2.X, xi2, m2.signs if m2.d_minus else None)
    return combine_terms(H1, H2, scenario.W_true)


def test_statistics(Yhat: np.ndarray, gammas: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``T_k = y_k' Gamma_k^-1 y_k`` and chi-square upper-tail p-values.

    Covariances that are not positive definite or have condition number
    above ``COND_MAX`` give NaN for that vertex, with a warning.
    """
    Yhat = np.asarray(Yhat, dtype=float)
    dof = Yhat.shape[1]
    w, V = np.linalg.eigh(gammas)
    with np.errstate(divide="ignore", invalid="ignore"):
        bad = ~(w[:, 0] > 0) | (w[:, -1] > COND_MAX * w[:, 0])
        z = np.einsum("kij,ki->kj", V, Yhat)
        T = np.sum(z * z / w, axis=1)
    if bad.any():
        warnings.warn(
            f"{int(bad.sum())} vertex covariance(s) not invertible; statistics set to NaN",
            CovarianceWarning,
            stacklevel=2,
        )
        T[bad] = np.nan
    T = np.maximum(T, 0.0)  # NaN passes through
    return T, stats.chi2.sf(T, dof)


# keep pytest from collecting the function above as a test
test_statistics.__test__ = False


def benjamini_hochberg(p, alpha: float) -> np.ndarray:
    """Step-up FDR control; returns the sorted indices that are *not* rejected.

    Ties in ``p`` are ordered by index. NaN entries are treated as rejected
    and excluded from the ranking.
    """
    p = np.asarray(p, dtype=float)
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    finite = np.isfinite(p)
    if np.any((p[finite] < 0) | (p[finite] > 1)):
        raise ValueError("p-values must lie in [0, 1]")
    idx = np.flatnonzero(finite)
    m = idx.size
    keep = finite.copy()
    if m:
        order = idx[np.argsort(p[idx], kind="stable")]
        below = np.flatnonzero(p[order] <= alpha * np.arange(1, m + 1) / m)
        if below.size:
            keep[order[: below[-1] + 1]] = False
    return np.flatnonzero(keep)


class EmbeddedPair:
    """Two embeddings plus every seed-independent quantity derived from them.

    Probability estimates, variance tables and the per-vertex sandwich terms
    are computed once; :meth:`report` then costs ``O(n d^3)`` per seed set.
    """

    def __init__(self, e1: Embedding, e2: Embedding):
        if e1.n != e2.n:
            raise ValueError(f"embeddings have different vertex counts ({e1.n} vs {e2.n})")
        self.e1, self.e2 = e1, e2
        self.P1 = estimate_probability(e1)
        self.P2 = estimate_probability(e2)
        self.Xi1 = variance_table(self.P1, VAR_FLOOR)
        self.Xi2 = variance_table(self.P2, VAR_FLOOR)
        self.H1 = sandwich_terms(e1.Xhat, self.Xi1, e1.signs if e1.d_minus else None)
        self.H2 = sandwich_terms(e2.Xhat, self.Xi2, e2.signs if e2.d_minus else None)

    @property
    def n(self) -> int:
        return self.e1.n

    @property
    def dof(self) -> int:
        return self.e2.d

    def gammas(self, W: np.ndarray) -> np.ndarray:
        return combine_terms(self.H1, self.H2, W)

    def report(self, seeds, alpha: float = 0.05, amap: AlignmentMap | None = None) -> ShiftReport:
        """Alignment, shift estimate, statistics and BH selection for one seed set."""
        if amap is None:
            amap = align(self.e1, self.e2, seeds)
        Yhat = estimate_shifts(self.e1, self.e2, amap)
        T, p = test_statistics(Yhat, self.gammas(amap.W))
        U = benjamini_hochberg(p, alpha)
        return ShiftReport(Yhat, T, p, U, amap, self.dof, alpha)


def run_seeded(
    g1: Graph,
    g2: Graph,
    dim,
    seeds,
    alpha: float = 0.05,
    dim2=None,
    solver: str = "auto",
) -> ShiftReport:
    """Shift detection with a known seed set of unshifted vertices.

    Parameters
    ----------
    g1, g2 : Graph
        Networks on the same vertex set.
    dim : int or (int, int)
        Embedding dimension, or signature ``(d_plus, d_minus)``.
    seeds : sequence of int
        Vertices assumed unshifted; at least as many as the dimension.
    alpha : float
        FDR level for the Benjamini-Hochberg step.
    dim2 : int or (int, int), optional
        Dimension of network 2 when it differs from network 1.
    """
    if g1.n != g2.n:
        raise ValueError(f"graphs have different vertex counts ({g1.n} vs {g2.n})")
    s1 = _signature(dim)
    s2 = _signature(dim2) if dim2 is not None else s1
    e1 = embed(g1, *s1, solver=solver)
    e2 = embed(g2, *s2, solver=solver)
    return EmbeddedPair(e1, e2).report(seeds, alpha)
