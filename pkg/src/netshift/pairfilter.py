"""Pairwise probability-difference statistics and seed-candidate filtering.

For every vertex pair the difference of estimated connection probabilities
is standardised by a plug-in variance. Only the diagonals of

    Psi[k] = Pi1 diag(Xi1[k]) Pi1 + Pi2 diag(Xi2[k]) Pi2

enter that variance. With ``Pi = Q Q'`` for an orthonormal basis ``Q`` and
``v_l = vec(q_l q_l')``, ``Psi[k]_{ll} = sum_i sum_m Xi_i[k, m] v_m . v_l``,
which is two ``n x d^2`` matrix products per network.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from ._rng import stream
from .embed import Embedding
from .graph import ShiftScenario
from .shift import estimate_probability, variance_table

UPSILON_FLOOR = 1e-12


class SamplingWarning(UserWarning):
    pass


@dataclass(frozen=True)
class FilterStats:
    """Standardised pairwise statistics; ``threshold``/``feasible`` are set by :func:`with_threshold`."""

    Delta_hat: np.ndarray
    Upsilon_hat: np.ndarray
    Ttilde: np.ndarray
    threshold: float | None = None
    feasible: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.Ttilde.shape[0]


def projection_basis(X: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the column space of ``X`` (so ``X (X'X)^-1 X' = Q Q'``)."""
    Q, _ = np.linalg.qr(np.asarray(X, dtype=float))
    return Q


def _vec_outer(Q):
    n, d = Q.shape
    return (Q[:, :, None] * Q[:, None, :]).reshape(n, d * d)


def psi_diagonals(Q1, Xi1, Q2, Xi2) -> np.ndarray:
    """Table ``out[k, l] = Psi[k]_{l, l}``."""
    out = np.zeros(np.shape(Xi1))
    for Q, Xi in ((Q1, Xi1), (Q2, Xi2)):
        V = _vec_outer(Q)
        out += (Xi @ V) @ V.T
    return out


def upsilon_from_parts(Q1, Xi1, Q2, Xi2) -> np.ndarray:
    """Variance table of the probability differences, before flooring."""
    psi = psi_diagonals(Q1, Xi1, Q2, Xi2)
    pi1 = np.sum(Q1 * Q1, axis=1)
    pi2 = np.sum(Q2 * Q2, axis=1)
    U = psi + psi.T
    U += 2.0 * np.outer(pi1, pi1) * Xi1
    U += 2.0 * np.outer(pi2, pi2) * Xi2
    np.fill_diagonal(U, 4.0 * np.diagonal(psi))
    return 0.5 * (U + U.T)


def upsilon_hat(e1: Embedding, e2: Embedding) -> np.ndarray:
    """Plug-in variance table from the two embeddings (unfloored)."""
    Xi1 = variance_table(estimate_probability(e1))
    Xi2 = variance_table(estimate_probability(e2))
    return upsilon_from_parts(projection_basis(e1.Xhat), Xi1, projection_basis(e2.Xhat), Xi2)


def upsilon_true(scenario: ShiftScenario) -> np.ndarray:
    """Population variance table from the true latent positions."""
    m1, m2 = scenario.model1, scenario.model2
    Xi1 = variance_table(np.clip(m1.probability(), 0, 1))
    Xi2 = variance_table(np.clip(m2.probability(), 0, 1))
    return upsilon_from_parts(projection_basis(m1.X), Xi1, projection_basis(m2.X), Xi2)


def ttilde(e1: Embedding, e2: Embedding) -> FilterStats:
    """Standardised differences ``Delta_hat / sqrt(Upsilon_hat)`` for all pairs."""
    if e1.n != e2.n:
        raise ValueError(f"embeddings have different vertex counts ({e1.n} vs {e2.n})")
    P1, P2 = estimate_probability(e1), estimate_probability(e2)
    delta = P1 - P2
    delta = 0.5 * (delta + delta.T)
    ups = upsilon_from_parts(
        projection_basis(e1.Xhat), variance_table(P1), projection_basis(e2.Xhat), variance_table(P2)
    )
    ups = np.maximum(ups, UPSILON_FLOOR)
    return FilterStats(delta, ups, delta / np.sqrt(ups))


def ttilde_entries(e1: Embedding, e2: Embedding, pairs) -> np.ndarray:
    """Standardised differences for selected ``(k, l)`` pairs only.

    Agrees with the full table from :func:`ttilde` but needs only the rows
    of the variance table touched by ``pairs``.
    """
    pairs = np.asarray(pairs, dtype=int).reshape(-1, 2)
    rows = np.unique(pairs)
    Q1, Q2 = projection_basis(e1.Xhat), projection_basis(e2.Xhat)
    P1 = np.clip((e1.Xhat[rows] * e1.signs) @ e1.Xhat.T, 0, 1)
    P2 = np.clip((e2.Xhat[rows] * e2.signs) @ e2.Xhat.T, 0, 1)
    psi = psi_diagonals(Q1, variance_table(P1), Q2, variance_table(P2))
    pos = {int(r): i for i, r in enumerate(rows)}
    pi1 = np.sum(Q1 * Q1, axis=1)
    pi2 = np.sum(Q2 * Q2, axis=1)
    out = np.empty(len(pairs))
    for j, (k, l) in enumerate(pairs):
        a, b = pos[int(k)], pos[int(l)]
        if k == l:
            ups = 4.0 * psi[a, k]
        else:
            ups = (
                psi[a, l]
                + psi[b, k]
                + 2.0 * pi1[k] * pi1[l] * P1[a, l] * (1 - P1[a, l])
                + 2.0 * pi2[k] * pi2[l] * P2[a, l] * (1 - P2[a, l])
            )
        out[j] = (P1[a, l] - P2[a, l]) / np.sqrt(max(ups, UPSILON_FLOOR))
    return out


def bonferroni_threshold(L: int, alpha_tilde: float) -> float:
    """Upper ``alpha_B / 2`` normal quantile with ``alpha_B = alpha_tilde / (L (L + 1) / 2)``."""
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    if not 0 < alpha_tilde < 1:
        raise ValueError(f"alpha_tilde must lie in (0, 1), got {alpha_tilde}")
    alpha_b = alpha_tilde / (L * (L + 1) / 2)
    return float(stats.norm.isf(alpha_b / 2))


def with_threshold(fs: FilterStats, L: int, alpha_tilde: float) -> FilterStats:
    c = bonferroni_threshold(L, alpha_tilde)
    return replace(fs, threshold=c, feasible=np.abs(fs.Ttilde) <= c)


def candidate_passes(fs: FilterStats, S) -> bool:
    """Whether every entry of the ``S x S`` block (diagonal included) is within the threshold."""
    if fs.threshold is None:
        raise ValueError("FilterStats has no threshold; call with_threshold first")
    S = np.asarray(S, dtype=int)
    if S.size == 0:
        raise ValueError("candidate set is empty")
    return bool(np.max(np.abs(fs.Ttilde[np.ix_(S, S)])) <= fs.threshold)


def sample_feasible_candidates(
    fs: FilterStats, L: int, M: int, rng_seed: int, max_restarts: int | None = None
) -> list[tuple[int, ...]]:
    """Grow up to ``M`` distinct size-``L`` sets inside the feasibility mask.

    Each attempt starts from a random vertex with a feasible diagonal and
    repeatedly adds a uniform random vertex feasible with every current
    member; a dead end starts a new attempt. At most ``max_restarts``
    (default ``50 * M``) failed or duplicate attempts are tolerated.
    """
    if L < 1 or M < 1:
        raise ValueError("L and M must be positive")
    if fs.feasible is None:
        raise ValueError("FilterStats has no feasibility mask; call with_threshold first")
    F = np.asarray(fs.feasible, dtype=bool)
    if max_restarts is None:
        max_restarts = 50 * M
    starts = np.flatnonzero(np.diagonal(F))
    if starts.size == 0:
        warnings.warn("no vertex has a feasible diagonal entry", SamplingWarning, stacklevel=2)
        return []
    rng = stream(rng_seed, "feasible")
    ok_diag = np.diagonal(F).copy()
    found: list[tuple[int, ...]] = []
    seen: set[tuple[int, ...]] = set()
    failures = 0
    while len(found) < M and failures <= max_restarts:
        v = int(rng.choice(starts))
        members = [v]
        allowed = ok_diag & F[v]
        allowed[v] = False
        while len(members) < L:
            pool = np.flatnonzero(allowed)
            if pool.size == 0:
                break
            u = int(rng.choice(pool))
            members.append(u)
            allowed &= F[u]
            allowed[u] = False
        key = tuple(sorted(members))
        if len(members) < L or key in seen:
            failures += 1
            continue
        seen.add(key)
        found.append(key)
    if len(found) < M:
        warnings.warn(
            f"only {len(found)} of {M} feasible candidates found after {failures} restarts",
            SamplingWarning,
            stacklevel=2,
        )
    return found
