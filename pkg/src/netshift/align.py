"""Seed-set alignment of two embeddings."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .graph import signature_signs

RANK_TOL = 1e-10
PINV_RCOND = 1e-12
# relative disagreement between the two indefinite relaxations that triggers a warning
DISAGREE_TOL = 0.5


class DegenerateSeedError(ValueError):
    """The seed rows do not determine an alignment."""


class AlignmentWarning(UserWarning):
    pass


@dataclass(frozen=True)
class AlignmentMap:
    """Map ``W`` taking network-1 coordinates to network-2 coordinates.

    ``kind`` is ``"orthogonal"``, ``"indefinite_avg"`` or ``"rectangular"``.
    """

    W: np.ndarray
    kind: str
    seeds: tuple[int, ...] = ()


def _check_pair(X1_S, X2_S):
    X1_S = np.asarray(X1_S, dtype=float)
    X2_S = np.asarray(X2_S, dtype=float)
    if X1_S.ndim != 2 or X2_S.ndim != 2 or X1_S.shape[0] != X2_S.shape[0]:
        raise ValueError(f"seed blocks must be 2-D with equal row counts, got {X1_S.shape} and {X2_S.shape}")
    return X1_S, X2_S


def _full_column_rank(X, what):
    s = np.linalg.svd(X, compute_uv=False)
    if s.size < X.shape[1] or s[-1] < RANK_TOL * s[0] or s[0] == 0:
        raise DegenerateSeedError(f"{what} is rank deficient (singular values {s})")


def procrustes(X1_S, X2_S, seeds=()) -> AlignmentMap:
    """Orthogonal ``W`` minimising ``||X1_S W - X2_S||_F`` (reflections allowed)."""
    X1_S, X2_S = _check_pair(X1_S, X2_S)
    if X1_S.shape != X2_S.shape:
        raise ValueError(f"shapes differ: {X1_S.shape} vs {X2_S.shape}")
    d = X1_S.shape[1]
    if X1_S.shape[0] < d:
        raise DegenerateSeedError(f"need at least {d} seeds, got {X1_S.shape[0]}")
    U, s, Vt = np.linalg.svd(X1_S.T @ X2_S)
    if s[0] == 0 or s[-1] < RANK_TOL * s[0]:
        raise DegenerateSeedError(f"cross-product of seed blocks is rank deficient (singular values {s})")
    return AlignmentMap(U @ Vt, "orthogonal", tuple(int(i) for i in seeds))


def indefinite_align(X1_S, X2_S, d_plus: int, d_minus: int, seeds=()) -> AlignmentMap:
    """Relaxed indefinite Procrustes: average of two least-squares solutions.

    ``W_L = pinv(X1_S) X2_S`` and ``W_R = (pinv(X2_S I) X1_S I).T`` with
    ``I = I_{d+,d-}``. The average is returned as is, not projected onto the
    indefinite orthogonal group.
    """
    X1_S, X2_S = _check_pair(X1_S, X2_S)
    d = d_plus + d_minus
    if X1_S.shape[1] != d or X2_S.shape[1] != d:
        raise ValueError(f"seed blocks must have {d} columns")
    if X1_S.shape[0] < d:
        raise DegenerateSeedError(f"need at least {d} seeds, got {X1_S.shape[0]}")
    _full_column_rank(X1_S, "network-1 seed block")
    _full_column_rank(X2_S, "network-2 seed block")
    Id = signature_signs(d_plus, d_minus)
    W_L = np.linalg.pinv(X1_S, rcond=PINV_RCOND) @ X2_S
    W_R = (np.linalg.pinv(X2_S * Id, rcond=PINV_RCOND) @ (X1_S * Id)).T
    W = 0.5 * (W_L + W_R)
    gap = np.linalg.norm(W_L - W_R) / max(np.linalg.norm(W), np.finfo(float).tiny)
    if gap > DISAGREE_TOL:
        warnings.warn(
            f"indefinite relaxations disagree (relative gap {gap:.3g}); seeds may be ill-conditioned",
            AlignmentWarning,
            stacklevel=2,
        )
    return AlignmentMap(W, "indefinite_avg", tuple(int(i) for i in seeds))


def rectangular_align(X1_S, X2_S, seeds=()) -> AlignmentMap:
    """Unconstrained least squares ``W = pinv(X1_S) X2_S`` for ``d1 <= d2``."""
    X1_S, X2_S = _check_pair(X1_S, X2_S)
    d1, d2 = X1_S.shape[1], X2_S.shape[1]
    if d1 > d2:
        raise ValueError(f"rectangular alignment needs d1 <= d2, got d1={d1}, d2={d2}")
    if X1_S.shape[0] < d2:
        raise DegenerateSeedError(f"need at least {d2} seeds, got {X1_S.shape[0]}")
    _full_column_rank(X1_S, "network-1 seed block")
    W = np.linalg.pinv(X1_S, rcond=PINV_RCOND) @ X2_S
    return AlignmentMap(W, "rectangular", tuple(int(i) for i in seeds))


def align(e1, e2, seeds) -> AlignmentMap:
    """Pick the alignment matching the two embeddings and fit it on ``seeds``.

    Different dimensions use the rectangular map, a nonzero negative part of
    the signature the indefinite map, and everything else orthogonal
    Procrustes.
    """
    seeds = np.asarray(seeds, dtype=int)
    X1_S, X2_S = e1.Xhat[seeds], e2.Xhat[seeds]
    if e1.d != e2.d:
        return rectangular_align(X1_S, X2_S, seeds)
    if e1.signature != e2.signature:
        raise ValueError(f"signatures differ: {e1.signature} vs {e2.signature}")
    if e1.d_minus > 0:
        return indefinite_align(X1_S, X2_S, e1.d_plus, e1.d_minus, seeds)
    return procrustes(X1_S, X2_S, seeds)
