"""Error and accuracy measures against ground truth."""
from __future__ import annotations

import numpy as np
import scipy.linalg
import scipy.optimize


def two_to_inf(A) -> float:
    """Largest row Euclidean norm."""
    A = np.asarray(A, dtype=float)
    return float(np.max(np.linalg.norm(A, axis=1))) if A.size else 0.0


def best_rotation(Yhat, Y) -> np.ndarray:
    """Orthogonal ``W`` minimising ``||Yhat W - Y||_F``; identity when either side vanishes."""
    Yhat = np.asarray(Yhat, dtype=float)
    Y = np.asarray(Y, dtype=float)
    d = Yhat.shape[1]
    M = Yhat.T @ Y
    if not np.any(M):
        return np.eye(d)
    U, _, Vt = np.linalg.svd(M)
    return U @ Vt


def aligned_error(Yhat, Y, norm: str = "2inf", relative: bool = False) -> float:
    """``||Yhat W - Y||`` after the Frobenius-optimal orthogonal ``W``.

    ``norm`` is ``"2inf"`` or ``"fro"``. With differing column counts the
    narrower matrix is zero-padded. ``relative`` divides by the same norm of ``Y``.
    """
    Yhat = np.asarray(Yhat, dtype=float)
    Y = np.asarray(Y, dtype=float)
    d = max(Yhat.shape[1], Y.shape[1])
    Yhat = np.pad(Yhat, ((0, 0), (0, d - Yhat.shape[1])))
    Y = np.pad(Y, ((0, 0), (0, d - Y.shape[1])))
    R = Yhat @ best_rotation(Yhat, Y) - Y
    f = two_to_inf if norm == "2inf" else (lambda A: float(np.linalg.norm(A)))
    if norm not in ("2inf", "fro"):
        raise ValueError(f"unknown norm {norm!r}")
    err = f(R)
    return err / f(Y) if relative else err


def _skew(theta, d):
    S = np.zeros((d, d))
    S[np.tril_indices(d, -1)] = theta
    return S - S.T


def min_two_to_inf_error(Yhat, Y, n_starts: int = 3, rng_seed: int = 0) -> float:
    """``min over orthogonal W of ||Yhat W - Y||_{2->inf}``, by local search.

    Starts from the Frobenius-optimal ``W`` and from random rotations within
    both components of the orthogonal group (``det = +1`` and ``-1``);
    each start is refined with Nelder-Mead on the exponential-map
    coordinates. The result never exceeds the Frobenius-aligned error.
    """
    Yhat = np.asarray(Yhat, dtype=float)
    Y = np.asarray(Y, dtype=float)
    d = Yhat.shape[1]
    W0 = best_rotation(Yhat, Y)
    best = two_to_inf(Yhat @ W0 - Y)
    if d == 1:
        return min(best, two_to_inf(-Yhat - Y))
    k = d * (d - 1) // 2
    rng = np.random.default_rng(rng_seed)
    flip = np.eye(d)
    flip[-1, -1] = -1.0
    for F in (np.eye(d), flip):
        base = W0 @ F
        for s in range(n_starts):
            start = np.zeros(k) if s == 0 else rng.normal(0.0, 1.0, k)

            def objective(theta):
                return two_to_inf(Yhat @ (base @ scipy.linalg.expm(_skew(theta, d))) - Y)

            res = scipy.optimize.minimize(
                objective, start, method="Nelder-Mead", options={"xatol": 1e-7, "fatol": 1e-10, "maxiter": 400 * k}
            )
            best = min(best, float(res.fun))
    return best


def accuracy(estimated_unshifted, true_unshifted, n: int) -> float:
    """Fraction of vertices whose shifted/unshifted label is recovered."""
    a = np.zeros(n, dtype=bool)
    b = np.zeros(n, dtype=bool)
    a[np.asarray(estimated_unshifted, dtype=int)] = True
    b[np.asarray(true_unshifted, dtype=int)] = True
    return float(np.mean(a == b))


def fdp(estimated_unshifted, true_unshifted, n: int) -> float:
    """Share of vertices declared shifted that are truly unshifted (0 when none declared)."""
    declared = np.ones(n, dtype=bool)
    declared[np.asarray(estimated_unshifted, dtype=int)] = False
    truly_null = np.zeros(n, dtype=bool)
    truly_null[np.asarray(true_unshifted, dtype=int)] = True
    r = declared.sum()
    return float((declared & truly_null).sum() / r) if r else 0.0
