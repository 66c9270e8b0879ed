"""Mirror curves for a sequence of networks.

Every pair of snapshots is compared with the seed-free procedure; the
resulting distance matrix is flattened by classical MDS and then reduced to
a single coordinate by arc length along the time-ordered chain.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from ._rng import child_seed
from .embed import _orient, embed
from .seedfree import SeedFreeConfig, run_seedfree_embedded
from .shift import ShiftReport


@dataclass(frozen=True)
class MirrorCurve:
    D: np.ndarray
    points: np.ndarray
    iso: np.ndarray
    labels: tuple[str, ...]


def pairwise_reports(graphs, config: SeedFreeConfig, solver: str = "auto") -> dict[tuple[int, int], ShiftReport]:
    """Seed-free reports for every pair ``i < j``.

    Each graph is embedded once. Pair ``(i, j)`` runs with the sub-seed
    ``child_seed(config.rng_seed, "pair", i, j)``, so the result does not
    depend on evaluation order or thread count.
    """
    graphs = list(graphs)
    if len(graphs) < 2:
        raise ValueError("need at least two graphs")
    n = graphs[0].n
    for t, g in enumerate(graphs):
        if g.n != n:
            raise ValueError(f"graph {t} has {g.n} vertices, graph 0 has {n}")
    if config.dim2 is not None:
        raise ValueError("mirror comparisons need a single dimension for all snapshots")
    embs = [embed(g, *config.signature1, solver=solver) for g in graphs]
    pairs = list(itertools.combinations(range(len(graphs)), 2))

    def job(ij):
        i, j = ij
        cfg = replace(config, rng_seed=child_seed(config.rng_seed, "pair", i, j), threads=1)
        report, _ = run_seedfree_embedded(embs[i], embs[j], cfg)
        return report

    if config.threads > 1:
        with ThreadPoolExecutor(config.threads) as ex:
            reports = list(ex.map(job, pairs))
    else:
        reports = [job(ij) for ij in pairs]
    return dict(zip(pairs, reports))


def _fill(T, reports, value):
    D = np.zeros((T, T))
    for (i, j), rep in reports.items():
        D[i, j] = D[j, i] = value(rep)
    return D


def network_distance_matrix(graphs, config: SeedFreeConfig, reports=None) -> np.ndarray:
    """``D[i, j]`` = fraction of vertices estimated as shifted between snapshots ``i`` and ``j``."""
    graphs = list(graphs)
    if reports is None:
        reports = pairwise_reports(graphs, config)
    return _fill(len(graphs), reports, lambda r: r.shifted.size / r.n)


def vertex_distance_matrix(graphs, k: int, config: SeedFreeConfig, reports=None) -> np.ndarray:
    """``D[i, j]`` = norm of vertex ``k``'s estimated shift, or 0 when ``k`` is estimated unshifted."""
    graphs = list(graphs)
    if not 0 <= k < graphs[0].n:
        raise ValueError(f"vertex {k} out of range for n={graphs[0].n}")
    if reports is None:
        reports = pairwise_reports(graphs, config)

    def value(r):
        return 0.0 if r.unshifted_mask[k] else float(np.linalg.norm(r.Yhat[k]))

    return _fill(len(graphs), reports, value)


def cmds(D, r: int) -> np.ndarray:
    """Classical multidimensional scaling of a distance matrix into ``r`` dimensions.

    Negative eigenvalues of the double-centred matrix are set to zero, so
    non-Euclidean input still yields real coordinates.
    """
    D = np.asarray(D, dtype=float)
    T = D.shape[0]
    if D.ndim != 2 or D.shape != (T, T):
        raise ValueError(f"D must be square, got {D.shape}")
    if not 1 <= r <= T:
        raise ValueError(f"r must lie in [1, {T}], got {r}")
    if not np.allclose(D, D.T) or np.any(np.diagonal(D) != 0) or np.any(D < 0):
        raise ValueError("D must be symmetric, nonnegative, with zero diagonal")
    J = np.eye(T) - 1.0 / T
    B = -0.5 * J @ (D * D) @ J
    w, V = scipy.linalg.eigh(0.5 * (B + B.T))
    order = np.argsort(w)[::-1][:r]
    w = np.maximum(w[order], 0.0)
    return _orient(V[:, order]) * np.sqrt(w)


def iso_mirror(points) -> np.ndarray:
    """Cumulative arc length along consecutive points, starting at 0."""
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    if P.shape[0] < 2:
        raise ValueError("need at least two points")
    steps = np.linalg.norm(np.diff(P, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(steps)])


def build_mirror(graphs, config: SeedFreeConfig, r: int = 2, vertex: int | None = None, labels=None) -> MirrorCurve:
    """Distance matrix, CMDS points and iso-mirror for a sequence of snapshots."""
    graphs = list(graphs)
    T = len(graphs)
    if labels is None:
        labels = [str(t) for t in range(T)]
    if len(labels) != T:
        raise ValueError("one label per graph required")
    reports = pairwise_reports(graphs, config)
    if vertex is None:
        D = network_distance_matrix(graphs, config, reports)
    else:
        D = vertex_distance_matrix(graphs, vertex, config, reports)
    points = cmds(D, min(r, T))
    return MirrorCurve(D, points, iso_mirror(points), tuple(labels))
