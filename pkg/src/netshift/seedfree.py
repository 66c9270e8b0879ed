"""Shift detection without seeds: sample candidate seed sets, filter, score, expand."""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._rng import stream
from .align import AlignmentWarning, DegenerateSeedError
from .embed import Embedding, embed
from .graph import Graph
from .pairfilter import (
    FilterStats,
    candidate_passes,
    sample_feasible_candidates,
    ttilde,
    with_threshold,
)
from .shift import CovarianceWarning, EmbeddedPair, ShiftReport, _signature

SAMPLING_MODES = ("uniform_random", "feasible_direct")


class NoViableCandidateError(RuntimeError):
    """Every candidate seed set was rejected; ``trace`` holds the details."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class SeedFreeConfig:
    """Parameters of a seed-free run.

    ``dim`` is an int or a signature ``(d_plus, d_minus)``; ``dim2`` sets a
    different dimension for network 2. ``L`` defaults to the larger of the
    two dimensions.
    """

    dim: int | tuple[int, int] = 3
    dim2: int | tuple[int, int] | None = None
    L: int | None = None
    M: int = 1000
    alpha: float = 0.05
    alpha_tilde: float = 0.3
    rng_seed: int = 0
    sampling_mode: str = "uniform_random"
    max_restarts: int | None = None
    threads: int = 1

    def __post_init__(self):
        s1 = _signature(self.dim)
        s2 = _signature(self.dim2) if self.dim2 is not None else s1
        d1, d2 = sum(s1), sum(s2)
        if min(s1 + s2) < 0 or d1 < 1 or d2 < 1:
            raise ValueError(f"invalid dimensions {self.dim}, {self.dim2}")
        if self.L is None:
            object.__setattr__(self, "L", max(d1, d2))
        if self.L < max(d1, 1):
            raise ValueError(f"L must be at least {max(d1, 1)}, got {self.L}")
        if self.M < 1:
            raise ValueError("M must be positive")
        for name in ("alpha", "alpha_tilde"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if self.sampling_mode not in SAMPLING_MODES:
            raise ValueError(f"sampling_mode must be one of {SAMPLING_MODES}")

    @property
    def signature1(self) -> tuple[int, int]:
        return _signature(self.dim)

    @property
    def signature2(self) -> tuple[int, int]:
        return _signature(self.dim2) if self.dim2 is not None else self.signature1


@dataclass(frozen=True)
class CandidateRecord:
    seeds: tuple[int, ...]
    passed_filter: bool
    h: int
    degenerate: bool = False


@dataclass
class SeedFreeTrace:
    candidates: list[CandidateRecord]
    chosen: int
    expanded_seeds: np.ndarray
    selected_report: ShiftReport
    final: ShiftReport
    fell_back: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def chosen_seeds(self) -> tuple[int, ...]:
        return self.candidates[self.chosen].seeds

    @property
    def n_passed(self) -> int:
        return sum(c.passed_filter for c in self.candidates)


def required_candidates(p: float, d: int, q: float) -> int:
    """Smallest ``M`` with ``1 - (1 - p^d)^M >= q``: ``ceil(ln(1 - q) / ln(1 - p^d))``."""
    if not 0 < p <= 1 or not 0 < q < 1 or d < 1:
        raise ValueError("need 0 < p <= 1, 0 < q < 1 and d >= 1")
    miss = 1.0 - p**d
    if miss <= 0:
        return 1
    return max(1, math.ceil(math.log1p(-q) / math.log1p(-(p**d))))


def uniform_candidates(n: int, L: int, M: int, rng_seed: int, max_draws: int | None = None) -> list[tuple[int, ...]]:
    """Up to ``M`` distinct uniform ``L``-subsets of ``range(n)``; duplicates are redrawn."""
    if L > n:
        raise ValueError(f"seed size {L} exceeds vertex count {n}")
    rng = stream(rng_seed, "uniform-candidates")
    total = math.comb(n, L)
    target = min(M, total)
    if max_draws is None:
        max_draws = 50 * M
    out: list[tuple[int, ...]] = []
    seen: set[tuple[int, ...]] = set()
    draws = 0
    while len(out) < target and draws < max_draws + target:
        draws += 1
        key = tuple(sorted(int(v) for v in rng.choice(n, size=L, replace=False)))
        if key in seen:
            continue
        seen.add(key)
        out.append(key)
    return out


def _score(pair: EmbeddedPair, fs: FilterStats, S, alpha):
    if not candidate_passes(fs, S):
        return CandidateRecord(S, False, 0), None
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", AlignmentWarning)
            warnings.simplefilter("ignore", CovarianceWarning)
            rep = pair.report(S, alpha)
    except DegenerateSeedError:
        return CandidateRecord(S, True, 0, degenerate=True), None
    return CandidateRecord(S, True, int(rep.unshifted.size)), rep


def run_seedfree_embedded(e1: Embedding, e2: Embedding, config: SeedFreeConfig) -> tuple[ShiftReport, SeedFreeTrace]:
    """Seed-free detection on precomputed embeddings (see :func:`run_seedfree`)."""
    pair = EmbeddedPair(e1, e2)
    fs = with_threshold(ttilde(e1, e2), config.L, config.alpha_tilde)

    if config.sampling_mode == "feasible_direct":
        cands = sample_feasible_candidates(fs, config.L, config.M, config.rng_seed, config.max_restarts)
    else:
        cands = uniform_candidates(pair.n, config.L, config.M, config.rng_seed, config.max_restarts)

    def job(S):
        return _score(pair, fs, S, config.alpha)

    if config.threads > 1:
        with ThreadPoolExecutor(config.threads) as ex:
            scored = list(ex.map(job, cands))
    else:
        scored = [job(S) for S in cands]
    records = [r for r, _ in scored]

    viable = [i for i, (r, rep) in enumerate(scored) if rep is not None]
    if not viable:
        trace = SeedFreeTrace(records, -1, np.empty(0, dtype=int), None, None)
        raise NoViableCandidateError(
            f"none of {len(records)} candidates survived filtering and alignment", trace
        )
    # first index attaining the maximum
    chosen = max(viable, key=lambda i: (records[i].h, -i))
    selected = scored[chosen][1]

    need = max(e1.d, e2.d)
    expanded = selected.unshifted
    fell_back = False
    final = selected
    if expanded.size < need:
        warnings.warn(
            f"expanded seed set has {expanded.size} < {need} vertices; keeping the selected candidate",
            UserWarning,
            stacklevel=2,
        )
        fell_back = True
    else:
        try:
            final = pair.report(expanded, config.alpha)
        except DegenerateSeedError:
            warnings.warn("expanded seed set is degenerate; keeping the selected candidate", UserWarning, stacklevel=2)
            fell_back = True
    trace = SeedFreeTrace(records, chosen, expanded, selected, final, fell_back)
    return final, trace


def run_seedfree(g1: Graph, g2: Graph, config: SeedFreeConfig, solver: str = "auto") -> tuple[ShiftReport, SeedFreeTrace]:
    """Shift detection when no unshifted vertices are known.

    Embeds both graphs and builds the pairwise filter once, samples ``M``
    candidate seed sets of size ``L``, scores each candidate that passes the
    filter by the size of its estimated unshifted set, takes the best one
    (smallest index on ties), and reruns the seeded procedure with the
    resulting unshifted set as the new seed set.
    """
    if g1.n != g2.n:
        raise ValueError(f"graphs have different vertex counts ({g1.n} vs {g2.n})")
    e1 = embed(g1, *config.signature1, solver=solver)
    e2 = embed(g2, *config.signature2, solver=solver)
    return run_seedfree_embedded(e1, e2, config)
