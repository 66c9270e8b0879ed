"""Graph data model, latent-position samplers and planted-shift scenarios."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._rng import child_seed, stream

P_TOL = 1e-9


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph stored as a dense hollow 0/1 adjacency matrix."""

    adj: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.adj)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {a.shape}")
        if not np.isin(a, (0, 1)).all():
            raise ValueError("adjacency entries must be 0 or 1")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diagonal(a) != 0):
            raise ValueError("adjacency must have a zero diagonal")
        a = a.astype(np.uint8, copy=True)
        a.setflags(write=False)
        object.__setattr__(self, "adj", a)

    @property
    def n(self) -> int:
        return self.adj.shape[0]

    @property
    def n_edges(self) -> int:
        return int(self.adj.sum() // 2)

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Build from an iterable of ``(u, v)`` pairs; duplicates collapse, loops are rejected."""
        a = np.zeros((n, n), dtype=np.uint8)
        e = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if e.size:
            if e.min() < 0 or e.max() >= n:
                raise ValueError(f"edge endpoint outside [0, {n})")
            if np.any(e[:, 0] == e[:, 1]):
                raise ValueError("self-loops are not allowed")
            a[e[:, 0], e[:, 1]] = 1
            a[e[:, 1], e[:, 0]] = 1
        return cls(a)

    def edges(self) -> np.ndarray:
        """Edge list ``(u, v)`` with ``u < v``, sorted."""
        u, v = np.nonzero(np.triu(self.adj, 1))
        return np.column_stack([u, v])


@dataclass(frozen=True)
class LatentModel:
    """Latent positions ``X`` with indefinite signature ``(d_plus, d_minus)``.

    The connection probability matrix is ``X @ diag(signs) @ X.T``; plain
    RDPG is the case ``d_minus == 0``.
    """

    X: np.ndarray
    d_plus: int
    d_minus: int = 0

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        if X.ndim != 2:
            raise ValueError("latent positions must be an n x d matrix")
        if self.d_plus < 0 or self.d_minus < 0 or self.d_plus + self.d_minus != X.shape[1]:
            raise ValueError(
                f"signature ({self.d_plus}, {self.d_minus}) does not match d = {X.shape[1]}"
            )
        X.setflags(write=False)
        object.__setattr__(self, "X", X)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def signature(self) -> tuple[int, int]:
        return (self.d_plus, self.d_minus)

    @property
    def signs(self) -> np.ndarray:
        return signature_signs(self.d_plus, self.d_minus)

    def probability(self) -> np.ndarray:
        return (self.X * self.signs) @ self.X.T


@dataclass(frozen=True)
class ShiftScenario:
    """Two latent models with planted shifts: ``X2 = X1 @ W_true + Y_true``.

    ``blocks1``/``blocks2`` hold block memberships when the scenario comes from
    a block model and are ``None`` otherwise.
    """

    model1: LatentModel
    model2: LatentModel
    unshifted: np.ndarray
    W_true: np.ndarray
    Y_true: np.ndarray
    blocks1: np.ndarray | None = None
    blocks2: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.model1.n

    @property
    def unshifted_mask(self) -> np.ndarray:
        m = np.zeros(self.n, dtype=bool)
        m[self.unshifted] = True
        return m

    @property
    def shifted(self) -> np.ndarray:
        return np.flatnonzero(~self.unshifted_mask)


def signature_signs(d_plus: int, d_minus: int = 0) -> np.ndarray:
    """Diagonal of ``I_{d+,d-}`` as a vector."""
    return np.concatenate([np.ones(d_plus), -np.ones(d_minus)])


def sample_graph(model: LatentModel, rng_seed: int) -> Graph:
    """Draw one graph with independent ``Bernoulli(P[s, t])`` edges for ``s < t``."""
    P = model.probability()
    lo, hi = P.min(), P.max()
    if lo < -P_TOL or hi > 1 + P_TOL:
        raise ValueError(f"probabilities outside [0, 1]: min {lo:.3g}, max {hi:.3g}")
    n = model.n
    iu = np.triu_indices(n, 1)
    draws = stream(rng_seed, "graph").random(iu[0].size) < np.clip(P[iu], 0.0, 1.0)
    a = np.zeros((n, n), dtype=np.uint8)
    a[iu] = draws
    a += a.T
    return Graph(a)


def sample_pair(scenario: ShiftScenario, rng_seed: int) -> tuple[Graph, Graph]:
    """Sample both networks of a scenario from independent child streams."""
    return (
        sample_graph(scenario.model1, child_seed(rng_seed, "graph", 1)),
        sample_graph(scenario.model2, child_seed(rng_seed, "graph", 2)),
    )


def make_rdpg_latents(n: int, d: int, rng_seed: int) -> LatentModel:
    """Entries ``sqrt(U) / sqrt(d)`` with ``U ~ Uniform(0, 1)``, so every dot product lies in [0, 1]."""
    if not n >= d >= 1:
        raise ValueError(f"need n >= d >= 1, got n={n}, d={d}")
    X = np.sqrt(stream(rng_seed, "latents").random((n, d))) / math.sqrt(d)
    return LatentModel(X, d, 0)


def _n_shifted(n: int, shift_fraction: float) -> int:
    if not 0.0 <= shift_fraction <= 1.0:
        raise ValueError(f"shift_fraction must lie in [0, 1], got {shift_fraction}")
    # ceil of a float product can overshoot by one on representation error
    return min(n, math.ceil(round(shift_fraction * n, 9)))


def make_rdpg_scenario(n: int, d: int, shift_fraction: float = 0.5, rng_seed: int = 0) -> ShiftScenario:
    """Shared random latents on the leading vertices, independently redrawn latents on the rest."""
    m = _n_shifted(n, shift_fraction)
    X1 = make_rdpg_latents(n, d, child_seed(rng_seed, "latents", 1)).X
    X2 = X1.copy()
    if m:
        X2[n - m:] = np.sqrt(stream(rng_seed, "latents", 2).random((m, d))) / math.sqrt(d)
    return ShiftScenario(
        model1=LatentModel(X1, d, 0),
        model2=LatentModel(X2, d, 0),
        unshifted=np.arange(n - m),
        W_true=np.eye(d),
        Y_true=X2 - X1,
        meta={"kind": "rdpg", "n": n, "d": d, "shift_fraction": shift_fraction, "rng_seed": rng_seed},
    )


def _orient_columns(V: np.ndarray) -> np.ndarray:
    """Flip column signs so each column's largest-magnitude entry is positive (first index on ties)."""
    idx = np.argmax(np.abs(V), axis=0)
    s = np.sign(V[idx, np.arange(V.shape[1])])
    s[s == 0] = 1.0
    return V * s


def block_latents(B: np.ndarray) -> tuple[np.ndarray, int, int]:
    """Factor ``B = L diag(signs) L.T`` with ``L = V |Lambda|^(1/2)``.

    Columns are ordered positive eigenvalues first (descending), then negative
    ones by decreasing magnitude.
    """
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError("block matrix must be square")
    if not np.allclose(B, B.T, atol=1e-12):
        raise ValueError("block matrix must be symmetric")
    if B.min() < 0 or B.max() > 1:
        raise ValueError("block probabilities must lie in [0, 1]")
    w, V = np.linalg.eigh(B)
    if np.min(np.abs(w)) < 1e-9:
        raise ValueError(f"block matrix is rank deficient (eigenvalues {w})")
    pos = np.flatnonzero(w > 0)[::-1]
    neg = np.flatnonzero(w < 0)
    order = np.concatenate([pos, neg])
    w, V = w[order], _orient_columns(V[:, order])
    return V * np.sqrt(np.abs(w)), pos.size, neg.size


def _reassign(z: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    # uniform over the k - 1 blocks other than the current one
    return (z + rng.integers(1, k, size=z.size)) % k


def make_sbm_scenario(n: int, B, shift_fraction: float = 0.5, rng_seed: int = 0) -> ShiftScenario:
    """Block model pair where the trailing vertices switch blocks.

    Network-1 memberships are uniform over the blocks. The last
    ``ceil(shift_fraction * n)`` vertices each move to a uniformly chosen
    different block in network 2. Latent rows are the block factors from
    :func:`block_latents`, so ``P = Z B Z.T`` exactly and ``W_true = I``.
    """
    B = np.asarray(B, dtype=float)
    L, dp, dm = block_latents(B)
    k = B.shape[0]
    m = _n_shifted(n, shift_fraction)
    z1 = stream(rng_seed, "assign", 1).integers(0, k, size=n)
    z2 = z1.copy()
    if m:
        z2[n - m:] = _reassign(z1[n - m:], k, stream(rng_seed, "assign", 2))
    X1, X2 = L[z1], L[z2]
    return ShiftScenario(
        model1=LatentModel(X1, dp, dm),
        model2=LatentModel(X2, dp, dm),
        unshifted=np.arange(n - m),
        W_true=np.eye(k),
        Y_true=X2 - X1,
        blocks1=z1,
        blocks2=z2,
        meta={"kind": "sbm", "n": n, "B": B.tolist(), "shift_fraction": shift_fraction, "rng_seed": rng_seed},
    )


def make_rank_mismatch_scenario(n: int, B, shift_fraction: float = 0.5, rng_seed: int = 0) -> ShiftScenario:
    """Network 1 uses only the first two blocks; network 2 may use all three.

    Shifted vertices move to one of the two other blocks of ``B``, so some land
    in the third block and network 2 gains a dimension. The unshifted set is
    the vertices whose membership did not change.
    """
    B = np.asarray(B, dtype=float)
    if B.shape != (3, 3):
        raise ValueError("rank-mismatch scenario expects a 3 x 3 block matrix")
    block_latents(B)  # validates B
    m = _n_shifted(n, shift_fraction)
    z1 = stream(rng_seed, "assign", 1).integers(0, 2, size=n)
    z2 = z1.copy()
    if m:
        z2[n - m:] = _reassign(z1[n - m:], 3, stream(rng_seed, "assign", 2))

    used1 = np.unique(z1)
    used2 = np.unique(z2)
    L1, dp1, dm1 = block_latents(B[np.ix_(used1, used1)])
    L2, dp2, dm2 = block_latents(B[np.ix_(used2, used2)])
    row1 = {b: i for i, b in enumerate(used1)}
    row2 = {b: i for i, b in enumerate(used2)}
    X1 = L1[[row1[b] for b in z1]]
    X2 = L2[[row2[b] for b in z2]]

    missing = [b for b in used1 if b not in row2]
    if missing:
        raise ValueError(f"blocks {missing} vanish from network 2; increase n")
    # L1 is square and invertible, so W_true is the unique map on U
    W = np.linalg.solve(L1, L2[[row2[b] for b in used1]])
    unshifted = np.flatnonzero(z1 == z2)
    return ShiftScenario(
        model1=LatentModel(X1, dp1, dm1),
        model2=LatentModel(X2, dp2, dm2),
        unshifted=unshifted,
        W_true=W,
        Y_true=X2 - X1 @ W,
        blocks1=z1,
        blocks2=z2,
        meta={"kind": "rankmix", "n": n, "B": B.tolist(), "shift_fraction": shift_fraction, "rng_seed": rng_seed},
    )


SBM_B = np.array([[0.7, 0.1, 0.1], [0.1, 0.65, 0.1], [0.1, 0.1, 0.6]])
GRDPG_B = np.array([[0.7, 0.1, 0.1], [0.1, 0.3, 0.8], [0.1, 0.8, 0.5]])
