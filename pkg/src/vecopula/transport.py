"""Empirical vector ranks via the discrete quadratic optimal transport problem.

The ranks of a sample ``y_1..y_n`` in R^d are the permutation of a reference
grid ``u_1..u_n`` in [0, 1]^d that minimises ``sum_i ||y_i - u_sigma(i)||^2``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import qmc
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from vecopula import _lsa
from vecopula._validation import BlockStructure, check_observations

GRID_SCHEMES = ("auto", "lattice", "halton", "random")

# final auction tolerance, relative to (cost span / n); the exact phase does the rest
_AUCTION_EPS = 1e-4
_BRUTE_FORCE_MAX = 10


@dataclass(frozen=True)
class RankGrid:
    """``n`` reference points in [0, 1]^d discretising the uniform law."""

    points: np.ndarray
    scheme: str
    seed: int | None = None

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def n(self):
        return self.points.shape[0]

    def __len__(self):
        return self.n


def _lattice_side(n, d):
    m = int(round(n ** (1.0 / d)))
    for cand in (m - 1, m, m + 1):
        if cand >= 1 and cand**d == n:
            return cand
    return None


def make_grid(n, d, scheme="auto", seed=None):
    """Build a reference grid of ``n`` points in [0, 1]^d.

    ``lattice`` uses the cell centres ``((i_1 - 1/2)/m, ..., (i_d - 1/2)/m)``
    and needs ``n = m**d``.  ``halton`` takes points 1..n of the unscrambled
    Halton sequence in the first ``d`` prime bases (the origin is skipped).
    ``random`` draws iid uniforms from ``seed``.  ``auto`` picks the lattice
    when ``n`` is a perfect ``d``-th power and Halton otherwise.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if int(d) != d or d < 1:
        raise ValueError(f"d must be a positive integer, got {d!r}")
    n, d = int(n), int(d)
    if scheme not in GRID_SCHEMES:
        raise ValueError(f"unknown grid scheme {scheme!r}; expected one of {GRID_SCHEMES}")

    m = _lattice_side(n, d)
    if scheme == "auto":
        scheme = "lattice" if m is not None else "halton"

    if scheme == "lattice":
        if m is None:
            raise ValueError(
                f"lattice grid needs n = m**d for an integer m; n={n} is not a {d}-th power"
            )
        centres = (np.arange(1, m + 1) - 0.5) / m
        pts = np.array(list(itertools.product(centres, repeat=d)), dtype=float)
        return RankGrid(pts.reshape(n, d), "lattice")
    if scheme == "halton":
        engine = qmc.Halton(d, scramble=False)
        engine.fast_forward(1)
        return RankGrid(engine.random(n), "halton")
    rng = np.random.default_rng(seed)
    return RankGrid(rng.random((n, d)), "random", seed)


def squared_cost_matrix(obs, grid):
    """Matrix of squared Euclidean distances ``||y_i - u_j||^2``."""
    y = check_observations(obs)
    u = grid.points if isinstance(grid, RankGrid) else np.asarray(grid, dtype=float)
    if u.ndim != 2:
        raise ValueError("grid points must form a 2-d array")
    if y.shape[1] != u.shape[1]:
        raise ValueError(f"dimension mismatch: observations d={y.shape[1]}, grid d={u.shape[1]}")
    if y.shape[0] != u.shape[0]:
        raise ValueError(
            f"need as many grid points as observations ({u.shape[0]} != {y.shape[0]})"
        )
    return cdist(y, u, metric="sqeuclidean")


@dataclass(frozen=True)
class VectorRankAssignment:
    """Optimal bijection between observations (rows) and grid points (columns).

    ``permutation[i]`` is the grid index matched to observation ``i``.
    """

    permutation: np.ndarray
    cost: float
    grid: RankGrid | None = None

    @property
    def ranks(self):
        if self.grid is None:
            raise AttributeError("assignment was computed from a bare cost matrix")
        return self.grid.points[self.permutation]


def _check_cost(cost):
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ValueError(f"cost matrix must be square, got shape {cost.shape}")
    if cost.shape[0] == 0:
        raise ValueError("cost matrix is empty")
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost matrix has non-finite entries")
    return np.ascontiguousarray(cost)


def _tie_tolerance(cost):
    return 1e-12 * max(1.0, float(np.abs(cost).max()))


def _lexicographic_refinement(cost, col4row, u, v):
    """Move to the lexicographically smallest optimal permutation.

    Every optimal matching lives on the tight edges of an optimal dual pair,
    so alternative optima are alternating cycles in that graph.  Rows are
    fixed in order, each taking the smallest column reachable by such a cycle.
    """
    tight = (cost - u[:, None] - v[None, :]) <= _tie_tolerance(cost)
    if tight.sum(axis=1).max() <= 1:
        return col4row
    n = cost.shape[0]
    col4row = col4row.copy()
    row4col = np.empty(n, dtype=np.int64)
    row4col[col4row] = np.arange(n)
    adjacency = [np.flatnonzero(tight[i]) for i in range(n)]

    for i in range(n):
        c = col4row[i]
        for j in adjacency[i]:
            if j >= c:
                break
            start = row4col[j]
            if start < i:
                continue
            path = _alternating_path(start, c, j, i, adjacency, row4col, col4row)
            if path is None:
                continue
            # start takes path[0], the owner of path[0] takes path[1], ..., ending at c
            rows = [start] + [row4col[k] for k in path[:-1]]
            col4row[i] = j
            row4col[j] = i
            for r, k in zip(rows, path):
                col4row[r] = k
                row4col[k] = r
            break
    return col4row


def _alternating_path(start, target, banned, first_free, adjacency, row4col, col4row):
    """Columns of a tight alternating path from row ``start`` to column ``target``.

    Rows below ``first_free`` are fixed and their columns unavailable.
    """
    parent = {}
    frontier = [start]
    seen_rows = {start}
    while frontier:
        nxt = []
        for r in frontier:
            for k in adjacency[r]:
                if k == banned or k in parent:
                    continue
                owner = row4col[k]
                if k != target and owner < first_free:
                    continue
                parent[k] = r
                if k == target:
                    cols = [k]
                    r_back = parent[k]
                    while r_back != start:
                        k_back = col4row[r_back]
                        cols.append(k_back)
                        r_back = parent[k_back]
                    return cols[::-1]
                if owner not in seen_rows:
                    seen_rows.add(owner)
                    nxt.append(owner)
        frontier = nxt
    return None


def solve_assignment(cost):
    """Exact minimum-cost perfect matching for a square cost matrix.

    Ties between optimal permutations are broken towards the
    lexicographically smallest ``permutation`` array.
    """
    cost = _check_cost(cost)
    n = cost.shape[0]
    span = float(cost.max() - cost.min())
    if span == 0.0:
        perm = np.arange(n)
    else:
        prices = _lsa.auction_prices(cost, _AUCTION_EPS * span / n)
        col4row, u, v = _lsa.shortest_augmenting_path(cost, -prices)
        perm = _lexicographic_refinement(cost, np.asarray(col4row), u, v)
    total = float(cost[np.arange(n), perm].sum())
    return VectorRankAssignment(np.asarray(perm, dtype=np.int64), total)


def brute_force_assignment(cost):
    """Exhaustive search over all permutations; a test oracle for ``n <= 10``."""
    cost = _check_cost(cost)
    n = cost.shape[0]
    if n > _BRUTE_FORCE_MAX:
        raise ValueError(f"brute force is limited to n <= {_BRUTE_FORCE_MAX}, got n={n}")
    tol = _tie_tolerance(cost)
    if n == 0:
        return VectorRankAssignment(np.zeros(0, dtype=np.int64), 0.0)
    tails = _lex_permutations(n - 1)
    rows = np.arange(n)
    # one chunk per leading element keeps memory at (n-1)! rows
    chunks = []
    for first in range(n):
        rest = np.delete(rows, first)
        perms = np.column_stack([np.full(len(tails), first), rest[tails]])
        chunks.append((perms, cost[rows, perms].sum(axis=1)))
    best = min(totals.min() for _, totals in chunks)
    # lexicographic order across chunks, so the first hit is the smallest tied permutation
    for perms, totals in chunks:
        hits = np.flatnonzero(totals <= best + tol)
        if hits.size:
            perm = perms[hits[0]].astype(np.int64)
            return VectorRankAssignment(perm, float(cost[rows, perm].sum()))
    raise AssertionError("unreachable")


def _lex_permutations(m):
    """All permutations of ``range(m)`` as rows, in lexicographic order."""
    perms = np.zeros((1, 0), dtype=np.int8)
    for k in range(1, m + 1):
        # prepend each leading value, relabelling the rest above it
        blocks = [np.column_stack([np.full(len(perms), lead), perms + (perms >= lead)]) for lead in range(k)]
        perms = np.concatenate(blocks).astype(np.int8)
    return perms


def vector_rank_assignment(obs, grid):
    assignment = solve_assignment(squared_cost_matrix(obs, grid))
    return VectorRankAssignment(assignment.permutation, assignment.cost, grid)


def empirical_vector_ranks(obs, grid=None, scheme="auto", seed=None):
    """Empirical vector ranks of the rows of ``obs``.

    Returns an ``(n, d)`` array whose rows are the grid points, each used once.
    """
    y = check_observations(obs)
    if grid is None:
        grid = make_grid(y.shape[0], y.shape[1], scheme, seed)
    return vector_rank_assignment(y, grid).ranks


def block_vector_ranks(obs, blocks, scheme="auto", seed=None):
    """Empirical vector ranks computed separately within each block of columns."""
    y = check_observations(obs)
    blocks = BlockStructure.coerce(blocks, y.shape[1])
    out = np.empty_like(y)
    seeds = np.random.SeedSequence(seed).spawn(blocks.K) if scheme == "random" else [None] * blocks.K
    for sl, ss in zip(blocks.slices, seeds):
        grid_seed = None if ss is None else int(ss.generate_state(1)[0])
        out[:, sl] = empirical_vector_ranks(y[:, sl], scheme=scheme, seed=grid_seed)
    return out


class VectorRankTransformer(TransformerMixin, BaseEstimator):
    """Map a sample to its blockwise empirical vector ranks.

    Ranks are a property of the sample as a whole, so ``transform`` ranks
    whatever sample it receives; ``fit`` only records the expected width and
    block layout.

    Parameters
    ----------
    dims : sequence of int or None
        Block dimensions ``(d_1, ..., d_K)``.  ``None`` treats all columns as
        one block.
    grid : {"auto", "lattice", "halton", "random"}
        Reference grid scheme.
    random_state : int or None
        Seed for the ``random`` grid scheme.
    """

    def __init__(self, dims=None, grid="auto", random_state=None):
        self.dims = dims
        self.grid = grid
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_observations(X)
        self.blocks_ = BlockStructure.coerce(self.dims, X.shape[1])
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "blocks_")
        X = check_observations(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        return block_vector_ranks(X, self.blocks_, self.grid, self.random_state)
