from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.utils.validation import check_array


@dataclass(frozen=True)
class BlockStructure:
    """Partition of a ``d``-vector into ``K`` consecutive blocks of sizes ``dims``."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(k) for k in self.dims)
        if len(dims) == 0:
            raise ValueError("at least one block is required")
        if any(k < 1 for k in dims) or any(int(k) != k for k in self.dims):
            raise ValueError(f"block dimensions must be positive integers, got {self.dims!r}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def coerce(cls, dims, d=None):
        if isinstance(dims, BlockStructure):
            blocks = dims
        elif dims is None:
            if d is None:
                raise ValueError("cannot infer block structure without a dimension")
            blocks = cls((d,))
        else:
            blocks = cls(tuple(dims))
        if d is not None and blocks.d != d:
            raise ValueError(f"blocks {blocks.dims} cover d={blocks.d}, data has d={d}")
        return blocks

    @property
    def K(self):
        return len(self.dims)

    @property
    def d(self):
        return sum(self.dims)

    @property
    def offsets(self):
        return tuple(np.cumsum((0,) + self.dims).tolist())

    @property
    def slices(self):
        o = self.offsets
        return [slice(o[k], o[k + 1]) for k in range(self.K)]

    def split(self, X):
        X = np.asarray(X)
        return [X[..., sl] for sl in self.slices]

    def block_of(self, M, k, l):
        """Block ``(k, l)`` of a ``d x d`` matrix."""
        s = self.slices
        return np.asarray(M)[s[k], s[l]]


def check_observations(X, min_rows=1):
    """2-d float array of finite observations."""
    X = check_array(X, dtype=float, ensure_2d=False, ensure_min_samples=min_rows)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    return X


def check_unit_points(u, d=None):
    """Points in [0, 1]^d as a 2-d array; a single point is promoted to one row."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u.reshape(1, -1)
    if u.ndim != 2:
        raise ValueError("expected an (n, d) array of points")
    if d is not None and u.shape[1] != d:
        raise ValueError(f"expected points in dimension {d}, got {u.shape[1]}")
    if np.any(np.isnan(u)) or np.any((u < 0) | (u > 1)):
        raise ValueError("points must lie in [0, 1]^d")
    return u


def check_random_state(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def check_spd(M, name="matrix"):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square")
    if not np.allclose(M, M.T, atol=1e-12, rtol=0):
        raise ValueError(f"{name} must be symmetric")
    try:
        np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        raise ValueError(f"{name} is not positive definite") from None
    return 0.5 * (M + M.T)
