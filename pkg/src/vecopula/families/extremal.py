"""Independence, comonotonic and countermonotonic vector copulas."""

from __future__ import annotations

import numpy as np

from vecopula._validation import BlockStructure, check_random_state, check_unit_points

KINDS = ("independence", "comonotonic", "countermonotonic")


def _check_kind(kind, blocks):
    if kind not in KINDS:
        raise ValueError(f"unknown extremal copula {kind!r}; expected one of {KINDS}")
    if kind == "comonotonic" and len(set(blocks.dims)) != 1:
        raise ValueError("the comonotonic vector copula needs blocks of equal dimension")
    if kind == "countermonotonic" and (blocks.K != 2 or blocks.dims[0] != blocks.dims[1]):
        raise ValueError("the countermonotonic vector copula needs two blocks of equal dimension")


def extremal_cdf(u, blocks, kind):
    """Distribution function at the block-stacked points ``u`` (shape ``(n, d)``)."""
    blocks = BlockStructure.coerce(blocks)
    _check_kind(kind, blocks)
    u = check_unit_points(u, blocks.d)
    if kind == "independence":
        return np.prod(u, axis=1)
    parts = np.stack(blocks.split(u))
    if kind == "comonotonic":
        return np.prod(parts.min(axis=0), axis=1)
    # P(1 - u2 <= U <= u1) coordinatewise
    return np.prod(np.maximum(parts[0] + parts[1] - 1.0, 0.0), axis=1)


def extremal_sample(kind, blocks, n, rng=None):
    blocks = BlockStructure.coerce(blocks)
    _check_kind(kind, blocks)
    rng = check_random_state(rng)
    if kind == "independence":
        return rng.random((n, blocks.d))
    base = rng.random((n, blocks.dims[0]))
    if kind == "comonotonic":
        return np.tile(base, (1, blocks.K))
    return np.hstack([base, 1.0 - base])
