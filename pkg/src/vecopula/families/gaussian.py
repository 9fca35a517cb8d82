"""Gaussian vector copula: normal scores with identity diagonal blocks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from vecopula._validation import BlockStructure, check_random_state, check_spd, check_unit_points
from vecopula.special import std_normal_cdf, std_normal_quantile


@dataclass(frozen=True)
class GaussianVCParams:
    """Correlation matrix ``omega`` whose diagonal blocks are identities."""

    omega: np.ndarray
    blocks: BlockStructure

    def __post_init__(self):
        blocks = BlockStructure.coerce(self.blocks)
        omega = check_spd(self.omega, "omega")
        if omega.shape[0] != blocks.d:
            raise ValueError(f"omega is {omega.shape[0]}x{omega.shape[0]}, blocks cover d={blocks.d}")
        for k, dk in enumerate(blocks.dims):
            if not np.allclose(blocks.block_of(omega, k, k), np.eye(dk), atol=1e-10, rtol=0):
                raise ValueError(f"diagonal block {k} of omega must be the identity")
        if np.any(np.abs(omega) > 1.0 + 1e-12):
            raise ValueError("omega entries must lie in [-1, 1]")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def equicorrelated(cls, dims, cross):
        """All cross-block entries equal to ``cross``."""
        blocks = BlockStructure.coerce(dims)
        omega = np.full((blocks.d, blocks.d), float(cross))
        for sl in blocks.slices:
            omega[sl, sl] = 0.0
        np.fill_diagonal(omega, 1.0)
        return cls(omega, blocks)


def gaussian_vc_logpdf(u, params):
    u = check_unit_points(u, params.blocks.d)
    z = std_normal_quantile(u)
    _, logdet = np.linalg.slogdet(params.omega)
    A = np.linalg.inv(params.omega) - np.eye(params.blocks.d)
    return -0.5 * logdet - 0.5 * np.einsum("ni,ij,nj->n", z, A, z)


def gaussian_vc_density(u, params):
    """Density ``phi_d(z; omega) / prod_j phi(z_j)`` at the normal scores ``z``."""
    return np.exp(gaussian_vc_logpdf(u, params))


def gaussian_vc_sample(params, n, rng=None):
    rng = check_random_state(rng)
    L = np.linalg.cholesky(params.omega)
    y = rng.standard_normal((n, params.blocks.d)) @ L.T
    return std_normal_cdf(y)
