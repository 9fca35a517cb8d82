"""Composition transport maps for elliptical laws and the Student-t vector copula.

The map pushing the uniform on [0, 1]^d to the elliptical law
``R Sigma^{1/2} S`` is

    T(u) = g(||z||) / ||z|| * Sigma^{1/2} z,    z = Phi^{-1}(u),

with ``g = F_R^{-1} o F_chi_d``.  Its inverse is
``T*(y) = Phi(v * g^{-1}(||v||) / ||v||)`` with ``v = Sigma^{-1/2} y``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from vecopula._validation import BlockStructure, check_random_state, check_spd, check_unit_points
from vecopula.special import (
    RadialSpec,
    sample_inverse_gamma,
    std_normal_cdf,
    std_normal_quantile,
)

_DEGENERATE_NORM = 1e-12


def sym_sqrt(M):
    """Symmetric positive square root, via the eigendecomposition."""
    w, V = np.linalg.eigh(M)
    return (V * np.sqrt(w)) @ V.T


def sym_inv_sqrt(M):
    w, V = np.linalg.eigh(M)
    return (V / np.sqrt(w)) @ V.T


def _radial_dim(radial, d):
    if radial.dim != d:
        raise ValueError(f"radial law has dimension {radial.dim}, points have {d}")


def elliptical_mt_forward(u, radial, sigma):
    """Map points of (0, 1)^d to the elliptical law with radial part ``radial``."""
    sigma = check_spd(sigma, "sigma")
    u = check_unit_points(u, sigma.shape[0])
    _radial_dim(radial, sigma.shape[0])
    z = std_normal_quantile(u)
    r = np.linalg.norm(z, axis=1)
    chi = RadialSpec.chi(radial.dim)
    scale = np.zeros_like(r)
    live = r >= _DEGENERATE_NORM
    scale[live] = chi.transfer(r[live], radial) / r[live]
    return (scale[:, None] * z) @ sym_sqrt(sigma)


def elliptical_mt_inverse(y, radial, sigma):
    """Inverse of :func:`elliptical_mt_forward`."""
    sigma = check_spd(sigma, "sigma")
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if y.shape[1] != sigma.shape[0]:
        raise ValueError(f"expected vectors of dimension {sigma.shape[0]}, got {y.shape[1]}")
    _radial_dim(radial, sigma.shape[0])
    v = y @ sym_inv_sqrt(sigma)
    s = np.linalg.norm(v, axis=1)
    scale = np.zeros_like(s)
    live = s >= _DEGENERATE_NORM
    scale[live] = radial.transfer(s[live], RadialSpec.chi(radial.dim)) / s[live]
    return std_normal_cdf(scale[:, None] * v)


def mvt_logpdf(y, sigma, dof):
    """Log density of the centred multivariate Student t with scale ``sigma``."""
    y = np.atleast_2d(y)
    d = sigma.shape[0]
    L = np.linalg.cholesky(sigma)
    sol = np.linalg.solve(L, y.T)
    maha = np.sum(sol * sol, axis=0)
    logdet = 2.0 * np.sum(np.log(np.diag(L)))
    return (
        gammaln(0.5 * (dof + d))
        - gammaln(0.5 * dof)
        - 0.5 * d * np.log(dof * np.pi)
        - 0.5 * logdet
        - 0.5 * (dof + d) * np.log1p(maha / dof)
    )


@dataclass(frozen=True)
class StudentVCParams:
    sigma: np.ndarray
    dof: float
    blocks: BlockStructure

    def __post_init__(self):
        blocks = BlockStructure.coerce(self.blocks)
        sigma = check_spd(self.sigma, "sigma")
        if sigma.shape[0] != blocks.d:
            raise ValueError(f"sigma is {sigma.shape[0]}x{sigma.shape[0]}, blocks cover d={blocks.d}")
        if not self.dof > 0:
            raise ValueError(f"degrees of freedom must be positive, got {self.dof}")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "dof", float(self.dof))

    def block_sigma(self, k):
        return self.blocks.block_of(self.sigma, k, k)

    def radial(self, k):
        return RadialSpec.student(self.blocks.dims[k], self.dof)


def student_block_maps(u, params):
    """Apply each block's transport map ``T_k`` to the matching columns of ``u``."""
    u = check_unit_points(u, params.blocks.d)
    parts = [
        elliptical_mt_forward(uk, params.radial(k), params.block_sigma(k))
        for k, uk in enumerate(params.blocks.split(u))
    ]
    return np.hstack(parts)


def student_vc_logpdf(u, params):
    y = student_block_maps(u, params)
    out = mvt_logpdf(y, params.sigma, params.dof)
    for k, yk in enumerate(params.blocks.split(y)):
        out = out - mvt_logpdf(yk, params.block_sigma(k), params.dof)
    return out


def student_vc_density(u, params):
    """Density ``t_d(T(u); Sigma, nu) / prod_k t_{d_k}(T_k(u_k); Sigma_k, nu)``."""
    return np.exp(student_vc_logpdf(u, params))


def student_vc_sample(params, n, rng=None):
    rng = check_random_state(rng)
    L = np.linalg.cholesky(params.sigma)
    z = rng.standard_normal((n, params.blocks.d)) @ L.T
    w = sample_inverse_gamma(0.5 * params.dof, 0.5 * params.dof, rng, size=n)
    y = np.sqrt(w)[:, None] * z
    parts = [
        elliptical_mt_inverse(yk, params.radial(k), params.block_sigma(k))
        for k, yk in enumerate(params.blocks.split(y))
    ]
    return np.hstack(parts)
