"""Change-of-variables check ``det(D^2 psi(u)) p(grad psi(u)) = m(u)`` for explicit maps."""

from __future__ import annotations

import numpy as np

from vecopula._validation import check_unit_points
from vecopula.special import std_normal_pdf, std_normal_quantile


def normal_scores(u):
    """Componentwise normal quantile map, the gradient of a separable convex potential."""
    return std_normal_quantile(u)


def normal_scores_jacobian(u):
    """Hessian of the potential behind :func:`normal_scores`: ``diag(1 / phi(z_j))``."""
    z = std_normal_quantile(u)
    n, d = z.shape
    J = np.zeros((n, d, d))
    idx = np.arange(d)
    J[:, idx, idx] = 1.0 / std_normal_pdf(z)
    return J


def std_normal_density(x):
    return np.prod(std_normal_pdf(x), axis=1)


def monge_ampere_residual(
    u,
    target_density=std_normal_density,
    quantile_map=normal_scores,
    quantile_jacobian=normal_scores_jacobian,
    reference_density=None,
):
    """Residual of the Monge-Ampere identity at points ``u`` of the unit cube.

    Defaults check the componentwise normal quantile map against the standard
    normal density.  ``reference_density`` defaults to the uniform (``m = 1``).
    """
    u = check_unit_points(u)
    x = quantile_map(u)
    det = np.linalg.det(quantile_jacobian(u))
    m = np.ones(u.shape[0]) if reference_density is None else reference_density(u)
    return det * target_density(x) - m
