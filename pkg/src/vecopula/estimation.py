"""Two-step estimation of vector copula parameters from empirical vector ranks."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize, stats

from vecopula._validation import BlockStructure, check_unit_points
from vecopula.families.classical import (
    classical_copula,
    tau_from_theta,
    tau_range,
    theta_from_tau,
)
from vecopula.families.gaussian import GaussianVCParams
from vecopula.families.kendall import kendall_scores
from vecopula.special import std_normal_quantile

logger = logging.getLogger(__name__)

_EIG_FLOOR = 1e-8
_MIN_NESTING_N = 10
_MLE_XATOL = 1e-8
_SCAN_POINTS = 41


def _as_rank_sample(ranks, dims, min_rows=2):
    u = check_unit_points(ranks)
    blocks = BlockStructure.coerce(dims, u.shape[1])
    if u.shape[0] < min_rows:
        raise ValueError(f"need at least {min_rows} observations, got {u.shape[0]}")
    return u, blocks


def _pin_identity_blocks(M, blocks):
    M = M.copy()
    for sl in blocks.slices:
        M[sl, sl] = np.eye(sl.stop - sl.start)
    return M


def _nearest_block_correlation(M, blocks, maxiter=100):
    """Alternate eigenvalue flooring and re-pinning identity blocks until PD."""
    for _ in range(maxiter):
        w = np.linalg.eigvalsh(M)
        if w.min() >= _EIG_FLOOR:
            return M
        w, V = np.linalg.eigh(M)
        M = (V * np.maximum(w, _EIG_FLOOR)) @ V.T
        s = np.sqrt(np.diag(M))
        M = _pin_identity_blocks(M / np.outer(s, s), blocks)
        M = 0.5 * (M + M.T)
    raise np.linalg.LinAlgError("could not project the moment estimate to a positive definite matrix")


def fit_gaussian_vc_mom(ranks, dims):
    """Moment estimate of the Gaussian vector copula correlation matrix.

    Cross-block entries are sample correlations of the componentwise normal
    scores; diagonal blocks are pinned to the identity.
    """
    u, blocks = _as_rank_sample(ranks, dims)
    n, d = u.shape
    if n < d + 1:
        raise ValueError(f"need n >= d + 1 = {d + 1} observations, got {n}")
    z = std_normal_quantile(u)
    sd = z.std(axis=0)
    if np.any(sd == 0):
        raise ValueError(f"rank coordinates {np.flatnonzero(sd == 0).tolist()} have zero variance")
    R = _pin_identity_blocks(np.corrcoef(z, rowvar=False), blocks)
    R = _nearest_block_correlation(R, blocks)
    return GaussianVCParams(R, blocks)


def kendall_transform(ranks, dims):
    """``V_k = K_{d_k}(prod_j U_kj)`` for every block of every rank vector."""
    u, blocks = _as_rank_sample(ranks, dims, min_rows=1)
    return kendall_scores(u, blocks)


def kendalls_tau_empirical(pairs):
    """Kendall's tau-b of a bivariate sample."""
    x = np.asarray(pairs, dtype=float)
    if x.ndim != 2 or x.shape[1] != 2:
        raise ValueError("expected an (n, 2) array")
    if x.shape[0] < 2:
        raise ValueError("Kendall's tau needs at least two observations")
    tau = stats.kendalltau(x[:, 0], x[:, 1], variant="b").statistic
    if not np.isfinite(tau):
        raise ValueError("Kendall's tau is undefined for a constant coordinate")
    return float(tau)


def _mean_pairwise_tau(v):
    K = v.shape[1]
    taus = [kendalls_tau_empirical(v[:, [a, b]]) for a in range(K) for b in range(a + 1, K)]
    return float(np.mean(taus))


@dataclass(frozen=True)
class FitReport:
    family: str
    theta: float
    tau: float
    loglik: float
    n: int
    method: str
    tau_empirical: float
    theta_tau_inversion: float
    theta_mle: float | None
    at_boundary: bool
    likelihood_flat: bool = False

    def to_dict(self):
        return asdict(self)


def _bounds(family, K):
    if family == "clayton":
        return -1.0 + 1e-6, 50.0
    if family == "frank":
        return -50.0, 50.0
    if family == "gumbel":
        return 1.0, 50.0
    if family == "gaussian":
        low = -1.0 + 1e-9 if K == 2 else -1.0 / (K - 1) + 1e-9
        return low, 1.0 - 1e-9
    raise ValueError(f"no likelihood search range for family {family!r}")


def _loglik(v, family, theta):
    ll = classical_copula(family, theta, dim=v.shape[1]).logpdf(v)
    total = float(np.sum(ll))
    return total if np.isfinite(total) else -np.inf


def _mle(v, family, lo, hi):
    def nll(theta):
        ll = _loglik(v, family, theta)
        return -ll if np.isfinite(ll) else 1e300

    grid = np.linspace(lo, hi, _SCAN_POINTS)
    if family in ("clayton", "frank", "gumbel"):
        # scan evenly in tau, where the likelihood is far less skewed than in theta
        t_lo, t_hi = tau_from_theta(family, lo), tau_from_theta(family, hi)
        grid = np.array([theta_from_tau(family, t) for t in np.linspace(t_lo, t_hi, _SCAN_POINTS)[1:-1]])
        grid = np.concatenate([[lo], grid, [hi]])
    values = np.array([nll(t) for t in grid])
    if np.all(values >= 1e300):
        raise FloatingPointError(f"{family} likelihood is -inf over the whole parameter range")
    best = int(np.argmin(values))
    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, grid.size - 1)]
    res = optimize.minimize_scalar(nll, bounds=(a, b), method="bounded", options={"xatol": _MLE_XATOL})
    theta = float(res.x) if res.fun <= values[best] else float(grid[best])
    finite = values[values < 1e300]
    flat = bool(finite.size == values.size and np.ptp(finite) <= 1e-9 * max(1.0, abs(finite.min())))
    return theta, flat


def fit_nesting_copula(v, family, method="mle"):
    """Fit a classical copula to Kendall-transformed ranks.

    Both the maximum likelihood estimate and the tau-inversion estimate are
    computed; ``method`` selects which one becomes ``theta``.
    """
    v = check_unit_points(v)
    n, K = v.shape
    if method not in ("mle", "tau_inversion"):
        raise ValueError(f"unknown method {method!r}")
    if family != "gaussian" and family != "independence" and K != 2:
        raise ValueError(f"{family} nesting copula is only available for two blocks, got K={K}")
    if n < _MIN_NESTING_N:
        raise ValueError(f"need at least {_MIN_NESTING_N} observations, got {n}")

    tau_emp = kendalls_tau_empirical(v) if K == 2 else _mean_pairwise_tau(v)
    if family == "independence":
        return FitReport(family, 0.0, 0.0, 0.0, n, method, tau_emp, 0.0, 0.0, False)

    lo, hi = _bounds(family, K)
    t_lo, t_hi = tau_range(family)
    tau_clipped = float(np.clip(tau_emp, t_lo, t_hi - 1e-12))
    if family == "gaussian":
        tau_clipped = float(np.clip(tau_emp, -1 + 1e-12, 1 - 1e-12))
    theta_itau = float(np.clip(theta_from_tau(family, tau_clipped), lo, hi))

    theta_mle, flat = _mle(v, family, lo, hi)
    if flat:
        logger.warning("%s likelihood is flat over the search range", family)
    theta = theta_mle if method == "mle" else theta_itau
    width = hi - lo
    at_boundary = bool(min(theta - lo, hi - theta) <= 1e-6 * width)
    if at_boundary:
        logger.warning("%s estimate %.6g sits on the search boundary [%g, %g]", family, theta, lo, hi)
    return FitReport(
        family=family,
        theta=theta,
        tau=float(tau_from_theta(family, theta)),
        loglik=_loglik(v, family, theta),
        n=n,
        method=method,
        tau_empirical=tau_emp,
        theta_tau_inversion=theta_itau,
        theta_mle=theta_mle,
        at_boundary=at_boundary,
        likelihood_flat=flat,
    )
