"""Scalar distribution functions and low-level samplers used by the copula families.

Normal, chi and F distribution functions are thin wrappers over
:mod:`scipy.special`.  The log-product radial law of the Kendall construction
and the Kendall distribution of the independence copula are evaluated in
closed form here.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial, lgamma

import numpy as np
from scipy import special as sp

#: Probabilities fed to the normal quantile are clamped to [EPS, 1 - EPS].
QUANTILE_CLAMP = 1e-12


def std_normal_cdf(x):
    """Standard normal distribution function, vectorised."""
    return sp.ndtr(x)


def std_normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / np.sqrt(2.0 * np.pi)


def std_normal_quantile(p):
    """Standard normal quantile with probabilities clamped away from 0 and 1.

    Values outside ``[0, 1]`` are rejected; values inside but closer than
    ``QUANTILE_CLAMP`` to the boundary are clamped so that the result stays
    finite.
    """
    p = np.asarray(p, dtype=float)
    if np.any(np.isnan(p)) or np.any((p < 0.0) | (p > 1.0)):
        raise ValueError("probabilities must lie in [0, 1]")
    return sp.ndtri(np.clip(p, QUANTILE_CLAMP, 1.0 - QUANTILE_CLAMP))


def _check_dim(d):
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    return int(d)


def _check_dof(*dfs):
    for df in dfs:
        if not df > 0:
            raise ValueError(f"degrees of freedom must be positive, got {df!r}")


def chi_cdf(x, d):
    """Distribution function of the chi law with ``d`` degrees of freedom."""
    d = _check_dim(d)
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    return sp.gammainc(0.5 * d, 0.5 * x * x)


def chi_sf(x, d):
    d = _check_dim(d)
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    return sp.gammaincc(0.5 * d, 0.5 * x * x)


def chi_quantile(p, d):
    d = _check_dim(d)
    return np.sqrt(2.0 * sp.gammaincinv(0.5 * d, p))


def chi_isf(q, d):
    d = _check_dim(d)
    return np.sqrt(2.0 * sp.gammainccinv(0.5 * d, q))


def f_cdf(x, d1, d2):
    """Distribution function of Fisher's F(d1, d2)."""
    _check_dof(d1, d2)
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    return sp.betainc(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2))


def f_sf(x, d1, d2):
    _check_dof(d1, d2)
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    # complementary incomplete beta keeps precision in the upper tail
    return sp.betainc(0.5 * d2, 0.5 * d1, d2 / (d1 * x + d2))


def f_quantile(p, d1, d2):
    _check_dof(d1, d2)
    b = sp.betaincinv(0.5 * d1, 0.5 * d2, p)
    with np.errstate(divide="ignore"):
        return d2 * b / (d1 * (1.0 - b))


def f_isf(q, d1, d2):
    _check_dof(d1, d2)
    c = sp.betaincinv(0.5 * d2, 0.5 * d1, q)
    with np.errstate(divide="ignore"):
        return d2 * (1.0 - c) / (d1 * c)


@dataclass(frozen=True)
class RadialSpec:
    """Law of the radial part ``R`` of an elliptical vector ``R Sigma^{1/2} S``.

    ``kind="chi"`` is the Gaussian case (``R ~ chi_d``); ``kind="student"``
    has ``R**2 / d ~ F(d, dof)``.
    """

    kind: str
    dim: int
    dof: float | None = None

    def __post_init__(self):
        _check_dim(self.dim)
        if self.kind == "student":
            if self.dof is None:
                raise ValueError("student radial law needs degrees of freedom")
            _check_dof(self.dof)
        elif self.kind != "chi":
            raise ValueError(f"unknown radial kind {self.kind!r}")

    @classmethod
    def chi(cls, dim):
        return cls("chi", dim)

    @classmethod
    def student(cls, dim, dof):
        return cls("student", dim, float(dof))

    def cdf(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "chi":
            return chi_cdf(r, self.dim)
        return f_cdf(r * r / self.dim, self.dim, self.dof)

    def sf(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "chi":
            return chi_sf(r, self.dim)
        return f_sf(r * r / self.dim, self.dim, self.dof)

    def ppf(self, p):
        if self.kind == "chi":
            return chi_quantile(p, self.dim)
        return np.sqrt(self.dim * f_quantile(p, self.dim, self.dof))

    def isf(self, q):
        if self.kind == "chi":
            return chi_isf(q, self.dim)
        return np.sqrt(self.dim * f_isf(q, self.dim, self.dof))

    def transfer(self, r, target: RadialSpec):
        """Monotone map ``F_target^{-1}(F_self(r))`` sending this law to ``target``.

        Evaluated through the survival function above the median so the
        upper tail keeps its precision.
        """
        r = np.asarray(r, dtype=float)
        if target == self:
            return r.copy()
        p = self.cdf(r)
        q = self.sf(r)
        upper = p > 0.5
        out = np.empty_like(p)
        out[~upper] = target.ppf(p[~upper])
        out[upper] = target.isf(q[upper])
        return out


def radial_cdf(x, d):
    """Distribution function of the log-product radial variable of dimension ``d``.

    ``R = log(U_1 * ... * U_d)`` with iid uniforms, so ``-R ~ Gamma(d, 1)`` and
    ``F(x) = exp(x) * sum_{j<d} (-x)**j / j!`` for ``x <= 0``.
    """
    d = _check_dim(d)
    x = np.asarray(x, dtype=float)
    if np.any(x > 0):
        raise ValueError("the radial variable is supported on (-inf, 0]")
    t = -x
    term = np.ones_like(t)
    total = np.ones_like(t)
    for j in range(1, d):
        term = term * t / j
        total = total + term
    with np.errstate(invalid="ignore"):
        out = np.exp(x) * total
    return np.where(np.isneginf(x), 0.0, out)


def radial_sf(x, d):
    """``1 - radial_cdf(x, d)``, accurate when the distribution function is near 1."""
    d = _check_dim(d)
    x = np.asarray(x, dtype=float)
    if np.any(x > 0):
        raise ValueError("the radial variable is supported on (-inf, 0]")
    t = -x
    out = 1.0 - radial_cdf(x, d)
    near_top = t < d
    if np.any(near_top):
        # series exp(-t) * sum_{j>=d} t**j / j!, which has no cancellation
        tt = t[near_top] if t.ndim else t
        with np.errstate(divide="ignore"):
            term = np.exp(-tt + d * np.log(tt) - lgamma(d + 1))
        total = term.copy()
        j = d
        while np.any(term > 1e-17 * total) and j < d + 1000:
            j += 1
            term = term * tt / j
            total = total + term
        if t.ndim:
            out[near_top] = total
        else:
            out = total
    return out


def radial_pdf(x, d):
    d = _check_dim(d)
    x = np.asarray(x, dtype=float)
    return np.exp(x) * (-x) ** (d - 1) / factorial(d - 1)


def radial_quantile(p, d, tol=1e-12, maxiter=200):
    """Inverse of :func:`radial_cdf` by safeguarded Newton steps inside a bisection bracket.

    Above the median the equation is solved for the survival function so
    that probabilities close to 1 keep their relative precision.
    """
    d = _check_dim(d)
    p = np.asarray(p, dtype=float)
    if np.any(np.isnan(p)) or np.any((p < 0) | (p > 1)):
        raise ValueError("probabilities must lie in [0, 1]")
    scalar = p.ndim == 0
    p = np.atleast_1d(p)
    out = np.empty_like(p)
    out[p == 0] = -np.inf
    out[p == 1] = 0.0
    live = (p > 0) & (p < 1)
    if d == 1:
        out[live] = np.log(p[live])
        return out[0] if scalar else out

    target = p[live]
    upper = target > 0.5
    q = 1.0 - target
    hi = np.zeros_like(target)
    lo = np.full_like(target, -40.0)
    while True:
        low_side = radial_cdf(lo, d) > target
        if not low_side.any():
            break
        lo[low_side] *= 2.0
    # the Gamma(d) mean is a decent starting point
    x = np.clip(np.full_like(target, -float(d)), lo, hi)
    for _ in range(maxiter):
        f = np.where(upper, q - radial_sf(x, d), radial_cdf(x, d) - target)
        lo = np.where(f > 0, lo, x)
        hi = np.where(f > 0, x, hi)
        dens = radial_pdf(x, d)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = x - f / dens
        bad = ~np.isfinite(step) | (step <= lo) | (step >= hi)
        new = np.where(f == 0, x, np.where(bad, 0.5 * (lo + hi), step))
        converged = np.abs(new - x) <= tol * np.abs(x)
        x = new
        if converged.all():
            break
    out[live] = x
    return out[0] if scalar else out


def kendall_indep_dist(u, d):
    """Kendall distribution of the ``d``-dimensional independence copula.

    ``K_d(u) = P(U_1 * ... * U_d <= u) = u * sum_{i<d} log(1/u)**i / i!``.
    """
    d = _check_dim(d)
    u = np.asarray(u, dtype=float)
    if np.any(np.isnan(u)) or np.any((u < 0) | (u > 1)):
        raise ValueError("K_d is defined on [0, 1]")
    with np.errstate(divide="ignore"):
        t = -np.log(u)
    term = np.ones_like(u)
    total = np.ones_like(u)
    for i in range(1, d):
        term = term * t / i
        total = total + term
    with np.errstate(invalid="ignore"):
        out = u * total
    return np.where(u == 0, 0.0, out)


def sample_sphere(d, rng, size=None):
    """Uniform draws on the unit sphere of R^d (rows when ``size`` is given)."""
    d = _check_dim(d)
    shape = (d,) if size is None else (size, d)
    z = rng.standard_normal(shape)
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def sample_simplex(d, rng, size=None):
    """Uniform draws on the unit simplex ``{s >= 0, sum(s) = 1}`` of R^d."""
    d = _check_dim(d)
    shape = (d,) if size is None else (size, d)
    e = rng.standard_exponential(shape)
    return e / e.sum(axis=-1, keepdims=True)


def sample_inverse_gamma(shape, rate, rng, size=None):
    """Draws ``W`` with ``1/W ~ Gamma(shape, rate)``."""
    if not (shape > 0 and rate > 0):
        raise ValueError("shape and rate must be positive")
    return 1.0 / rng.gamma(shape, 1.0 / rate, size=size)
