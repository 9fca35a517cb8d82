"""Classical copulas used as nesting copulas: Gaussian, Clayton, Frank, Gumbel.

Every family carries a scalar parameter ``theta`` (``rho`` for the Gaussian)
together with its Kendall's tau relation.  Clayton and Frank at ``theta = 0``
are taken as their independence limit so that likelihood searches can cross
zero.
"""

from __future__ import annotations

import numpy as np
from scipy import integrate, optimize
from scipy.special import bernoulli, factorial
from scipy.stats import multivariate_normal

from vecopula._validation import check_random_state, check_unit_points
from vecopula.special import std_normal_cdf, std_normal_quantile

FAMILIES = ("independence", "gaussian", "clayton", "frank", "gumbel")



def _clip_open(u):
    return np.clip(u, 1e-16, 1.0 - 1e-16)


class Copula:
    """Base class; subclasses define the family-specific formulas."""

    family = None
    dim = 2

    def __init__(self, theta=0.0, dim=2):
        self.theta = float(theta)
        self.dim = int(dim)
        self._check()

    def _check(self):
        if self.dim != 2:
            raise ValueError(f"{self.family} copula is implemented for two dimensions only")

    def __repr__(self):
        return f"{type(self).__name__}(theta={self.theta:.6g})"

    def __eq__(self, other):
        return type(self) is type(other) and self.theta == other.theta and self.dim == other.dim

    def __hash__(self):
        return hash((type(self), self.theta, self.dim))

    @property
    def tau(self):
        return tau_from_theta(self.family, self.theta)

    @classmethod
    def from_tau(cls, tau, dim=2):
        return cls(theta_from_tau(cls.family, tau), dim=dim)

    def _points(self, u):
        return check_unit_points(u, self.dim)

    def pdf(self, u):
        return np.exp(self.logpdf(u))

    def logpdf(self, u):
        raise NotImplementedError

    def cdf(self, u):
        raise NotImplementedError

    def sample(self, n, rng=None):
        raise NotImplementedError


class IndependenceCopula(Copula):
    family = "independence"

    def __init__(self, theta=0.0, dim=2):
        super().__init__(0.0, dim)

    def _check(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")

    def logpdf(self, u):
        return np.zeros(self._points(u).shape[0])

    def cdf(self, u):
        return np.prod(self._points(u), axis=1)

    def sample(self, n, rng=None):
        return check_random_state(rng).random((n, self.dim))


class GaussianCopula(Copula):
    """Gaussian copula; for ``dim > 2`` the correlation matrix is equicorrelated."""

    family = "gaussian"

    def _check(self):
        if not -1.0 < self.theta < 1.0:
            raise ValueError(f"Gaussian copula needs rho in (-1, 1), got {self.theta}")
        if self.dim < 2:
            raise ValueError("Gaussian copula needs at least two dimensions")
        if self.dim > 2 and self.theta <= -1.0 / (self.dim - 1):
            raise ValueError(
                f"equicorrelation {self.theta} is not positive definite in dimension {self.dim}"
            )

    @property
    def rho(self):
        return self.theta

    @property
    def corr(self):
        R = np.full((self.dim, self.dim), self.theta)
        np.fill_diagonal(R, 1.0)
        return R

    def logpdf(self, u):
        z = std_normal_quantile(self._points(u))
        R = self.corr
        _, logdet = np.linalg.slogdet(R)
        A = np.linalg.inv(R) - np.eye(self.dim)
        return -0.5 * logdet - 0.5 * np.einsum("ni,ij,nj->n", z, A, z)

    def cdf(self, u):
        z = std_normal_quantile(self._points(u))
        return np.atleast_1d(multivariate_normal(np.zeros(self.dim), self.corr).cdf(z))

    def sample(self, n, rng=None):
        rng = check_random_state(rng)
        L = np.linalg.cholesky(self.corr)
        return std_normal_cdf(rng.standard_normal((n, self.dim)) @ L.T)


class ClaytonCopula(Copula):
    family = "clayton"

    def _check(self):
        super()._check()
        if self.theta < -1.0:
            raise ValueError(f"Clayton copula needs theta >= -1, got {self.theta}")

    def cdf(self, u):
        u = self._points(u)
        th = self.theta
        if th == 0.0:
            return u[:, 0] * u[:, 1]
        with np.errstate(divide="ignore"):
            base = np.maximum(u[:, 0] ** -th + u[:, 1] ** -th - 1.0, 0.0)
            return np.where(base > 0, base ** (-1.0 / th), 0.0)

    def logpdf(self, u):
        u = _clip_open(self._points(u))
        th = self.theta
        if th == 0.0:
            return np.zeros(u.shape[0])
        if th == -1.0:
            raise ValueError("Clayton copula with theta = -1 is singular (no density)")
        lu = np.log(u)
        # u**-th - 1 via expm1 keeps precision for small |theta|
        base = np.expm1(-th * lu[:, 0]) + np.expm1(-th * lu[:, 1]) + 1.0
        out = np.full(u.shape[0], -np.inf)
        ok = base > 0
        out[ok] = (
            np.log1p(th)
            - (th + 1.0) * (lu[ok, 0] + lu[ok, 1])
            - (2.0 + 1.0 / th) * np.log(base[ok])
        )
        return out

    def sample(self, n, rng=None):
        rng = check_random_state(rng)
        u = rng.random(n)
        w = rng.random(n)
        th = self.theta
        if th == 0.0:
            v = w
        elif th == -1.0:
            v = 1.0 - u
        else:
            # conditional inversion of dC/du = w
            inner = 1.0 + u**-th * (w ** (-th / (1.0 + th)) - 1.0)
            v = np.maximum(inner, 0.0) ** (-1.0 / th)
        return np.column_stack([u, np.clip(v, 0.0, 1.0)])


def _frank_log_denom(th, x, y):
    """``log((1 - e^-th) - (1 - e^-th x)(1 - e^-th y))`` for ``th > 0``.

    Written as a sum of two nonnegative terms so nothing cancels.
    """
    with np.errstate(divide="ignore"):
        return np.logaddexp(
            -th * x + np.log(-np.expm1(-th * y)),
            -th * y + np.log(-np.expm1(-th * (1.0 - y))),
        )


class FrankCopula(Copula):
    family = "frank"

    def cdf(self, u):
        u = self._points(u)
        th = self.theta
        if th == 0.0:
            return u[:, 0] * u[:, 1]
        x, y = u[:, 0], u[:, 1]
        if th < 0:
            # C_{-theta}(u, v) = u - C_theta(u, 1 - v)
            return np.clip(x - FrankCopula(-th).cdf(np.column_stack([x, 1.0 - y])), 0.0, 1.0)
        log_c = -(_frank_log_denom(th, x, y) - np.log(-np.expm1(-th))) / th
        return np.clip(np.where(np.minimum(x, y) == 0, 0.0, log_c), 0.0, 1.0)

    def logpdf(self, u):
        u = self._points(u)
        th = self.theta
        if th == 0.0:
            return np.zeros(u.shape[0])
        x, y = u[:, 0], u[:, 1]
        if th < 0:
            # c_{-theta}(u, v) = c_theta(u, 1 - v)
            th, y = -th, 1.0 - y
        return np.log(th * -np.expm1(-th)) - th * (x + y) - 2.0 * _frank_log_denom(th, x, y)

    def sample(self, n, rng=None):
        rng = check_random_state(rng)
        u = rng.random(n)
        w = rng.random(n)
        th = self.theta
        if th == 0.0:
            v = w
        else:
            a = w * np.expm1(-th) / (w + (1.0 - w) * np.exp(-th * u))
            v = -np.log1p(a) / th
        return np.column_stack([u, np.clip(v, 0.0, 1.0)])


class GumbelCopula(Copula):
    family = "gumbel"

    def _check(self):
        super()._check()
        if self.theta < 1.0:
            raise ValueError(f"Gumbel copula needs theta >= 1, got {self.theta}")

    def cdf(self, u):
        u = _clip_open(self._points(u))
        th = self.theta
        s = (-np.log(u[:, 0])) ** th + (-np.log(u[:, 1])) ** th
        return np.exp(-(s ** (1.0 / th)))

    def logpdf(self, u):
        u = _clip_open(self._points(u))
        th = self.theta
        x = -np.log(u[:, 0])
        y = -np.log(u[:, 1])
        s = x**th + y**th
        A = s ** (1.0 / th)
        return (
            -A
            + x
            + y
            + (th - 1.0) * (np.log(x) + np.log(y))
            + (1.0 / th - 2.0) * np.log(s)
            + np.log(A + th - 1.0)
        )

    def sample(self, n, rng=None):
        rng = check_random_state(rng)
        th = self.theta
        e = rng.standard_exponential((n, 2))
        if th == 1.0:
            return np.exp(-e)
        alpha = 1.0 / th
        # positive stable frailty with Laplace transform exp(-t**alpha)
        phi = rng.uniform(0.0, np.pi, n)
        w = rng.standard_exponential(n)
        s = (np.sin(alpha * phi) / np.sin(phi) ** (1.0 / alpha)) * (
            np.sin((1.0 - alpha) * phi) / w
        ) ** ((1.0 - alpha) / alpha)
        return np.exp(-((e / s[:, None]) ** alpha))


_CLASSES = {
    "independence": IndependenceCopula,
    "gaussian": GaussianCopula,
    "clayton": ClaytonCopula,
    "frank": FrankCopula,
    "gumbel": GumbelCopula,
}


def classical_copula(family, theta=0.0, dim=2):
    """Instantiate a classical copula by family name."""
    try:
        cls = _CLASSES[family]
    except KeyError:
        raise ValueError(f"unknown copula family {family!r}; expected one of {FAMILIES}") from None
    return cls(theta, dim=dim)


def debye1(theta):
    """First Debye function ``(1/theta) * int_0^theta t / (e^t - 1) dt``."""
    if theta == 0.0:
        return 1.0

    def integrand(t):
        return t / np.expm1(t) if t != 0.0 else 1.0

    val, _ = integrate.quad(integrand, 0.0, theta, epsabs=0.0, epsrel=1e-13, limit=200)
    return val / theta


# tau = sum_k 4 B_2k theta^(2k-1) / ((2k+1) (2k)!), convergent for |theta| < 2 pi
_FRANK_SERIES = np.array(
    [4.0 * b / ((2 * k + 1) * factorial(2 * k)) for k, b in enumerate(bernoulli(20)[2::2], start=1)]
)


def _frank_tau(theta):
    if abs(theta) < 1.0:
        # the quadrature form loses ~1e-16 / theta to cancellation near zero
        powers = theta ** (2 * np.arange(1, _FRANK_SERIES.size + 1) - 1)
        return float(np.dot(_FRANK_SERIES[::-1], powers[::-1]))
    return 1.0 - 4.0 / theta * (1.0 - debye1(theta))


def tau_from_theta(family, theta):
    """Kendall's tau implied by a family parameter."""
    theta = float(theta)
    if family == "independence":
        return 0.0
    if family == "gaussian":
        if not -1.0 <= theta <= 1.0:
            raise ValueError("rho must lie in [-1, 1]")
        return 2.0 / np.pi * np.arcsin(theta)
    if family == "clayton":
        if theta < -1.0:
            raise ValueError("Clayton theta must be >= -1")
        return theta / (theta + 2.0)
    if family == "frank":
        return _frank_tau(theta)
    if family == "gumbel":
        if theta < 1.0:
            raise ValueError("Gumbel theta must be >= 1")
        return (theta - 1.0) / theta
    raise ValueError(f"unknown copula family {family!r}")


def tau_range(family):
    """Closed/open bounds of attainable tau as ``(low, high)``; used for validation."""
    return {
        "independence": (0.0, 0.0),
        "gaussian": (-1.0, 1.0),
        "clayton": (-1.0, 1.0),
        "frank": (-1.0, 1.0),
        "gumbel": (0.0, 1.0),
    }[family]


def theta_from_tau(family, tau):
    """Family parameter matching a Kendall's tau (inverse of :func:`tau_from_theta`)."""
    tau = float(tau)
    if family == "independence":
        if tau != 0.0:
            raise ValueError("independence copula has tau = 0")
        return 0.0
    if family == "gaussian":
        if not -1.0 < tau < 1.0:
            raise ValueError(f"Gaussian tau must lie in (-1, 1), got {tau}")
        return float(np.sin(np.pi * tau / 2.0))
    if family == "clayton":
        if not -1.0 <= tau < 1.0:
            raise ValueError(f"Clayton tau must lie in [-1, 1), got {tau}")
        return 2.0 * tau / (1.0 - tau)
    if family == "gumbel":
        if not 0.0 <= tau < 1.0:
            raise ValueError(f"Gumbel tau must lie in [0, 1), got {tau}")
        return 1.0 / (1.0 - tau)
    if family == "frank":
        if not -1.0 < tau < 1.0:
            raise ValueError(f"Frank tau must lie in (-1, 1), got {tau}")
        if tau == 0.0:
            return 0.0
        sign = 1.0 if tau > 0 else -1.0
        # tau is odd in theta, so solve on the positive side
        target = abs(tau)
        hi = 1.0
        while _frank_tau(hi) < target:
            hi *= 2.0
        root = optimize.brentq(lambda t: _frank_tau(t) - target, 0.0, hi, xtol=1e-14, rtol=1e-15)
        return sign * root
    raise ValueError(f"unknown copula family {family!r}")
