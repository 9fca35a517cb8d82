"""Scikit-learn style estimators wrapping the vector copula families.

Each estimator takes rank vectors in [0, 1]^d (for instance the output of
:class:`~vecopula.transport.VectorRankTransformer`) and exposes ``fit``,
``score_samples``, ``score``, ``pdf`` and ``sample``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from vecopula._validation import BlockStructure, check_random_state, check_unit_points
from vecopula.estimation import fit_gaussian_vc_mom, fit_nesting_copula, kendall_transform
from vecopula.families.classical import classical_copula
from vecopula.families.elliptical import StudentVCParams, student_vc_logpdf, student_vc_sample
from vecopula.families.extremal import extremal_cdf, extremal_sample
from vecopula.families.gaussian import GaussianVCParams, gaussian_vc_logpdf, gaussian_vc_sample
from vecopula.families.kendall import KendallVCParams, kendall_vc_logpdf, kendall_vc_sample


class _VectorCopulaMixin:
    _fitted_attr = "params_"

    def _check_input(self, X):
        check_is_fitted(self, self._fitted_attr)
        return check_unit_points(X, self.blocks_.d)

    def score_samples(self, X):
        """Log density at each row of ``X``."""
        return self._logpdf(self._check_input(X))

    def score(self, X, y=None):
        """Mean log density."""
        return float(np.mean(self.score_samples(X)))

    def pdf(self, X):
        return np.exp(self.score_samples(X))

    def sample(self, n_samples=1, random_state=None):
        check_is_fitted(self, self._fitted_attr)
        rng = check_random_state(self.random_state if random_state is None else random_state)
        return self._sample(int(n_samples), rng)

    def cdf_monte_carlo(self, X, n_samples=100_000, random_state=None):
        """Monte Carlo estimate of the copula CDF at each row of ``X``.

        Returns ``(estimate, std_error)``; one sample is shared by all rows.
        """
        u = self._check_input(X)
        draws = self.sample(n_samples, random_state)
        below = np.all(draws[None, :, :] <= u[:, None, :], axis=2)
        est = below.mean(axis=1)
        return est, np.sqrt(est * (1.0 - est) / n_samples)


class GaussianVectorCopula(_VectorCopulaMixin, BaseEstimator):
    """Gaussian vector copula with correlation matrix ``omega``.

    ``fit`` estimates ``omega`` by the moment estimator on normal scores;
    passing ``omega`` and calling ``fit`` with ``X=None`` just freezes it.
    """

    def __init__(self, dims=None, omega=None, random_state=None):
        self.dims = dims
        self.omega = omega
        self.random_state = random_state

    def fit(self, X=None, y=None):
        if X is None:
            if self.omega is None:
                raise ValueError("either data or omega is required")
            self.params_ = GaussianVCParams(np.asarray(self.omega, dtype=float), self.dims)
        else:
            u = check_unit_points(X)
            self.params_ = fit_gaussian_vc_mom(u, BlockStructure.coerce(self.dims, u.shape[1]))
        self.blocks_ = self.params_.blocks
        self.omega_ = self.params_.omega
        self.n_features_in_ = self.blocks_.d
        return self

    def _logpdf(self, u):
        return gaussian_vc_logpdf(u, self.params_)

    def _sample(self, n, rng):
        return gaussian_vc_sample(self.params_, n, rng)


class StudentVectorCopula(_VectorCopulaMixin, BaseEstimator):
    """Student-t vector copula with scale ``sigma`` and ``dof`` degrees of freedom.

    Only fixed parameters are supported; ``fit`` validates and stores them.
    """

    def __init__(self, dims=None, sigma=None, dof=5.0, random_state=None):
        self.dims = dims
        self.sigma = sigma
        self.dof = dof
        self.random_state = random_state

    def fit(self, X=None, y=None):
        if self.sigma is None:
            raise ValueError("StudentVectorCopula needs a scale matrix; estimation is not supported")
        sigma = np.asarray(self.sigma, dtype=float)
        self.params_ = StudentVCParams(sigma, self.dof, BlockStructure.coerce(self.dims, sigma.shape[0]))
        self.blocks_ = self.params_.blocks
        self.n_features_in_ = self.blocks_.d
        return self

    def _logpdf(self, u):
        return student_vc_logpdf(u, self.params_)

    def _sample(self, n, rng):
        return student_vc_sample(self.params_, n, rng)


class KendallVectorCopula(_VectorCopulaMixin, BaseEstimator):
    """Kendall vector copula with a classical nesting copula.

    With ``theta=None`` the nesting parameter is estimated from the
    Kendall-transformed ranks; ``method`` chooses maximum likelihood or
    tau inversion.
    """

    def __init__(self, dims=None, family="gumbel", theta=None, method="mle", random_state=None):
        self.dims = dims
        self.family = family
        self.theta = theta
        self.method = method
        self.random_state = random_state

    def fit(self, X=None, y=None):
        if X is None:
            if self.theta is None:
                raise ValueError("either data or theta is required")
            blocks = BlockStructure.coerce(self.dims)
            self.report_ = None
            theta = float(self.theta)
        else:
            u = check_unit_points(X)
            blocks = BlockStructure.coerce(self.dims, u.shape[1])
            if self.theta is None:
                self.report_ = fit_nesting_copula(kendall_transform(u, blocks), self.family, self.method)
                theta = self.report_.theta
            else:
                self.report_ = None
                theta = float(self.theta)
        self.params_ = KendallVCParams(classical_copula(self.family, theta, dim=blocks.K), blocks)
        self.blocks_ = blocks
        self.theta_ = theta
        self.tau_ = self.params_.nesting.tau
        self.n_features_in_ = blocks.d
        return self

    def _logpdf(self, u):
        return kendall_vc_logpdf(u, self.params_)

    def _sample(self, n, rng):
        return kendall_vc_sample(self.params_, n, rng)


class ExtremalVectorCopula(_VectorCopulaMixin, BaseEstimator):
    """Independence, comonotonic or countermonotonic vector copula.

    Only independence has a density; the other two are singular and expose
    ``cdf`` and ``sample``.
    """

    def __init__(self, dims=None, kind="independence", random_state=None):
        self.dims = dims
        self.kind = kind
        self.random_state = random_state

    def fit(self, X=None, y=None):
        d = None if X is None else check_unit_points(X).shape[1]
        self.blocks_ = BlockStructure.coerce(self.dims, d)
        # validates the kind against the block layout
        extremal_cdf(np.full((1, self.blocks_.d), 0.5), self.blocks_, self.kind)
        self.params_ = (self.kind, self.blocks_)
        self.n_features_in_ = self.blocks_.d
        return self

    def _logpdf(self, u):
        if self.kind != "independence":
            raise ValueError(f"the {self.kind} vector copula is singular and has no density")
        return np.zeros(u.shape[0])

    def cdf(self, X):
        return extremal_cdf(self._check_input(X), self.blocks_, self.kind)

    def _sample(self, n, rng):
        return extremal_sample(self.kind, self.blocks_, n, rng)


class KendallTransformer(TransformerMixin, BaseEstimator):
    """Map block rank vectors to ``V_k = K_{d_k}(prod_j U_kj)``, one column per block."""

    def __init__(self, dims=None):
        self.dims = dims

    def fit(self, X, y=None):
        u = check_unit_points(X)
        self.blocks_ = BlockStructure.coerce(self.dims, u.shape[1])
        self.n_features_in_ = u.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "blocks_")
        return kendall_transform(check_unit_points(X, self.n_features_in_), self.blocks_)
