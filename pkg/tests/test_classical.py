import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from vecopula.families.classical import (
    ClaytonCopula,
    FrankCopula,
    GaussianCopula,
    GumbelCopula,
    IndependenceCopula,
    classical_copula,
    debye1,
    tau_from_theta,
    tau_range,
    theta_from_tau,
)

FAMILY_CASES = [
    ("clayton", -0.6),
    ("clayton", 0.7),
    ("clayton", 4.0),
    ("frank", -6.0),
    ("frank", 0.4),
    ("frank", 9.0),
    ("gumbel", 1.0),
    ("gumbel", 1.6),
    ("gumbel", 4.5),
    ("gaussian", -0.7),
    ("gaussian", 0.5),
]


def debye1_dilog(theta, as_float=True):
    """First Debye function from the dilogarithm; negative arguments via D(-x) = D(x) + x/2."""
    with mpmath.workdps(40):
        x = abs(mpmath.mpf(theta))
        integral = mpmath.pi**2 / 6 + x * mpmath.log(1 - mpmath.exp(-x)) - mpmath.polylog(2, mpmath.exp(-x))
        val = integral / x + (x / 2 if theta < 0 else 0)
        return float(val) if as_float else val


def frank_tau_mp(theta):
    with mpmath.workdps(40):
        return float(1 - 4 / mpmath.mpf(theta) * (1 - debye1_dilog(theta, as_float=False)))


def mixed_difference(cop, u, h=1e-4):
    C = lambda a, b: cop.cdf(np.column_stack([a, b]))
    x, y = u[:, 0], u[:, 1]
    return (C(x + h, y + h) - C(x + h, y - h) - C(x - h, y + h) + C(x - h, y - h)) / (4 * h * h)


class TestDebye:
    @pytest.mark.parametrize("theta", [-20.0, -3.0, -0.5, 1e-3, 0.5, 3.0, 20.0])
    def test_against_dilogarithm(self, theta):
        assert debye1(theta) == pytest.approx(debye1_dilog(theta), rel=1e-11)

    def test_zero(self):
        assert debye1(0.0) == 1.0


class TestTau:
    def test_clayton_two(self):
        assert tau_from_theta("clayton", 2.0) == 0.5

    def test_gumbel_one_is_independence(self):
        assert tau_from_theta("gumbel", 1.0) == 0.0
        u = np.random.default_rng(0).random((20, 2))
        np.testing.assert_allclose(GumbelCopula(1.0).cdf(u), u.prod(axis=1), rtol=1e-12)
        np.testing.assert_allclose(GumbelCopula(1.0).pdf(u), 1.0, rtol=1e-12)

    def test_gaussian_table_value(self):
        assert theta_from_tau("gaussian", 0.44) == pytest.approx(0.63742, abs=1e-5)

    def test_frank_small_theta_series_is_continuous(self):
        a = tau_from_theta("frank", 0.999e-4)
        b = tau_from_theta("frank", 1.001e-4)
        assert abs(a - b) < 1e-7
        for theta in (-3e-4, 0.999e-4, 1.001e-4, 0.7, 0.999999, 1.000001, -1.5, 12.0):
            assert tau_from_theta("frank", theta) == pytest.approx(frank_tau_mp(theta), rel=1e-9, abs=1e-15)

    @pytest.mark.parametrize("family", ["clayton", "frank", "gumbel", "gaussian"])
    def test_roundtrip_grid(self, family):
        lo, hi = tau_range(family)
        for tau in np.linspace(lo + 0.01, hi - 0.01, 50):
            assert tau_from_theta(family, theta_from_tau(family, tau)) == pytest.approx(tau, abs=1e-8)

    @given(st.sampled_from(["clayton", "frank", "gumbel", "gaussian"]), st.floats(-0.98, 0.98))
    def test_roundtrip_property(self, family, tau):
        lo, _ = tau_range(family)
        tau = max(tau, lo)
        assert tau_from_theta(family, theta_from_tau(family, tau)) == pytest.approx(tau, abs=1e-8)

    @pytest.mark.parametrize(
        "family,tau", [("gumbel", -0.1), ("clayton", 1.0), ("gaussian", 1.0), ("frank", -1.0), ("independence", 0.3)]
    )
    def test_out_of_range(self, family, tau):
        with pytest.raises(ValueError):
            theta_from_tau(family, tau)

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="unknown copula family"):
            classical_copula("joe", 2.0)


class TestDensities:
    @pytest.mark.parametrize("family,theta", FAMILY_CASES)
    def test_density_is_mixed_derivative_of_cdf(self, family, theta, rng):
        cop = classical_copula(family, theta)
        u = rng.uniform(0.05, 0.95, size=(40, 2))
        np.testing.assert_allclose(cop.pdf(u), mixed_difference(cop, u), rtol=2e-5, atol=1e-6)

    @pytest.mark.parametrize("family,theta", FAMILY_CASES)
    def test_cdf_boundary_conditions(self, family, theta, rng):
        cop = classical_copula(family, theta)
        t = rng.uniform(0.01, 0.99, 20)
        np.testing.assert_allclose(cop.cdf(np.column_stack([t, np.ones_like(t)])), t, atol=1e-7)
        np.testing.assert_allclose(cop.cdf(np.column_stack([np.ones_like(t), t])), t, atol=1e-7)
        assert np.all(cop.cdf(np.column_stack([t, np.zeros_like(t)])) <= 1e-7)

    @pytest.mark.parametrize("family,theta", FAMILY_CASES)
    def test_density_integrates_to_one(self, family, theta, rng):
        u = rng.random((400_000, 2))
        assert classical_copula(family, theta).pdf(u).mean() == pytest.approx(1.0, abs=0.03)

    def test_gaussian_density_at_centre(self):
        assert GaussianCopula(0.5).pdf([0.5, 0.5])[0] == pytest.approx(2 / math.sqrt(3), rel=1e-14)

    def test_gaussian_matches_bivariate_normal(self, rng):
        u = rng.uniform(0.02, 0.98, (30, 2))
        z = stats.norm.ppf(u)
        ref = stats.multivariate_normal([0, 0], [[1, 0.3], [0.3, 1]]).pdf(z) / stats.norm.pdf(z).prod(axis=1)
        np.testing.assert_allclose(GaussianCopula(0.3).pdf(u), ref, rtol=1e-10)

    def test_frank_extreme_parameters_are_finite(self):
        u = np.array([[1.0, 1.0], [0.0, 0.0], [1.0, 0.0], [0.5, 0.5]])
        for th in (-50.0, 50.0):
            c = FrankCopula(th)
            assert np.all(np.isfinite(c.logpdf(u)))
            assert np.all(np.isfinite(c.cdf(u)))

    def test_clayton_negative_support(self):
        c = ClaytonCopula(-0.5)
        assert c.logpdf([[0.05, 0.05]])[0] == -np.inf
        assert c.cdf([[0.05, 0.05]])[0] == 0.0

    def test_clayton_lower_bound_has_no_density(self):
        with pytest.raises(ValueError, match="singular"):
            ClaytonCopula(-1.0).pdf([[0.5, 0.5]])

    def test_zero_theta_is_independence(self, rng):
        u = rng.random((10, 2))
        for cls in (ClaytonCopula, FrankCopula):
            np.testing.assert_array_equal(cls(0.0).pdf(u), 1.0)
            np.testing.assert_allclose(cls(0.0).cdf(u), u.prod(axis=1))

    def test_near_zero_theta_is_smooth(self, rng):
        u = rng.uniform(0.1, 0.9, (10, 2))
        for cls in (ClaytonCopula, FrankCopula):
            np.testing.assert_allclose(cls(1e-9).pdf(u), 1.0, atol=1e-7)

    @pytest.mark.parametrize("theta", [-2.0, 0.5])
    def test_invalid_parameters(self, theta):
        with pytest.raises(ValueError):
            GumbelCopula(theta) if theta > 0 else ClaytonCopula(theta)

    def test_gaussian_equicorrelation(self):
        c = GaussianCopula(0.3, dim=3)
        assert c.corr.shape == (3, 3)
        with pytest.raises(ValueError, match="positive definite"):
            GaussianCopula(-0.6, dim=3)

    def test_independence_any_dimension(self, rng):
        c = IndependenceCopula(dim=4)
        u = rng.random((5, 4))
        np.testing.assert_array_equal(c.pdf(u), 1.0)
        np.testing.assert_allclose(c.cdf(u), u.prod(axis=1))

    def test_equality(self):
        assert ClaytonCopula(2.0) == ClaytonCopula(2.0)
        assert ClaytonCopula(2.0) != FrankCopula(2.0)
        assert len({GumbelCopula(2.0), GumbelCopula(2.0)}) == 1


class TestSamplers:
    @pytest.mark.parametrize("family,theta", FAMILY_CASES)
    def test_uniform_margins_and_tau(self, family, theta):
        cop = classical_copula(family, theta)
        u = cop.sample(10_000, np.random.default_rng(11))
        for j in range(2):
            assert stats.kstest(u[:, j], "uniform").statistic < 1.63 / 100
        tau = stats.kendalltau(u[:, 0], u[:, 1]).statistic
        assert tau == pytest.approx(cop.tau, abs=0.03)

    @pytest.mark.parametrize("family,theta", FAMILY_CASES)
    def test_empirical_cdf_matches(self, family, theta):
        cop = classical_copula(family, theta)
        u = cop.sample(40_000, np.random.default_rng(5))
        probes = np.array([[0.2, 0.3], [0.5, 0.5], [0.8, 0.4], [0.9, 0.9]])
        emp = [np.mean((u[:, 0] <= a) & (u[:, 1] <= b)) for a, b in probes]
        np.testing.assert_allclose(emp, cop.cdf(probes), atol=0.01)

    def test_clayton_lower_bound_is_countermonotonic(self, rng):
        u = ClaytonCopula(-1.0).sample(100, rng)
        np.testing.assert_allclose(u.sum(axis=1), 1.0)

    def test_seeded(self):
        a = GumbelCopula(2.0).sample(5, np.random.default_rng(1))
        b = GumbelCopula(2.0).sample(5, np.random.default_rng(1))
        np.testing.assert_array_equal(a, b)
