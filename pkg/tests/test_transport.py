import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import linear_sum_assignment

from vecopula.transport import (
    VectorRankTransformer,
    block_vector_ranks,
    brute_force_assignment,
    empirical_vector_ranks,
    make_grid,
    solve_assignment,
    squared_cost_matrix,
    vector_rank_assignment,
)


def radical_inverse(i, base):
    # independent Halton oracle
    f, r = 1.0, 0.0
    while i > 0:
        f /= base
        r += f * (i % base)
        i //= base
    return r


class TestGrid:
    def test_lattice_two_by_two(self):
        g = make_grid(4, 2, "lattice")
        expected = [(0.25, 0.25), (0.25, 0.75), (0.75, 0.25), (0.75, 0.75)]
        assert sorted(map(tuple, g.points)) == expected

    def test_lattice_single_centre(self):
        np.testing.assert_array_equal(make_grid(1, 3, "lattice").points, [[0.5, 0.5, 0.5]])

    def test_lattice_rejects_non_power(self):
        with pytest.raises(ValueError, match="not a 2-th power"):
            make_grid(5, 2, "lattice")

    def test_halton_hand_values(self):
        pts = make_grid(5, 2, "halton").points
        expected = [(0.5, 1 / 3), (0.25, 2 / 3), (0.75, 1 / 9), (0.125, 4 / 9), (0.625, 7 / 9)]
        np.testing.assert_allclose(pts, expected, atol=1e-15)

    def test_halton_matches_radical_inverse(self):
        pts = make_grid(50, 3, "halton").points
        ref = [[radical_inverse(i, b) for b in (2, 3, 5)] for i in range(1, 51)]
        np.testing.assert_allclose(pts, ref, atol=1e-14)

    def test_auto_picks_lattice_for_powers(self):
        assert make_grid(27, 3).scheme == "lattice"
        assert make_grid(28, 3).scheme == "halton"

    def test_random_is_seeded(self):
        a = make_grid(10, 2, "random", seed=3).points
        b = make_grid(10, 2, "random", seed=3).points
        np.testing.assert_array_equal(a, b)

    @given(st.integers(1, 60), st.integers(1, 4), st.sampled_from(["auto", "halton", "random"]))
    def test_points_distinct_in_unit_cube(self, n, d, scheme):
        pts = make_grid(n, d, scheme, seed=0).points
        assert pts.shape == (n, d)
        assert np.all((pts >= 0) & (pts <= 1))
        assert len({tuple(p) for p in pts}) == n

    def test_unknown_scheme(self):
        with pytest.raises(ValueError, match="unknown grid scheme"):
            make_grid(4, 2, "sobol")


class TestCostMatrix:
    def test_hand_values(self):
        C = squared_cost_matrix([[0, 0], [1, 0], [0.3, 0.4]], np.array([[0, 0], [0, 1], [0, 0]]))
        assert C[0, 0] == 0
        assert C[1, 1] == 2
        assert C[2, 0] == pytest.approx(0.25)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            squared_cost_matrix(np.zeros((2, 2)), np.zeros((2, 3)))

    def test_count_mismatch(self):
        with pytest.raises(ValueError, match="as many grid points"):
            squared_cost_matrix(np.zeros((3, 2)), np.zeros((2, 2)))

    def test_non_finite(self):
        with pytest.raises(ValueError):
            squared_cost_matrix([[np.nan, 0.0]], np.zeros((1, 2)))


class TestSolveAssignment:
    def test_identity_favouring(self):
        a = solve_assignment([[0, 2], [2, 0]])
        np.testing.assert_array_equal(a.permutation, [0, 1])
        assert a.cost == 0

    def test_anti_diagonal(self):
        a = solve_assignment([[2, 0], [0, 2]])
        np.testing.assert_array_equal(a.permutation, [1, 0])
        assert a.cost == 0

    def test_one_by_one(self):
        assert brute_force_assignment([[3.0]]).permutation.tolist() == [0]
        assert solve_assignment([[3.0]]).cost == 3.0

    def test_six_by_six_against_enumeration(self, rng):
        C = rng.random((6, 6))
        best = min(sum(C[i, p[i]] for i in range(6)) for p in itertools.permutations(range(6)))
        assert solve_assignment(C).cost == pytest.approx(best, abs=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 5, 7, 8])
    def test_matches_brute_force(self, rng, n):
        for _ in range(10):
            C = squared_cost_matrix(rng.normal(size=(n, 2)), make_grid(n, 2, "halton"))
            a, b = solve_assignment(C), brute_force_assignment(C)
            assert abs(a.cost - b.cost) <= 1e-9
            np.testing.assert_array_equal(a.permutation, b.permutation)

    @pytest.mark.parametrize("n", [30, 200, 700])
    def test_matches_scipy_lsa(self, rng, n):
        C = squared_cost_matrix(rng.standard_t(3, size=(n, 3)), make_grid(n, 3))
        rows, cols = linear_sum_assignment(C)
        assert solve_assignment(C).cost == pytest.approx(C[rows, cols].sum(), rel=1e-12, abs=1e-9)

    def test_integer_costs_with_many_ties(self, rng):
        for _ in range(20):
            C = rng.integers(0, 3, size=(7, 7)).astype(float)
            a, b = solve_assignment(C), brute_force_assignment(C)
            assert a.cost == b.cost
            np.testing.assert_array_equal(a.permutation, b.permutation)

    def test_constant_cost_gives_identity(self):
        np.testing.assert_array_equal(solve_assignment(np.ones((5, 5))).permutation, np.arange(5))

    def test_duplicate_observations_lexicographic(self):
        y = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0], [1.0, 1.0]])
        a = vector_rank_assignment(y, make_grid(4, 2, "lattice"))
        b = brute_force_assignment(squared_cost_matrix(y, make_grid(4, 2, "lattice")))
        np.testing.assert_array_equal(a.permutation, b.permutation)

    def test_rejects_non_square(self):
        with pytest.raises(ValueError, match="square"):
            solve_assignment(np.zeros((2, 3)))

    def test_brute_force_size_limit(self):
        with pytest.raises(ValueError, match="n <= 10"):
            brute_force_assignment(np.zeros((11, 11)))

    @given(arrays(np.float64, (6, 6), elements=st.floats(0, 10, allow_nan=False)))
    def test_property_optimal_and_lexicographic(self, C):
        a, b = solve_assignment(C), brute_force_assignment(C)
        assert abs(a.cost - b.cost) <= 1e-9
        np.testing.assert_array_equal(a.permutation, b.permutation)


class TestEmpiricalRanks:
    def test_monotone_alignment(self):
        grid = make_grid(4, 2, "lattice")
        sub = type(grid)(np.array([[0.25, 0.25], [0.75, 0.75]]), "custom")
        r = empirical_vector_ranks([[-5, -5], [5, 5]], sub)
        np.testing.assert_array_equal(r, [[0.25, 0.25], [0.75, 0.75]])

    def test_grid_points_rank_themselves(self):
        g = make_grid(16, 2)
        np.testing.assert_array_equal(empirical_vector_ranks(g.points, g), g.points)

    def test_bijection(self, rng):
        g = make_grid(64, 3)
        r = empirical_vector_ranks(rng.normal(size=(64, 3)), g)
        assert sorted(map(tuple, r)) == sorted(map(tuple, g.points))

    def test_cost_recomputes(self, rng):
        y = rng.normal(size=(40, 2))
        g = make_grid(40, 2)
        a = vector_rank_assignment(y, g)
        assert a.cost == pytest.approx(((y - a.ranks) ** 2).sum(), abs=1e-9)

    def test_cyclical_monotonicity(self, rng):
        y = rng.normal(size=(50, 2))
        a = vector_rank_assignment(y, make_grid(50, 2))
        u = a.ranks
        for _ in range(300):
            cyc = rng.choice(50, size=rng.integers(2, 8), replace=False)
            nxt = np.roll(cyc, -1)
            assert np.sum(u[cyc] * (y[nxt] - y[cyc])) <= 1e-9

    @given(
        st.floats(-100, 100),
        st.floats(0.01, 100),
        st.integers(0, 2**32 - 1),
    )
    def test_location_scale_invariance(self, a, b, seed):
        y = np.random.default_rng(seed).normal(size=(9, 2))
        g = make_grid(9, 2)
        p1 = vector_rank_assignment(y, g).permutation
        p2 = vector_rank_assignment(a + b * y, g).permutation
        np.testing.assert_array_equal(p1, p2)

    def test_antitone_flip_on_lattice(self, rng):
        y = rng.normal(size=(25, 2))
        g = make_grid(25, 2, "lattice")
        np.testing.assert_allclose(empirical_vector_ranks(-y, g), 1.0 - empirical_vector_ranks(y, g), atol=1e-15)

    def test_one_dimensional_ranks_are_classical(self, rng):
        y = rng.normal(size=20)
        r = empirical_vector_ranks(y)
        order = np.argsort(np.argsort(y))
        np.testing.assert_allclose(r[:, 0], (order + 0.5) / 20)


class TestBlockRanks:
    def test_blocks_are_ranked_separately(self, rng):
        y = rng.normal(size=(16, 3))
        r = block_vector_ranks(y, (2, 1))
        np.testing.assert_array_equal(r[:, :2], empirical_vector_ranks(y[:, :2]))
        np.testing.assert_array_equal(r[:, 2:], empirical_vector_ranks(y[:, 2:]))

    def test_random_grid_reproducible(self, rng):
        y = rng.normal(size=(10, 4))
        a = block_vector_ranks(y, (2, 2), "random", seed=5)
        b = block_vector_ranks(y, (2, 2), "random", seed=5)
        np.testing.assert_array_equal(a, b)

    def test_transformer(self, rng):
        y = rng.normal(size=(16, 3))
        t = VectorRankTransformer(dims=(2, 1)).fit(y)
        np.testing.assert_array_equal(t.transform(y), block_vector_ranks(y, (2, 1)))
        assert t.get_params()["dims"] == (2, 1)
        with pytest.raises(ValueError, match="expected 3 columns"):
            t.transform(y[:, :2])

    def test_block_mismatch(self, rng):
        with pytest.raises(ValueError, match="cover d=3"):
            block_vector_ranks(rng.normal(size=(4, 2)), (2, 1))
