import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import ensemble_feedback as ef

from conftest import ROOT_HALF


class TestParamArc:
    def test_chart_is_exact_at_endpoints(self):
        arc = ef.ParamArc(-3.0, 7.0)
        assert arc.gamma_inverse(-3.0) == 0.0
        assert arc.gamma_inverse(7.0) == 1.0
        assert arc.gamma(0.0) == -3.0 and arc.gamma(1.0) == 7.0

    def test_rejects_degenerate_interval(self):
        with pytest.raises(ef.DomainError):
            ef.ParamArc(1.0, 1.0)


class TestGrid:
    def test_uniform_grid_includes_endpoints(self, arc):
        grid = ef.ParamGrid.uniform(arc, 11)
        assert grid.points[0] == -1.0 and grid.points[-1] == 1.0
        assert len(grid) == 11

    def test_insert_merges_and_stays_increasing(self, arc):
        grid = ef.ParamGrid.uniform(arc, 11, insert=[0.05, -0.33])
        assert np.all(np.diff(grid.points) > 0)
        assert 0.05 in grid.points and -0.33 in grid.points

    def test_insert_outside_arc_rejected(self, arc):
        with pytest.raises(ef.DomainError):
            ef.ParamGrid.uniform(arc, 11, insert=[2.0])


class TestEvalPair:
    def test_example_a_entry_is_quadratic(self, pair_a):
        A, _ = ef.eval_pair(pair_a, 1.0)
        assert A[1, 0] == 2.0
        A, _ = ef.eval_pair(pair_a, 0.5)
        assert A[1, 0] == pytest.approx(0.5)

    def test_zero_entries_evaluate_to_zero(self, pair_a):
        for theta in (-1.0, -0.25, 0.0, 0.9):
            A, B = ef.eval_pair(pair_a, theta)
            assert A[0, 0] == 0.0 and A[2, 0] == 0.0
            assert B[0, 0] == 0.0 and B[2, 1] == 0.0

    def test_example_b_constant_offset(self, pair_b):
        A, _ = ef.eval_pair(pair_b, 0.0)
        assert A[0, 3] == -0.5

    def test_outside_arc_rejected(self, pair_a):
        with pytest.raises(ef.DomainError):
            ef.eval_pair(pair_a, 1.5)

    def test_evaluation_is_bitwise_reproducible(self, pair_a, grid_a):
        first = pair_a.A(grid_a.points)
        second = pair_a.A(grid_a.points)
        assert np.array_equal(first, second)
        for theta in grid_a.points[::40]:
            assert np.array_equal(pair_a.A(theta), first[grid_a.index_of(theta)])


class TestKalmanMatrix:
    def test_zero_dynamics_identity_input(self):
        n = 3
        K = ef.kalman_matrix(np.zeros((n, n)), np.eye(n))
        expected = np.hstack([np.eye(n)] + [np.zeros((n, n))] * (n - 1))
        assert np.array_equal(K, expected)

    def test_block_columns_match_repeated_multiplication(self):
        rng = np.random.default_rng(42)
        for _ in range(5):
            A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            B = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
            K = ef.kalman_matrix(A, B)
            n, m = 4, 2
            for j in range(n):
                for i in range(m):
                    v = B[:, i].copy()
                    for _ in range(j):
                        v = A @ v
                    assert np.allclose(K[:, j * m + i], v, atol=1e-12)

    def test_example_a_columns_at_theta_one(self, pair_a):
        A, B = ef.eval_pair(pair_a, 1.0)
        K = ef.kalman_matrix(A, B)
        b1 = np.array([0, 1, 0, 0])
        b2 = np.array([0, 0, 0, 1])
        cols = [b1, b2]
        for _ in range(3):
            cols.extend([A @ cols[-2], A @ cols[-1]])
        assert np.allclose(K, np.column_stack(cols))
        # hand values at theta = 1, columns ordered b1, b2, A b1, A b2, ...
        assert np.allclose(K[:, 2], [1, 0, 0, -2])
        assert np.allclose(K[:, 3], [0, 2, 1, 0])
        assert np.allclose(K[:, 4], [0, -2, -2, 0])
        assert np.allclose(K[:, 5], [2, 0, 0, -4])
        assert np.allclose(K[:, 6], [-2, 0, 0, 4])
        assert np.allclose(K[:, 7], [0, -4, -4, 0])


class TestReachability:
    def test_example_a_reachable_everywhere(self, pair_a):
        grid = pair_a.default_grid(21)
        report = ef.pointwise_reachable(pair_a, grid, tol=1e-9)
        assert report.all_reachable
        assert report.witness_theta is None

    def test_zero_input_never_reachable(self, arc):
        A = ef.PolyMatrix.constant(np.eye(2))
        B = ef.PolyMatrix.constant(np.zeros((2, 1)))
        sys_pair = ef.SystemPair(2, 1, A, B, arc)
        report = ef.pointwise_reachable(sys_pair, ef.ParamGrid.uniform(arc, 5))
        assert not report.all_reachable
        assert np.all(report.ranks == 0)
        assert report.witness_theta == -1.0

    def test_oscillator_pair_reachable(self):
        sys_pair = ef.oscillator_pair((2.0, 1.0), k=3.0, theta_star=1.0)
        grid = sys_pair.default_grid(41)
        report = ef.pointwise_reachable(sys_pair, grid)
        assert report.all_reachable
        # the reachability matrix is g(theta) times the antidiagonal
        A, B = sys_pair.eval(0.5)
        K = ef.kalman_matrix(A, B)
        g = 2.5
        assert np.allclose(K, g * np.array([[0, 1], [1, 0]]))

    def test_rejects_nonpositive_tolerance(self, pair_a, grid_a):
        with pytest.raises(ef.DomainError):
            ef.pointwise_reachable(pair_a, grid_a, tol=0.0)


@given(st.integers(-4, 4), st.integers(-4, 4), st.integers(-4, 4))
@settings(max_examples=30, deadline=None)
def test_numerical_rank_of_outer_products(a, b, c):
    v = np.array([a, b, c], dtype=float)
    M = np.outer(v, v)
    rank, _ = ef.numerical_rank(M)
    assert rank == (1 if np.any(v != 0) else 0)


def test_rank_verdict_invariant_under_group_action(pair_a):
    grid = pair_a.default_grid(9)
    samples = pair_a.sample(grid)
    rng = np.random.default_rng(0)
    from ensemble_feedback.randoms import random_restricted_transform

    t = random_restricted_transform(rng, 4, 2, pair_a.arc)
    moved = ef.act(t, samples)
    before = ef.pointwise_reachable(samples)
    after = ef.pointwise_reachable(moved)
    assert np.array_equal(before.ranks, after.ranks)


def test_root_half_square_is_representable():
    # the index transition of the second example sits at theta^2 = 1/2;
    # the closest double gives an entry far below the rank tolerance
    assert abs(ROOT_HALF ** 2 - 0.5) < 1e-15
