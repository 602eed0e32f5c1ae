import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import ensemble_feedback as ef
from ensemble_feedback.indices import IndexKind

from conftest import ROOT_HALF
from exact_oracle import exact_indices


class TestExampleA:
    def test_kronecker_constant(self, pair_a, grid_a):
        for theta in (0.3, 0.0, -1.0, 1.0, ROOT_HALF):
            A, B = ef.eval_pair(pair_a, theta)
            assert ef.kronecker_indices(A, B).values == (2, 2)
        report = ef.indices_constant(pair_a, grid_a, IndexKind.KRONECKER)
        assert report.constant
        assert report.reference == (2, 2)

    def test_hermite_drops_at_zero(self, pair_a, grid_a):
        A, B = ef.eval_pair(pair_a, 0.7)
        assert ef.hermite_indices(A, B).values == (3, 1)
        A, B = ef.eval_pair(pair_a, 0.0)
        assert ef.hermite_indices(A, B).values == (2, 2)
        report = ef.indices_constant(pair_a, grid_a, IndexKind.HERMITE)
        assert not report.constant
        assert report.mismatch_theta == 0.0
        assert report.mismatch_values == (2, 2)


class TestExampleB:
    """The verified index behaviour of the second example pair.

    Exact arithmetic (see test_agrees_with_exact_oracle_at_transition) shows
    the row-major counts are (2, 2) away from theta^2 = 1/2 and (3, 1) on
    it: the vector A b_2 carries an independent first component of size
    |theta^2 - 1/2|, so it is selected exactly when that entry is nonzero.
    """

    def test_hermite_constant(self, pair_b, grid_b):
        report = ef.indices_constant(pair_b, grid_b, IndexKind.HERMITE)
        assert report.constant
        assert report.reference == (3, 1)

    def test_kronecker_generic_value(self, pair_b):
        A, B = ef.eval_pair(pair_b, 0.5)
        assert ef.kronecker_indices(A, B).values == (2, 2)
        A, B = ef.eval_pair(pair_b, -1.0)
        assert ef.kronecker_indices(A, B).values == (2, 2)

    def test_kronecker_transition_value(self, pair_b):
        for theta in (ROOT_HALF, -ROOT_HALF):
            A, B = ef.eval_pair(pair_b, theta)
            assert ef.kronecker_indices(A, B).values == (3, 1)

    def test_kronecker_not_constant_with_witness(self, pair_b, grid_b):
        report = ef.indices_constant(pair_b, grid_b, IndexKind.KRONECKER)
        assert not report.constant
        assert report.mismatch_theta == -ROOT_HALF
        assert report.mismatch_values == (3, 1)

    def test_agrees_with_exact_oracle_at_transition(self):
        # at theta^2 = 1/2 the offending entry is exactly zero; run the
        # scan in exact rational arithmetic with entry value 0
        from fractions import Fraction

        A = [[0, 0, 2, 0], [1, 0, 0, 1], [0, 1, 0, 0], [0, 0, 0, 0]]
        B = [[0, 0], [1, 0], [0, 0], [0, 1]]
        assert exact_indices(A, B, "kron") == (3, 1)
        # and with any nonzero value there
        A[0][3] = Fraction(1, 4)
        assert exact_indices(A, B, "kron") == (2, 2)
        assert exact_indices(A, B, "herm") == (3, 1)


class TestCanonicalPairs:
    def test_block_pair_realizes_its_indices(self):
        for kappa in [(2, 1), (3, 1), (2, 2), (1, 1, 1), (0, 2)]:
            pair = ef.brunovsky_pair(kappa)
            assert ef.kronecker_indices(pair.A, pair.B).values == kappa

    def test_single_input_reachable_forces_full_chain(self):
        rng = np.random.default_rng(1)
        A = rng.standard_normal((3, 3))
        b = rng.standard_normal((3, 1))
        if ef.numerical_rank(ef.kalman_matrix(A, b))[0] == 3:
            assert ef.hermite_indices(A, b).values == (3,)
            assert ef.kronecker_indices(A, b).values == (3,)


int_matrices = arrays(np.int64, (4, 4), elements=st.integers(-3, 3))
int_inputs = arrays(np.int64, (4, 2), elements=st.integers(-3, 3))


@given(int_matrices, int_inputs)
@settings(max_examples=60, deadline=None)
def test_selection_agrees_with_exact_oracle(A, B):
    A_list = A.tolist()
    B_list = B.tolist()
    kron = ef.kronecker_indices(A.astype(float), B.astype(float)).values
    herm = ef.hermite_indices(A.astype(float), B.astype(float)).values
    assert kron == exact_indices(A_list, B_list, "kron")
    assert herm == exact_indices(A_list, B_list, "herm")


@given(int_matrices, int_inputs)
@settings(max_examples=40, deadline=None)
def test_index_sums_match_reachability(A, B):
    K = ef.kalman_matrix(A.astype(float), B.astype(float))
    rank, _ = ef.numerical_rank(K)
    kron = ef.kronecker_indices(A.astype(float), B.astype(float))
    herm = ef.hermite_indices(A.astype(float), B.astype(float))
    assert kron.total == rank
    assert herm.total == rank
    assert (kron.total == 4) == (rank == 4)


@given(arrays(np.int64, (3, 3), elements=st.integers(-3, 3)),
       arrays(np.int64, (3, 1), elements=st.integers(-3, 3)))
@settings(max_examples=40, deadline=None)
def test_single_input_orders_coincide(A, b):
    kron = ef.kronecker_indices(A.astype(float), b.astype(float)).values
    herm = ef.hermite_indices(A.astype(float), b.astype(float)).values
    assert kron == herm


def test_kronecker_invariant_under_restricted_action(arc):
    rng = np.random.default_rng(2024)
    from ensemble_feedback.randoms import (random_constant_kappa_pair,
                                           random_restricted_transform)

    grid = ef.ParamGrid.uniform(arc, 7)
    for kappa in [(2, 2), (3, 1), (2, 1)]:
        pair = random_constant_kappa_pair(rng, kappa, grid)
        t = random_restricted_transform(rng, sum(kappa), len(kappa), arc)
        moved = ef.act(t, pair)
        for idx in range(len(grid)):
            before = ef.kronecker_indices(*pair.at(idx)).values
            after = ef.kronecker_indices(*moved.at(idx)).values
            assert before == after == kappa


def test_unreachable_pair_reports_partial_sums(arc):
    A = ef.PolyMatrix.constant(np.diag([1.0, 2.0, 3.0]))
    B = ef.PolyMatrix.constant(np.array([[1.0], [0.0], [0.0]]))
    sys_pair = ef.SystemPair(3, 1, A, B, arc)
    Am, Bm = sys_pair.eval(0.0)
    vec = ef.kronecker_indices(Am, Bm)
    assert vec.values == (1,)
    assert vec.total == ef.numerical_rank(ef.kalman_matrix(Am, Bm))[0]


def test_controllability_indices_sort_decreasing():
    pair = ef.brunovsky_pair((1, 3))
    assert ef.controllability_indices(pair.A, pair.B) == (3, 1)


def test_selection_records_expose_residual_ratios(pair_b):
    A, B = ef.eval_pair(pair_b, 0.71)
    vec, records = ef.kronecker_indices(A, B, with_records=True)
    tested = [(r.column, r.power, r.selected) for r in records]
    assert (1, 1, True) in tested
    near = [r.residual_ratio for r in records if (r.column, r.power) == (1, 1)]
    assert 0 < near[0] < 0.01
