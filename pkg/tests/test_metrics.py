"""Metric tests against hand computations and a brute-force oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowhar.errors import InvalidInputError
from flowhar.metrics import accuracy, confusion, weighted_f1


def brute_force_weighted_f1(cm):
    """Direct term-by-term evaluation of the support-weighted F1 formula."""
    cm = np.asarray(cm, dtype=float)
    total = cm.sum()
    score = 0.0
    for i in range(cm.shape[0]):
        tp = cm[i, i]
        fn = cm[i, :].sum() - tp
        fp = cm[:, i].sum() - tp
        w = cm[i, :].sum() / total
        if 2 * tp + fp + fn > 0:
            score += w * (2 * tp) / (2 * tp + fp + fn)
    return score


class TestConfusion:
    def test_perfect_predictions_diagonal(self):
        cm = confusion([0, 1, 2, 1], [0, 1, 2, 1], 3)
        assert np.array_equal(cm, np.diag([1, 2, 1]))

    def test_single_predicted_class(self):
        cm = confusion([1, 1, 1], [0, 1, 2], 3)
        assert np.array_equal(cm[:, 1], [1, 1, 1])
        assert cm.sum() == 3

    def test_row_sums_are_support(self):
        labels = [0, 0, 1, 2, 2, 2]
        preds = [0, 1, 1, 0, 2, 2]
        cm = confusion(preds, labels, 3)
        assert list(cm.sum(axis=1)) == [2, 1, 3]

    def test_length_mismatch(self):
        with pytest.raises(InvalidInputError):
            confusion([0, 1], [0], 2)

    def test_out_of_range(self):
        with pytest.raises(InvalidInputError):
            confusion([0, 2], [0, 1], 2)


class TestAccuracy:
    def test_diagonal_is_one(self):
        assert accuracy(np.diag([3, 2, 5])) == 1.0

    def test_zero_diagonal_is_zero(self):
        assert accuracy(np.array([[0, 2], [3, 0]])) == 0.0

    def test_hand_computed(self):
        assert abs(accuracy(np.array([[3, 1], [2, 4]])) - 0.7) < 1e-12

    def test_empty_rejected(self):
        with pytest.raises(InvalidInputError):
            accuracy(np.zeros((3, 3)))


class TestWeightedF1:
    def test_perfect_diagonal(self):
        assert abs(weighted_f1(np.diag([4, 1, 7])) - 1.0) < 1e-12

    def test_hand_computed_binary(self):
        # F1_0 = 2*3/(6+2+1) = 2/3, F1_1 = 2*4/(8+1+2) = 8/11,
        # weights (0.4, 0.6) -> 0.4*2/3 + 0.6*8/11
        expected = 0.4 * (2 / 3) + 0.6 * (8 / 11)
        assert abs(weighted_f1(np.array([[3, 1], [2, 4]])) - expected) < 1e-12

    def test_single_class_all_correct(self):
        assert abs(weighted_f1(np.array([[5]])) - 1.0) < 1e-12

    def test_zero_support_class_ignored(self):
        cm = np.array([[3, 0, 0], [0, 4, 0], [0, 0, 0]])
        assert abs(weighted_f1(cm) - 1.0) < 1e-12

    def test_empty_rejected(self):
        with pytest.raises(InvalidInputError):
            weighted_f1(np.zeros((2, 2)))

    @settings(max_examples=100, deadline=None)
    @given(st.integers(2, 6), st.integers(0, 2**32 - 1))
    def test_matches_brute_force(self, k, seed):
        rng = np.random.default_rng(seed)
        cm = rng.integers(0, 10, size=(k, k))
        if cm.sum() == 0:
            cm[0, 0] = 1
        assert abs(weighted_f1(cm) - brute_force_weighted_f1(cm)) < 1e-12

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 5), st.integers(0, 2**32 - 1))
    def test_class_permutation_invariance(self, k, seed):
        rng = np.random.default_rng(seed)
        cm = rng.integers(0, 10, size=(k, k))
        if cm.sum() == 0:
            cm[0, 0] = 1
        perm = rng.permutation(k)
        permuted = cm[np.ix_(perm, perm)]
        assert abs(weighted_f1(cm) - weighted_f1(permuted)) < 1e-12

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 5), st.integers(0, 2**32 - 1))
    def test_range_and_perfection(self, k, seed):
        rng = np.random.default_rng(seed)
        cm = rng.integers(0, 10, size=(k, k))
        if cm.sum() == 0:
            cm[0, 0] = 1
        f1 = weighted_f1(cm)
        acc = accuracy(cm)
        assert 0.0 <= f1 <= 1.0 and 0.0 <= acc <= 1.0
        off_diagonal = cm.sum() - np.trace(cm)
        if off_diagonal == 0 and np.trace(cm) > 0:
            assert abs(f1 - 1.0) < 1e-12 and acc == 1.0
        else:
            assert f1 < 1.0 and acc < 1.0
