import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_array_equal

from preck.metrics import (delta, effective_k, overlap, prec_at_k, prec_at_kappa, rank,
                           top_k_labeling)

labels_scores = st.integers(1, 12).flatmap(lambda n: st.tuples(
    st.lists(st.integers(-3, 3).map(float), min_size=n, max_size=n),
    st.lists(st.integers(0, 1), min_size=n, max_size=n)))


class TestRank:
    def test_ties_by_index(self):
        assert_array_equal(rank([1.0, 2.0, 1.0, 2.0]), [1, 3, 0, 2])

    def test_empty(self):
        with pytest.raises(ValueError):
            rank([])

    @given(st.lists(st.floats(-100, 100), min_size=1, max_size=40))
    def test_is_descending_permutation(self, s):
        r = rank(s)
        assert sorted(r.tolist()) == list(range(len(s)))
        ordered = np.asarray(s)[r]
        assert np.all(np.diff(ordered) <= 0)


class TestPrecAtK:
    def test_hand_example(self):
        s = [0.9, 0.1, 0.8, 0.7, 0.2]
        y = [1, 1, 0, 0, 1]
        assert prec_at_k(s, y, 1) == 0
        assert prec_at_k(s, y, 2) == 1
        assert prec_at_k(s, y, 3) == 2
        assert prec_at_k(s, y, 5) == 2

    def test_tie_break(self):
        # equal scores: the earlier index ranks first
        assert prec_at_k([1.0, 1.0], [0, 1], 1) == 1
        assert prec_at_k([1.0, 1.0], [1, 0], 1) == 0

    @pytest.mark.parametrize("k", [0, 4])
    def test_k_range(self, k):
        with pytest.raises(ValueError):
            prec_at_k([1.0, 2.0, 3.0], [1, 0, 1], k)

    @given(labels_scores, st.data())
    def test_equals_delta_of_top_k(self, sy, data):
        s, y = sy
        k = data.draw(st.integers(1, len(s)))
        yhat = top_k_labeling(s, k)
        assert yhat.sum() == k
        assert prec_at_k(s, y, k) == delta(y, yhat)
        assert overlap(y, yhat) + delta(y, yhat) == k

    @given(labels_scores)
    def test_monotone_in_k(self, sy):
        s, y = sy
        losses = [prec_at_k(s, y, k) for k in range(1, len(s) + 1)]
        assert all(0 <= b - a <= 1 for a, b in zip(losses, losses[1:]))


class TestEffectiveK:
    @pytest.mark.parametrize("kappa,n_plus,want", [
        (0.25, 100, 25), (0.25, 101, 26), (0.7, 10, 7), (0.01, 5, 1), (1.0, 9, 9), (0.5, 0, 1)])
    def test_values(self, kappa, n_plus, want):
        assert effective_k(kappa, n_plus) == want

    @pytest.mark.parametrize("kappa", [0.0, -0.1, 1.5])
    def test_bad_kappa(self, kappa):
        with pytest.raises(ValueError):
            effective_k(kappa, 10)

    def test_prec_at_kappa(self):
        s = np.arange(8.0)[::-1]
        y = [1, 0, 1, 1, 0, 0, 1, 0]
        # four positives, kappa 0.5 -> k = 2; top-2 holds one negative
        assert prec_at_kappa(s, y, 0.5) == 0.5
        with pytest.raises(ValueError):
            prec_at_kappa([1.0], [0], 0.5)


def test_delta_and_overlap():
    assert delta([1, 0, 0, 1], [1, 1, 1, 0]) == 2
    assert overlap([1, 0, 0, 1], [1, 1, 1, 0]) == 1
    with pytest.raises(ValueError):
        delta([1, 0], [1])
