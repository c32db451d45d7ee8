import numpy as np
import pytest
from hypothesis import given, strategies as st

from preck.core import row_norms, score_batch
from preck.margins import (MarginKind, MarginType, agnostic_mistake_bound, check_margin,
                           check_mid_margin, check_strong_margin, check_weak_margin,
                           generate_margin_dataset, margin_stream, min_subset_mean,
                           mistake_bound)
from preck.surrogates import eval_avg, eval_max, eval_ramp


class TestCheckers:
    # positives 3, 2, 0.5; top negative 1
    S = [3.0, 2.0, 0.5, 1.0, -1.0]
    Y = [1, 1, 1, 0, 0]

    def test_weak(self):
        assert check_weak_margin(self.S, self.Y, 2, 1.0).satisfied
        assert check_weak_margin(self.S, self.Y, 2, 1.0).slack == pytest.approx(0.0)
        assert not check_weak_margin(self.S, self.Y, 2, 1.01).satisfied
        assert not check_weak_margin(self.S, self.Y, 3, 0.1).satisfied

    def test_mid(self):
        # k = 2: bottom two positives average 1.25, gap 0.25
        assert check_mid_margin(self.S, self.Y, 2, 0.25).satisfied
        assert not check_mid_margin(self.S, self.Y, 2, 0.3).satisfied
        # k = 1: all three positives average 11/6
        assert check_mid_margin(self.S, self.Y, 1, 5 / 6 - 1e-12).satisfied

    def test_strong(self):
        assert not check_strong_margin(self.S, self.Y, 0.1).satisfied
        assert check_strong_margin([2.0, 0.0], [1, 0], 2.0).satisfied

    def test_dispatch(self):
        assert check_margin(MarginKind("weak", 1.0, 2), self.S, self.Y).satisfied
        assert not check_margin(MarginKind(MarginType.STRONG, 0.1), self.S, self.Y).satisfied

    def test_needs_both_classes(self):
        with pytest.raises(ValueError):
            check_strong_margin([1.0, 2.0], [1, 1], 0.5)

    def test_kind_validation(self):
        with pytest.raises(ValueError):
            MarginKind("weak", 0.0)
        with pytest.raises(ValueError):
            MarginKind("mid", 1.0, 0)


@given(st.integers(2, 12).flatmap(lambda n: st.tuples(
    st.lists(st.integers(-4, 4).map(float), min_size=n, max_size=n),
    st.lists(st.integers(0, 1), min_size=n, max_size=n).filter(lambda y: 0 < sum(y) < len(y)))),
    st.sampled_from([0.5, 1.0, 2.0]), st.data())
def test_hierarchy_and_surrogate_links(sy, gamma, data):
    s, y = sy
    k = data.draw(st.integers(1, sum(y)))
    strong = check_strong_margin(s, y, gamma).satisfied
    mid = check_mid_margin(s, y, k, gamma).satisfied
    weak = check_weak_margin(s, y, k, gamma).satisfied
    assert (not strong or mid) and (not mid or weak)
    # margin gamma >= 1 on these scores zeroes the matching surrogate
    if gamma >= 1:
        if weak:
            assert eval_ramp(s, y, k).value == pytest.approx(0.0, abs=1e-9)
        if mid:
            assert eval_avg(s, y, k).value == pytest.approx(0.0, abs=1e-9)
        if strong:
            assert eval_max(s, y, k).value == pytest.approx(0.0, abs=1e-9)


@given(st.lists(st.integers(-3, 3), min_size=1, max_size=8), st.data())
def test_min_subset_mean_monotone(xs, data):
    k = data.draw(st.integers(1, len(xs)))
    kp = data.draw(st.integers(k, len(xs)))
    assert min_subset_mean(xs, k) <= min_subset_mean(xs, kp) + 1e-12


class TestGenerator:
    @pytest.mark.parametrize("mtype", list(MarginType))
    @pytest.mark.parametrize("gamma,R", [(0.5, 1.0), (1.0, 1.0), (2.0, 2.0)])
    def test_realizes_margin_and_norm_bound(self, mtype, gamma, R):
        for seed in range(5):
            kind = MarginKind(mtype, gamma, 3)
            data = generate_margin_dataset(kind, 60, 12, 5, seed=seed, R=R)
            s = score_batch(data.model, data.batch)
            assert check_margin(kind, s, data.batch.y).satisfied
            assert row_norms(data.batch.X).max() <= R + 1e-12
            assert data.batch.n_plus == 12

    def test_strict_levels(self):
        weak = generate_margin_dataset(MarginKind("weak", 1.0, 3), 40, 8, 3, seed=1)
        s = score_batch(weak.model, weak.batch)
        assert not check_mid_margin(s, weak.batch.y, 3, 1.0).satisfied
        mid = generate_margin_dataset(MarginKind("mid", 1.0, 3), 40, 8, 3, seed=1)
        s = score_batch(mid.model, mid.batch)
        assert not check_strong_margin(s, mid.batch.y, 1.0).satisfied

    def test_deterministic(self):
        a = generate_margin_dataset(MarginKind("mid", 1.0, 2), 30, 6, 4, seed=9)
        b = generate_margin_dataset(MarginKind("mid", 1.0, 2), 30, 6, 4, seed=9)
        assert a.batch == b.batch

    @pytest.mark.parametrize("kind,n,n_plus,dim,R", [
        (MarginKind("strong", 3.0), 10, 3, 3, 1.0),
        (MarginKind("weak", 1.0, 5), 10, 5, 3, 1.0),
        (MarginKind("mid", 2.0, 1), 10, 3, 3, 1.0),
        (MarginKind("strong", 1.0), 10, 10, 3, 1.0),
        (MarginKind("strong", 1.0), 10, 3, 1, 1.0),
    ])
    def test_infeasible(self, kind, n, n_plus, dim, R):
        with pytest.raises(ValueError):
            generate_margin_dataset(kind, n, n_plus, dim, seed=0, R=R)

    def test_stream(self):
        stream = margin_stream(MarginKind("strong", 1.0), 4, 20, 5, 3, seed=2)
        assert len(stream) == 4
        assert stream[0].batch != stream[1].batch


def test_bounds():
    assert mistake_bound(3, 2.0, 0.5) == pytest.approx(4 * 3 * 4 / 0.25)
    assert agnostic_mistake_bound(2.0, 1.0, 1, 0.0) == pytest.approx(16.0)
    assert agnostic_mistake_bound(0.0, 1.0, 4, 9.0) == pytest.approx(9.0)
    # the separable bound is the agnostic one at w = w*/gamma with zero surrogate
    assert agnostic_mistake_bound(1 / 0.5, 1.5, 3, 0.0) == pytest.approx(mistake_bound(3, 1.5, 0.5))


def test_strong_generator_pins_gap():
    data = generate_margin_dataset(MarginKind("strong", 1.0), 200, 20, 3, seed=1)
    s = score_batch(data.model, data.batch)
    gap = s[data.batch.y == 1].min() - s[data.batch.y == 0].max()
    assert gap == pytest.approx(1.0, abs=1e-12)
