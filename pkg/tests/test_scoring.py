import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from equicorr.scoring import ConfusionCounts, confusion, discrepancy_pct, loss, select

ys = arrays(np.float64, st.integers(1, 30), elements=st.floats(-50, 50))


def test_select_zero_cut():
    assert select([1.0, -2.0, 0.5], 0.0).tolist() == [0, 1, 2]


def test_select_is_strict():
    assert select([1, -3, 2], 2.0).tolist() == [1]


def test_select_at_max_is_empty():
    y = [1.0, -7.0, 3.0]
    assert select(y, 7.0).size == 0


def test_select_rejects_negative_cut():
    with pytest.raises(ValueError):
        select([1.0], -1e-9)


@given(ys, st.floats(0, 60), st.floats(0, 60))
def test_select_nested(y, c1, c2):
    lo, hi = sorted((c1, c2))
    assert set(select(y, hi)) <= set(select(y, lo))


@given(ys, st.floats(0, 60), st.randoms(use_true_random=False))
def test_select_permutation_equivariant(y, C, rnd):
    perm = list(range(y.size))
    rnd.shuffle(perm)
    perm = np.array(perm)
    # select(y[perm]) holds positions j with y[perm[j]] selected
    assert sorted(perm[select(y[perm], C)]) == select(y, C).tolist()


def test_confusion_perfect():
    nu = np.array([0, 1, 1, 0, 1])
    c = confusion(np.flatnonzero(nu), nu)
    assert (c.fp, c.fn) == (0, 0)
    assert c.tp == 3 and c.tn == 2


def test_confusion_all_selected_no_signals():
    nu = np.zeros(6, dtype=int)
    assert confusion(np.arange(6), nu) == ConfusionCounts(fp=6, fn=0, tp=0, tn=0)


def test_confusion_hand_count():
    assert confusion([0, 1], [1, 0, 1, 0]) == ConfusionCounts(fp=1, fn=1, tp=1, tn=1)


def test_confusion_out_of_range():
    with pytest.raises(ValueError):
        confusion([4], [0, 1, 0, 1])


@given(st.lists(st.integers(0, 1), min_size=1, max_size=40), st.data())
def test_confusion_partitions(nu, draw):
    m = len(nu)
    sel = draw.draw(st.lists(st.integers(0, m - 1), unique=True))
    c = confusion(sel, nu)
    assert c.fp + c.fn + c.tp + c.tn == m
    assert c.tp + c.fn == sum(nu)
    assert c.fp + c.tn == m - sum(nu)
    # unit loss is the size of the symmetric difference with the true support
    support = {i for i, v in enumerate(nu) if v == 1}
    assert loss(c) == len(support ^ set(sel))


def test_loss():
    assert loss(ConfusionCounts(0, 0, 3, 4)) == 0
    assert loss(ConfusionCounts(fp=2, fn=3, tp=0, tn=0), 1.0, 1.0) == 5
    assert loss(ConfusionCounts(fp=2, fn=3, tp=0, tn=0), 1.0, 2.0) == 8


@pytest.mark.parametrize(
    "e_method,e_ideal,expected",
    [(11.053, 9.473, 14.295), (5.531, 4.356, 21.244)],
)
def test_discrepancy_table_values(e_method, e_ideal, expected):
    assert discrepancy_pct(e_method, e_ideal) == pytest.approx(expected, abs=1e-3)


def test_discrepancy_equal_errors():
    assert discrepancy_pct(3.2, 3.2) == 0.0


def test_discrepancy_undefined():
    with pytest.raises(ValueError):
        discrepancy_pct(0.0, 0.0)


@given(st.floats(1e-6, 1e6), st.floats(0, 1e6))
def test_discrepancy_at_most_100(e_method, e_ideal):
    d = discrepancy_pct(e_method, e_ideal)
    assert d <= 100.0
    if e_ideal == 0.0:
        assert d == 100.0
