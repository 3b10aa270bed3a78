"""Tests for the sparse-table range-maximum index."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from napx.errors import InputError
from napx.rmq import RangeMaxIndex

from oracles import range_max_scan


def test_single_element():
    r = RangeMaxIndex(np.array([7.0]))
    assert r.query_max(0, 0) == (7.0, 0)


def test_ties_pick_smallest_index():
    r = RangeMaxIndex(np.array([1.0, 5.0, 5.0, 5.0, 2.0]))
    assert r.query_max(0, 4) == (5.0, 1)
    assert r.query_max(2, 4) == (5.0, 2)


def test_handles_neg_inf():
    v = np.array([-np.inf, -np.inf, 3.0])
    r = RangeMaxIndex(v)
    assert r.query_max(0, 1) == (-np.inf, 0)
    assert r.query_max(0, 2) == (3.0, 2)


def test_rejects_bad_input():
    with pytest.raises(InputError):
        RangeMaxIndex(np.array([]))
    with pytest.raises(InputError):
        RangeMaxIndex(np.zeros((2, 2)))
    r = RangeMaxIndex(np.array([1.0, 2.0]))
    with pytest.raises(InputError):
        r.query_max(1, 0)
    with pytest.raises(InputError):
        r.query_max(0, 2)


def test_query_many_invalid_windows():
    r = RangeMaxIndex(np.array([1.0, 2.0, 3.0]))
    vals, idxs = r.query_many(np.array([0, 2, 1]), np.array([2, 1, 1]))
    assert vals[0] == 3.0 and idxs[0] == 2
    assert vals[1] == -np.inf and idxs[1] == -1      # empty window
    assert vals[2] == 2.0 and idxs[2] == 1


@settings(deadline=None, max_examples=60, derandomize=True)
@given(st.lists(st.floats(min_value=-100, max_value=100) | st.just(float("-inf")),
                min_size=1, max_size=80),
       st.data())
def test_matches_linear_scan(values, data):
    """Every query agrees with a direct scan, argmax ties included."""
    v = np.array(values, dtype=np.float64)
    r = RangeMaxIndex(v)
    lo = data.draw(st.integers(0, len(values) - 1))
    hi = data.draw(st.integers(lo, len(values) - 1))
    want = range_max_scan(v, lo, hi)
    assert r.query_max(lo, hi) == want
    vals, idxs = r.query_many(np.array([lo]), np.array([hi]))
    assert (vals[0], idxs[0]) == want
