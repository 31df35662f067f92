import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from openvelope.region import (HyperRectangle, RegionUnion, contains, contains_union, decode,
                               decode_batch, encode, is_valid_union, pair_disjoint)

UNIT = HyperRectangle((0.0, 0.0), (1.0, 1.0))


def interval(a, b):
    return HyperRectangle((a,), (b,))


@pytest.mark.parametrize("point, inside", [
    ((0.5, 0.5), True),
    ((1.0, 0.0), True),
    ((1.1, 0.5), False),
])
def test_contains(point, inside):
    assert contains(UNIT, point) is inside


def test_contains_dimension_mismatch():
    with pytest.raises(ValueError):
        contains(UNIT, (0.5,))


def test_contains_union_on_a_line():
    r = RegionUnion([interval(0, 1), interval(2, 3)])
    assert contains_union(r, (2.5,))
    assert not contains_union(r, (1.5,))


@pytest.mark.parametrize("a, b, expected", [
    (UNIT, HyperRectangle((2, 0), (3, 1)), True),
    (HyperRectangle((0, 0), (2, 2)), HyperRectangle((1, 1), (3, 3)), False),
    (interval(0, 1), interval(1, 2), False),
    (HyperRectangle((0, 0), (1, 5)), HyperRectangle((2, 1), (3, 4)), True),
])
def test_pair_disjoint(a, b, expected):
    assert pair_disjoint(a, b) is expected


def test_is_valid_union():
    assert is_valid_union(RegionUnion([UNIT]))
    assert is_valid_union(RegionUnion([interval(0, 1), interval(2, 3), interval(4, 5)]))
    assert not is_valid_union(RegionUnion([interval(0, 2), interval(1, 3)]))


def test_box_needs_positive_width():
    with pytest.raises(ValueError):
        HyperRectangle((0.0,), (0.0,))


class TestDecode:
    def test_plain(self):
        assert decode([0, 1], 1, 1) == RegionUnion([interval(0, 1)])

    def test_swapped_pair(self):
        assert decode([1, 0], 1, 1) == RegionUnion([interval(0, 1)])

    def test_identical_boxes_invalid(self):
        assert decode([0, 1, 0, 1], 2, 1) is None

    def test_zero_width_invalid(self):
        assert decode([0.5, 0.5], 1, 1) is None

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            decode([0, 1, 2], 1, 1)

    def test_layout_is_box_dim_pair(self):
        r = decode([0, 1, 5, 6, 2, 3, 7, 8], 2, 2)
        assert r.boxes[0] == HyperRectangle((0, 5), (1, 6))
        assert r.boxes[1] == HyperRectangle((2, 7), (3, 8))

    def test_batch_agrees(self):
        rng = np.random.default_rng(3)
        V = rng.uniform(0, 4, (300, 8))
        V[::7, 4:] = V[::7, :4]
        lo, hi, valid = decode_batch(V, 2, 2)
        for v, ok in zip(V, valid):
            assert (decode(v, 2, 2) is not None) == ok


def test_union_equality_ignores_order():
    a, b = interval(0, 1), interval(2, 3)
    assert RegionUnion([a, b]) == RegionUnion([b, a])
    assert hash(RegionUnion([a, b])) == hash(RegionUnion([b, a]))


def test_json_round_trip():
    r = RegionUnion([HyperRectangle((0, 1), (2, 3)), HyperRectangle((5, 5), (6, 7))])
    assert RegionUnion.from_json(r.to_json()) == r


def test_center_of_mass_weights_by_volume():
    r = RegionUnion([interval(0, 1), interval(10, 13)])
    assert r.center_of_mass[0] == pytest.approx((0.5 * 1 + 11.5 * 3) / 4)


coord = st.floats(-50, 50, allow_nan=False)


@st.composite
def boxes(draw, p):
    lo = [draw(coord) for _ in range(p)]
    w = [draw(st.floats(0.01, 20)) for _ in range(p)]
    return HyperRectangle(tuple(lo), tuple(a + b for a, b in zip(lo, w)))


@given(st.integers(1, 3).flatmap(lambda p: st.tuples(boxes(p), boxes(p))))
def test_pair_disjoint_symmetric(pair):
    a, b = pair
    assert pair_disjoint(a, b) == pair_disjoint(b, a)


@given(st.integers(1, 3).flatmap(lambda p: st.tuples(boxes(p), boxes(p))), st.integers(0, 2**32))
def test_disjoint_boxes_share_no_point(pair, seed):
    a, b = pair
    assume(pair_disjoint(a, b))
    lo = np.minimum(a.lower, b.lower)
    hi = np.maximum(a.upper, b.upper)
    pts = np.random.default_rng(seed).uniform(lo, hi, (500, a.p))
    pts = np.vstack([pts, np.asarray(a.lower), np.asarray(a.upper), np.asarray(b.lower)])
    assert not np.any(a.mask(pts) & b.mask(pts))


@given(st.integers(1, 3).flatmap(lambda p: st.lists(boxes(p), min_size=1, max_size=3)),
       st.integers(0, 2**32))
def test_union_membership_is_or(bs, seed):
    r = RegionUnion(bs)
    for pt in np.random.default_rng(seed).uniform(-60, 80, (50, r.p)):
        assert contains_union(r, pt) == any(contains(b, pt) for b in bs)


@given(st.integers(1, 3).flatmap(lambda p: st.lists(boxes(p), min_size=1, max_size=3)))
def test_decode_encode_identity(bs):
    r = RegionUnion(bs)
    assume(is_valid_union(r))
    assert decode(encode(r), r.L, r.p) == r
