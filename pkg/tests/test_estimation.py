import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from openvelope.data import Dataset, resample_index
from openvelope.estimation import (BootstrapConfig, BootstrapError, BootstrapPlan, SortedAxis,
                                   bootstrap_sd, coverage, estimate, saa_mean)
from openvelope.region import HyperRectangle, RegionUnion

EVERYTHING = RegionUnion([HyperRectangle((-1e9,), (1e9,))])


def line(y):
    y = np.asarray(y, dtype=float)
    return Dataset(y, np.arange(y.size, dtype=float))


def span(a, b):
    return RegionUnion([HyperRectangle((a,), (b,))])


def naive_sd(d, r, M, seed):
    """Straight transcription: resample, skip empty replicates, first M kept."""
    mask = r.mask(d.x)
    means = []
    m = 0
    while len(means) < M and m < 10 * M:
        idx = resample_index(d.n, seed + m)
        inside = mask[idx]
        if inside.any():
            means.append(d.y[idx][inside].mean())
        m += 1
    if len(means) < M:
        raise BootstrapError("too many empty replicates")
    return float(np.std(means, ddof=1))


class TestSaaMean:
    def test_full(self):
        assert saa_mean(line([1, 2, 3]), EVERYTHING) == 2.0

    def test_singleton(self):
        assert saa_mean(line([1, 4, 2]), span(0.5, 1.5)) == 4.0

    def test_empty(self):
        assert saa_mean(line([1, 2, 3]), span(10, 11)) is None

    def test_full_space_matches_mean(self):
        y = np.random.default_rng(1).normal(3, 2, 1000)
        assert abs(saa_mean(line(y), EVERYTHING) - y.mean()) < 1e-12

    def test_dimension_mismatch(self, grid_2d):
        with pytest.raises(ValueError):
            saa_mean(grid_2d, EVERYTHING)


class TestCoverage:
    def test_full(self):
        assert coverage(line([1, 2, 3]), EVERYTHING) == 1.0

    def test_none(self):
        assert coverage(line([1, 2, 3]), span(10, 11)) == 0.0

    def test_half(self):
        assert coverage(line([1, 2, 3, 4]), span(0, 1)) == 0.5

    def test_estimate_bundle(self):
        est = estimate(line([1, 2, 3, 4]), span(2, 3))
        assert (est.mean, est.coverage, est.inside_count) == (3.5, 0.5, 2)


class TestBootstrapSd:
    def test_constant_response(self):
        assert bootstrap_sd(line([7.0] * 30), span(3, 20), BootstrapConfig(M=50)) == 0.0

    def test_deterministic(self):
        d = line(np.random.default_rng(2).random(100))
        cfg = BootstrapConfig(M=100, seed=4)
        assert bootstrap_sd(d, span(10, 60), cfg) == bootstrap_sd(d, span(10, 60), cfg)

    def test_clt_full_space(self):
        y = np.random.default_rng(11).normal(0, 3, 1000)
        sd = bootstrap_sd(line(y), EVERYTHING, BootstrapConfig(M=500, seed=0))
        target = y.std(ddof=1) / np.sqrt(y.size)
        assert abs(sd - target) / target < 0.15

    def test_matches_naive_transcription(self):
        d = line(np.random.default_rng(5).normal(size=60))
        r = span(10, 40)
        assert bootstrap_sd(d, r, BootstrapConfig(M=80, seed=9)) == pytest.approx(
            naive_sd(d, r, 80, 9), rel=1e-12)

    def test_small_region_redraws_empty_replicates(self):
        # one point out of 20: about 36% of resamples miss it
        d = line(np.random.default_rng(6).normal(size=20))
        r = span(4.5, 5.5)
        got = bootstrap_sd(d, r, BootstrapConfig(M=50, seed=3))
        assert got == pytest.approx(naive_sd(d, r, 50, 3), rel=1e-12)

    def test_empty_region_raises(self):
        with pytest.raises(BootstrapError):
            bootstrap_sd(line([1.0, 2.0]), span(10, 11), BootstrapConfig(M=10))

    def test_shortfall_of_nonempty_replicates_raises(self):
        plan = BootstrapPlan(line([1.0, 2.0, 3.0]), BootstrapConfig(M=3))
        num = np.array([1.0, 2.0, 0.0, 0.0])
        den = np.array([1.0, 1.0, 0.0, 0.0])
        with pytest.raises(BootstrapError):
            plan._sd_from(num, den)
        assert plan._sd_from(np.array([1.0, 0.0, 2.0, 3.0]), np.array([1.0, 0.0, 1.0, 1.0])) == 1.0

    def test_intervals_path_matches_mask_path(self):
        rng = np.random.default_rng(8)
        d = Dataset(rng.normal(size=150), rng.uniform(0, 10, 150))
        plan = BootstrapPlan(d, BootstrapConfig(M=200, seed=1))
        axis = SortedAxis(d)
        for lo, hi in [(0, 10), (2, 3), (4.4, 4.6), (9.9, 10)]:
            s, e = axis.positions(np.array([lo]), np.array([hi]))
            fast = plan.sd_intervals(s[:, None], e[:, None])[0]
            mask = (d.x[:, 0] >= lo) & (d.x[:, 0] <= hi)
            if not mask.any():
                assert np.isnan(fast)
                continue
            assert fast == pytest.approx(plan.sd_mask(mask), rel=1e-9)

    def test_requires_two_replicates(self):
        with pytest.raises(ValueError):
            BootstrapConfig(M=1)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32), st.floats(0, 5), st.floats(0, 5), st.floats(0, 3), st.floats(0, 3))
def test_coverage_monotone_and_integral(seed, a, w, grow_lo, grow_hi):
    rng = np.random.default_rng(seed)
    d = Dataset(rng.normal(size=40), rng.uniform(0, 10, (40, 2)))
    small = RegionUnion([HyperRectangle((a, a), (a + w + 0.01, a + w + 0.01))])
    big = RegionUnion([HyperRectangle((a - grow_lo, a), (a + w + 0.01 + grow_hi, a + w + 0.01))])
    c_small, c_big = coverage(d, small), coverage(d, big)
    assert c_small <= c_big
    assert c_small * d.n == int(round(c_small * d.n))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32))
def test_inside_count_sums_over_disjoint_boxes(seed):
    rng = np.random.default_rng(seed)
    d = Dataset(rng.normal(size=80), rng.uniform(0, 10, (80, 2)))
    cut = rng.uniform(2, 8)
    boxes = [HyperRectangle((0, 0), (cut, 10)), HyperRectangle((cut + 0.1, 0), (10, 10))]
    total = estimate(d, RegionUnion(boxes)).inside_count
    assert total == sum(estimate(d, RegionUnion([b])).inside_count for b in boxes)


@settings(max_examples=20, deadline=None)
@given(st.floats(1e-6, 1.0))
def test_sd_shrinks_with_response_spread(scale):
    noise = np.random.default_rng(0).normal(size=100)
    d = line(5.0 + scale * noise)
    sd = bootstrap_sd(d, EVERYTHING, BootstrapConfig(M=50))
    ref = bootstrap_sd(line(5.0 + noise), EVERYTHING, BootstrapConfig(M=50))
    assert sd == pytest.approx(scale * ref, rel=1e-6)
