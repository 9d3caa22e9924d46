import math

import numpy as np
import pytest

from tubemeasure.estimator import (
    BoxRegion,
    estimate_boundary_measure,
    projection_l1_distance,
    pushforward_from_box,
    required_sample_count,
)
from tubemeasure.geom import PointCloud
from tubemeasure.measures import bl_distance
from tubemeasure.oracles import jitter
from tubemeasure.rng import RandomStream
from tubemeasure.sampler import OffsetRegion, symdiff_volume

from conftest import voronoi_box_areas


def test_required_sample_count_examples():
    direct = (2 / 0.1 ** 2) * (10 * math.log(160) + math.log(200))
    assert 11210 < direct < 11211
    assert required_sample_count(10, 0.1, 0.01) == 11211
    small = required_sample_count(1, 1.0, 1 - 1e-12)
    assert small >= 1
    for bad in [(10, 0.0, 0.1), (10, 2.0, 0.1), (10, 0.1, 0.0), (10, 0.1, 1.0), (0, 0.1, 0.1)]:
        with pytest.raises(ValueError):
            required_sample_count(*bad)


def test_required_sample_count_monotone():
    assert required_sample_count(20, 0.1, 0.01) > required_sample_count(10, 0.1, 0.01)
    assert required_sample_count(10, 0.05, 0.01) > required_sample_count(10, 0.1, 0.01)
    assert required_sample_count(10, 0.1, 0.001) > required_sample_count(10, 0.1, 0.01)


def test_singleton_is_a_dirac():
    est = estimate_boundary_measure(PointCloud([[0.2, 0.7]]), 0.5, 5000, seed=1)
    assert est.counts.tolist() == [5000]
    assert est.beta().weights.tolist() == [1.0]
    assert est.offset_volume == (pytest.approx(math.pi * 0.25, rel=1e-14), 0.0)


def test_far_pair_is_symmetric():
    N = 40000
    est = estimate_boundary_measure(PointCloud([[0.0, 0.0], [1.0, 0.0]]), 0.3, N, seed=2)
    assert est.counts.sum() == N
    assert np.all(np.abs(est.counts - N / 2) <= 4 * math.sqrt(N / 4))
    assert est.beta_weights.sum() == 1.0


def test_estimate_invariants_and_determinism():
    cloud = PointCloud(np.random.default_rng(0).random((40, 2)))
    a = estimate_boundary_measure(cloud, 0.1, 20000, seed=3, workers=3, threads=1)
    b = estimate_boundary_measure(cloud, 0.1, 20000, seed=3, workers=3, threads=3)
    assert np.array_equal(a.counts, b.counts) and a.rounds == b.rounds
    assert a.counts.sum() == 20000
    assert np.allclose(a.mu_weights, a.offset_volume[0] * a.beta_weights)
    meta = a.to_dict()["metadata"]
    assert set(meta) >= {"r", "N", "seed", "offset_volume", "offset_volume_stderr"}


@pytest.mark.parametrize("N", [10 ** 3, 10 ** 4, 10 ** 5])
def test_consistency_envelope(N):
    r = 0.25
    cloud = PointCloud([[0.0, 0.0], [2.0, 0.0]])
    est = estimate_boundary_measure(cloud, r, N, seed=N)
    target = math.pi * r * r
    err = est.mu_stderr()
    assert np.all(err <= 3 * target / math.sqrt(N))
    assert np.all(np.abs(est.mu_weights - target) <= 3 * err)


def test_box_pushforward_examples():
    box = BoxRegion((0.0, 0.0), (1.0, 1.0))
    one = pushforward_from_box(PointCloud([[3.0, 3.0]]), box, 1000)
    assert one.weights.tolist() == [1.0]
    N = 40000
    two = pushforward_from_box(PointCloud([[0.3, 0.5], [0.7, 0.5]]), box, N, seed=1)
    assert np.all(np.abs(two.weights - 0.5) <= 4 * math.sqrt(0.25 / N))
    with pytest.raises(ValueError):
        BoxRegion((0.0, 1.0), (1.0, 1.0))


def test_box_pushforward_matches_voronoi_areas():
    gen = np.random.default_rng(5)
    lower, upper = (-0.5, 0.0), (1.5, 1.0)
    box = BoxRegion(lower, upper)
    N = 10 ** 5
    for trial in range(5):
        pts = gen.uniform(-0.5, 1.5, (int(gen.integers(2, 6)), 2))
        p = voronoi_box_areas(pts, lower, upper) / box.volume
        est = pushforward_from_box(PointCloud(pts), box, N, seed=trial)
        w = np.zeros(len(pts))
        w[:len(est.weights)] = est.weights     # distinct points keep their order
        assert np.all(np.abs(w - p) <= 4 * np.sqrt(p * (1 - p) / N) + 1e-12)


def test_projection_l1_examples():
    box = BoxRegion((0.0, 0.0), (2.0, 1.0))
    cloud = PointCloud(np.random.default_rng(2).random((10, 2)))
    assert projection_l1_distance(cloud, cloud, box, 5000) == (0.0, 0.0)
    est, err = projection_l1_distance(PointCloud([[0.0, 0.0]]), PointCloud([[3.0, 4.0]]), box, 5000)
    assert est == pytest.approx(2.0 * 5.0, rel=1e-14) and err == 0.0


def test_transport_triangle_bound():
    # d_bL(mu_K, mu_K') <= |p_K - p_K'|_L1(box) + vol(K^r sym-diff K'^r)
    gen = np.random.default_rng(8)
    r, N = 0.15, 40000
    for trial in range(4):
        K = PointCloud(gen.random((12, 2)))
        K2 = jitter(K, 0.02, seed=trial)
        a = estimate_boundary_measure(K, r, N, seed=10 + trial)
        b = estimate_boundary_measure(K2, r, N, seed=10 + trial)
        lhs = bl_distance(a.mu(), b.mu())
        lo = np.minimum(K.points.min(axis=0), K2.points.min(axis=0)) - r
        hi = np.maximum(K.points.max(axis=0), K2.points.max(axis=0)) + r
        l1, l1_err = projection_l1_distance(K, K2, BoxRegion(tuple(lo), tuple(hi)), N, seed=trial)
        sd, sd_err = symdiff_volume(OffsetRegion(K, r), OffsetRegion(K2, r), N, RandomStream(trial))
        noise = a.mu_stderr().sum() + b.mu_stderr().sum()
        slack = 5 * math.sqrt(l1_err ** 2 + sd_err ** 2 + noise ** 2)
        assert lhs <= l1 + sd + slack
