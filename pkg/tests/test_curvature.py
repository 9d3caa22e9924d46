import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tubemeasure.curvature import (
    DegenerateSchedule,
    RadiiSchedule,
    curvature_from_cloud,
    solve_curvature,
    system_matrix,
)
from tubemeasure.geom import PointCloud

SCHEDULE = RadiiSchedule((0.05, 0.1, 0.2), 2)


def test_schedule_validation():
    with pytest.raises(ValueError):
        RadiiSchedule((0.1, 0.1, 0.2), 2)
    with pytest.raises(ValueError):
        RadiiSchedule((0.1, 0.2), 2)
    with pytest.raises(ValueError):
        RadiiSchedule((0.0, 0.1, 0.2), 2)
    g = RadiiSchedule.geometric(0.05, 2)
    assert g.radii == pytest.approx((0.05, 0.1, 0.2))


def test_zero_masses_give_zero_profiles():
    prof = solve_curvature(np.zeros((3, 4)), SCHEDULE)
    assert np.all(prof.phi == 0)


def test_single_point_exact_masses():
    masses = [math.pi * r * r for r in SCHEDULE.radii]
    prof = solve_curvature(masses, SCHEDULE, [[0.0, 0.0]])
    assert prof.phi[:, 0] == pytest.approx([1.0, 0.0, 0.0], abs=1e-9)


def test_square_exact_region_masses():
    # atoms: 4 vertices (quarter disks), 4 edges (r-wide strips), 1 interior
    rows = []
    for r in SCHEDULE.radii:
        rows.append([math.pi * r * r / 4] * 4 + [r] * 4 + [1.0])
    prof = solve_curvature(np.array(rows), SCHEDULE, np.zeros((9, 2)))
    assert prof.phi[0, :4] == pytest.approx([0.25] * 4, abs=1e-9)
    assert prof.phi[1, 4:8] == pytest.approx([0.5] * 4, abs=1e-9)
    assert prof.phi[2, 8] == pytest.approx(1.0, abs=1e-9)
    assert prof.totals() == pytest.approx([1.0, 2.0, 1.0], abs=1e-9)


@settings(max_examples=50)
@given(st.integers(1, 4), st.integers(0, 2 ** 32))
def test_reconstruction(n, seed):
    gen = np.random.default_rng(seed)
    sched = RadiiSchedule.geometric(gen.uniform(0.01, 1), n)
    M = gen.uniform(0, 1, (n + 1, 7))
    prof = solve_curvature(M, sched, np.zeros((7, n)))
    back = system_matrix(sched) @ prof.phi
    assert np.allclose(back, M, rtol=1e-9, atol=1e-12 * np.abs(M).max())


def test_degenerate_schedule():
    with pytest.raises(DegenerateSchedule):
        solve_curvature(np.ones(3), RadiiSchedule((1.0, 1.0 + 1e-7, 1.0 + 2e-7), 2))


def test_singleton_cloud():
    prof = curvature_from_cloud(PointCloud([[0.3, 0.3]]), SCHEDULE, 2000, seed=1)
    assert prof.phi[:, 0] == pytest.approx([1.0, 0.0, 0.0], abs=1e-9)
    assert prof.measure(0).weights.tolist() == pytest.approx([1.0])


def test_far_pair_totals():
    prof = curvature_from_cloud(PointCloud([[0.0, 0.0], [5.0, 5.0]]), SCHEDULE, 4000, seed=2)
    assert prof.totals() == pytest.approx([2.0, 0.0, 0.0], abs=1e-9)
    d = prof.to_dict()
    assert d["radii"] == list(SCHEDULE.radii) and len(d["profiles"]) == 3


def test_dimension_must_match():
    with pytest.raises(ValueError):
        curvature_from_cloud(PointCloud([[0.0, 0.0, 0.0]]), SCHEDULE, 10)


def test_cube_exact_region_masses():
    # atoms: 8 corners (ball octants), 12 edges (quarter cylinders),
    # 6 faces (slabs of width r), 1 interior
    sched = RadiiSchedule((0.05, 0.1, 0.15, 0.2), 3)
    rows = [[math.pi * r ** 3 / 6] * 8 + [math.pi * r * r / 4] * 12 + [r] * 6 + [1.0]
            for r in sched.radii]
    prof = solve_curvature(np.array(rows), sched, np.zeros((27, 3)))
    assert prof.phi[0, :8] == pytest.approx([1 / 8] * 8, abs=1e-9)
    assert prof.phi[1, 8:20] == pytest.approx([1 / 4] * 12, abs=1e-9)
    assert prof.phi[2, 20:26] == pytest.approx([1 / 2] * 6, abs=1e-9)
    assert prof.totals() == pytest.approx([1.0, 3.0, 3.0, 1.0], abs=1e-9)


def test_singleton_in_space():
    sched = RadiiSchedule.geometric(0.1, 3)
    prof = curvature_from_cloud(PointCloud([[1.0, 2.0, 3.0]]), sched, 1000, seed=5)
    assert prof.phi[:, 0] == pytest.approx([1.0, 0.0, 0.0, 0.0], abs=1e-9)
