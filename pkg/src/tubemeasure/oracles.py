"""Closed-form offset pushforward measures and generators of test clouds."""

import math

import numpy as np

from .geom import PointCloud, as_cloud
from .measures import DiscreteMeasure, PiecewiseMeasure, polygon_area
from .rng import RandomStream
from .sampler import sample_unit_ball


def segment_measure(a, b, r) -> PiecewiseMeasure:
    """Pushforward of the area of the r-offset of the planar segment [a, b].

    The rectangle part lands on the segment with density 2r; each end cap is
    a half disk landing on its endpoint.
    """
    a, b = np.asarray(a, float), np.asarray(b, float)
    if a.shape != (2,) or b.shape != (2,):
        raise ValueError("segment endpoints must be 2-D")
    if np.array_equal(a, b):
        raise ValueError("degenerate segment")
    cap = 0.5 * math.pi * r * r
    return PiecewiseMeasure(DiscreteMeasure(np.stack([a, b]), [cap, cap]), [(a, b, 2.0 * r)])


def exterior_angles(vertices):
    v = np.asarray(vertices, float)
    e_in = v - np.roll(v, 1, axis=0)
    e_out = np.roll(v, -1, axis=0) - v
    cross = e_in[:, 0] * e_out[:, 1] - e_in[:, 1] * e_out[:, 0]
    dot = np.sum(e_in * e_out, axis=1)
    return np.arctan2(cross, dot)


def convex_polygon_measure(vertices, r) -> PiecewiseMeasure:
    """Pushforward of the area of the r-offset of a convex polygon (CCW).

    Interior area maps to itself, each edge collects an outward strip of width
    r, each vertex a circular sector of angle equal to its exterior angle.
    """
    v = np.asarray(vertices, float)
    if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
        raise ValueError("need at least three 2-D vertices")
    theta = exterior_angles(v)
    if polygon_area(v) <= 0 or np.any(theta <= 0) or not math.isclose(theta.sum(), 2 * math.pi):
        raise ValueError("vertices must form a strictly convex counter-clockwise polygon")
    edges = [(v[k], v[(k + 1) % len(v)], float(r)) for k in range(len(v))]
    atoms = DiscreteMeasure(v, theta * r * r / 2)
    return PiecewiseMeasure(atoms, edges, [(v, 1.0)])


def knife_blade(L, R, nseg, samples_per_arc=64):
    """Sample of a blade of ``nseg`` circular arcs converging to [0, L] x {0}.

    Arc i joins (i l, 0) and ((i+1) l, 0) on the circle centered at
    ((i + 1/2) l, R), l = L / nseg, bulging away from the center line. Points
    are equally spaced in arc length; shared endpoints appear once.
    Returns ``(cloud, hausdorff_to_segment)`` where the distance is
    sqrt(R^2 + (l/2)^2) - R.
    """
    if nseg < 1:
        raise ValueError("nseg must be >= 1")
    if samples_per_arc < 2:
        raise ValueError("need at least the two endpoints per arc")
    ell = L / nseg
    rad = math.hypot(R, ell / 2)
    half = math.atan2(ell / 2, R)
    t = np.linspace(-half, half, samples_per_arc)
    parts = []
    for i in range(nseg):
        cx = (i + 0.5) * ell
        ang = t if i == nseg - 1 else t[:-1]
        pts = np.c_[cx + rad * np.sin(ang), R - rad * np.cos(ang)]
        # pin the division points exactly on the segment
        pts[0] = (i * ell, 0.0)
        if i == nseg - 1:
            pts[-1] = (L, 0.0)
        parts.append(pts)
    return PointCloud(np.concatenate(parts)), rad - R


def sample_segment(a, b, count):
    a, b = np.asarray(a, float), np.asarray(b, float)
    t = np.linspace(0.0, 1.0, count)
    return PointCloud(a + t[:, None] * (b - a))


def sample_polygon(vertices, boundary_spacing, interior_spacing):
    """Boundary points every ``boundary_spacing`` (vertices included) plus an
    interior grid with step ``interior_spacing`` strictly inside a convex
    polygon."""
    v = np.asarray(vertices, float)
    pts = []
    for k in range(len(v)):
        a, b = v[k], v[(k + 1) % len(v)]
        n = max(1, math.ceil(np.linalg.norm(b - a) / boundary_spacing))
        t = np.arange(n) / n
        pts.append(a + t[:, None] * (b - a))
    lo, hi = v.min(axis=0), v.max(axis=0)
    xs = np.arange(lo[0] + interior_spacing / 2, hi[0], interior_spacing)
    ys = np.arange(lo[1] + interior_spacing / 2, hi[1], interior_spacing)
    grid = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
    inside = np.ones(len(grid), dtype=bool)
    for k in range(len(v)):
        a, b = v[k], v[(k + 1) % len(v)]
        e = b - a
        inside &= e[0] * (grid[:, 1] - a[1]) - e[1] * (grid[:, 0] - a[0]) > 1e-12
    pts.append(grid[inside])
    return PointCloud(np.concatenate(pts))


def sample_circle(center, radius, count):
    ang = 2 * math.pi * np.arange(count) / count
    return PointCloud(np.asarray(center, float) + radius * np.c_[np.cos(ang), np.sin(ang)])


def jitter(cloud, eps, seed=0) -> PointCloud:
    """Move every point by an independent uniform vector of the closed
    eps-ball, so the Hausdorff distance to the input is at most eps."""
    if eps < 0:
        raise ValueError("eps must be >= 0")
    cloud = as_cloud(cloud)
    if eps == 0:
        return cloud
    move = sample_unit_ball(cloud.dim, RandomStream(seed), size=len(cloud))
    return PointCloud(cloud.points + eps * move)
