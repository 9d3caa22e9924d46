"""Independent reference implementations used as oracles by the tests."""

import itertools
import math

import numpy as np


def brute_nearest(points, q):
    """Linear scan; ties go to the lowest index."""
    d = np.sqrt(np.sum((points - q) ** 2, axis=1))
    i = int(np.argmin(d))
    return i, float(d[i])


def brute_cover(points, s):
    """Smallest number of closed s-balls centred at cloud points covering the cloud."""
    m = len(points)
    D = np.sqrt(np.sum((points[:, None] - points[None]) ** 2, axis=-1))
    covers = D <= s
    for k in range(1, m + 1):
        for centres in itertools.combinations(range(m), k):
            if covers[list(centres)].any(axis=0).all():
                return k
    return m


def lens_area(r, delta):
    """Area of the intersection of two radius-r disks whose centres are delta apart."""
    if delta >= 2 * r:
        return 0.0
    return 2 * r * r * math.acos(delta / (2 * r)) - 0.5 * delta * math.sqrt(4 * r * r - delta * delta)


def w1_permutation(a, b):
    """W1 between uniform measures on equally many atoms: best assignment."""
    best = math.inf
    for perm in itertools.permutations(range(len(b))):
        cost = np.mean(np.sqrt(np.sum((a - b[list(perm)]) ** 2, axis=1)))
        best = min(best, cost)
    return best


def bl_vertex_enumeration(locs, w):
    """Bounded-Lipschitz value on a tiny support by enumerating LP vertices.

    Variables (f_1..f_M, L) with C = 1 - L; constraints f_k - f_l <= L d_kl,
    +-f_k <= 1 - L, 0 <= L <= 1. The optimum sits at a vertex, so try every
    (M+1)-subset of constraints as equalities.
    """
    M = len(w)
    D = np.sqrt(np.sum((locs[:, None] - locs[None]) ** 2, axis=-1))
    rows, rhs = [], []
    for k in range(M):
        for l in range(M):
            if k != l:
                row = np.zeros(M + 1)
                row[k], row[l], row[M] = 1, -1, -D[k, l]
                rows.append(row)
                rhs.append(0.0)
    for k in range(M):
        for sign in (1, -1):
            row = np.zeros(M + 1)
            row[k], row[M] = sign, 1.0
            rows.append(row)
            rhs.append(1.0)
    for sign, b in ((-1, 0.0), (1, 1.0)):
        row = np.zeros(M + 1)
        row[M] = sign
        rows.append(row)
        rhs.append(b)
    G, h = np.array(rows), np.array(rhs)
    best = -math.inf
    for S in itertools.combinations(range(len(G)), M + 1):
        A = G[list(S)]
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        z = np.linalg.solve(A, h[list(S)])
        if np.all(G @ z <= h + 1e-10):
            best = max(best, float(w @ z[:M]))
    return best


def clip_halfplane(poly, n, c):
    """Keep the part of a convex polygon where n . x <= c."""
    out = []
    for i in range(len(poly)):
        p, q = poly[i], poly[(i + 1) % len(poly)]
        fp, fq = n @ p - c, n @ q - c
        if fp <= 0:
            out.append(p)
        if fp * fq < 0:
            out.append(p + (q - p) * fp / (fp - fq))
    return np.array(out) if out else np.empty((0, 2))


def shoelace(poly):
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def voronoi_box_areas(points, lower, upper):
    """Exact area of each Voronoi cell intersected with a 2-D box."""
    box = np.array([[lower[0], lower[1]], [upper[0], lower[1]],
                    [upper[0], upper[1]], [lower[0], upper[1]]], float)
    areas = []
    for i, p in enumerate(points):
        cell = box
        for j, q in enumerate(points):
            if j != i and len(cell):
                cell = clip_halfplane(cell, q - p, (q @ q - p @ p) / 2)
        areas.append(shoelace(cell))
    return np.array(areas)
