"""Point clouds, Euclidean metric helpers and ball/sphere volume constants."""

import math
import re

import numpy as np


class DimensionMismatch(ValueError):
    pass


class PointFileError(ValueError):
    """Raised when a point file cannot be parsed. Carries the offending line."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class PointCloud:
    """A finite, non-empty set of points in R^n stored as an (m, n) float array.

    Duplicate points are allowed; they keep their own index.
    """

    __slots__ = ("points",)

    def __init__(self, points):
        pts = np.array(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1) if pts.size else pts.reshape(0, 1)
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise ValueError("a point cloud needs at least one point of dimension >= 1")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        pts.setflags(write=False)
        self.points = pts

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def __getitem__(self, i):
        return self.points[i]

    def __iter__(self):
        return iter(self.points)

    def __repr__(self):
        return f"PointCloud(m={len(self)}, dim={self.dim})"

    def __eq__(self, other):
        if not isinstance(other, PointCloud):
            return NotImplemented
        return self.points.shape == other.points.shape and bool(np.all(self.points == other.points))

    __hash__ = None


def as_cloud(obj) -> PointCloud:
    return obj if isinstance(obj, PointCloud) else PointCloud(obj)


def _as_point(p):
    q = np.asarray(p, dtype=float)
    if q.ndim == 0:
        q = q.reshape(1)
    if q.ndim != 1:
        raise ValueError("a point is a 1-d coordinate sequence")
    if not np.all(np.isfinite(q)):
        raise ValueError("point coordinates must be finite")
    return q


def row_distances(points, q):
    """Distances from every row of ``points`` to ``q``.

    Every exact comparison in the package goes through this formula so that
    ties and closed-ball tests agree between the index and a linear scan.
    """
    diff = points - q
    return np.sqrt(np.sum(diff * diff, axis=-1))


def euclidean_distance(a, b) -> float:
    a, b = _as_point(a), _as_point(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"dimensions differ: {a.shape[0]} vs {b.shape[0]}")
    return float(row_distances(a[None, :], b)[0])


def _directed_hausdorff(A, B):
    # local import: nn depends on this module
    from .nn import NearestIndex

    _, dist = NearestIndex(B).query(A.points)
    return float(dist.max())


def hausdorff_distance(A, B) -> float:
    """Symmetric Hausdorff distance between two finite clouds."""
    A, B = as_cloud(A), as_cloud(B)
    if A.dim != B.dim:
        raise DimensionMismatch(f"dimensions differ: {A.dim} vs {B.dim}")
    return max(_directed_hausdorff(A, B), _directed_hausdorff(B, A))


def diameter(cloud, chunk=2048) -> float:
    pts = as_cloud(cloud).points
    best = 0.0
    for start in range(0, len(pts), chunk):
        block = pts[start:start + chunk]
        diff = block[:, None, :] - pts[None, :, :]
        best = max(best, float(np.sqrt(np.max(np.sum(diff * diff, axis=-1)))))
    return best


def farthest_point_order(cloud):
    """Greedy farthest-point traversal of the cloud.

    The first center is the cloud point closest to the bounding-box center;
    each following center is the point farthest from the centers chosen so
    far. Ties go to the lowest index. Returns ``(order, radii)`` where
    ``radii[k]`` is the covering radius of the first ``k + 1`` centers, so
    ``radii`` is non-increasing.
    """
    pts = as_cloud(cloud).points
    m = len(pts)
    mid = 0.5 * (pts.min(axis=0) + pts.max(axis=0))
    first = int(np.argmin(row_distances(pts, mid)))
    order = [first]
    dist = row_distances(pts, pts[first])
    radii = [float(dist.max())]
    while radii[-1] > 0.0 and len(order) < m:
        nxt = int(np.argmax(dist))
        order.append(nxt)
        dist = np.minimum(dist, row_distances(pts, pts[nxt]))
        radii.append(float(dist.max()))
    return np.array(order), np.array(radii)


def covering_number(cloud, s) -> int:
    """Upper bound on the number of closed s-balls needed to cover the cloud.

    Centers are restricted to cloud points and taken in farthest-point order;
    the result is the shortest prefix of that order whose covering radius is
    at most ``s``. Non-increasing in ``s`` by construction.
    """
    if not s > 0:
        raise ValueError("covering radius must be positive")
    _, radii = farthest_point_order(cloud)
    return int(np.argmax(radii <= s)) + 1


def ball_volume(k: int) -> float:
    """Volume of the unit ball in R^k (1 for k = 0)."""
    if k < 0:
        raise ValueError("dimension must be >= 0")
    vol = 1.0 if k % 2 == 0 else 2.0
    for j in range(2 if k % 2 == 0 else 3, k + 1, 2):
        vol *= 2.0 * math.pi / j
    return vol


def sphere_measure(k: int, r: float) -> float:
    """k-dimensional measure of the round k-sphere of radius r in R^(k+1)."""
    return (k + 1) * ball_volume(k + 1) * r ** k


_SPLIT = re.compile(r"[,\s]+")


def parse_points(text):
    """Parse the shared point format: one point per line, comma or
    whitespace separated, '#' comments and blank lines ignored."""
    rows = []
    dim = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f for f in _SPLIT.split(line) if f]
        try:
            coords = [float(f) for f in fields]
        except ValueError:
            raise PointFileError(f"not a number in {line!r}", lineno) from None
        if not all(math.isfinite(c) for c in coords):
            raise PointFileError("non-finite coordinate", lineno)
        if dim is None:
            dim = len(coords)
        elif len(coords) != dim:
            raise PointFileError(f"expected {dim} coordinates, got {len(coords)}", lineno)
        rows.append(coords)
    if not rows:
        raise PointFileError("no points found")
    return PointCloud(rows)


def read_points(path):
    with open(path, encoding="utf-8") as fh:
        return parse_points(fh.read())


def format_points(cloud):
    return "".join(" ".join(repr(float(c)) for c in p) + "\n" for p in as_cloud(cloud).points)


def write_points(cloud, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_points(cloud))
