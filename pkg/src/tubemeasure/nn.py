"""Exact nearest-neighbour and closed-ball counting queries over a point cloud."""

import numpy as np
from scipy.spatial import cKDTree

from .geom import DimensionMismatch, as_cloud, row_distances

# above this dimension a kd-tree prunes too little to beat a scan
TREE_MAX_DIM = 16

# relative slack used to find candidates that a kd-tree distance might order
# differently from row_distances; candidates are then re-ranked exactly
_SLACK = 1e-9


class NearestIndex:
    """Immutable exact nearest-neighbour index.

    Answers are identical to a linear scan with :func:`row_distances`, ties
    going to the lowest point index.
    """

    def __init__(self, cloud, force_brute=False):
        self.cloud = as_cloud(cloud)
        pts = self.cloud.points
        self.points = pts
        self.dim = pts.shape[1]
        self.brute = force_brute or self.dim > TREE_MAX_DIM
        if not self.brute:
            # duplicates are collapsed onto their lowest index, so the kd-tree
            # only ever sees ties between distinct points (a null event)
            uniq, first = np.unique(pts, axis=0, return_index=True)
            self._rep = first
            self._uniq_tree = cKDTree(uniq)
            self._tree = cKDTree(pts)

    def __len__(self):
        return len(self.points)

    def _check(self, Q):
        Q = np.asarray(Q, dtype=float)
        single = Q.ndim == 1
        Q = Q.reshape(1, -1) if single else Q
        if Q.shape[1] != self.dim:
            raise DimensionMismatch(f"query dimension {Q.shape[1]} != cloud dimension {self.dim}")
        return Q, single

    def nearest(self, q):
        """Return ``(index, distance)`` of the closest cloud point to ``q``."""
        idx, dist = self.query(q)
        return int(idx[0]), float(dist[0])

    def query(self, Q):
        """Vectorised :meth:`nearest` over the rows of ``Q``."""
        Q, _ = self._check(Q)
        if self.brute:
            return self._query_brute(Q)
        k = min(2, len(self._rep))
        d, j = self._uniq_tree.query(Q, k=k)
        if k == 1:
            idx = self._rep[j]
        else:
            idx = self._rep[j[:, 0]]
            close = d[:, 1] <= d[:, 0] * (1 + _SLACK) + 1e-300
            for row in np.flatnonzero(close):
                idx[row] = self._resolve(Q[row], d[row, 0])
        return idx, row_distances(self.points[idx], Q) if Q.shape[0] else np.empty(0)

    def _resolve(self, q, d0):
        cand = self._tree.query_ball_point(q, d0 * (1 + 4 * _SLACK) + 1e-300)
        cand = np.sort(np.asarray(cand, dtype=np.intp))
        dist = row_distances(self.points[cand], q)
        return cand[int(np.argmin(dist))]

    def _rows_per_block(self):
        return max(1, (1 << 22) // (len(self.points) * self.dim))

    def _query_brute(self, Q):
        idx = np.empty(len(Q), dtype=np.intp)
        dist = np.empty(len(Q))
        P = self.points
        step = self._rows_per_block()
        for start in range(0, len(Q), step):
            block = Q[start:start + step]
            diff = block[:, None, :] - P[None, :, :]
            D = np.sqrt(np.sum(diff * diff, axis=-1))
            j = np.argmin(D, axis=1)
            idx[start:start + len(block)] = j
            dist[start:start + len(block)] = D[np.arange(len(block)), j]
        return idx, dist

    def count_within(self, q, r):
        """Number of cloud points in the closed ball B(q, r)."""
        return int(self.count_batch(q, r)[0])

    def count_batch(self, Q, r):
        if not r > 0:
            raise ValueError("radius must be positive")
        Q, _ = self._check(Q)
        if self.brute:
            out = np.empty(len(Q), dtype=np.int64)
            P = self.points
            step = self._rows_per_block()
            for start in range(0, len(Q), step):
                block = Q[start:start + step]
                diff = block[:, None, :] - P[None, :, :]
                out[start:start + len(block)] = np.sum(np.sqrt(np.sum(diff * diff, axis=-1)) <= r, axis=1)
            return out
        lo = self._tree.query_ball_point(Q, r * (1 - _SLACK), return_length=True)
        hi = self._tree.query_ball_point(Q, r * (1 + _SLACK), return_length=True)
        out = np.asarray(lo, dtype=np.int64)
        for row in np.flatnonzero(lo != hi):
            cand = np.asarray(self._tree.query_ball_point(Q[row], r * (1 + _SLACK)), dtype=np.intp)
            out[row] = int(np.sum(row_distances(self.points[cand], Q[row]) <= r))
        return out

    def neighbors_within(self, r):
        """For each cloud point, the indices of all points within distance r,
        sorted by that distance (stable in index). Returns CSR arrays
        ``(offsets, indices, distances)``."""
        pts = self.points
        if self.brute:
            lists = [np.flatnonzero(row_distances(pts, p) <= r) for p in pts]
        else:
            lists = self._tree.query_ball_point(pts, r * (1 + _SLACK))
        offsets = np.zeros(len(pts) + 1, dtype=np.int64)
        idx_parts, dist_parts = [], []
        for i, lst in enumerate(lists):
            lst = np.sort(np.asarray(lst, dtype=np.intp))
            d = row_distances(pts[lst], pts[i])
            keep = d <= r
            lst, d = lst[keep], d[keep]
            order = np.argsort(d, kind="stable")
            idx_parts.append(lst[order])
            dist_parts.append(d[order])
            offsets[i + 1] = offsets[i] + len(lst)
        return offsets, np.concatenate(idx_parts), np.concatenate(dist_parts)

    def neighbor_pair_count(self, r):
        """Total size of :meth:`neighbors_within` without building it."""
        if self.brute:
            return int(sum(np.sum(row_distances(self.points, p) <= r) for p in self.points))
        return int(np.sum(self._tree.query_ball_point(self.points, r * (1 + _SLACK), return_length=True)))


def build(cloud) -> NearestIndex:
    return NearestIndex(cloud)
