"""Finitely supported measures, piecewise-uniform measures, and the
bounded-Lipschitz and Wasserstein-1 distances between discrete measures."""

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .geom import DimensionMismatch, row_distances

_HIGHS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


class MassMismatch(ValueError):
    pass


class DiscreteMeasure:
    """Weighted Dirac masses at distinct locations.

    Atoms at identical locations are merged (weights summed) in order of first
    appearance. ``signed=False`` enforces non-negative weights.
    """

    def __init__(self, locations, weights, signed=False):
        loc = np.asarray(locations, dtype=float)
        if loc.ndim == 1:
            loc = loc.reshape(-1, 1)
        w = np.asarray(weights, dtype=float).reshape(-1)
        if loc.shape[0] != w.shape[0]:
            raise ValueError("locations and weights differ in length")
        if loc.shape[0] == 0:
            raise ValueError("a discrete measure needs at least one atom")
        if not (np.all(np.isfinite(loc)) and np.all(np.isfinite(w))):
            raise ValueError("non-finite atom")
        if not signed and np.any(w < 0):
            raise ValueError("negative weight in an unsigned measure")
        uniq, first, inverse = np.unique(loc, axis=0, return_index=True, return_inverse=True)
        if len(uniq) < len(loc):
            order = np.argsort(first)
            rank = np.empty_like(order)
            rank[order] = np.arange(len(order))
            merged = np.zeros(len(uniq))
            np.add.at(merged, rank[inverse.reshape(-1)], w)
            loc, w = uniq[order], merged
        self.locations = loc
        self.weights = w
        self.signed = signed

    @property
    def dim(self):
        return self.locations.shape[1]

    def __len__(self):
        return len(self.weights)

    def __repr__(self):
        return f"DiscreteMeasure(atoms={len(self)}, dim={self.dim}, mass={self.weights.sum():.6g})"

    def scaled(self, factor):
        return DiscreteMeasure(self.locations, self.weights * factor, self.signed or factor < 0)

    def to_dict(self):
        return {
            "dim": int(self.dim),
            "atoms": [{"x": [float(c) for c in x], "w": float(w)}
                      for x, w in zip(self.locations, self.weights)],
        }

    @classmethod
    def from_dict(cls, data):
        atoms = data["atoms"]
        dim = int(data["dim"])
        loc = np.array([a["x"] for a in atoms], dtype=float).reshape(len(atoms), dim)
        w = np.array([a["w"] for a in atoms], dtype=float)
        return cls(loc, w, signed=bool(np.any(w < 0)))


def dirac(x, weight=1.0):
    return DiscreteMeasure(np.atleast_2d(np.asarray(x, dtype=float)), [weight], signed=weight < 0)


@dataclass
class PiecewiseMeasure:
    """Atoms plus uniform densities on segments and (2-D) convex polygons.

    ``segments`` holds ``(a, b, density_per_length)``; ``regions`` holds
    ``(vertices, density_per_area)`` with counter-clockwise vertices.
    """

    atoms: DiscreteMeasure = None
    segments: list = field(default_factory=list)
    regions: list = field(default_factory=list)

    def __post_init__(self):
        for _, _, dens in self.segments:
            if dens < 0:
                raise ValueError("negative segment density")
        for verts, dens in self.regions:
            if dens < 0:
                raise ValueError("negative region density")
            if np.asarray(verts).shape[1] != 2:
                raise ValueError("regions are 2-D only")


def polygon_area(verts):
    v = np.asarray(verts, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def total_mass(m) -> float:
    if isinstance(m, DiscreteMeasure):
        return float(m.weights.sum())
    mass = float(m.atoms.weights.sum()) if m.atoms is not None else 0.0
    for a, b, dens in m.segments:
        mass += dens * float(np.linalg.norm(np.asarray(b, float) - np.asarray(a, float)))
    for verts, dens in m.regions:
        mass += dens * abs(polygon_area(verts))
    return mass


def clip_polygon(verts, lo, hi):
    """Sutherland-Hodgman clip of a convex polygon to the box [lo, hi]."""
    poly = [np.asarray(v, dtype=float) for v in verts]
    for axis in (0, 1):
        for bound, keep_below in ((lo[axis], False), (hi[axis], True)):
            if not poly:
                return []
            out = []
            for p, q in zip(poly, poly[1:] + poly[:1]):
                pin = p[axis] <= bound if keep_below else p[axis] >= bound
                qin = q[axis] <= bound if keep_below else q[axis] >= bound
                if pin:
                    out.append(p)
                if pin != qin:
                    t = (bound - p[axis]) / (q[axis] - p[axis])
                    out.append(p + t * (q - p))
            poly = out
    return poly


def discretize(m, bins: int) -> DiscreteMeasure:
    """Replace continuous parts by atoms.

    Each segment is cut into ``bins`` equal pieces with their mass at the piece
    midpoints; each polygon is cut by a ``bins`` x ``bins`` grid over its
    bounding box with the mass of each cell (exact clipped area) at the cell
    center.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    if isinstance(m, DiscreteMeasure):
        return m
    locs, ws = [], []
    if m.atoms is not None:
        locs.append(m.atoms.locations)
        ws.append(m.atoms.weights)
    for a, b, dens in m.segments:
        a, b = np.asarray(a, float), np.asarray(b, float)
        t = (np.arange(bins) + 0.5) / bins
        locs.append(a + t[:, None] * (b - a))
        ws.append(np.full(bins, dens * float(np.linalg.norm(b - a)) / bins))
    for verts, dens in m.regions:
        v = np.asarray(verts, float)
        lo, hi = v.min(axis=0), v.max(axis=0)
        xs = np.linspace(lo[0], hi[0], bins + 1)
        ys = np.linspace(lo[1], hi[1], bins + 1)
        for ix in range(bins):
            for iy in range(bins):
                cell_lo = np.array([xs[ix], ys[iy]])
                cell_hi = np.array([xs[ix + 1], ys[iy + 1]])
                piece = clip_polygon(v, cell_lo, cell_hi)
                if len(piece) >= 3:
                    area = abs(polygon_area(piece))
                    if area > 0:
                        locs.append(((cell_lo + cell_hi) / 2)[None, :])
                        ws.append([dens * area])
    return DiscreteMeasure(np.concatenate(locs), np.concatenate([np.asarray(w, float) for w in ws]))


def _common_support(mu, nu):
    if mu.dim != nu.dim:
        raise DimensionMismatch(f"dimensions differ: {mu.dim} vs {nu.dim}")
    joint = DiscreteMeasure(np.concatenate([mu.locations, nu.locations]),
                            np.concatenate([mu.weights, -nu.weights]), signed=True)
    return joint.locations, joint.weights


def pairwise_distances(A, B):
    return np.stack([row_distances(B, a) for a in A]) if len(A) else np.empty((0, len(B)))


def bl_distance(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Bounded-Lipschitz distance: sup of |int f dmu - int f dnu| over f with
    Lip(f) + sup|f| <= 1.

    An optimal f only matters on the union of the supports and any such values
    extend to R^n with the same Lipschitz constant and sup norm, so this is the
    finite LP over (f_1..f_M, L, C): maximise sum w_k f_k with
    |f_k - f_l| <= L d_kl, |f_k| <= C, L + C <= 1, L, C >= 0.
    """
    loc, w = _common_support(mu, nu)
    M = len(w)
    if M == 1 or not np.any(w):
        return abs(float(w.sum()))
    D = pairwise_distances(loc, loc)
    k, l = np.nonzero(~np.eye(M, dtype=bool))
    P = len(k)
    rows = np.arange(P)
    # f_k - f_l - L d_kl <= 0 for every ordered pair
    A_lip = sparse.csr_matrix(
        (np.concatenate([np.ones(P), -np.ones(P), -D[k, l]]),
         (np.concatenate([rows, rows, rows]), np.concatenate([k, l, np.full(P, M)]))),
        shape=(P, M + 2))
    eye = sparse.identity(M, format="csr")
    c_col = sparse.csr_matrix(np.c_[np.zeros((M, 1)), -np.ones((M, 1))])
    A_sup = sparse.vstack([sparse.hstack([eye, c_col]), sparse.hstack([-eye, c_col])])
    A_budget = sparse.csr_matrix(np.r_[np.zeros(M), 1.0, 1.0][None, :])
    A = sparse.vstack([A_lip, A_sup, A_budget]).tocsr()
    b = np.r_[np.zeros(P + 2 * M), 1.0]
    bounds = [(None, None)] * M + [(0, None), (0, None)]
    res = linprog(np.r_[-w, 0.0, 0.0], A_ub=A, b_ub=b, bounds=bounds, method="highs", options=_HIGHS)
    if res.status != 0:
        raise RuntimeError(f"bounded-Lipschitz LP failed: {res.message}")
    return max(0.0, -float(res.fun))


def _check_transport(mu, nu):
    if mu.dim != nu.dim:
        raise DimensionMismatch(f"dimensions differ: {mu.dim} vs {nu.dim}")
    if np.any(mu.weights < 0) or np.any(nu.weights < 0):
        raise ValueError("Wasserstein distance needs non-negative weights")
    a, b = mu.weights.sum(), nu.weights.sum()
    if not (a > 0 and abs(a - b) <= 1e-9 * max(1.0, a)):
        raise MassMismatch(f"total masses differ: {a!r} vs {b!r}")


def w1_distance(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Optimal transport cost with Euclidean ground cost (Kantorovich primal)."""
    _check_transport(mu, nu)
    a, b = mu.weights, nu.weights * (mu.weights.sum() / nu.weights.sum())
    p, q = len(a), len(b)
    C = pairwise_distances(mu.locations, nu.locations)
    ii, jj = np.divmod(np.arange(p * q), q)
    A_eq = sparse.vstack([
        sparse.csr_matrix((np.ones(p * q), (ii, np.arange(p * q))), shape=(p, p * q)),
        sparse.csr_matrix((np.ones(p * q), (jj, np.arange(p * q))), shape=(q, p * q)),
    ]).tocsr()
    res = linprog(C.reshape(-1), A_eq=A_eq, b_eq=np.r_[a, b], bounds=(0, None),
                  method="highs", options=_HIGHS)
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    return max(0.0, float(res.fun))


def fm_distance(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Fortet-Mourier distance: sup over 1-Lipschitz f of int f d(mu - nu),
    solved as its own LP (the dual side of :func:`w1_distance`)."""
    _check_transport(mu, nu)
    loc, w = _common_support(mu, nu)
    M = len(w)
    if M == 1:
        return 0.0
    D = pairwise_distances(loc, loc)
    k, l = np.nonzero(~np.eye(M, dtype=bool))
    P = len(k)
    rows = np.arange(P)
    A = sparse.csr_matrix((np.r_[np.ones(P), -np.ones(P)], (np.r_[rows, rows], np.r_[k, l])),
                          shape=(P, M))
    # f is only defined up to a constant; pin the first value
    bounds = [(0, 0)] + [(None, None)] * (M - 1)
    res = linprog(-w, A_ub=A, b_ub=D[k, l], bounds=bounds, method="highs", options=_HIGHS)
    if res.status != 0:
        raise RuntimeError(f"Fortet-Mourier LP failed: {res.message}")
    return max(0.0, -float(res.fun))


def pushforward(mu: DiscreteMeasure, f) -> DiscreteMeasure:
    """Image measure of ``mu`` under a map acting on rows of an (k, n) array."""
    return DiscreteMeasure(f(mu.locations), mu.weights, mu.signed)


def mass_of(m: DiscreteMeasure, mask_fn) -> float:
    """Total weight of atoms whose location satisfies ``mask_fn``."""
    return float(m.weights[np.asarray(mask_fn(m.locations), dtype=bool)].sum())

