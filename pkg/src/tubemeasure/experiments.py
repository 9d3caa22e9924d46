"""Desk-scale stability experiments and bound checks.

Every check returns the measured value, the bound and a Monte-Carlo standard
error, never a bare boolean. Experiments compare two clouds with the same seed
so the two estimates share their random draws and their difference is not
swamped by sampling noise.
"""

from dataclasses import asdict, dataclass, field
import csv
import io
import math

import numpy as np

from .estimator import BoxRegion, estimate_boundary_measure, projection_l1_distance
from .geom import PointCloud, as_cloud, covering_number, diameter, hausdorff_distance, sphere_measure
from .measures import bl_distance
from .nn import NearestIndex
from .oracles import jitter, knife_blade, sample_segment
from .rng import RandomStream, substream_seed
from .sampler import OffsetRegion, boundary_area_estimate, symdiff_volume

SLACK_SIGMAS = 5.0


class OutOfWindow(ValueError):
    """Perturbation sizes outside min(diam K, r, r^2 / diam K)."""


@dataclass
class StabilityRow:
    eps: float       # measured Hausdorff distance
    dist: float
    ratio: float     # dist / sqrt(eps)
    stderr: float
    bound: float


@dataclass
class StabilityReport:
    rows: list
    fitted_slope: float
    config: dict = field(default_factory=dict)

    CSV_HEADER = ("eps", "dist", "ratio", "stderr", "bound")

    def ratios(self):
        return np.array([row.ratio for row in self.rows])

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.CSV_HEADER)
        for row in self.rows:
            writer.writerow([repr(float(getattr(row, k))) for k in self.CSV_HEADER])
        return buf.getvalue()

    def to_dict(self):
        return {"rows": [asdict(r) for r in self.rows], "fitted_slope": self.fitted_slope,
                "config": self.config}


def loglog_slope(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    keep = (x > 0) & (y > 0)
    if keep.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def _finish(rows, config):
    rows = sorted(rows, key=lambda row: row.eps)
    slope = loglog_slope([r.eps for r in rows], [r.dist for r in rows])
    return StabilityReport(rows, slope, config)


def stability_window(cloud, r):
    diam = diameter(cloud)
    return min(diam, r, r * r / diam) if diam > 0 else 0.0


def stability_experiment(cloud, r, eps_list, n_per_estimate, seed=0, workers=1, threads=None):
    """Jitter the cloud at each eps, and compare the two unnormalised boundary
    measures in bounded-Lipschitz distance.

    ``bound`` is the explicit factor N(K, r - e) r^n (r + diam K) sqrt(e / r)
    of the Hoelder estimate, e the measured Hausdorff distance; the
    dimensional constant in front is not known, so ``config["c3_fit"]`` holds
    the smallest constant that makes every row satisfy it.
    """
    cloud = as_cloud(cloud)
    eps_list = [float(e) for e in eps_list]
    if any(e < 0 for e in eps_list):
        raise ValueError("eps values must be >= 0")
    window = stability_window(cloud, r)
    if max(eps_list) >= window:
        raise OutOfWindow(f"max eps {max(eps_list):g} not below min(diam, r, r^2/diam) = {window:g}")
    n = cloud.dim
    diam = diameter(cloud)
    ref = estimate_boundary_measure(cloud, r, n_per_estimate, seed, workers, threads)
    ref_mu, ref_err = ref.mu(), ref.mu_stderr()
    rows = []
    for k, eps in enumerate(eps_list):
        moved = jitter(cloud, eps, substream_seed(seed, k + 1))
        d_h = hausdorff_distance(cloud, moved)
        est = estimate_boundary_measure(moved, r, n_per_estimate, seed, workers, threads)
        dist = bl_distance(ref_mu, est.mu())
        stderr = math.sqrt(float(np.sum(ref_err ** 2) + np.sum(est.mu_stderr() ** 2)))
        bound = 0.0
        if d_h > 0:
            bound = covering_number(cloud, r - d_h) * r ** n * (r + diam) * math.sqrt(d_h / r)
        ratio = dist / math.sqrt(d_h) if d_h > 0 else 0.0
        rows.append(StabilityRow(float(d_h), float(dist), float(ratio), stderr, float(bound)))
    c3 = max((row.dist / row.bound for row in rows if row.bound > 0), default=0.0)
    config = {"experiment": "stability", "r": r, "N": n_per_estimate, "seed": seed,
              "threads": workers, "eps": eps_list, "window": window, "c3_fit": c3}
    return _finish(rows, config)


def knife_box(L, R):
    """The rectangle between the segment [0, L] x {0} and its parallel at height R."""
    return BoxRegion((0.0, 0.0), (float(L), float(R)))


def holder_knife_experiment(L, R, nseg_list, box=None, N=10 ** 5, seed=0, samples_per_arc=64):
    """L1(E) distance between projections on a sampled segment and on sampled
    knife blades; ``bound`` holds sqrt(d_H), the Hoelder reference scale."""
    box = box or knife_box(L, R)
    finest = max(nseg_list)
    segment = sample_segment((0.0, 0.0), (L, 0.0), finest * (samples_per_arc - 1) + 1)
    rows = []
    for nseg in nseg_list:
        blade, d_h = knife_blade(L, R, nseg, samples_per_arc)
        dist, stderr = projection_l1_distance(segment, blade, box, N, seed)
        ratio = float(dist) / math.sqrt(d_h)
        rows.append(StabilityRow(d_h, float(dist), ratio, float(stderr), math.sqrt(d_h)))
    config = {"experiment": "knife", "L": L, "R": R, "nseg": list(nseg_list), "N": N,
              "seed": seed, "samples_per_arc": samples_per_arc, "box": [box.lower, box.upper]}
    return _finish(rows, config)


@dataclass
class BoundCheck:
    measured: float
    bound: float
    stderr: float
    passed: bool

    def to_dict(self):
        return asdict(self)


def symdiff_bound_check(cloud, r, eps, samples, seed=0, other=None):
    """vol(K^r sym-diff K'^r) against 2 N(K, r - eps) w_{n-1}(2r + 2eps) eps.

    K' is a jitter of K by at most eps unless ``other`` is given (it must then
    be within Hausdorff distance eps).
    """
    if not 0 < eps < r:
        raise ValueError("need 0 < eps < r")
    cloud = as_cloud(cloud)
    other = jitter(cloud, eps, substream_seed(seed, 1)) if other is None else as_cloud(other)
    measured, stderr = symdiff_volume(OffsetRegion(cloud, r), OffsetRegion(other, r), samples,
                                      RandomStream(seed))
    n = cloud.dim
    bound = 2 * covering_number(cloud, r - eps) * sphere_measure(n - 1, 2 * r + 2 * eps) * eps
    passed = bool(measured <= bound + SLACK_SIGMAS * stderr)
    return BoundCheck(float(measured), bound, float(stderr), passed)


def boundary_area_check(cloud, r, h, samples, seed=0):
    """Finite-difference offset boundary length/area against
    N(K, r) w_{n-1}(2r), with the greedy covering number standing in for N."""
    if not 0 < h < r / 10:
        raise ValueError("need 0 < h < r/10")
    cloud = as_cloud(cloud)
    est, stderr = boundary_area_estimate(OffsetRegion(cloud, r), h, samples, RandomStream(seed))
    bound = covering_number(cloud, r) * sphere_measure(cloud.dim - 1, 2 * r)
    return BoundCheck(float(est), bound, float(stderr), bool(est <= bound + SLACK_SIGMAS * stderr))


@dataclass
class ConvexityReport:
    convexity_trials: int
    convexity_violations: int
    gradient_trials: int
    gradient_skipped: int
    gradient_violations: int
    worst_convexity_excess: float
    worst_gradient_error: float
    counterexamples: list

    @property
    def passed(self):
        return self.convexity_violations == 0 and self.gradient_violations == 0

    def to_dict(self):
        out = asdict(self)
        out["passed"] = self.passed
        return out


def _two_nearest(points, X, chunk=4096):
    d1 = np.empty(len(X))
    d2 = np.full(len(X), np.inf)
    for start in range(0, len(X), chunk):
        block = X[start:start + chunk]
        diff = block[:, None, :] - points[None, :, :]
        D = np.sqrt(np.sum(diff * diff, axis=-1))
        if D.shape[1] == 1:
            d1[start:start + len(block)] = D[:, 0]
            continue
        part = np.partition(D, 1, axis=1)
        d1[start:start + len(block)] = part[:, 0]
        d2[start:start + len(block)] = part[:, 1]
    return d1, d2


def convexity_and_gradient_check(cloud, trials, seed=0, gradient_trials=None, h=1e-5,
                                 gap=1e-6, conv_tol=1e-9, grad_tol=1e-3):
    """Check that v(x) = |x|^2 - d_K(x)^2 is midpoint convex and that its
    central finite difference matches 2 p_K(x).

    Gradient points are kept only where the projection is unique with a
    margin: the nearest and second-nearest distances differ by more than
    ``gap`` and every stencil point x +- h e_k projects on the same cloud
    point as x.
    """
    cloud = as_cloud(cloud)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    gradient_trials = trials if gradient_trials is None else gradient_trials
    pts = cloud.points
    n = cloud.dim
    index = NearestIndex(cloud)
    gen = RandomStream(seed).generator
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    pad = 0.5 * np.maximum(hi - lo, 1.0)
    lo, hi = lo - pad, hi + pad

    def v(X):
        _, d = index.query(X)
        return np.sum(X * X, axis=1) - d * d

    X = lo + gen.random((trials, n)) * (hi - lo)
    Y = lo + gen.random((trials, n)) * (hi - lo)
    excess = v((X + Y) / 2) - (v(X) + v(Y)) / 2
    bad = np.flatnonzero(excess > conv_tol)
    examples = [{"kind": "convexity", "x": X[i].tolist(), "y": Y[i].tolist(),
                 "excess": float(excess[i])} for i in bad[:5]]

    kept, skipped, grad_bad, worst_grad = 0, 0, 0, 0.0
    while kept < gradient_trials:
        Z = lo + gen.random((2 * (gradient_trials - kept) + 16, n)) * (hi - lo)
        d1, d2 = _two_nearest(pts, Z)
        proj, _ = index.query(Z)
        ok = d2 - d1 > gap
        steps = [(sign, k) for k in range(n) for sign in (1.0, -1.0)]
        for sign, k in steps:
            W = Z.copy()
            W[:, k] += sign * h
            ok &= index.query(W)[0] == proj
        skipped += int(np.sum(~ok))
        for i in np.flatnonzero(ok)[: gradient_trials - kept]:
            z = Z[i]
            fd = np.empty(n)
            for k in range(n):
                e = np.zeros(n)
                e[k] = h
                fd[k] = (v((z + e)[None])[0] - v((z - e)[None])[0]) / (2 * h)
            err = float(np.max(np.abs(fd - 2 * pts[proj[i]])))
            worst_grad = max(worst_grad, err)
            if err > grad_tol:
                grad_bad += 1
                if len(examples) < 10:
                    examples.append({"kind": "gradient", "x": z.tolist(), "error": err})
            kept += 1
    return ConvexityReport(trials, int(bad.size), kept, skipped, grad_bad,
                           float(max(excess.max(), 0.0)), worst_grad, examples)


def random_cloud(gen, dim=2, min_points=3, max_points=30):
    m = int(gen.integers(min_points, max_points + 1))
    return PointCloud(gen.random((m, dim)))


def symdiff_suite(trials, seed=0, samples=20000):
    """Randomised symmetric-difference checks on small planar clouds."""
    gen = RandomStream(seed).generator
    out = []
    for t in range(trials):
        cloud = random_cloud(gen)
        r = float(gen.uniform(0.05, 0.3))
        eps = float(gen.uniform(0.01, 0.5)) * r
        out.append(symdiff_bound_check(cloud, r, eps, samples, substream_seed(seed, t)))
    return out


def area_suite(trials, seed=0, samples=20000):
    """Randomised offset-boundary checks on small planar clouds."""
    gen = RandomStream(seed).generator
    out = []
    for t in range(trials):
        cloud = random_cloud(gen)
        r = float(gen.uniform(0.05, 0.3))
        out.append(boundary_area_check(cloud, r, r / 50, samples, substream_seed(seed, t)))
    return out


def convexity_suite(trials, seed=0, cloud_size=50, gradient_trials=None):
    gen = RandomStream(seed).generator
    cloud = PointCloud(gen.random((cloud_size, 2)))
    return convexity_and_gradient_check(cloud, trials, substream_seed(seed, 1), gradient_trials)
