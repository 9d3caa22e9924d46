"""Monte-Carlo estimation of boundary measures and projection pushforwards.

A boundary measure of a cloud C at scale r is the law of the nearest cloud
point of a uniform random point of the offset C^r. It is estimated by drawing
N offset points, projecting each onto the cloud and tallying the hits.
"""

from dataclasses import dataclass
import math

import numpy as np

from .geom import as_cloud
from .measures import DiscreteMeasure
from .nn import NearestIndex
from .rng import RandomStream
from .sampler import OffsetRegion, _Proposer, draw_offset_samples, run_workers, split_work

CHUNK = 1 << 17


def required_sample_count(covering_number: int, eps: float, delta: float) -> int:
    """Smallest N with 2 exp(ln(16/eps) * covering_number - N eps^2 / 2) <= delta.

    ``covering_number`` must be N(C, eps/16). Past this many samples the
    empirical pushforward is within eps of the true one in bounded-Lipschitz
    distance with probability at least 1 - delta.
    """
    if not 0 < eps < 2:
        raise ValueError("eps must lie in (0, 2)")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if covering_number < 1:
        raise ValueError("covering number must be >= 1")
    n = (2.0 / eps ** 2) * (math.log(16.0 / eps) * covering_number + math.log(2.0 / delta))
    return max(1, math.ceil(n))


@dataclass
class BoundaryMeasureEstimate:
    cloud: object
    r: float
    counts: np.ndarray
    N: int
    rounds: int
    offset_volume: tuple     # (estimate, stderr)
    seed: int = 0
    workers: int = 1

    @property
    def beta_weights(self):
        return self.counts / self.N

    @property
    def mu_weights(self):
        return self.offset_volume[0] * self.counts / self.N

    def beta(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.cloud.points, self.beta_weights)

    def mu(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.cloud.points, self.mu_weights)

    def mu_stderr(self):
        """Per-atom standard error of the unnormalised masses (multinomial
        counts combined with the volume error)."""
        p = self.beta_weights
        vol, vol_err = self.offset_volume
        return np.sqrt((vol ** 2) * p * (1 - p) / self.N + (p * vol_err) ** 2)

    def to_dict(self):
        out = self.beta().to_dict()
        out["metadata"] = {
            "r": float(self.r),
            "N": int(self.N),
            "seed": int(self.seed),
            "threads": int(self.workers),
            "rounds": int(self.rounds),
            "offset_volume": float(self.offset_volume[0]),
            "offset_volume_stderr": float(self.offset_volume[1]),
            "counts": [int(c) for c in self.counts],
        }
        return out


def estimate_boundary_measure(cloud, r, N, seed=0, workers=1, threads=None, index=None):
    """Draw N uniform points of the r-offset, project them on the cloud and
    count hits per cloud point.

    The offset volume comes from the same proposal rounds: accepted / rounds
    times m vol(B_r). Work is split over ``workers`` independent substreams of
    ``seed``; the result depends on the worker count but not on ``threads``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    cloud = as_cloud(cloud)
    region = OffsetRegion(cloud, r)
    index = index or NearestIndex(cloud)
    proposer = _Proposer(region, index)
    threads = workers if threads is None else threads

    def work(sub, size):
        if size == 0:
            return np.zeros(len(cloud), dtype=np.int64), 0
        draw = draw_offset_samples(region, size, sub, proposer=proposer)
        idx, _ = index.query(draw.points)
        return np.bincount(idx, minlength=len(cloud)), draw.rounds

    parts = run_workers(work, RandomStream(seed), split_work(N, workers), threads)
    counts = sum(p[0] for p in parts)
    rounds = sum(p[1] for p in parts)
    p = N / rounds
    scale = region.proposal_volume
    volume = (p * scale, scale * math.sqrt(max(p * (1 - p), 0.0) / rounds))
    return BoundaryMeasureEstimate(cloud, float(r), counts, int(N), int(rounds), volume, seed, workers)


@dataclass(frozen=True)
class BoxRegion:
    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float).reshape(-1)
        hi = np.asarray(self.upper, dtype=float).reshape(-1)
        if lo.shape != hi.shape or not np.all(lo < hi):
            raise ValueError("box needs lower < upper in every coordinate")
        object.__setattr__(self, "lower", tuple(lo))
        object.__setattr__(self, "upper", tuple(hi))

    @property
    def dim(self):
        return len(self.lower)

    @property
    def volume(self):
        return float(np.prod(np.subtract(self.upper, self.lower)))

    def sample(self, gen, size):
        lo = np.asarray(self.lower)
        return lo + gen.random((size, self.dim)) * (np.asarray(self.upper) - lo)


def _chunks(total):
    for start in range(0, total, CHUNK):
        yield min(CHUNK, total - start)


def pushforward_from_box(cloud, box, N, seed=0, index=None) -> DiscreteMeasure:
    """Empirical image of the uniform probability on ``box`` under projection
    on the cloud, as a probability measure on the cloud points."""
    cloud = as_cloud(cloud)
    if box.dim != cloud.dim:
        raise ValueError("box and cloud dimensions differ")
    index = index or NearestIndex(cloud)
    gen = RandomStream(seed).generator
    counts = np.zeros(len(cloud), dtype=np.int64)
    for size in _chunks(N):
        idx, _ = index.query(box.sample(gen, size))
        counts += np.bincount(idx, minlength=len(cloud))
    return DiscreteMeasure(cloud.points, counts / N)


def projection_l1_distance(cloud_a, cloud_b, box, N, seed=0):
    """Monte-Carlo integral over ``box`` of |p_A(x) - p_B(x)|, with its
    standard error. Returns ``(estimate, stderr)``."""
    A, B = as_cloud(cloud_a), as_cloud(cloud_b)
    if not (A.dim == B.dim == box.dim):
        raise ValueError("clouds and box must share a dimension")
    ia, ib = NearestIndex(A), NearestIndex(B)
    gen = RandomStream(seed).generator
    s1 = s2 = 0.0
    for size in _chunks(N):
        X = box.sample(gen, size)
        pa, _ = ia.query(X)
        pb, _ = ib.query(X)
        diff = A.points[pa] - B.points[pb]
        d = np.sqrt(np.sum(diff * diff, axis=1))
        s1 += d.sum()
        s2 += (d * d).sum()
    mean = s1 / N
    var = max(s2 / N - mean * mean, 0.0)
    if var <= 1e-24 * mean * mean:
        var = 0.0
    vol = box.volume
    return vol * mean, vol * math.sqrt(var / N) if N > 1 else 0.0

