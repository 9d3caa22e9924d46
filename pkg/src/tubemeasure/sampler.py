"""Uniform sampling on the r-offset of a point cloud and offset-volume estimators.

The sampler is the classic union-of-balls rejection loop: choose a cloud point
uniformly, a uniform point X of its r-ball, count the k balls containing X and
keep X with probability 1/k. Accepted points are uniform on the offset and the
per-round acceptance probability is vol(offset) / (m * vol(B_r)), which is
what the volume estimators measure.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math

from numba import njit
import numpy as np

from .geom import as_cloud, ball_volume
from .nn import NearestIndex
from .rng import as_stream

MAX_ROUNDS = 10 ** 6
BATCH = 1 << 17
# neighbour tables larger than this fall back to kd-tree counting
MAX_TABLE = 4 * 10 ** 7


class SamplerStalled(RuntimeError):
    """The rejection loop hit its round cap; the input is pathological."""


@dataclass(frozen=True)
class OffsetRegion:
    cloud: object
    r: float

    def __post_init__(self):
        object.__setattr__(self, "cloud", as_cloud(self.cloud))
        if not self.r > 0:
            raise ValueError("offset radius must be positive")

    @property
    def dim(self):
        return self.cloud.dim

    @property
    def proposal_volume(self):
        """m * vol(B(0, r)): the total volume of all balls, overlaps counted."""
        return len(self.cloud) * ball_volume(self.dim) * self.r ** self.dim


def sample_unit_ball(dim, rng, size=None):
    """Uniform point(s) of the closed unit ball: a normalised Gaussian
    direction scaled by U**(1/dim)."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    gen = as_stream(rng).generator
    shape = (1 if size is None else size, dim)
    g = gen.standard_normal(shape)
    u = gen.random(shape[0])
    out = _to_ball(g, u)
    return out[0] if size is None else out


def _to_ball(g, u):
    norm = np.sqrt(np.sum(g * g, axis=1))
    norm[norm == 0.0] = 1.0
    return g * (u ** (1.0 / g.shape[1]) / norm)[:, None]


def sample_offset(region, rng, index=None):
    """One uniform point of the offset, drawn by the rejection loop verbatim.

    Returns ``(point, rounds_used)``.
    """
    gen = as_stream(rng).generator
    index = index or NearestIndex(region.cloud)
    pts = region.cloud.points
    m, n = pts.shape
    for rounds in range(1, MAX_ROUNDS + 1):
        i = gen.integers(m)
        x = pts[i] + region.r * _to_ball(gen.standard_normal((1, n)), gen.random(1))[0]
        k = max(1, index.count_within(x, region.r))
        d = gen.integers(1, k + 1)
        if d == 1:
            return x, rounds
    raise SamplerStalled(f"no acceptance after {MAX_ROUNDS} rounds")


class _Proposer:
    """Batched version of the rejection loop.

    Per round it draws the ball index, the ball offset and one uniform U; the
    uniform pick d in {1..k} is realised as floor(U*k) + 1, so "d == 1" is
    "U*k < 1". Counting stops as soon as U*count >= 1, which keeps the cost per
    round near log(k) instead of k. Every ball containing X has its center
    within 2r of the proposing center, so scanning the proposer's 2r-neighbour
    list (sorted by distance, truncated at r + |X - x_i|) gives the exact k.
    """

    def __init__(self, region, index=None):
        self.region = region
        self.index = index or NearestIndex(region.cloud)
        self.pts = region.cloud.points
        r = region.r
        self.table = None
        if self.index.neighbor_pair_count(2 * r) <= MAX_TABLE:
            off, nbr, dist = self.index.neighbors_within(2 * r)
            self.table = (off, nbr, dist)

    def draw(self, gen, size):
        m, n = self.pts.shape
        idx = gen.integers(0, m, size)
        X = self.pts[idx] + self.region.r * _to_ball(gen.standard_normal((size, n)), gen.random(size))
        U = gen.random(size)
        return idx, X, U

    def accept(self, idx, X, U):
        if self.table is None:
            k = self.index.count_batch(X, self.region.r)
            return U * np.maximum(k, 1) < 1.0
        off, nbr, ndist = self.table
        return _accept_scan(idx, X, U, self.pts, off, nbr, ndist, self.region.r)


@njit(cache=True)
def _accept_scan(idx, X, U, pts, off, nbr, ndist, r):
    r2 = r * r
    n = X.shape[1]
    out = np.ones(idx.shape[0], dtype=np.bool_)
    for p in range(idx.shape[0]):
        i = idx[p]
        rho2 = 0.0
        for c in range(n):
            t = X[p, c] - pts[i, c]
            rho2 += t * t
        reach = r + np.sqrt(rho2)
        count = 1.0
        for s in range(off[i], off[i + 1]):
            if ndist[s] > reach:
                break
            j = nbr[s]
            if j == i:
                continue
            d2 = 0.0
            for c in range(n):
                t = X[p, c] - pts[j, c]
                d2 += t * t
            if d2 <= r2:
                count += 1.0
                if count * U[p] >= 1.0:
                    out[p] = False
                    break
    return out


@dataclass
class OffsetDraw:
    points: np.ndarray       # accepted samples, in acceptance order
    rounds: int              # proposal rounds consumed

    @property
    def acceptance_rate(self):
        return len(self.points) / self.rounds


def draw_offset_samples(region, count, rng, proposer=None, batch=BATCH):
    """Draw ``count`` uniform offset points with one stream, keeping the first
    ``count`` acceptances in proposal order."""
    gen = as_stream(rng).generator
    proposer = proposer or _Proposer(region)
    out, got, rounds, dry = [], 0, 0, 0
    while got < count:
        idx, X, U = proposer.draw(gen, batch)
        acc = np.flatnonzero(proposer.accept(idx, X, U))
        need = count - got
        if acc.size >= need:
            out.append(X[acc[:need]])
            rounds += int(acc[need - 1]) + 1
            got = count
            break
        out.append(X[acc])
        got += acc.size
        rounds += batch
        dry = dry + batch if acc.size == 0 else 0
        if dry >= MAX_ROUNDS:
            raise SamplerStalled(f"no acceptance in {dry} rounds")
    pts = np.concatenate(out) if out else np.empty((0, region.dim))
    return OffsetDraw(pts, rounds)


def split_work(total, workers):
    base, extra = divmod(total, workers)
    return [base + (w < extra) for w in range(workers)]


def run_workers(fn, stream, sizes, threads):
    """Run ``fn(substream, size)`` per worker; results come back in worker order
    whatever the thread scheduling."""
    jobs = [(stream.substream(w), size) for w, size in enumerate(sizes)]
    if threads <= 1 or len(jobs) == 1:
        return [fn(s, n) for s, n in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def _proposals(region, samples, gen):
    m, n = region.cloud.points.shape
    idx = gen.integers(0, m, samples)
    ball = _to_ball(gen.standard_normal((samples, n)), gen.random(samples))
    return idx, ball


def offset_volume(region, samples, rng, workers=1, threads=1, index=None):
    """Estimate vol(offset) from ``samples`` proposal rounds.

    Each round contributes m * vol(B_r) / k(X), the conditional expectation of
    the accept indicator given X, instead of the 0/1 indicator itself. Same
    mean as the acceptance-rate estimator, never larger variance, and exact
    (zero spread) whenever every proposal sees the same k, e.g. pairwise
    disjoint or fully coincident balls. Returns ``(estimate, stderr)``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    region = region if isinstance(region, OffsetRegion) else OffsetRegion(*region)
    index = index or NearestIndex(region.cloud)
    stream = as_stream(rng)

    def work(sub, size):
        terms = _volume_terms(region, region.r, size, sub.generator, index)
        return terms.sum(), (terms * terms).sum(), size

    parts = run_workers(work, stream, split_work(samples, workers), threads)
    return _mean_stderr(parts)


def _mean_stderr(parts):
    total = sum(p[0] for p in parts)
    sq = sum(p[1] for p in parts)
    n = sum(p[2] for p in parts)
    mean = total / n
    var = max(sq / n - mean * mean, 0.0)
    # spread below rounding noise means every term was identical
    if var <= 1e-24 * mean * mean:
        var = 0.0
    return mean, math.sqrt(var / n) if n > 1 else 0.0


def _volume_terms(region, radius, samples, gen, index, ball=None, idx=None):
    pts = region.cloud.points
    m, n = pts.shape
    if ball is None:
        idx, ball = _proposals(region, samples, gen)
    X = pts[idx] + radius * ball
    k = np.maximum(index.count_batch(X, radius), 1)
    return (m * ball_volume(n) * radius ** n) / k


def membership(index, X, r):
    """True where the nearest cloud point is within r."""
    _, d = index.query(X)
    return d <= r


def symdiff_volume(A, B, samples, rng, index_a=None, index_b=None):
    """Estimate vol(A^r symmetric-difference B^r) for two offset regions.

    Uniform samples of each offset are tested for membership in the other; the
    two escape fractions are scaled by the respective offset volumes.
    Returns ``(estimate, stderr)``.
    """
    if A.dim != B.dim:
        raise ValueError("regions have different dimensions")
    stream = as_stream(rng)
    index_a = index_a or NearestIndex(A.cloud)
    index_b = index_b or NearestIndex(B.cloud)
    est, var = 0.0, 0.0
    for w, (src, src_index, other, other_index) in enumerate(
            [(A, index_a, B, index_b), (B, index_b, A, index_a)]):
        vol, vol_err = offset_volume(src, samples, stream.substream(2 * w), index=src_index)
        draw = draw_offset_samples(src, samples, stream.substream(2 * w + 1),
                                   proposer=_Proposer(src, src_index))
        outside = ~membership(other_index, draw.points, other.r)
        q = outside.mean()
        est += vol * q
        var += (vol_err * q) ** 2 + vol * vol * q * (1 - q) / samples
    return est, math.sqrt(var)


def boundary_area_estimate(region, h, samples, rng, index=None):
    """Central difference (vol(r + h) - vol(r - h)) / 2h of the offset volume.

    Both volumes reuse the same ball indices and unit-ball offsets (common
    random numbers), so most of the Monte-Carlo noise cancels in the
    difference. Returns ``(estimate, stderr)``.
    """
    if not 0 < h < region.r:
        raise ValueError("need 0 < h < r")
    index = index or NearestIndex(region.cloud)
    gen = as_stream(rng).generator
    idx, ball = _proposals(region, samples, gen)
    hi = _volume_terms(region, region.r + h, samples, gen, index, ball, idx)
    lo = _volume_terms(region, region.r - h, samples, gen, index, ball, idx)
    diff = (hi - lo) / (2 * h)
    return _mean_stderr([(diff.sum(), (diff * diff).sum(), samples)])
