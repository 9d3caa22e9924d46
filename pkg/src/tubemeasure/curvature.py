"""Approximate curvature measures from boundary measures at n + 1 radii.

For each cloud point the masses mu_{r_i}(x) at radii r_0 < ... < r_n are
matched by a polynomial in r,

    sum_j ball_volume(n - j) * phi_j(x) * r_i ** (n - j) = mu_{r_i}(x),

whose coefficients phi_j are the (signed) curvature weights. Unit-ball volumes
are the coefficients because they make a lone point have phi_0 = 1 and give a
convex body phi_n = area, 2 * phi_{n-1} = perimeter in the plane (Steiner).
"""

from dataclasses import dataclass

import numpy as np

from .estimator import estimate_boundary_measure
from .geom import as_cloud, ball_volume
from .measures import DiscreteMeasure
from .nn import NearestIndex

MAX_CONDITION = 1e12


class DegenerateSchedule(ValueError):
    """Radii too close together for a stable solve."""


@dataclass(frozen=True)
class RadiiSchedule:
    radii: tuple
    n: int

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        object.__setattr__(self, "radii", radii)
        if len(radii) != self.n + 1:
            raise ValueError(f"need {self.n + 1} radii for dimension {self.n}, got {len(radii)}")
        if radii[0] <= 0 or any(b <= a for a, b in zip(radii, radii[1:])):
            raise ValueError("radii must be positive and strictly increasing")

    @classmethod
    def geometric(cls, r0, n, ratio=4.0):
        """r_i = r0 * g**i with g chosen so that r_n / r_0 = ratio."""
        g = ratio ** (1.0 / n) if n else 1.0
        return cls(tuple(r0 * g ** i for i in range(n + 1)), n)


def system_matrix(schedule):
    n = schedule.n
    r = np.asarray(schedule.radii)
    j = np.arange(n + 1)
    coef = np.array([ball_volume(n - jj) for jj in j])
    return coef[None, :] * r[:, None] ** (n - j)[None, :]


@dataclass
class CurvatureProfile:
    locations: np.ndarray    # (m, n) atoms shared by every profile
    phi: np.ndarray          # (n + 1, m); row j holds phi_j
    schedule: RadiiSchedule
    condition_number: float

    def measure(self, j) -> DiscreteMeasure:
        return DiscreteMeasure(self.locations, self.phi[j], signed=True)

    def totals(self):
        return self.phi.sum(axis=1)

    def to_dict(self):
        return {
            "radii": list(self.schedule.radii),
            "condition_number": float(self.condition_number),
            "profiles": [self.measure(j).to_dict() for j in range(self.schedule.n + 1)],
        }


def solve_curvature(mass_table, schedule, locations=None) -> CurvatureProfile:
    """Solve the per-atom system.

    ``mass_table`` is an (n + 1, m) array, row i holding every atom's mass at
    radius r_i; ``locations`` names the m atoms. Raises
    :class:`DegenerateSchedule` when the matrix condition number exceeds 1e12.
    """
    M = np.asarray(mass_table, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    if M.shape[0] != schedule.n + 1:
        raise ValueError(f"mass table needs {schedule.n + 1} rows, got {M.shape[0]}")
    A = system_matrix(schedule)
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise DegenerateSchedule(f"condition number {cond:.3g} exceeds {MAX_CONDITION:g}")
    phi = np.linalg.solve(A, M)
    if locations is None:
        locations = np.zeros((M.shape[1], schedule.n))
    return CurvatureProfile(np.asarray(locations, dtype=float), phi, schedule, cond)


def curvature_from_cloud(cloud, schedule, n_per_radius, seed=0, workers=1, threads=None):
    """Estimate boundary measures at every radius and solve for the profiles.

    All radii share ``seed``: the proposals at different radii are then the
    same unit-ball draws rescaled, which correlates the estimates and damps the
    noise the solve amplifies.
    """
    cloud = as_cloud(cloud)
    if cloud.dim != schedule.n:
        raise ValueError("schedule dimension does not match the cloud")
    index = NearestIndex(cloud)
    table = np.stack([
        estimate_boundary_measure(cloud, r, n_per_radius, seed, workers, threads, index).mu_weights
        for r in schedule.radii
    ])
    return solve_curvature(table, schedule, cloud.points)
