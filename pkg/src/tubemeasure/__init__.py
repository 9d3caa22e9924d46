"""Monte-Carlo boundary and curvature measures of point clouds."""

from .geom import (
    DimensionMismatch,
    PointCloud,
    ball_volume,
    covering_number,
    diameter,
    euclidean_distance,
    hausdorff_distance,
    read_points,
    sphere_measure,
    write_points,
)
from .nn import NearestIndex
from .rng import RandomStream
from .sampler import (
    OffsetRegion,
    boundary_area_estimate,
    offset_volume,
    sample_offset,
    sample_unit_ball,
    symdiff_volume,
)
from .measures import (
    DiscreteMeasure,
    PiecewiseMeasure,
    bl_distance,
    discretize,
    fm_distance,
    total_mass,
    w1_distance,
)
from .estimator import (
    BoundaryMeasureEstimate,
    BoxRegion,
    estimate_boundary_measure,
    projection_l1_distance,
    pushforward_from_box,
    required_sample_count,
)
from .curvature import CurvatureProfile, RadiiSchedule, curvature_from_cloud, solve_curvature
from .oracles import convex_polygon_measure, jitter, knife_blade, segment_measure
from .experiments import (
    StabilityReport,
    boundary_area_check,
    convexity_and_gradient_check,
    holder_knife_experiment,
    stability_experiment,
    symdiff_bound_check,
)

__version__ = "0.1.0"

__all__ = [
    "DimensionMismatch",
    "PointCloud",
    "ball_volume",
    "covering_number",
    "diameter",
    "euclidean_distance",
    "hausdorff_distance",
    "read_points",
    "sphere_measure",
    "write_points",
    "NearestIndex",
    "RandomStream",
    "OffsetRegion",
    "boundary_area_estimate",
    "offset_volume",
    "sample_offset",
    "sample_unit_ball",
    "symdiff_volume",
    "DiscreteMeasure",
    "PiecewiseMeasure",
    "bl_distance",
    "discretize",
    "fm_distance",
    "total_mass",
    "w1_distance",
    "BoundaryMeasureEstimate",
    "BoxRegion",
    "estimate_boundary_measure",
    "projection_l1_distance",
    "pushforward_from_box",
    "required_sample_count",
    "CurvatureProfile",
    "RadiiSchedule",
    "curvature_from_cloud",
    "solve_curvature",
    "convex_polygon_measure",
    "jitter",
    "knife_blade",
    "segment_measure",
    "StabilityReport",
    "boundary_area_check",
    "convexity_and_gradient_check",
    "holder_knife_experiment",
    "stability_experiment",
    "symdiff_bound_check",
]
