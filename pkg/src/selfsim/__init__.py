"""Constructive pipelines for planar self-similar sets.

Given a planar iterated function system of similarities, this package
extracts sub-families whose similarity dimension stays close to 1 while
their projections in a chosen direction are well separated, and builds
explicit piecewise-linear Lipschitz graphs covering the corresponding
attractor subsets, with every fitted constant checked against its
closed-form bound. Supporting machinery: projection averages (Favard
length), greedy separated-interval extraction, branching dimension lower
bounds, flatness (line-deviation) sums, specializations for the 4-corner
Cantor sets, and a rotational pipeline based on uniformization and rotation
orbit densities.
"""

from .errors import (
    ConfigError,
    ExtractionFailedError,
    HypothesisError,
    InputError,
    PersistentAngleError,
    PreconditionError,
    ResourceCapError,
    SelfsimError,
    UniformizationFailedError,
    UnsupportedInputError,
)
from .geometry import (
    Angle,
    ConvexPolygon,
    IntervalUnion,
    hull_of_points,
    interval_gap,
    min_width,
    project,
    union_length,
    vitali_extract,
    vitali_extract_indices,
    width,
)
from .ifs import (
    Ifs,
    SimilarityMap,
    attractor_hull,
    compose,
    generation,
    ifs_from_config,
    line_invariant_subifs,
    overlap_index,
    similarity_dimension,
)
from .favard import AngleGrid, best_angle, favard_length, favard_of_neighborhood
from .subifs import (
    Certificate,
    DepthChoice,
    SubIfsReport,
    certify,
    choose_depth,
    extract_separated_subifs,
    separation_scale,
)
from .graph import (
    Frame,
    GraphHypotheses,
    PLGraph,
    build_graph,
    build_level,
    containment_check,
    sup_difference,
    verify_hypotheses,
)
from .cantor4 import (
    FULL_PROJECTION_ANGLE,
    UNIT_SQUARE,
    DaviesRect,
    adhoc_family,
    c4_ifs,
    c4_measure_bracket,
    ck_ifs,
    corner_grandchildren,
    davies_inequality_check,
    davies_m,
    family_levels,
    generic_family,
    simdim_bound_check,
)
from .dimension import BetaReport, NestedStats, beta_sum, hata_bound, uniform_family_stats
from .rotational import (
    AngleSet,
    DensityRecord,
    NestedPlan,
    RegularityConstants,
    Uifs,
    build_nested_plan,
    certify_rotational,
    find_persistent_angle,
    good_angle_set,
    greedy_separated,
    rotation_density,
    rotation_orbit,
    uniformize,
)
from .report import RunConfig, config_from_dict, json_dumps, load_config, render_svg, run

__version__ = "1.0.0"
