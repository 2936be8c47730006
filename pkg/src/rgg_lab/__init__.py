"""Sharp-threshold experiments for random geometric graphs.

Bottleneck bipartite matching (exact and by recursive subdivision), per-sample
critical radii of increasing properties, and Monte Carlo estimation of
threshold locations and widths.
"""

__version__ = "0.1.0"

from .geom import (
    EUCLIDEAN,
    Norm,
    PointSet,
    critical_radius,
    distance,
    sample_uniform,
    unit_ball_volume,
)
from .graphs import BernoulliGraph, GeometricGraph, build_bernoulli, build_geometric, build_geometric_grid
from .matching import (
    BipartiteInstance,
    Matching,
    ShiftTrace,
    brute_force_bottleneck,
    constructive_matching,
    exact_bottleneck,
    halving_transform,
    max_matching_at_threshold,
    recursive_subdivide,
    sorted_bottleneck_1d,
    steps_schedule,
)
from .properties import (
    COMPLETE,
    CONNECTIVITY,
    MIN_DEGREE_QUARTER,
    MonotoneProperty,
    assert_monotone,
    critical_radius_sample,
    is_complete,
    is_connected,
    min_degree_quarter,
)
from .thresholds import (
    ContainmentReport,
    ThresholdEstimate,
    bernoulli_containment_mc,
    bernoulli_fixed_matching_prob,
    containment_trial,
    estimate_threshold,
    matching_scaling,
    width_scaling,
)
