"""Exact analysis of set-valued maps on finite metric spaces.

Computes Hausdorff distances, the pairwise and perimeter contraction factors,
fixed and periodic points, the forming-a-triangle property, and runs the
constructive fixed-point iteration for perimeter-contracting maps.
"""

from perimfix.analysis import (
    check_lemma1,
    fixed_points,
    has_forming_triangle,
    image_of_set,
    is_mlcp,
    lambda_min_contraction,
    lambda_min_perimeter,
    periodic_points,
    prime_period_points,
)
from perimfix.iteration import IterationConfig, run_iteration, select_next, verify_cauchy_bounds
from perimfix.metric import (
    FiniteMetricSpace,
    MultiMap,
    hausdorff,
    hausdorff_matrix,
    point_set_distance,
    validate_metric,
)
from perimfix.search import builtin_instance, classify, gen_random_map, gen_random_space, hunt_open_problem

__version__ = "0.1.0"
