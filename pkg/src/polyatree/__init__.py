"""Laboratory for unlabelled rooted random trees.

Exact counting and distributions from the generating-function
recurrences, numeric singularity constants, exact-uniform sampling, and
the Brownian-excursion local-time limit laws, with a CLI harness for
the cross-validation experiments.
"""

__version__ = "0.1.0"

from .constants import (
    SingularityData,
    asymptotic_count,
    compute_b_c,
    compute_rho,
    count_ratio,
    log_asymptotic_count,
    singularity_constants,
)
from .enumeration import (
    HeightDistribution,
    HeightTable,
    LevelDistribution,
    TreeCountTable,
    build_tree_counts,
    height_distribution,
    height_restricted_series,
    joint_level_distribution,
    level_diff_fourth_moment,
    level_diff_fourth_moment_grid,
    level_diff_fourth_moment_operator,
    level_marked_series,
    level_size_distribution,
    simply_generated_witness,
)
from .local_time import (
    LocalTimeQuery,
    ScalingConstants,
    height_llt,
    height_moment_asym,
    joint_local_time_cf,
    limit_profile_cf,
    local_time_cf,
    local_time_density,
    psi,
)
from .sampler import (
    CanonicalTree,
    ProfileVector,
    RandomStream,
    TreeSampler,
    profile,
    scaled_profile,
    symbolic_distribution,
)
from .series import (
    LevelSeries,
    TruncSeries,
    functional_inverse,
    polya_exp,
    series_exp,
    series_log,
    substitute_power,
)
