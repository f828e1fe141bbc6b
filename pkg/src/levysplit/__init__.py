"""levysplit: grid-based simulation of multivariate Levy processes,
pathwise splitting at directional extremes, and exact samplers for
correlated Brownian motion conditioned to stay in a half-space."""

from .conditioned import (
    ConditioningTransform,
    bessel3_path,
    bessel3_transition_cdf,
    bessel3_transition_density,
    cholesky,
    conditioned_bm_from_x,
    conditioned_bm_path,
    conditioning_transform,
    example_conditioning_matrix,
    rotation_to_e1,
)
from .construct import (
    argmin_last,
    discrete_conditioned_pair,
    split_at_directional_infimum,
    split_at_max_norm,
)
from .core import (
    CompoundPoissonSpec,
    ConstructionTrace,
    Direction,
    ExponentialJumps,
    ExponentialRate,
    FiniteSupportJumps,
    FixedHorizon,
    GaussianJumps,
    GridPath,
    LevySpec,
    SplitPair,
    in_open_halfspace,
    project,
    read_path_csv,
    write_path_csv,
)
from .experiments import (
    ExperimentReport,
    check_representation_enumeration,
    check_sparre_andersen,
    discrete_arcsine_probs,
    experiment_initial_jump_law,
    experiment_max_norm,
    experiment_zoom_infimum,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .sim import Case, RngStream, classify_case, sample_path
from .stats import (
    TestResult,
    chi2_test,
    chi2_two_sample,
    energy_permutation_test,
    energy_statistic,
    kde2d,
    ks_test,
)

__version__ = "0.1.0"
