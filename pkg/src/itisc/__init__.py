"""Importance-sampling minimax clustering (ITISC, Fuzzy-ITISC) and baselines."""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .baselines import (
    HardClustering,
    fcm_reform_objective,
    fcm_solve,
    hierarchical_solve,
    kmeans_pp_init,
    kmeans_solve,
)
from .core import (
    ClusterState,
    Dataset,
    DistortionKind,
    Rng,
    Temperatures,
    random_init,
    validate_membership,
    validate_weights,
)
from .distortion import certainty_equivalence, distortion_matrix, log_sum_exp, squared_distance
from .engine import (
    ObjectiveBreakdown,
    ao_solve,
    full_objective,
    reform_gradient,
    reform_objective,
    reform_solve,
    update_centers,
    update_membership,
    update_weights,
)
from .metrics import (
    GaussianSpec,
    boundary_points,
    dataset_centroid,
    gaussian_kl,
    m_boundary_dist,
    mixture_kl,
    weight_kl_uniform,
    within_cluster_dist,
)
from .optimize import MinimizeResult, minimize
from .synth import builtin_spec, sample_mixture, scaled_cov_specs, shifted_mean_specs
