"""Relative spectral embedding performance for stochastic block models.

The package computes the Chernoff-information ratio rho* between adjacency
and Laplacian spectral embedding of stochastic block model graphs, both by
closed forms for the tractable sub-model families and by a numeric
optimizer valid for every model, and validates the limit theory behind it
with Monte Carlo graph simulation.  rho* > 1 means the adjacency embedding
is preferred for block recovery, rho* < 1 the Laplacian embedding.
"""

from .errors import RhoStarError
from .model import (
    BlockModel,
    GeometryClass,
    LatentConfiguration,
    Signature,
    cholesky_homogeneous,
    classify_geometry,
    core_periphery_matrix,
    factorize_canonical_2block,
    factorize_spectral,
    homogeneous_matrix,
    homogeneous_model,
    rank_one_matrix,
    two_block_matrix,
    validate_model,
)
from .limits import (
    DiscreteLatentDistribution,
    GaussianSummary,
    ase_covariance,
    lse_covariance,
    lse_latent_positions,
    mean_position,
    second_moment,
)
from .chernoff import (
    ChernoffReport,
    Verdict,
    convex_combination_lhs,
    gaussian_chernoff,
    inverse_convex_2x2,
    kblock_ase_supremum,
    kblock_lse_supremum,
    rho_finite_n,
    rho_star_homogeneous2,
    rho_star_homogeneousK,
    rho_star_numeric,
    rho_star_rank1,
    rho_star_restricted_b_equals_1_minus_a,
    snr,
    uniform_ase_condition,
)
from .montecarlo import (
    Embedding,
    SampledGraph,
    ase_embed,
    clustering_error,
    empirical_clt_check,
    lse_embed,
    preference_experiment,
    sample_sbm,
)
from .sweep import (
    SweepGrid,
    classify_regions,
    emit_csv,
    emit_heatmap,
    level_set,
    region_measure,
    sweep,
)

__version__ = "0.1.0"

__all__ = [
    "BlockModel",
    "ChernoffReport",
    "DiscreteLatentDistribution",
    "Embedding",
    "GaussianSummary",
    "GeometryClass",
    "LatentConfiguration",
    "RhoStarError",
    "SampledGraph",
    "Signature",
    "SweepGrid",
    "Verdict",
    "ase_covariance",
    "ase_embed",
    "cholesky_homogeneous",
    "classify_geometry",
    "classify_regions",
    "clustering_error",
    "convex_combination_lhs",
    "core_periphery_matrix",
    "emit_csv",
    "emit_heatmap",
    "empirical_clt_check",
    "factorize_canonical_2block",
    "factorize_spectral",
    "gaussian_chernoff",
    "homogeneous_matrix",
    "homogeneous_model",
    "inverse_convex_2x2",
    "kblock_ase_supremum",
    "kblock_lse_supremum",
    "level_set",
    "lse_covariance",
    "lse_embed",
    "lse_latent_positions",
    "mean_position",
    "preference_experiment",
    "rank_one_matrix",
    "region_measure",
    "rho_finite_n",
    "rho_star_homogeneous2",
    "rho_star_homogeneousK",
    "rho_star_numeric",
    "rho_star_rank1",
    "rho_star_restricted_b_equals_1_minus_a",
    "sample_sbm",
    "second_moment",
    "snr",
    "sweep",
    "two_block_matrix",
    "uniform_ase_condition",
    "validate_model",
]
