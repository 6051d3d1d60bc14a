"""Limiting Gaussian summaries of the two spectral embeddings.

For a generalized random dot product graph whose latent distribution is the
finite discrete measure placing weight pi_k on nu_k (the block model case),
the rows of the adjacency spectral embedding are asymptotically Gaussian
around the latent positions, and the rows of the Laplacian spectral
embedding are asymptotically Gaussian around degree-normalized positions

    nu~_k = nu_k / sqrt(sum_k' pi_k' <I{d+,d-} nu_k', nu_k>).

The covariances are, with Ipm = I{d+,d-}, Delta = E[X X^T], mu = E[X], and
g(x, X) = <Ipm x, X>(1 - <Ipm x, X>):

    adjacency:  Sigma(x)  = Ipm Delta^-1 E[g(x,X) X X^T] Delta^-1 Ipm
    Laplacian:  Sigma~(x) = Ipm Delta~^-1 E[g~(x,X) v(x,X) v(x,X)^T] Delta~^-1 Ipm

with Delta~ = E[X X^T / <Ipm mu, X>], g~(x,X) = g(x,X)/<Ipm mu, x>, and
v(x,X) = X/<Ipm mu, X> - Delta~ Ipm x / (2 <Ipm mu, x>).

All expectations over the latent distribution reduce to exact weighted sums
over the K blocks, so everything here is closed linear algebra: no sampling,
no caching, pure functions of immutable inputs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDistribution,
    IllConditioned,
    InnerProductOutOfRange,
    InvalidSimplex,
    NonpositiveDegree,
    ShapeMismatch,
)
from .model import BlockModel, LatentConfiguration, Signature, factorize_spectral

# Condition-number policy for the small linear solves: warn past the soft
# limit, refuse past the hard limit.
COND_WARN = 1e10
COND_ERROR = 1e14

DEGENERACY_TOL = 1e-12
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteLatentDistribution:
    """Finite latent distribution: K points nu_k in R^d with weights pi_k.

    The points must be pairwise admissible -- every indefinite inner product
    <I{d+,d-} nu_k, nu_l> must land in [0, 1] so that it is a Bernoulli
    probability.  Strict interiority is only required by the covariance
    formulas and is enforced there (InnerProductOutOfRange).
    """

    points: np.ndarray
    weights: np.ndarray
    signature: Signature

    def __post_init__(self):
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        weights = np.asarray(self.weights, dtype=float)
        if points.shape[0] != weights.shape[0]:
            raise ShapeMismatch("one weight per latent point required")
        if points.shape[1] != self.signature.d:
            raise ShapeMismatch(
                f"points have dimension {points.shape[1]}, signature says {self.signature.d}"
            )
        if np.any(weights <= 0.0) or abs(weights.sum() - 1.0) > 1e-12:
            raise InvalidSimplex("weights must be interior to the simplex")
        gram = (points * self.signature.metric_diagonal()) @ points.T
        if np.any(gram < -1e-12) or np.any(gram > 1.0 + 1e-12):
            raise InnerProductOutOfRange(
                "latent points are not admissible: some <Ipm nu_k, nu_l> is outside [0, 1]"
            )
        points = np.array(points)
        weights = np.array(weights)
        points.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_model(cls, model: BlockModel,
                   configuration: LatentConfiguration | None = None
                   ) -> "DiscreteLatentDistribution":
        """Latent distribution of a block model via a latent configuration.

        Defaults to the spectral factorization; any configuration with the
        same Gram matrix yields the same Chernoff quantities downstream.
        """
        if configuration is None:
            configuration = factorize_spectral(model)
        return cls(configuration.X, model.Pi, configuration.signature)

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class GaussianSummary:
    """Mean and covariance of one block's limiting embedded distribution."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.covariance, dtype=float)
        if not np.all(np.abs(cov - cov.T) <= SYMMETRY_TOL):
            raise ValueError("covariance must be symmetric within 1e-12")
        if np.linalg.eigvalsh(cov).min() <= 0.0:
            raise ValueError("covariance must be positive definite")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)


def _check_condition(M: np.ndarray, label: str) -> None:
    evals = np.abs(np.linalg.eigvalsh(M))
    cond = evals.max() / evals.min() if evals.min() > 0.0 else np.inf
    if cond > COND_ERROR:
        raise IllConditioned(f"{label} has condition number {cond:.3e} > {COND_ERROR:.0e}")
    if cond > COND_WARN:
        warnings.warn(
            f"{label} has condition number {cond:.3e}; results may lose precision",
            RuntimeWarning,
            stacklevel=3,
        )


def _guarded_solve(M: np.ndarray, rhs: np.ndarray, label: str) -> np.ndarray:
    _check_condition(M, label)
    return np.linalg.solve(M, rhs)


def _sandwich(metric_diag: np.ndarray, inv_of: np.ndarray, core: np.ndarray,
              label: str) -> np.ndarray:
    """Compute Ipm inv_of^-1 core inv_of^-1 Ipm via direct solves."""
    half = _guarded_solve(inv_of, core, label)
    full = _guarded_solve(inv_of, half.T, label).T
    out = metric_diag[:, None] * full * metric_diag[None, :]
    return 0.5 * (out + out.T)


def second_moment(dist: DiscreteLatentDistribution) -> np.ndarray:
    """Second moment Delta = sum_k pi_k nu_k nu_k^T of the latent distribution."""
    Delta = (dist.points * dist.weights[:, None]).T @ dist.points
    Delta = 0.5 * (Delta + Delta.T)
    if np.linalg.eigvalsh(Delta).min() < DEGENERACY_TOL:
        raise DegenerateDistribution(
            "second moment matrix is rank deficient; latent dimension is inflated"
        )
    return Delta


def mean_position(dist: DiscreteLatentDistribution) -> np.ndarray:
    """First moment mu = sum_k pi_k nu_k."""
    return dist.weights @ dist.points


def _bernoulli_factors(dist: DiscreteLatentDistribution, x: np.ndarray) -> np.ndarray:
    """g_k = <Ipm x, nu_k>(1 - <Ipm x, nu_k>), requiring each product in (0,1)."""
    x = np.asarray(x, dtype=float)
    ips = dist.points @ (dist.signature.metric_diagonal() * x)
    if np.any(ips <= 0.0) or np.any(ips >= 1.0):
        raise InnerProductOutOfRange(
            "some <Ipm x, nu_k> is outside (0, 1); Bernoulli variance vanishes"
        )
    return ips * (1.0 - ips)


def ase_covariance(dist: DiscreteLatentDistribution, x) -> GaussianSummary:
    """Limiting Gaussian of the adjacency spectral embedding at latent x."""
    x = np.asarray(x, dtype=float)
    g = _bernoulli_factors(dist, x)
    Delta = second_moment(dist)
    core = (dist.points * (dist.weights * g)[:, None]).T @ dist.points
    cov = _sandwich(dist.signature.metric_diagonal(), Delta, core, "second moment")
    return GaussianSummary(x, cov)


def _degrees(dist: DiscreteLatentDistribution) -> np.ndarray:
    """Expected-degree normalizers <Ipm mu, nu_k> for every latent point."""
    mu = mean_position(dist)
    degs = dist.points @ (dist.signature.metric_diagonal() * mu)
    if np.any(degs <= 0.0):
        raise NonpositiveDegree(
            "some latent position has nonpositive expected degree normalizer"
        )
    return degs


def lse_latent_positions(dist: DiscreteLatentDistribution) -> np.ndarray:
    """Degree-normalized latent positions nu~_k targeted by the LSE."""
    degs = _degrees(dist)
    return dist.points / np.sqrt(degs)[:, None]


def lse_covariance(dist: DiscreteLatentDistribution, x) -> GaussianSummary:
    """Limiting Gaussian of the Laplacian spectral embedding at latent x.

    The mean is the degree-normalized position of x; the covariance follows
    the module docstring's displayed formula with exact weighted sums.
    """
    x = np.asarray(x, dtype=float)
    metric = dist.signature.metric_diagonal()
    g = _bernoulli_factors(dist, x)
    degs = _degrees(dist)
    mu = mean_position(dist)
    deg_x = float(x @ (metric * mu))
    if deg_x <= 0.0:
        raise NonpositiveDegree("x has nonpositive expected degree normalizer")

    Delta_tilde = (dist.points * (dist.weights / degs)[:, None]).T @ dist.points
    Delta_tilde = 0.5 * (Delta_tilde + Delta_tilde.T)

    g_tilde = g / deg_x
    offset = (Delta_tilde @ (metric * x)) / (2.0 * deg_x)
    vecs = dist.points / degs[:, None] - offset[None, :]
    core = (vecs * (dist.weights * g_tilde)[:, None]).T @ vecs
    cov = _sandwich(metric, Delta_tilde, core, "harmonic second moment")
    return GaussianSummary(x / np.sqrt(deg_x), cov)


# --- batched construction, one linear-algebra pass per model ----------------
#
# The per-point functions above recompute Delta and Delta~ on every call by
# design (pure functions, no caching).  When all K block summaries are
# needed at once, the batched versions below share those factors within the
# single call; they are algebraically identical to mapping the per-point
# functions over the blocks (asserted by tests).

def _batched_sandwich(metric: np.ndarray, M: np.ndarray, cores: np.ndarray,
                      label: str) -> np.ndarray:
    _check_condition(M, label)
    Minv = np.linalg.inv(M)
    out = Minv[None] @ cores @ Minv[None]
    out = metric[None, :, None] * out * metric[None, None, :]
    return 0.5 * (out + out.transpose(0, 2, 1))


def ase_covariances(dist: DiscreteLatentDistribution) -> list[GaussianSummary]:
    """ASE limiting Gaussians at every latent point of the distribution."""
    metric = dist.signature.metric_diagonal()
    gram = (dist.points * metric) @ dist.points.T
    if np.any(gram <= 0.0) or np.any(gram >= 1.0):
        raise InnerProductOutOfRange(
            "some <Ipm nu_k, nu_l> is outside (0, 1); Bernoulli variance vanishes"
        )
    g = gram * (1.0 - gram)
    Delta = second_moment(dist)
    cores = np.einsum("jk,kd,ke->jde", g * dist.weights[None, :],
                      dist.points, dist.points)
    covs = _batched_sandwich(metric, Delta, cores, "second moment")
    return [GaussianSummary(x, cov) for x, cov in zip(dist.points, covs)]


def lse_covariances(dist: DiscreteLatentDistribution) -> list[GaussianSummary]:
    """LSE limiting Gaussians at every latent point of the distribution."""
    metric = dist.signature.metric_diagonal()
    gram = (dist.points * metric) @ dist.points.T
    if np.any(gram <= 0.0) or np.any(gram >= 1.0):
        raise InnerProductOutOfRange(
            "some <Ipm nu_k, nu_l> is outside (0, 1); Bernoulli variance vanishes"
        )
    g = gram * (1.0 - gram)
    degs = _degrees(dist)
    Delta_tilde = (dist.points * (dist.weights / degs)[:, None]).T @ dist.points
    Delta_tilde = 0.5 * (Delta_tilde + Delta_tilde.T)
    offsets = ((dist.points * metric) @ Delta_tilde) / (2.0 * degs[:, None])
    vecs = dist.points / degs[:, None]
    rel = vecs[None, :, :] - offsets[:, None, :]
    weights = (g / degs[:, None]) * dist.weights[None, :]
    cores = np.einsum("jk,jkd,jke->jde", weights, rel, rel)
    covs = _batched_sandwich(metric, Delta_tilde, cores, "harmonic second moment")
    means = dist.points / np.sqrt(degs)[:, None]
    return [GaussianSummary(m, cov) for m, cov in zip(means, covs)]
