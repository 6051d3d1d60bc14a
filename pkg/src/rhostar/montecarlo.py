"""Monte Carlo verification: sampled graphs, embeddings, block recovery.

Graphs are drawn at desk scale (dense symmetric eigensolvers, n up to
20000): block labels i.i.d. from Pi, upper-triangle entries (self-loops
included) independent Bernoulli with the block edge probabilities, lower
triangle mirrored.  The adjacency spectral embedding takes the top-d
eigenpairs of A by eigenvalue magnitude and scales eigenvectors by the
square root of the absolute eigenvalues; the Laplacian spectral embedding
applies the same construction to D^-1/2 A D^-1/2.

Two experiment drivers close the loop with the limit theory: an empirical
check of the block-conditional Gaussian limits (covariances of aligned,
rescaled embedding residuals against their predicted values) and a
preference experiment that clusters both embeddings with a Gaussian
mixture and compares misclassification rates against the sign of rho* - 1.

Everything taking a seed is bit-reproducible: replication r of master seed
s uses the child sequence (entropy=s, spawn_key=(r, stream)).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import permutations

import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.mixture import GaussianMixture

from .chernoff import ChernoffReport, rho_star_numeric
from .errors import (
    AlignmentIllConditioned,
    EigensolverFailure,
    EmDegenerate,
    GraphTooLarge,
    IsolatedVertex,
    NotPositiveDefinite,
    ShapeMismatch,
)
from .limits import (
    DiscreteLatentDistribution,
    ase_covariance,
    lse_covariance,
    lse_latent_positions,
)
from .model import BlockModel, GeometryClass, classify_geometry, factorize_spectral

# Dense symmetric eigensolvers only: larger graphs are out of desk scale.
DESK_SCALE_LIMIT = 20000

# Below this size a full dense eigendecomposition is cheaper than Lanczos.
_FULL_EIGH_CUTOFF = 1200

ASE = "ASE"
LSE = "LSE"


def _child_seed(master: int, rep: int, stream: int) -> int:
    """Deterministic 32-bit child seed for (master seed, rep index, stream)."""
    ss = np.random.SeedSequence(entropy=master, spawn_key=(rep, stream))
    return int(ss.generate_state(1, np.uint32)[0])


@dataclass(frozen=True)
class SampledGraph:
    """A sampled block model graph: dense 0/1 adjacency, labels, seed."""

    adjacency: np.ndarray
    labels: np.ndarray
    seed: int

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]


@dataclass(frozen=True)
class Embedding:
    """Spectral embedding: one row per vertex, columns by |eigenvalue| desc."""

    points: np.ndarray
    kind: str
    eigenvalues: np.ndarray

    @property
    def dimension(self) -> int:
        return self.points.shape[1]


def sample_sbm(model: BlockModel, n: int, seed: int) -> SampledGraph:
    """Sample an n-vertex graph from the block model, self-loops permitted.

    Labels are i.i.d. from Pi; conditioned on labels, the upper triangle
    (diagonal included) is independent Bernoulli with probability
    B[label_i, label_j], mirrored below.  Identical seeds reproduce the
    graph bit-for-bit.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if n > DESK_SCALE_LIMIT:
        raise GraphTooLarge(
            f"n={n} exceeds the dense desk-scale limit {DESK_SCALE_LIMIT}"
        )
    rng = np.random.default_rng(seed)
    labels = rng.choice(model.K, size=n, p=model.Pi)
    adjacency = np.zeros((n, n), dtype=np.uint8)
    # Row-by-row upper triangle keeps memory flat and the stream layout fixed.
    for i in range(n):
        probs = model.B[labels[i], labels[i:]]
        row = (rng.random(n - i) < probs).astype(np.uint8)
        adjacency[i, i:] = row
        adjacency[i:, i] = row
    adjacency.setflags(write=False)
    labels.setflags(write=False)
    return SampledGraph(adjacency, labels, int(seed))


def _subspace_topk(M: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Top-k eigenpairs by magnitude via deterministic subspace iteration.

    Block power iteration with a fixed-seed start and Rayleigh-Ritz
    extraction, stopping once the top-k Ritz residuals reach the working
    precision's floor.  Fast for the strongly gapped spectra of dense block
    model graphs; bulk directions inside the oversampled block never
    settle, so convergence is judged on the extracted pairs only.
    """
    n = M.shape[0]
    block = min(n, k + 6)
    eps = float(np.finfo(M.dtype).eps)
    rel_tol = 200.0 * eps
    rng = np.random.Generator(np.random.PCG64(88172645463325252))
    Q = np.linalg.qr(rng.standard_normal((n, block)).astype(M.dtype))[0]
    w = V = resid = None
    for _ in range(60):
        Y = M @ Q
        T = Q.T @ Y
        evals, U = np.linalg.eigh(0.5 * (T + T.T))
        order = np.argsort(-np.abs(evals), kind="stable")[:k]
        w = evals[order]
        V = Q @ U[:, order]
        resid = np.linalg.norm(Y @ U[:, order] - V * w, axis=0)
        scale = max(float(np.abs(w).max()), eps)
        if np.all(resid <= rel_tol * scale):
            break
        Q = np.linalg.qr(Y)[0]
    if np.any(resid > 1e-2 * max(float(np.abs(w).max()), eps)):
        raise EigensolverFailure(
            f"subspace iteration did not converge (residuals {resid})"
        )
    return w.astype(np.float64), V.astype(np.float64)


def strip_self_loops(graph: SampledGraph) -> SampledGraph:
    """Copy of the graph with the adjacency diagonal zeroed.

    Self-loops are generated by default; removing them does not alter the
    asymptotic behavior of either embedding, and experiments accept a flag
    to check both conventions.
    """
    adjacency = np.array(graph.adjacency)
    np.fill_diagonal(adjacency, 0)
    adjacency.setflags(write=False)
    return SampledGraph(adjacency, graph.labels, graph.seed)


def _top_eigenpairs(M: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Top-d eigenpairs of a symmetric matrix by eigenvalue magnitude.

    Full dense decomposition below the cutoff (float64, exact); above it a
    single-precision subspace iteration, ample for Monte Carlo statistics.
    """
    n = M.shape[0]
    if n <= _FULL_EIGH_CUTOFF or d > n // 4:
        evals, evecs = np.linalg.eigh(M.astype(np.float64, copy=False))
        order = np.argsort(-np.abs(evals), kind="stable")[:d]
        return evals[order], evecs[:, order]
    return _subspace_topk(M.astype(np.float32), d)


def _as_symmetric_matrix(graph) -> np.ndarray:
    M = graph.adjacency if isinstance(graph, SampledGraph) else np.asarray(graph)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeMismatch(f"adjacency must be square, got shape {M.shape}")
    if M.shape[0] > DESK_SCALE_LIMIT:
        raise GraphTooLarge(
            f"n={M.shape[0]} exceeds the dense desk-scale limit {DESK_SCALE_LIMIT}"
        )
    return M


def ase_embed(graph, d: int) -> Embedding:
    """Adjacency spectral embedding into R^d.

    Accepts a SampledGraph or any symmetric matrix (e.g. the expectation
    matrix P for noiseless-limit checks).
    """
    M = _as_symmetric_matrix(graph)
    if not (1 <= d <= M.shape[0]):
        raise ValueError(f"need 1 <= d <= n, got d={d}, n={M.shape[0]}")
    evals, evecs = _top_eigenpairs(M, d)
    return Embedding(evecs * np.sqrt(np.abs(evals)), ASE, evals)


def lse_embed(graph, d: int) -> Embedding:
    """Laplacian spectral embedding into R^d (degree-normalized adjacency)."""
    M = _as_symmetric_matrix(graph)
    n = M.shape[0]
    if not (1 <= d <= n):
        raise ValueError(f"need 1 <= d <= n, got d={d}, n={n}")
    degrees = M.sum(axis=1, dtype=np.float64)
    if np.any(degrees <= 0.0):
        isolated = int(np.flatnonzero(degrees <= 0.0)[0])
        raise IsolatedVertex(
            f"vertex {isolated} has degree 0; Laplacian normalization undefined"
        )
    dtype = np.float64 if (n <= _FULL_EIGH_CUTOFF or d > n // 4) else np.float32
    inv_sqrt = (1.0 / np.sqrt(degrees)).astype(dtype)
    lap = M.astype(dtype)
    lap *= inv_sqrt[:, None]
    lap *= inv_sqrt[None, :]
    evals, evecs = _top_eigenpairs(lap, d)
    return Embedding(evecs * np.sqrt(np.abs(evals)), LSE, evals)


def clustering_error(embedding: Embedding, labels, K: int, seed: int) -> float:
    """Misclassification rate of Gaussian-mixture clustering of an embedding.

    Fits a K-component full-covariance mixture by EM (k-means++ starts,
    5 restarts, best likelihood kept) and returns the error rate minimized
    over all K! relabelings (exhaustive for K <= 6, Hungarian assignment
    beyond).
    """
    if K < 2:
        raise ValueError(f"need K >= 2, got {K}")
    labels = np.asarray(labels)
    points = embedding.points
    if labels.shape[0] != points.shape[0]:
        raise ShapeMismatch("one label per embedded vertex required")
    gmm = GaussianMixture(
        n_components=K,
        covariance_type="full",
        n_init=5,
        init_params="k-means++",
        reg_covar=1e-12,
        random_state=seed,
    )
    try:
        predicted = gmm.fit_predict(points)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise EmDegenerate(f"EM failed to fit {K} components: {exc}") from exc
    for cov in gmm.covariances_:
        if np.linalg.eigvalsh(cov).min() < 1e-12:
            raise EmDegenerate("a mixture component collapsed (covariance singular)")

    counts = np.zeros((K, K), dtype=np.int64)
    np.add.at(counts, (labels, predicted), 1)
    if K <= 6:
        agree = max(
            sum(counts[k, perm[k]] for k in range(K))
            for perm in permutations(range(K))
        )
    else:
        rows, cols = linear_sum_assignment(-counts)
        agree = int(counts[rows, cols].sum())
    return 1.0 - agree / labels.shape[0]


def _procrustes_rotation(source: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Orthogonal R minimizing ||source R - target||_F (rows are points)."""
    M = source.T @ target
    U, svals, Vt = np.linalg.svd(M)
    if svals[-1] < 1e-8 * svals[0]:
        raise AlignmentIllConditioned(
            "block centroids are nearly collinear; rotation is unidentifiable"
        )
    return U @ Vt


@dataclass(frozen=True)
class CltReport:
    """Empirical check of the limiting Gaussians against Monte Carlo graphs."""

    n: int
    reps: int
    seeds: tuple[int, ...]
    ase_cov_rel_error: np.ndarray
    lse_cov_rel_error: np.ndarray
    ase_mean_offset: np.ndarray
    lse_mean_offset: np.ndarray
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "reps": self.reps,
            "seeds": list(self.seeds),
            "ase_cov_rel_error": self.ase_cov_rel_error.tolist(),
            "lse_cov_rel_error": self.lse_cov_rel_error.tolist(),
            "ase_mean_offset": self.ase_mean_offset.tolist(),
            "lse_mean_offset": self.lse_mean_offset.tolist(),
            "flags": list(self.flags),
        }


def empirical_clt_check(model: BlockModel, n: int, reps: int, seeds,
                        zero_diagonal: bool = False) -> CltReport:
    """Compare aligned embedding residual covariances with their limits.

    Restricted to positive definite models, where the residual alignment
    group is orthogonal and a Procrustes fit on block centroids identifies
    it.  For each replication, adjacency-embedding residuals
    sqrt(n) (x_i R - nu_{tau_i}) are pooled per block and their covariance
    is compared against the limiting covariance (Frobenius-relative);
    Laplacian residuals n (x_i R - nu~_{tau_i}/sqrt(n)) likewise.

    ``seeds`` is either a sequence of per-replication seeds or a single
    master seed from which children are derived.
    """
    if classify_geometry(model) is not GeometryClass.POSITIVE_DEFINITE:
        raise NotPositiveDefinite(
            "empirical CLT alignment is only identifiable for positive definite B"
        )
    if isinstance(seeds, (int, np.integer)):
        seeds = [_child_seed(int(seeds), r, 0) for r in range(reps)]
    seeds = [int(s) for s in seeds]
    if len(seeds) != reps:
        raise ShapeMismatch(f"need {reps} seeds, got {len(seeds)}")

    config = factorize_spectral(model)
    dist = DiscreteLatentDistribution.from_model(model, config)
    nu = dist.points
    nu_tilde = lse_latent_positions(dist)
    cov_ase = [ase_covariance(dist, x).covariance for x in nu]
    cov_lse = [lse_covariance(dist, x).covariance for x in nu]
    K, d = nu.shape

    sums_ase = [np.zeros((d, d)) for _ in range(K)]
    sums_lse = [np.zeros((d, d)) for _ in range(K)]
    mean_ase = [np.zeros(d) for _ in range(K)]
    mean_lse = [np.zeros(d) for _ in range(K)]

    for seed in seeds:
        graph = sample_sbm(model, n, seed)
        if zero_diagonal:
            graph = strip_self_loops(graph)
        members = [np.flatnonzero(graph.labels == k) for k in range(K)]
        if any(m.size < 2 for m in members):
            raise AlignmentIllConditioned("a block received fewer than 2 vertices")

        pts = ase_embed(graph, d).points
        centroids = np.stack([pts[m].mean(axis=0) for m in members])
        R = _procrustes_rotation(centroids, nu)
        resid = np.sqrt(n) * (pts @ R - nu[graph.labels])
        for k, m in enumerate(members):
            block = resid[m]
            mean_ase[k] += block.mean(axis=0) / reps
            sums_ase[k] += np.cov(block, rowvar=False) / reps

        pts = lse_embed(graph, d).points
        target = nu_tilde / np.sqrt(n)
        centroids = np.stack([pts[m].mean(axis=0) for m in members])
        R = _procrustes_rotation(centroids, target)
        resid = n * (pts @ R - target[graph.labels])
        for k, m in enumerate(members):
            block = resid[m]
            mean_lse[k] += block.mean(axis=0) / reps
            sums_lse[k] += np.cov(block, rowvar=False) / reps

    rel = lambda est, ref: np.linalg.norm(est - ref) / np.linalg.norm(ref)
    flags = [] if reps >= 20 else ["LowReplication"]
    return CltReport(
        n=n,
        reps=reps,
        seeds=tuple(seeds),
        ase_cov_rel_error=np.array([rel(sums_ase[k], cov_ase[k]) for k in range(K)]),
        lse_cov_rel_error=np.array([rel(sums_lse[k], cov_lse[k]) for k in range(K)]),
        ase_mean_offset=np.array([np.linalg.norm(mean_ase[k]) / np.sqrt(n) for k in range(K)]),
        lse_mean_offset=np.array([np.linalg.norm(mean_lse[k]) / n for k in range(K)]),
        flags=tuple(flags),
    )


@dataclass(frozen=True)
class PreferenceReport:
    """Clustering-error comparison of the two embeddings over replications."""

    n: int
    reps: int
    master_seed: int
    ase_errors: np.ndarray
    lse_errors: np.ndarray
    rho_star: float
    verdict: str
    agreement: bool
    model_B: list
    model_Pi: list
    flags: tuple[str, ...] = ()

    @property
    def ase_mean(self) -> float:
        return float(self.ase_errors.mean())

    @property
    def lse_mean(self) -> float:
        return float(self.lse_errors.mean())

    @property
    def ase_stderr(self) -> float:
        return float(self.ase_errors.std(ddof=1) / np.sqrt(self.reps))

    @property
    def lse_stderr(self) -> float:
        return float(self.lse_errors.std(ddof=1) / np.sqrt(self.reps))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "reps": self.reps,
            "master_seed": self.master_seed,
            "ase_errors": self.ase_errors.tolist(),
            "lse_errors": self.lse_errors.tolist(),
            "ase_mean": self.ase_mean,
            "lse_mean": self.lse_mean,
            "ase_stderr": self.ase_stderr,
            "lse_stderr": self.lse_stderr,
            "rho_star": self.rho_star,
            "verdict": self.verdict,
            "agreement": self.agreement,
            "model_B": self.model_B,
            "model_Pi": self.model_Pi,
            "flags": list(self.flags),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def preference_experiment(model: BlockModel, n: int, reps: int, seed: int,
                          zero_diagonal: bool = False) -> PreferenceReport:
    """Sample graphs, embed both ways, cluster, and compare error rates.

    The agreement flag records whether the ordering of the mean clustering
    errors matches the sign of rho* - 1.  Replications use independent
    child seeds of (seed, rep), so results do not depend on scheduling.
    """
    if reps < 1:
        raise ValueError(f"need reps >= 1, got {reps}")
    report: ChernoffReport = rho_star_numeric(model)
    d = factorize_spectral(model).dimension
    K = model.K

    ase_errors = np.empty(reps)
    lse_errors = np.empty(reps)
    for r in range(reps):
        graph = sample_sbm(model, n, _child_seed(seed, r, 0))
        if zero_diagonal:
            graph = strip_self_loops(graph)
        ase_errors[r] = clustering_error(
            ase_embed(graph, d), graph.labels, K, _child_seed(seed, r, 1)
        )
        lse_errors[r] = clustering_error(
            lse_embed(graph, d), graph.labels, K, _child_seed(seed, r, 2)
        )

    if report.verdict.value == "ASE_PREFERRED":
        agreement = ase_errors.mean() <= lse_errors.mean()
    elif report.verdict.value == "LSE_PREFERRED":
        agreement = lse_errors.mean() <= ase_errors.mean()
    else:
        agreement = True
    flags = [] if reps >= 50 else ["LowReplication"]
    return PreferenceReport(
        n=n,
        reps=reps,
        master_seed=int(seed),
        ase_errors=ase_errors,
        lse_errors=lse_errors,
        rho_star=report.rho_star,
        verdict=report.verdict.value,
        agreement=bool(agreement),
        model_B=model.B.tolist(),
        model_Pi=model.Pi.tolist(),
        flags=tuple(flags),
    )
