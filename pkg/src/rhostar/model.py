"""Stochastic block models and their latent position geometry.

A K-block model is the pair (B, Pi): a symmetric matrix of block edge
probabilities with entries in (0, 1) and distinct rows, and an interior
simplex vector of block membership probabilities.  Every such B factors as

    B = X I{d+,d-} X^T,

where I{d+,d-} = diag(+1,...,+1,-1,...,-1) is the indefinite metric with
signature (d+, d-) matching the signs of B's nonzero eigenvalues.  The rows
of X are the latent positions nu_1, ..., nu_K of the corresponding
generalized random dot product graph.  This module validates models,
classifies their geometry (rank one / positive definite / indefinite),
and constructs latent configurations: a spectral factorization for general
models, the canonical lower-triangular form for two-block models, and the
explicit lower-triangular construction for homogeneous balanced affinity
models of any size.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import (
    DuplicateRows,
    EntryOutOfRange,
    InvalidSimplex,
    NotSymmetric,
    NotTwoBlock,
    ParameterOrder,
    RankDeficiencyAmbiguous,
    RankOneInput,
    ShapeMismatch,
)

# Validation tolerances.  Symmetry, duplicate-row detection, and the simplex
# sum are checked at machine level; the rank cutoff is relative to the
# largest eigenvalue magnitude.
SYMMETRY_TOL = 1e-12
DUPLICATE_ROW_TOL = 1e-12
SIMPLEX_TOL = 1e-12
RANK_TOL_FACTOR = 1e-9
RECONSTRUCTION_TOL = 1e-10


class GeometryClass(Enum):
    """Latent geometry of a block edge probability matrix."""

    RANK_ONE = "RankOne"
    POSITIVE_DEFINITE = "PositiveDefinite"
    INDEFINITE = "Indefinite"
    ERDOS_RENYI_DEGENERATE = "ErdosRenyiDegenerate"


@dataclass(frozen=True)
class Signature:
    """Counts of positive and negative directions of the indefinite metric."""

    d_plus: int
    d_minus: int

    def __post_init__(self):
        if self.d_plus < 0 or self.d_minus < 0 or self.d < 1:
            raise ValueError("signature requires d+ >= 0, d- >= 0, d+ + d- >= 1")

    @property
    def d(self) -> int:
        return self.d_plus + self.d_minus

    def metric_diagonal(self) -> np.ndarray:
        """Diagonal of I{d+,d-} as a length-d vector of +/-1."""
        return np.concatenate([np.ones(self.d_plus), -np.ones(self.d_minus)])

    def metric(self) -> np.ndarray:
        return np.diag(self.metric_diagonal())


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BlockModel:
    """A validated stochastic block model (B, Pi).

    Construction runs the full validity checks, so every instance in
    circulation satisfies the invariants: B symmetric with entries strictly
    inside (0, 1) and pairwise distinct rows, Pi interior to the simplex.
    Instances are immutable (arrays are marked read-only) and safe to share
    across threads.
    """

    B: np.ndarray
    Pi: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.B, dtype=float)
        Pi = np.asarray(self.Pi, dtype=float)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise ShapeMismatch(f"B must be square, got shape {B.shape}")
        if Pi.ndim != 1 or Pi.shape[0] != B.shape[0]:
            raise ShapeMismatch(
                f"Pi must have length {B.shape[0]}, got shape {Pi.shape}"
            )
        if not np.all(np.abs(B - B.T) <= SYMMETRY_TOL):
            raise NotSymmetric("B is not symmetric within 1e-12")
        if np.any(B <= 0.0) or np.any(B >= 1.0):
            raise EntryOutOfRange("entries of B must lie strictly inside (0, 1)")
        K = B.shape[0]
        for k in range(K):
            for l in range(k + 1, K):
                if np.all(np.abs(B[k] - B[l]) < DUPLICATE_ROW_TOL):
                    raise DuplicateRows(
                        f"rows {k} and {l} of B coincide; merge or perturb the blocks"
                    )
        if np.any(Pi <= 0.0) or abs(Pi.sum() - 1.0) > SIMPLEX_TOL:
            raise InvalidSimplex(
                "Pi must have strictly positive entries summing to 1 within 1e-12"
            )
        object.__setattr__(self, "B", _readonly(B))
        object.__setattr__(self, "Pi", _readonly(Pi))

    @property
    def K(self) -> int:
        return self.B.shape[0]


@dataclass(frozen=True)
class LatentConfiguration:
    """Latent positions X (rows nu_k) with B = X I{d+,d-} X^T."""

    X: np.ndarray
    signature: Signature

    def __post_init__(self):
        object.__setattr__(self, "X", _readonly(self.X))

    @property
    def dimension(self) -> int:
        return self.X.shape[1]

    def gram(self) -> np.ndarray:
        """Reconstruct B = X I{d+,d-} X^T."""
        return (self.X * self.signature.metric_diagonal()) @ self.X.T


def validate_model(B, Pi) -> BlockModel:
    """Validate (B, Pi) and return an immutable BlockModel.

    Raises NotSymmetric, EntryOutOfRange, DuplicateRows, or InvalidSimplex
    when the corresponding invariant fails; ShapeMismatch for malformed input.
    """
    return BlockModel(np.asarray(B, dtype=float), np.asarray(Pi, dtype=float))


def _signed_eigenpairs(B: np.ndarray):
    """Eigenpairs of B above the rank cutoff, positives first.

    Returns (eigenvalues, eigenvectors) with positive eigenvalues first,
    each group sorted by decreasing magnitude.  Raises
    RankDeficiencyAmbiguous when any eigenvalue magnitude falls inside
    (0.5, 2) times the cutoff.
    """
    evals, evecs = np.linalg.eigh(B)
    mags = np.abs(evals)
    tol = RANK_TOL_FACTOR * mags.max()
    ambiguous = (mags > 0.5 * tol) & (mags < 2.0 * tol)
    if np.any(ambiguous):
        raise RankDeficiencyAmbiguous(
            "eigenvalue magnitude within (0.5x, 2x) of the rank tolerance; "
            "rank of B cannot be determined reliably"
        )
    keep = mags > tol
    evals, evecs = evals[keep], evecs[:, keep]
    # positive-sign group first, each group by decreasing magnitude
    order = np.lexsort((-np.abs(evals), np.where(evals > 0, 0, 1)))
    return evals[order], evecs[:, order]


def classify_geometry(model: BlockModel) -> GeometryClass:
    """Classify B as rank one, positive definite, or indefinite.

    The fully degenerate Erdos-Renyi case (all entries equal) cannot occur
    here because it is rejected upstream as DuplicateRows.
    """
    evals, _ = _signed_eigenpairs(model.B)
    if evals.size == 1:
        return GeometryClass.RANK_ONE
    if evals.size == model.K and np.all(evals > 0):
        return GeometryClass.POSITIVE_DEFINITE
    return GeometryClass.INDEFINITE


def factorize_spectral(model: BlockModel) -> LatentConfiguration:
    """Spectral factorization X = U |Lambda|^(1/2) of B.

    Only eigenpairs above the rank cutoff are used.  Columns carrying
    positive eigenvalues precede those carrying negative eigenvalues, and
    each group is ordered by decreasing eigenvalue magnitude, so the
    signature is read off the column layout.
    """
    evals, evecs = _signed_eigenpairs(model.B)
    X = evecs * np.sqrt(np.abs(evals))
    sig = Signature(int(np.sum(evals > 0)), int(np.sum(evals < 0)))
    return LatentConfiguration(X, sig)


def factorize_canonical_2block(model: BlockModel) -> LatentConfiguration:
    """Canonical lower-triangular latent positions for a full-rank 2x2 B.

    For positive definite B this is the Cholesky factor; for indefinite B
    the analogous construction under the metric diag(1, -1):

        X = [[sqrt(a), 0], [b/sqrt(a), sqrt(|ac - b^2|)/sqrt(a)]].
    """
    if model.K != 2:
        raise NotTwoBlock(f"canonical two-block factorization needs K=2, got K={model.K}")
    a, b, c = model.B[0, 0], model.B[0, 1], model.B[1, 1]
    geometry = classify_geometry(model)
    if geometry is GeometryClass.RANK_ONE:
        raise RankOneInput("det(B) = 0: use the scalar rank-one latent positions")
    det = a * c - b * b
    X = np.array([
        [np.sqrt(a), 0.0],
        [b / np.sqrt(a), np.sqrt(abs(det)) / np.sqrt(a)],
    ])
    sig = Signature(2, 0) if det > 0 else Signature(1, 1)
    return LatentConfiguration(X, sig)


def cholesky_homogeneous(K: int, a: float, b: float) -> LatentConfiguration:
    """Lower-triangular latent positions of the homogeneous affinity model.

    The K-block matrix with value a on the diagonal and b off the diagonal
    (0 < b < a < 1) is positive definite, and its Cholesky factor has an
    explicit row-by-row form: row 1 is (sqrt(a), 0, ...), row 2 is
    (b/sqrt(a), sqrt((a-b)(a+b)/a), 0, ...), and row K >= 3 repeats row K-1
    except that its last nonzero entry is scaled by b/(a+(K-2)b) and a new
    diagonal entry sqrt((a-b)(a+(K-1)b)/(a+(K-2)b)) is appended.  Every row
    has squared norm a and distinct rows have inner product b.
    """
    if K < 2:
        raise ValueError(f"homogeneous construction needs K >= 2, got K={K}")
    if not (0.0 < b < a < 1.0):
        raise ParameterOrder(f"need 0 < b < a < 1, got a={a}, b={b}")
    X = np.zeros((K, K))
    X[0, 0] = np.sqrt(a)
    X[1, 0] = b / np.sqrt(a)
    X[1, 1] = np.sqrt((a - b) * (a + b) / a)
    for k in range(2, K):
        X[k, :k] = X[k - 1, :k]
        X[k, k - 1] *= b / (a + (k - 1) * b)
        X[k, k] = np.sqrt((a - b) * (a + k * b) / (a + (k - 1) * b))
    return LatentConfiguration(X, Signature(K, 0))


# --- block matrix builders for the standard sub-model families --------------

def two_block_matrix(a: float, b: float, c: float) -> np.ndarray:
    return np.array([[a, b], [b, c]])


def homogeneous_matrix(K: int, a: float, b: float) -> np.ndarray:
    """K-block matrix with a on the diagonal and b elsewhere."""
    return np.full((K, K), b) + (a - b) * np.eye(K)


def core_periphery_matrix(a: float, b: float) -> np.ndarray:
    """Two-block matrix [[a, b], [b, b]]: dense core against a periphery."""
    return np.array([[a, b], [b, b]])


def rank_one_matrix(p: float, q: float) -> np.ndarray:
    """Rank-one two-block matrix [[p^2, pq], [pq, q^2]]."""
    return np.array([[p * p, p * q], [p * q, q * q]])


def homogeneous_model(K: int, a: float, b: float) -> BlockModel:
    """Homogeneous balanced affinity model: B as above, Pi uniform."""
    return validate_model(homogeneous_matrix(K, a, b), np.full(K, 1.0 / K))
