"""Exception hierarchy for the rhostar package.

Every failure mode raised by the library is a subclass of ``RhoStarError``,
grouped by the stage that detects it (model validation, limit covariance
construction, Chernoff optimization, graph simulation, sweep plumbing).
The class names are part of the public contract and are matched by tests.
"""


class RhoStarError(Exception):
    """Base class for all rhostar errors."""


# --- model validation -------------------------------------------------------

class ShapeMismatch(RhoStarError):
    """B is not square or Pi length does not match B's dimension."""


class NotSymmetric(RhoStarError):
    """Block matrix is asymmetric beyond tolerance."""


class EntryOutOfRange(RhoStarError):
    """Some block edge probability lies outside the open interval (0, 1)."""


class DuplicateRows(RhoStarError):
    """Two rows of B coincide entrywise; the blocks are indistinguishable.

    This covers the Erdos-Renyi degenerate case where all entries agree.
    """


class InvalidSimplex(RhoStarError):
    """Block membership probabilities are not interior to the simplex."""


class RankDeficiencyAmbiguous(RhoStarError):
    """An eigenvalue magnitude sits too close to the rank cutoff to classify."""


class NotTwoBlock(RhoStarError):
    """Operation requires exactly two blocks."""


class RankOneInput(RhoStarError):
    """Operation requires a full-rank two-block matrix but det(B) vanishes."""


class ParameterOrder(RhoStarError):
    """Homogeneous affinity parameters must satisfy 0 < b < a < 1."""


# --- limiting covariances ---------------------------------------------------

class DegenerateDistribution(RhoStarError):
    """Second moment matrix of the latent distribution is rank deficient."""


class InnerProductOutOfRange(RhoStarError):
    """An indefinite inner product fell outside (0, 1), so the Bernoulli
    variance factor is not strictly positive."""


class NonpositiveDegree(RhoStarError):
    """Expected-degree normalizer for a latent position is not positive."""


class IllConditioned(RhoStarError):
    """A linear solve was blocked because the matrix condition number
    exceeds the hard limit."""


# --- Chernoff machinery -----------------------------------------------------

class SingularInterpolate(RhoStarError):
    """Interpolated covariance t*S1 + (1-t)*S2 is numerically singular."""


class InvalidSampleSize(RhoStarError):
    """Finite-sample Chernoff quantities require n >= 1."""


class DegenerateEqualRows(RhoStarError):
    """Closed form requested on the degenerate locus (a = b or p = q)."""


class NonpositiveDenominator(RhoStarError):
    """Closed-form denominator is not positive for the given parameters."""


class SingularInput(RhoStarError):
    """A matrix that must be invertible is singular."""


class SingularInterpolant(RhoStarError):
    """The convex combination (1-t)M0 + t M1 is singular."""


# --- graph simulation -------------------------------------------------------

class GraphTooLarge(RhoStarError):
    """Requested graph exceeds the dense-eigensolver desk-scale limit."""


class EigensolverFailure(RhoStarError):
    """The symmetric eigensolver failed to converge."""


class IsolatedVertex(RhoStarError):
    """Laplacian normalization undefined: some vertex has degree zero."""


class NotPositiveDefinite(RhoStarError):
    """Operation restricted to positive definite block matrices."""


class AlignmentIllConditioned(RhoStarError):
    """Centroid geometry is too close to collinear for Procrustes alignment."""


class EmDegenerate(RhoStarError):
    """A Gaussian mixture component collapsed during EM."""


# --- sweeps and artifacts ---------------------------------------------------

class UnknownFamily(RhoStarError):
    """Sweep family name is not registered."""


class EmptyLevelSet(RhoStarError):
    """The requested contour level is never crossed on the grid (informational)."""


class NotTwoDimensional(RhoStarError):
    """Operation requires a grid over exactly two axes."""


class IoFailure(RhoStarError):
    """Artifact emission failed at the filesystem level."""
