"""Chernoff information and the embedding-performance statistic rho*.

For two Gaussians F1 = N(mu1, S1), F2 = N(mu2, S2) the Chernoff information
is

    C(F1, F2) = sup_{t in (0,1)} [ t(1-t)/2 ||mu2 - mu1||^2_{S_t^-1}
                                   + 1/2 log( det S_t / (det S1^t det S2^(1-t)) ) ]

with S_t = t S1 + (1-t) S2.  Applied to the limiting block-conditional
Gaussians of the adjacency and Laplacian spectral embeddings, the dominant
quadratic parts define the large-sample relative performance ratio

    rho* = min_{k != l} sup_t [ t(1-t) ||nu_k - nu_l||^2_{S_kl(t)^-1} ]
         / min_{k != l} sup_t [ t(1-t) ||nu~_k - nu~_l||^2_{S~_kl(t)^-1} ],

where numerator and denominator are minimized over block pairs
independently.  rho* > 1 favors the adjacency embedding, rho* < 1 the
Laplacian embedding.

Implementation note: for each pair we diagonalize the two covariances
simultaneously (generalized symmetric eigendecomposition), after which
every evaluation of the interpolated quadratic form and log-determinant is
O(d).  A direct-solve evaluation path is retained for cross-checking.  The
supremum over t is located by a 101-point coarse scan followed by bounded
golden-section/parabolic refinement on [1e-9, 1 - 1e-9] with tolerance
1e-10 in t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateEqualRows,
    EntryOutOfRange,
    InvalidSampleSize,
    InvalidSimplex,
    NonpositiveDenominator,
    ParameterOrder,
    ShapeMismatch,
    SingularInput,
    SingularInterpolant,
    SingularInterpolate,
)
from .limits import (
    DiscreteLatentDistribution,
    ase_covariances,
    lse_covariances,
)
from .model import BlockModel

# Optimizer constants: endpoints are excluded by EPS_T, the coarse scan
# brackets the refinement, and XATOL_T is the convergence tolerance in t.
EPS_T = 1e-9
COARSE_POINTS = 101
XATOL_T = 1e-10

# |rho* - 1| below this band reports EQUAL.
EQUALITY_BAND = 1e-9

# Latent pairs closer than this get a conditioning warning in the report.
NEAR_DEGENERATE_GAP = 1e-6


class Verdict(Enum):
    ASE_PREFERRED = "ASE_PREFERRED"
    LSE_PREFERRED = "LSE_PREFERRED"
    EQUAL = "EQUAL"


def verdict_from_rho(rho_star: float) -> Verdict:
    if abs(rho_star - 1.0) < EQUALITY_BAND:
        return Verdict.EQUAL
    return Verdict.ASE_PREFERRED if rho_star > 1.0 else Verdict.LSE_PREFERRED


@dataclass
class PairObjective:
    """Interpolated Mahalanobis objective for one pair of Gaussians.

    Calling the object evaluates t(1-t) ||diff||^2_{(t A + (1-t) B)^-1}
    for scalar or vector t, where A = cov_first carries weight t.  The two
    covariances are simultaneously diagonalized once at construction:
    W^T B W = I and W^T A W = diag(lam), so the quadratic form is
    sum_i c_i^2 / (t lam_i + 1 - t).
    """

    mean_difference: np.ndarray
    cov_first: np.ndarray
    cov_second: np.ndarray
    _lam: np.ndarray = field(init=False, repr=False)
    _c2: np.ndarray = field(init=False, repr=False)
    _loglam: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        diff = np.asarray(self.mean_difference, dtype=float)
        A = np.asarray(self.cov_first, dtype=float)
        B = np.asarray(self.cov_second, dtype=float)
        if A.shape != B.shape or A.shape[0] != diff.shape[0]:
            raise ShapeMismatch("covariance and mean dimensions disagree")
        try:
            lam, W = scipy.linalg.eigh(A, B)
        except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
            raise SingularInterpolate(
                "simultaneous diagonalization failed; covariances not SPD"
            ) from exc
        if lam.min() <= 0.0:
            raise SingularInterpolate(
                "interpolated covariance is singular inside (0, 1)"
            )
        self._lam = lam
        self._c2 = (W.T @ diff) ** 2
        self._loglam = np.log(lam)
        # plain-float copies for the scalar refinement loop
        self._terms = list(zip(self._lam.tolist(), self._c2.tolist(),
                               self._loglam.tolist()))

    def quadratic_form(self, t):
        """||diff||^2 under the inverse of t cov_first + (1-t) cov_second."""
        t = np.asarray(t, dtype=float)
        denom = np.multiply.outer(t, self._lam) + (1.0 - t)[..., None]
        return (self._c2 / denom).sum(axis=-1)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return t * (1.0 - t) * self.quadratic_form(t)

    def quadratic_form_direct(self, t: float) -> float:
        """Direct-solve evaluation, kept as a cross-check of the whitened path."""
        S_t = t * self.cov_first + (1.0 - t) * self.cov_second
        return float(self.mean_difference @ np.linalg.solve(S_t, self.mean_difference))

    def log_det_ratio(self, t):
        """log( det S_t / (det cov_first^t det cov_second^(1-t)) )."""
        t = np.asarray(t, dtype=float)
        interp = np.multiply.outer(t, self._lam) + (1.0 - t)[..., None]
        return (np.log(interp) - np.multiply.outer(t, self._loglam)).sum(axis=-1)

    def chernoff_objective(self, t, n: float = 1.0):
        """Full per-pair objective: n t(1-t)/2 quad + 1/2 log-det ratio."""
        t = np.asarray(t, dtype=float)
        return 0.5 * n * t * (1.0 - t) * self.quadratic_form(t) \
            + 0.5 * self.log_det_ratio(t)

    def scalar_limit(self, t: float) -> float:
        """Plain-float evaluation of t(1-t) * quadratic form."""
        one_t = 1.0 - t
        q = 0.0
        for lam, c2, _ in self._terms:
            q += c2 / (t * lam + one_t)
        return t * one_t * q

    def scalar_chernoff(self, t: float, n: float) -> float:
        """Plain-float evaluation of the full objective at sample size n."""
        one_t = 1.0 - t
        q = 0.0
        logdet = 0.0
        for lam, c2, loglam in self._terms:
            interp = t * lam + one_t
            q += c2 / interp
            logdet += math.log(interp) - t * loglam
        return 0.5 * n * t * one_t * q + 0.5 * logdet


_GOLDEN_MEAN = 0.5 * (3.0 - math.sqrt(5.0))
_COARSE_TS = np.linspace(EPS_T, 1.0 - EPS_T, COARSE_POINTS)


def _brent_max(f, lo: float, hi: float, xatol: float = XATOL_T,
               max_iter: int = 200) -> tuple[float, float]:
    """Bounded scalar maximization: golden section with parabolic steps.

    Port of the classic fminbound scheme, maximizing f on [lo, hi] to
    absolute tolerance xatol in the argument.
    """
    sqrt_eps = math.sqrt(2.2e-16)
    a, b = lo, hi
    x = w = v = a + _GOLDEN_MEAN * (b - a)
    fx = fw = fv = f(x)
    d = e = 0.0
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        tol1 = sqrt_eps * abs(x) + xatol / 3.0
        tol2 = 2.0 * tol1
        if abs(x - m) <= tol2 - 0.5 * (b - a):
            break
        use_golden = True
        if abs(e) > tol1:
            # fit a parabola through (v, fv), (w, fw), (x, fx)
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            r, e = e, d
            if abs(p) < abs(0.5 * q * r) and q * (a - x) < p < q * (b - x):
                d = p / q
                u = x + d
                if (u - a) < tol2 or (b - u) < tol2:
                    d = tol1 if x < m else -tol1
                use_golden = False
        if use_golden:
            e = (b if x < m else a) - x
            d = _GOLDEN_MEAN * e
        u = x + (d if abs(d) >= tol1 else (tol1 if d > 0 else -tol1))
        fu = f(u)
        if fu >= fx:
            if u < x:
                b = x
            else:
                a = x
            v, w, x = w, x, u
            fv, fw, fx = fw, fx, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu >= fw or w == x:
                v, w = w, u
                fv, fw = fw, fu
            elif fu >= fv or v == x or v == w:
                v, fv = u, fu
    return x, fx


def maximize_over_t(objective, scalar_objective=None) -> tuple[float, float]:
    """Supremum of a scalar objective over t in (0, 1).

    A coarse 101-point scan (vectorized) seeds a bounded golden-section /
    parabolic-interpolation refinement around the best bracket, guarding
    against the objective being non-unimodal away from the optimum.
    ``scalar_objective`` may supply a cheaper plain-float evaluation for
    the refinement loop.
    """
    if scalar_objective is None:
        scalar_objective = lambda t: float(objective(t))
    ts = _COARSE_TS
    vals = np.asarray(objective(ts), dtype=float)
    i = int(np.argmax(vals))
    lo = ts[max(i - 1, 0)]
    hi = ts[min(i + 1, COARSE_POINTS - 1)]
    t_star, value = _brent_max(scalar_objective, float(lo), float(hi))
    if vals[i] > value:
        t_star, value = float(ts[i]), float(vals[i])
    return value, t_star


def gaussian_chernoff(mu1, Sigma1, mu2, Sigma2) -> tuple[float, float]:
    """Chernoff information between N(mu1, Sigma1) and N(mu2, Sigma2).

    Returns (value, t_star) with the supremum taken by bounded scalar
    maximization on (0, 1).  Sigma_t = t Sigma1 + (1-t) Sigma2.
    """
    mu1 = np.atleast_1d(np.asarray(mu1, dtype=float))
    mu2 = np.atleast_1d(np.asarray(mu2, dtype=float))
    Sigma1 = np.atleast_2d(np.asarray(Sigma1, dtype=float))
    Sigma2 = np.atleast_2d(np.asarray(Sigma2, dtype=float))
    if mu1.shape != mu2.shape or Sigma1.shape != Sigma2.shape:
        raise ShapeMismatch("mean/covariance dimensions disagree")
    pair = PairObjective(mu2 - mu1, Sigma1, Sigma2)
    return maximize_over_t(
        lambda t: pair.chernoff_objective(t),
        lambda t: pair.scalar_chernoff(t, 1.0),
    )


@dataclass(frozen=True)
class _EmbeddingSummaries:
    """Per-block limiting Gaussians for one model, both embeddings."""

    means_ase: np.ndarray
    covs_ase: list
    means_lse: np.ndarray
    covs_lse: list


def _summaries(model: BlockModel) -> _EmbeddingSummaries:
    dist = DiscreteLatentDistribution.from_model(model)
    ase = ase_covariances(dist)
    lse = lse_covariances(dist)
    return _EmbeddingSummaries(
        means_ase=dist.points,
        covs_ase=[s.covariance for s in ase],
        means_lse=np.stack([s.mean for s in lse]),
        covs_lse=[s.covariance for s in lse],
    )


def _min_over_pairs(means: np.ndarray, covs: list, n: float | None = None):
    """Minimum over unordered block pairs of the per-pair supremum over t."""
    best = None
    for k, l in combinations(range(len(covs)), 2):
        pair = PairObjective(means[k] - means[l], covs[k], covs[l])
        if n is None:
            value, t_star = maximize_over_t(pair, pair.scalar_limit)
        else:
            value, t_star = maximize_over_t(
                lambda t: pair.chernoff_objective(t, n),
                lambda t: pair.scalar_chernoff(t, n),
            )
        if best is None or value < best[0]:
            best = (value, t_star, (k, l))
    return best


@dataclass(frozen=True)
class ChernoffReport:
    """rho* and its ingredients for one block model.

    The numerator and denominator of rho* are minimized over block pairs
    independently, so each side carries its own minimizing pair and
    optimal t; ``minimizing_pair`` is the numerator's (they coincide for
    the symmetric families).
    """

    rho_star: float
    rho_ase_star: float
    rho_lse_star: float
    minimizing_pair: tuple[int, int]
    minimizing_pair_lse: tuple[int, int]
    t_star_ase: float
    t_star_lse: float
    verdict: Verdict
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "rho_star": self.rho_star,
            "rho_ase_star": self.rho_ase_star,
            "rho_lse_star": self.rho_lse_star,
            "minimizing_pair": list(self.minimizing_pair),
            "minimizing_pair_lse": list(self.minimizing_pair_lse),
            "t_star_ase": self.t_star_ase,
            "t_star_lse": self.t_star_lse,
            "verdict": self.verdict.value,
            "warnings": list(self.warnings),
        }


def rho_star_numeric(model: BlockModel) -> ChernoffReport:
    """rho* by numeric optimization, valid for every block model."""
    s = _summaries(model)
    notes = []
    K = model.K
    for k, l in combinations(range(K), 2):
        gap = float(np.linalg.norm(s.means_ase[k] - s.means_ase[l]))
        row_gap = float(np.abs(model.B[k] - model.B[l]).max())
        if gap < NEAR_DEGENERATE_GAP or row_gap < NEAR_DEGENERATE_GAP:
            notes.append(
                f"blocks {k} and {l} nearly coalesce (latent gap {gap:.2e}, "
                f"row gap {row_gap:.2e}); Chernoff quantities are ill-conditioned"
            )
    num, t_ase, pair_ase = _min_over_pairs(s.means_ase, s.covs_ase)
    den, t_lse, pair_lse = _min_over_pairs(s.means_lse, s.covs_lse)
    rho = num / den
    return ChernoffReport(
        rho_star=rho,
        rho_ase_star=num,
        rho_lse_star=den,
        minimizing_pair=pair_ase,
        minimizing_pair_lse=pair_lse,
        t_star_ase=t_ase,
        t_star_lse=t_lse,
        verdict=verdict_from_rho(rho),
        warnings=tuple(notes),
    )


def rho_finite_n(model: BlockModel, n: int) -> tuple[float, float]:
    """Finite-sample Chernoff exponents (rho_A, rho_L) at n vertices.

    Includes the log-determinant terms; block sizes follow the n_k = n pi_k
    convention.  The ratio rho_A / rho_L converges to rho* as n grows.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidSampleSize(f"need integer n >= 1, got {n!r}")
    s = _summaries(model)
    rho_a, _, _ = _min_over_pairs(s.means_ase, s.covs_ase, n=float(n))
    rho_l, _, _ = _min_over_pairs(s.means_lse, s.covs_lse, n=float(n))
    return rho_a, rho_l


# --- closed forms for the tractable sub-model families ----------------------

def _check_open_unit(name: str, *values: float) -> None:
    for v in values:
        if not (0.0 < v < 1.0):
            raise EntryOutOfRange(f"{name} must lie in (0, 1), got {v}")


def rho_star_homogeneous2(a: float, b: float) -> tuple[float, float, float]:
    """Closed-form rho* of the homogeneous balanced two-block model.

    Returns (rho_star, psi, c) where rho* = 1 + c * psi,
    psi = 3a(a-1) + 3b(b-1) + 8ab is the sign discriminant and
    c = (a-b)^2 / (4 (a+b)^2 (a(1-a) + b(1-b))) > 0.  Valid on both sides
    of the diagonal (assortative a > b and disassortative a < b).
    """
    _check_open_unit("a, b", a, b)
    if a == b:
        raise DegenerateEqualRows("a = b is the Erdos-Renyi singularity")
    psi = 3.0 * a * (a - 1.0) + 3.0 * b * (b - 1.0) + 8.0 * a * b
    c = (a - b) ** 2 / (4.0 * (a + b) ** 2 * (a * (1.0 - a) + b * (1.0 - b)))
    return 1.0 + c * psi, psi, c


def rho_star_restricted_b_equals_1_minus_a(a: float) -> float:
    """rho* on the one-parameter slice b = 1 - a: always 1 + (2a-1)^2/4 >= 1."""
    _check_open_unit("a", a)
    if a == 0.5:
        raise DegenerateEqualRows("a = 1/2 makes b = a: Erdos-Renyi singularity")
    return 1.0 + 0.25 * (2.0 * a - 1.0) ** 2


def _rank1_parts(p: float, q: float, pi1: float) -> dict:
    """Scalar ingredients of the rank-one closed form.

    With latent positions p and q in R, the limiting variances are
    Sigma(p) = D1/Delta^2, Sigma(q) = D2/Delta^2 for the adjacency
    embedding and S1/(4 mu^3), S2/(4 mu^3) for the Laplacian embedding;
    each one-dimensional supremum has the explicit form
    (gap)^2 / (sqrt(A) + sqrt(B))^2 attained at t* = sqrt(B)/(sqrt(A)+sqrt(B)).
    """
    pi2 = 1.0 - pi1
    delta = pi1 * p * p + pi2 * q * q
    mu = pi1 * p + pi2 * q
    d1 = pi1 * p ** 4 * (1 - p * p) + pi2 * p * q ** 3 * (1 - p * q)
    d2 = pi1 * p ** 3 * q * (1 - p * q) + pi2 * q ** 4 * (1 - q * q)
    s1 = pi1 * p * (1 - p * p) + pi2 * q * (1 - p * q)
    s2 = pi1 * p * (1 - p * q) + pi2 * q * (1 - q * q)
    sup_ase = (p - q) ** 2 * delta ** 2 / (np.sqrt(d1) + np.sqrt(d2)) ** 2
    sup_lse = 4.0 * mu * mu * (np.sqrt(p) - np.sqrt(q)) ** 2 \
        / (np.sqrt(s1) + np.sqrt(s2)) ** 2
    return {
        "sup_ase": sup_ase,
        "sup_lse": sup_lse,
        "t_star_ase": np.sqrt(d2) / (np.sqrt(d1) + np.sqrt(d2)),
        "t_star_lse": np.sqrt(s2) / (np.sqrt(s1) + np.sqrt(s2)),
    }


def rho_star_rank1(p: float, q: float, pi1: float) -> float:
    """Closed-form rho* of the rank-one model B = [[p^2, pq], [pq, q^2]]."""
    _check_open_unit("p, q", p, q)
    if not (0.0 < pi1 < 1.0):
        raise InvalidSimplex(f"pi1 must lie in (0, 1), got {pi1}")
    if p == q:
        raise DegenerateEqualRows("p = q is the Erdos-Renyi singularity")
    pi2 = 1.0 - pi1
    num = (
        (np.sqrt(p) + np.sqrt(q)) ** 2
        * (pi1 * p * p + pi2 * q * q) ** 2
        * (
            np.sqrt(pi1 * p * (1 - p * p) + pi2 * q * (1 - p * q))
            + np.sqrt(pi1 * p * (1 - p * q) + pi2 * q * (1 - q * q))
        ) ** 2
    )
    den = (
        4.0
        * (pi1 * p + pi2 * q) ** 2
        * (
            np.sqrt(pi1 * p ** 4 * (1 - p * p) + pi2 * p * q ** 3 * (1 - p * q))
            + np.sqrt(pi1 * p ** 3 * q * (1 - p * q) + pi2 * q ** 4 * (1 - q * q))
        ) ** 2
    )
    return float(num / den)


def rho_star_poly_p_approx(p: float) -> float:
    """Large-exponent approximation of rho* for the q = p^gamma sub-model."""
    _check_open_unit("p", p)
    return (1.0 + np.sqrt(1.0 - p * p)) ** 2 / (4.0 * (1.0 - p * p))


def _check_affinity(a: float, b: float) -> None:
    if not (0.0 < b < a < 1.0):
        raise ParameterOrder(f"need 0 < b < a < 1, got a={a}, b={b}")


def homogeneousK_psi(a: float, b: float, K: int) -> float:
    """Discriminant psi = 3a(a-1) + 3b(b-1)(K-1) + 4abK."""
    return 3.0 * a * (a - 1.0) + 3.0 * b * (b - 1.0) * (K - 1) + 4.0 * a * b * K


def rho_star_homogeneousK(a: float, b: float, K: int) -> tuple[float, float, float]:
    """Closed-form rho* of the K-block homogeneous balanced affinity model.

    Returns (rho_star, psi, c) with rho* = 1 + c * psi and
    c = (a-b)^2 / (4 (a+(K-1)b)^2 (a(1-a)+b(1-b))) > 0.  Reduces to the
    two-block expression at K = 2.
    """
    _check_affinity(a, b)
    if K < 2:
        raise ValueError(f"need K >= 2, got {K}")
    psi = homogeneousK_psi(a, b, K)
    c = (a - b) ** 2 / (
        4.0 * (a + (K - 1) * b) ** 2 * (a * (1.0 - a) + b * (1.0 - b))
    )
    return 1.0 + c * psi, psi, c


def kblock_ase_supremum(a: float, b: float, K: int) -> float:
    """Adjacency-side per-pair supremum for the homogeneous K-block model:
    (1/K) (a-b)^2 / (a(1-a) + b(1-b)), attained at t* = 1/2."""
    _check_affinity(a, b)
    return (a - b) ** 2 / (K * (a * (1.0 - a) + b * (1.0 - b)))


def kblock_lse_supremum(a: float, b: float, K: int) -> float:
    """Laplacian-side per-pair supremum for the homogeneous K-block model.

    4 (a-b)^2 (a+(K-1)b)^2 divided by
    [4 (a(1-a)+b(1-b)) (a+(K-1)b)^2 K + (a-b)^2 K psi], attained at t* = 1/2.
    """
    _check_affinity(a, b)
    lam_max = a + (K - 1) * b
    variance = a * (1.0 - a) + b * (1.0 - b)
    den = 4.0 * variance * lam_max ** 2 * K \
        + (a - b) ** 2 * K * homogeneousK_psi(a, b, K)
    if den <= 0.0:
        raise NonpositiveDenominator(
            f"Laplacian supremum denominator is {den}; parameters out of range"
        )
    return 4.0 * (a - b) ** 2 * lam_max ** 2 / den


def convex_combination_lhs(a: float, b: float, K: int) -> float:
    """Left-hand side of the level-set identity for psi = 0:

        ((1-a)/b) (1/K) + ((1-b)/a) ((K-1)/K),

    a convex combination in K that equals 4/3 exactly when psi vanishes;
    below 4/3 the adjacency embedding is preferred, above it the Laplacian.
    """
    _check_affinity(a, b)
    return ((1.0 - a) / b) / K + ((1.0 - b) / a) * (K - 1) / K


def uniform_ase_condition(a: float, b: float) -> bool:
    """True when (a - b^2)/(ab) < 4/3, which forces psi > 0 for every K,
    i.e. the adjacency embedding is preferred uniformly in K."""
    _check_affinity(a, b)
    return (a - b * b) / (a * b) < 4.0 / 3.0


def snr(a: float, b: float, K: int) -> float:
    """Signal-to-noise ratio (a-b)^2 / (K (a + (K-1) b)) of the K-block
    homogeneous model; the closed-form factor c is a positive multiple of it."""
    _check_affinity(a, b)
    return (a - b) ** 2 / (K * (a + (K - 1) * b))


def snr_scale_factor(a: float, b: float, K: int) -> float:
    """The positive multiplier c / SNR = K / (4 (a+(K-1)b) (a(1-a)+b(1-b)))."""
    _, _, c = rho_star_homogeneousK(a, b, K)
    ratio = c / snr(a, b, K)
    if ratio <= 0.0:
        raise NonpositiveDenominator("c / SNR must be positive")
    return ratio


# --- two-by-two interpolated inverse lemma ----------------------------------

def inverse_convex_2x2(M0, M1, t: float) -> np.ndarray:
    """Inverse of (1-t) M0 + t M1 for invertible 2x2 matrices via

        [(1-t) M0^-1 + det(M1 M0^-1) t M1^-1]
        / [det(M1 M0^-1) t^2 + tr(M1 M0^-1) t(1-t) + (1-t)^2].

    A cross-check identity only: it does not generalize beyond 2x2 and the
    production path inverts interpolants directly.
    """
    M0 = np.asarray(M0, dtype=float)
    M1 = np.asarray(M1, dtype=float)
    if M0.shape != (2, 2) or M1.shape != (2, 2):
        raise ShapeMismatch("inverse_convex_2x2 requires 2x2 matrices")
    det0 = np.linalg.det(M0)
    det1 = np.linalg.det(M1)
    if abs(det0) < 1e-300 or abs(det1) < 1e-300:
        raise SingularInput("M0 and M1 must both be invertible")
    R = M1 @ np.linalg.inv(M0)
    det_r = np.linalg.det(R)
    tr_r = np.trace(R)
    denom = det_r * t * t + tr_r * t * (1.0 - t) + (1.0 - t) ** 2
    M_t = (1.0 - t) * M0 + t * M1
    if abs(np.linalg.det(M_t)) <= 1e-14 * max(np.abs(M_t).max() ** 2, 1e-300):
        raise SingularInterpolant(f"(1-t) M0 + t M1 is singular at t={t}")
    return ((1.0 - t) * np.linalg.inv(M0) + det_r * t * np.linalg.inv(M1)) / denom
