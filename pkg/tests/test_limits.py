"""Limiting Gaussian summaries of the two embeddings.

The homogeneous balanced affinity family admits exact expressions for all
the intermediate quantities (degree normalizer c1, variance sum c2, the
linear action of the second moment), which pin down the covariance
constructions to 1e-12; a random battery checks positive definiteness and
the agreement of vectorized expectations with direct summation.
"""

import numpy as np
import pytest

from rhostar.errors import (
    DegenerateDistribution,
    InnerProductOutOfRange,
    NonpositiveDegree,
)
from rhostar.limits import (
    DiscreteLatentDistribution,
    ase_covariance,
    ase_covariances,
    lse_covariance,
    lse_covariances,
    lse_latent_positions,
    mean_position,
    second_moment,
)
from rhostar.model import (
    Signature,
    cholesky_homogeneous,
    homogeneous_model,
    validate_model,
)

from test_model import _random_valid_model


def _one_point(p):
    return DiscreteLatentDistribution([[np.sqrt(p)]], [1.0], Signature(1, 0))


def _homogeneous_dist(K, a, b):
    config = cholesky_homogeneous(K, a, b)
    return DiscreteLatentDistribution(config.X, np.full(K, 1.0 / K), config.signature)


class TestSecondMoment:
    def test_single_point(self):
        np.testing.assert_allclose(second_moment(_one_point(1.0 - 1e-9)), [[1.0 - 1e-9]])

    def test_orthogonal_pair(self):
        dist = DiscreteLatentDistribution(
            [[1.0, 0.0], [0.0, 1.0]], [0.5, 0.5], Signature(2, 0)
        )
        np.testing.assert_allclose(second_moment(dist), 0.5 * np.eye(2), atol=1e-15)

    def test_homogeneous_whitening_identity(self):
        # the latent matrix satisfies X Delta^-1 X^T = K I
        for K in (2, 3, 6):
            dist = _homogeneous_dist(K, 0.8, 0.2)
            Delta = second_moment(dist)
            product = dist.points @ np.linalg.solve(Delta, dist.points.T)
            np.testing.assert_allclose(product, K * np.eye(K), atol=1e-9)

    def test_degenerate_rejected(self):
        dist = DiscreteLatentDistribution(
            [[0.5, 0.0], [0.25, 0.0]], [0.5, 0.5], Signature(2, 0)
        )
        with pytest.raises(DegenerateDistribution):
            second_moment(dist)


class TestAseCovariance:
    def test_one_block_closed_form(self):
        # Delta = p, g = p(1-p), Sigma = (1-p); p = 0.5 gives [0.5]
        for p in (0.5, 0.3, 0.9):
            summary = ase_covariance(_one_point(p), [np.sqrt(p)])
            np.testing.assert_allclose(summary.covariance, [[1.0 - p]], atol=1e-14)

    def test_homogeneous_decomposition_at_endpoint(self):
        # E[g(nu1, X) X X^T] = b(1-b) Delta + c0 nu1 nu1^T with
        # c0 = (a(1-a) - b(1-b))/K
        a, b, K = 0.8, 0.2, 2
        dist = _homogeneous_dist(K, a, b)
        nu1 = dist.points[0]
        Delta = second_moment(dist)
        c0 = (a * (1 - a) - b * (1 - b)) / K
        core = b * (1 - b) * Delta + c0 * np.outer(nu1, nu1)
        expected = np.linalg.solve(Delta, np.linalg.solve(Delta, core).T).T
        actual = ase_covariance(dist, nu1).covariance
        np.testing.assert_allclose(actual, expected, atol=1e-12)

    def test_inner_product_out_of_range(self):
        dist = _homogeneous_dist(2, 0.8, 0.2)
        with pytest.raises(InnerProductOutOfRange):
            ase_covariance(dist, 3.0 * dist.points[0])

    def test_mean_is_latent_position(self):
        dist = _homogeneous_dist(3, 0.7, 0.3)
        summary = ase_covariance(dist, dist.points[1])
        np.testing.assert_allclose(summary.mean, dist.points[1])


class TestLseLatentPositions:
    def test_one_block_self_normalizes(self):
        np.testing.assert_allclose(
            lse_latent_positions(_one_point(0.41)), [[1.0]], atol=1e-14
        )

    def test_homogeneous_scaling(self):
        # nu~_k = nu_k * sqrt(K / (a + (K-1) b))
        for K in (2, 4, 7):
            a, b = 0.6, 0.25
            dist = _homogeneous_dist(K, a, b)
            scale = np.sqrt(K / (a + (K - 1) * b))
            np.testing.assert_allclose(
                lse_latent_positions(dist), dist.points * scale, atol=1e-12
            )

    def test_nonpositive_degree_raises(self):
        # isotropic points under the indefinite metric: every expected
        # degree normalizer vanishes
        dist = DiscreteLatentDistribution(
            [[0.7, 0.7], [0.5, 0.5]], [0.5, 0.5], Signature(1, 1)
        )
        with pytest.raises(NonpositiveDegree):
            lse_latent_positions(dist)


class TestLseCovariance:
    def test_homogeneous_constants(self):
        a, b, K = 0.8, 0.2, 5
        dist = _homogeneous_dist(K, a, b)
        mu = mean_position(dist)
        x = dist.points[0]
        c1 = (a + (K - 1) * b) / K
        c2 = (a * (1 - a) + (K - 1) * b * (1 - b)) / K
        c3 = (a * (1 - a) - b * (1 - b)) / K
        assert abs(float(x @ mu) - c1) < 1e-12

        ips = dist.points @ x
        g = ips * (1 - ips)
        assert abs(float(g @ dist.weights) - c2) < 1e-12

        expected_gx = c3 * x + b * (1 - b) * mu
        actual_gx = (dist.points * (dist.weights * g)[:, None]).sum(axis=0)
        np.testing.assert_allclose(actual_gx, expected_gx, atol=1e-12)

        Delta = second_moment(dist)
        degs = dist.points @ mu
        Delta_tilde = (dist.points * (dist.weights / degs)[:, None]).T @ dist.points
        np.testing.assert_allclose(Delta_tilde, Delta / c1, atol=1e-12)

        # action of the second moment on a latent position
        np.testing.assert_allclose(
            Delta @ x, ((a - b) / K) * x + b * mu, atol=1e-12
        )
        assert abs(float(x @ (Delta @ x)) - (a * a + (K - 1) * b * b) / K) < 1e-12

    def test_mean_is_normalized_position(self):
        dist = _homogeneous_dist(3, 0.7, 0.2)
        summary = lse_covariance(dist, dist.points[2])
        np.testing.assert_allclose(
            summary.mean, lse_latent_positions(dist)[2], atol=1e-14
        )

    def test_appendix_form_equals_main_form_on_homogeneous(self):
        # modified display for positive definite geometry:
        # Sigma~(x) = E[(g/<x,mu>) (Dt^-1 X/<X,mu> - x/(2<x,mu>)) (...)^T]
        for K, a, b in ((2, 0.8, 0.2), (4, 0.55, 0.15)):
            dist = _homogeneous_dist(K, a, b)
            mu = mean_position(dist)
            degs = dist.points @ mu
            Delta_tilde = (
                dist.points * (dist.weights / degs)[:, None]
            ).T @ dist.points
            Dt_inv = np.linalg.inv(Delta_tilde)
            for idx in range(K):
                x = dist.points[idx]
                deg_x = float(x @ mu)
                ips = dist.points @ x
                g = ips * (1 - ips)
                vecs = (Dt_inv @ dist.points.T).T / degs[:, None] \
                    - x[None, :] / (2 * deg_x)
                core = (vecs * (dist.weights * g / deg_x)[:, None]).T @ vecs
                main = lse_covariance(dist, x).covariance
                np.testing.assert_allclose(core, main, atol=1e-12)


class TestRandomBattery:
    def test_positive_definite_covariances(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            K = int(rng.integers(2, 7))
            model = _random_valid_model(rng, K)
            dist = DiscreteLatentDistribution.from_model(model)
            for summary in ase_covariances(dist) + lse_covariances(dist):
                assert np.linalg.eigvalsh(summary.covariance).min() > 0.0

    def test_vectorized_expectation_equals_direct_sum(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            K = int(rng.integers(2, 7))
            model = _random_valid_model(rng, K)
            dist = DiscreteLatentDistribution.from_model(model)
            metric = dist.signature.metric_diagonal()
            x = dist.points[0]
            Delta_loop = sum(
                w * np.outer(v, v) for w, v in zip(dist.weights, dist.points)
            )
            np.testing.assert_allclose(second_moment(dist), Delta_loop, atol=1e-14)
            core_loop = np.zeros((dist.dimension, dist.dimension))
            for w, v in zip(dist.weights, dist.points):
                ip = float((metric * x) @ v)
                core_loop += w * ip * (1 - ip) * np.outer(v, v)
            Delta = second_moment(dist)
            expected = np.linalg.solve(Delta, np.linalg.solve(Delta, core_loop).T).T
            expected = metric[:, None] * expected * metric[None, :]
            np.testing.assert_allclose(
                ase_covariance(dist, x).covariance, expected, atol=1e-13
            )

    def test_batched_equals_per_point(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            K = int(rng.integers(2, 6))
            model = _random_valid_model(rng, K)
            dist = DiscreteLatentDistribution.from_model(model)
            batched_a = ase_covariances(dist)
            batched_l = lse_covariances(dist)
            for k in range(K):
                np.testing.assert_allclose(
                    batched_a[k].covariance,
                    ase_covariance(dist, dist.points[k]).covariance,
                    atol=1e-13,
                )
                np.testing.assert_allclose(
                    batched_l[k].covariance,
                    lse_covariance(dist, dist.points[k]).covariance,
                    atol=1e-13,
                )

    def test_signature_neutral_for_positive_definite(self):
        # a positive definite model computed through the generic metric
        # machinery equals the same computation with the plain inner product
        model = homogeneous_model(3, 0.7, 0.2)
        dist = DiscreteLatentDistribution.from_model(model)
        assert dist.signature.d_minus == 0
        np.testing.assert_allclose(
            dist.signature.metric_diagonal(), np.ones(dist.dimension)
        )
        gram = dist.points @ dist.points.T
        np.testing.assert_allclose(gram, model.B, atol=1e-10)
