"""Chernoff information, rho*, closed forms, and the 2x2 inverse lemma."""

import numpy as np
import pytest

from rhostar.chernoff import (
    PairObjective,
    Verdict,
    _rank1_parts,
    convex_combination_lhs,
    gaussian_chernoff,
    homogeneousK_psi,
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
    snr_scale_factor,
    uniform_ase_condition,
    verdict_from_rho,
)
from rhostar.errors import (
    DegenerateEqualRows,
    InvalidSampleSize,
    ParameterOrder,
    SingularInput,
    SingularInterpolant,
)
from rhostar.model import (
    homogeneous_model,
    rank_one_matrix,
    validate_model,
)


class TestGaussianChernoff:
    def test_identical_distributions_zero(self):
        mu = np.array([0.3, -1.0])
        S = np.array([[2.0, 0.3], [0.3, 1.0]])
        value, _ = gaussian_chernoff(mu, S, mu, S)
        assert abs(value) < 1e-12

    def test_shared_covariance_closed_form(self):
        # log-det term vanishes, t(1-t) is maximized at 1/2:
        # C = ||mu2 - mu1||^2_{S^-1} / 8
        rng = np.random.default_rng(2)
        for _ in range(10):
            mu1, mu2 = rng.normal(size=(2, 3))
            root = rng.normal(size=(3, 3))
            S = root @ root.T + 3.0 * np.eye(3)
            value, t_star = gaussian_chernoff(mu1, S, mu2, S)
            diff = mu2 - mu1
            expected = float(diff @ np.linalg.solve(S, diff)) / 8.0
            assert abs(value - expected) < 1e-10
            assert abs(t_star - 0.5) < 1e-6

    def test_grid_oracle_scalar(self):
        # brute-force oracle: dense grid over t with step 1e-6
        mu1, mu2 = np.array([0.0]), np.array([1.0])
        S1, S2 = np.array([[1.0]]), np.array([[4.0]])
        ts = np.arange(1e-6, 1.0, 1e-6)
        S_t = ts * 1.0 + (1 - ts) * 4.0
        objective = (
            0.5 * ts * (1 - ts) / S_t
            + 0.5 * (np.log(S_t) - ts * np.log(1.0) - (1 - ts) * np.log(4.0))
        )
        oracle = float(objective.max())
        value, _ = gaussian_chernoff(mu1, S1, mu2, S2)
        assert abs(value - oracle) < 1e-8


class TestPairObjective:
    def test_whitened_matches_direct_solve(self):
        rng = np.random.default_rng(9)
        for _ in range(25):
            d = int(rng.integers(1, 5))
            diff = rng.normal(size=d)
            r1, r2 = rng.normal(size=(2, d, d))
            S1 = r1 @ r1.T + d * np.eye(d)
            S2 = r2 @ r2.T + d * np.eye(d)
            pair = PairObjective(diff, S1, S2)
            for t in rng.uniform(0.01, 0.99, size=8):
                whitened = float(pair.quadratic_form(t))
                direct = pair.quadratic_form_direct(float(t))
                assert abs(whitened - direct) < 1e-10 * max(1.0, abs(direct))

    def test_scalar_paths_match_vector_paths(self):
        rng = np.random.default_rng(10)
        diff = rng.normal(size=3)
        r1, r2 = rng.normal(size=(2, 3, 3))
        S1 = r1 @ r1.T + 3 * np.eye(3)
        S2 = r2 @ r2.T + 3 * np.eye(3)
        pair = PairObjective(diff, S1, S2)
        for t in (0.1, 0.5, 0.93):
            assert abs(pair.scalar_limit(t) - float(pair(t))) < 1e-12
            assert abs(
                pair.scalar_chernoff(t, 7.0) - float(pair.chernoff_objective(t, 7.0))
            ) < 1e-12


class TestRhoStarNumeric:
    def test_homogeneous_spot_values(self):
        report = rho_star_numeric(homogeneous_model(2, 0.8, 0.2))
        assert abs(report.rho_star - 1.09) < 1e-8
        assert report.verdict is Verdict.ASE_PREFERRED
        assert report.minimizing_pair == (0, 1)

        report = rho_star_numeric(homogeneous_model(2, 0.3, 0.1))
        assert abs(report.rho_star - 0.8625) < 1e-8
        assert report.verdict is Verdict.LSE_PREFERRED

    def test_restricted_equality_point(self):
        report = rho_star_numeric(validate_model([[0.5, 0.5 - 1e-7], [0.5 - 1e-7, 0.5]],
                                                 [0.5, 0.5]))
        # near a = 1/2 on the b = 1 - a slice rho* approaches 1
        assert abs(report.rho_star - 1.0) < 1e-6

    def test_ratio_consistency(self):
        report = rho_star_numeric(homogeneous_model(3, 0.6, 0.2))
        assert abs(report.rho_star - report.rho_ase_star / report.rho_lse_star) < 1e-12

    def test_t_star_half_for_homogeneous(self):
        report = rho_star_numeric(homogeneous_model(4, 0.7, 0.3))
        assert abs(report.t_star_ase - 0.5) < 1e-6
        assert abs(report.t_star_lse - 0.5) < 1e-6

    def test_pair_suprema_identical_across_pairs(self):
        from rhostar.chernoff import _summaries, maximize_over_t
        from itertools import combinations

        s = _summaries(homogeneous_model(4, 0.62, 0.17))
        sups = []
        for k, l in combinations(range(4), 2):
            pair = PairObjective(s.means_ase[k] - s.means_ase[l],
                                 s.covs_ase[k], s.covs_ase[l])
            sups.append(maximize_over_t(pair, pair.scalar_limit)[0])
        assert max(sups) - min(sups) < 1e-10

    def test_near_degenerate_warning(self):
        eps = 1e-7
        report = rho_star_numeric(
            validate_model([[0.5 + eps, 0.5], [0.5, 0.5 + eps]], [0.5, 0.5])
        )
        assert report.warnings

    def test_report_serializes(self):
        import json

        report = rho_star_numeric(homogeneous_model(2, 0.8, 0.2))
        payload = json.loads(json.dumps(report.to_dict()))
        assert payload["verdict"] == "ASE_PREFERRED"


class TestRhoFiniteN:
    def test_invalid_sample_size(self):
        model = homogeneous_model(2, 0.8, 0.2)
        with pytest.raises(InvalidSampleSize):
            rho_finite_n(model, 0)

    def test_ratio_converges_monotonically_in_trend(self):
        model = homogeneous_model(2, 0.8, 0.2)
        limit = 1.09
        gaps = []
        for n in (100, 1000, 10_000, 100_000):
            rho_a, rho_l = rho_finite_n(model, n)
            gaps.append(abs(rho_a / rho_l - limit))
        assert all(g2 < g1 for g1, g2 in zip(gaps, gaps[1:]))
        assert gaps[-1] < 1e-3

    def test_large_n_matches_closed_form(self):
        rho_a, rho_l = rho_finite_n(homogeneous_model(2, 0.8, 0.2), 10**6)
        assert abs(rho_a / rho_l - 1.09) < 1e-4


class TestHomogeneousTwoBlocks:
    def test_spot_values(self):
        rho, psi, c = rho_star_homogeneous2(0.8, 0.2)
        assert abs(psi - 0.32) < 1e-12
        assert abs(c - 0.28125) < 1e-12
        assert abs(rho - 1.09) < 1e-12

        rho, psi, _ = rho_star_homogeneous2(0.3, 0.1)
        assert abs(psi + 0.66) < 1e-12
        assert abs(rho - 0.8625) < 1e-12
        assert verdict_from_rho(rho) is Verdict.LSE_PREFERRED

    def test_spectral_radius_above_one_implies_ase(self):
        # lambda_max = a + b > 1 forces adjacency preference
        for a, b in ((0.9, 0.3), (0.7, 0.5), (0.99, 0.02)):
            if a + b > 1:
                rho, _, _ = rho_star_homogeneous2(a, b)
                assert rho > 1.0

    def test_degenerate_diagonal(self):
        with pytest.raises(DegenerateEqualRows):
            rho_star_homogeneous2(0.4, 0.4)

    def test_symmetry_in_arguments(self):
        # the expression is symmetric under swapping a and b
        rho_ab = rho_star_homogeneous2(0.7, 0.25)[0]
        rho_ba = rho_star_homogeneous2(0.25, 0.7)[0]
        assert abs(rho_ab - rho_ba) < 1e-15


class TestRestrictedSlice:
    def test_values(self):
        assert abs(rho_star_restricted_b_equals_1_minus_a(0.9) - 1.16) < 1e-12
        assert abs(rho_star_restricted_b_equals_1_minus_a(0.1) - 1.16) < 1e-12

    def test_always_at_least_one(self):
        for a in np.linspace(0.01, 0.99, 40):
            if a == 0.5:
                continue
            assert rho_star_restricted_b_equals_1_minus_a(float(a)) >= 1.0

    def test_degenerate_midpoint(self):
        with pytest.raises(DegenerateEqualRows):
            rho_star_restricted_b_equals_1_minus_a(0.5)


class TestRankOne:
    def test_matches_numeric(self):
        value = rho_star_rank1(0.6, 0.3, 0.5)
        numeric = rho_star_numeric(
            validate_model(rank_one_matrix(0.6, 0.3), [0.5, 0.5])
        ).rho_star
        assert abs(value - numeric) < 1e-8

    def test_balanced_swap_symmetry(self):
        rng = np.random.default_rng(14)
        for _ in range(30):
            p, q = rng.uniform(0.05, 0.95, size=2)
            if abs(p - q) < 1e-3:
                continue
            assert abs(
                rho_star_rank1(float(p), float(q), 0.5)
                - rho_star_rank1(float(q), float(p), 0.5)
            ) < 1e-12

    def test_parts_reproduce_ratio(self):
        parts = _rank1_parts(0.55, 0.2, 0.3)
        assert abs(
            parts["sup_ase"] / parts["sup_lse"] - rho_star_rank1(0.55, 0.2, 0.3)
        ) < 1e-12

    def test_degenerate_equal_rates(self):
        with pytest.raises(DegenerateEqualRows):
            rho_star_rank1(0.4, 0.4, 0.5)


class TestHomogeneousK:
    def test_reduces_to_two_block_at_K2(self):
        for a in np.arange(0.1, 0.96, 0.05):
            for b in np.arange(0.05, a - 0.01, 0.05):
                rho_k, psi_k, c_k = rho_star_homogeneousK(float(a), float(b), 2)
                rho_2, psi_2, c_2 = rho_star_homogeneous2(float(a), float(b))
                assert rho_k == pytest.approx(rho_2, abs=1e-15)
                assert psi_k == pytest.approx(psi_2, abs=1e-15)
                assert c_k == pytest.approx(c_2, abs=1e-15)

    def test_spot_value_K3(self):
        rho, psi, c = rho_star_homogeneousK(0.8, 0.2, 3)
        assert abs(psi - 0.48) < 1e-12
        assert abs(c - 0.1953125) < 1e-12
        assert abs(rho - 1.09375) < 1e-12

    def test_one_over_K_scaling(self):
        values = np.array(
            [K * (rho_star_homogeneousK(0.8, 0.2, K)[0] - 1) for K in range(2, 101)]
        )
        assert np.all(values > 0)
        assert values.max() / values.min() < 10

    def test_parameter_order(self):
        with pytest.raises(ParameterOrder):
            rho_star_homogeneousK(0.2, 0.8, 3)


class TestKBlockEndpoints:
    def test_ase_supremum_values(self):
        assert abs(kblock_ase_supremum(0.8, 0.2, 2) - 0.5625) < 1e-12
        assert abs(kblock_ase_supremum(0.8, 0.2, 4) - 0.28125) < 1e-12

    def test_lse_supremum_ratio_identity(self):
        for K in (2, 3, 5, 10):
            for a, b in ((0.8, 0.2), (0.5, 0.1), (0.9, 0.6)):
                ratio = kblock_ase_supremum(a, b, K) / kblock_lse_supremum(a, b, K)
                assert abs(ratio - rho_star_homogeneousK(a, b, K)[0]) < 1e-10

    def test_matches_numeric_with_half_t(self):
        report = rho_star_numeric(homogeneous_model(3, 0.8, 0.2))
        assert abs(report.rho_ase_star - kblock_ase_supremum(0.8, 0.2, 3)) < 1e-8
        assert abs(report.rho_lse_star - kblock_lse_supremum(0.8, 0.2, 3)) < 1e-8
        assert abs(report.t_star_ase - 0.5) < 1e-6
        assert abs(report.t_star_lse - 0.5) < 1e-6


class TestThresholds:
    def test_convex_combination_values(self):
        # (1-a)/(bK) + (1-b)(K-1)/(aK); below 4/3 means psi > 0
        lhs = convex_combination_lhs(0.8, 0.2, 2)
        assert abs(lhs - 1.0) < 1e-12
        assert lhs < 4.0 / 3.0 and homogeneousK_psi(0.8, 0.2, 2) > 0

        lhs = convex_combination_lhs(0.3, 0.1, 2)
        assert abs(lhs - 5.0) < 1e-12
        assert lhs > 4.0 / 3.0 and homogeneousK_psi(0.3, 0.1, 2) < 0

    def test_level_set_identity(self):
        from scipy.optimize import brentq

        for a, K in ((0.5, 2), (0.7, 3), (0.9, 5)):
            f = lambda b: homogeneousK_psi(a, b, K)
            if f(1e-9) * f(a - 1e-9) < 0:
                b_root = brentq(f, 1e-9, a - 1e-9, xtol=1e-15)
                assert abs(convex_combination_lhs(a, b_root, K) - 4.0 / 3.0) < 1e-9

    def test_uniform_condition(self):
        assert uniform_ase_condition(0.8, 0.6)
        assert not uniform_ase_condition(0.8, 0.1)
        for K in range(2, 101):
            assert rho_star_homogeneousK(0.8, 0.6, K)[0] > 1.0

    def test_snr(self):
        assert abs(snr(0.8, 0.2, 2) - 0.18) < 1e-12
        # eigenvalue form at K = 2: lambda_min^2 / (K lambda_max)
        a, b = 0.8, 0.2
        assert abs(snr(a, b, 2) - (a - b) ** 2 / (2 * (a + b))) < 1e-15
        for K in (2, 3, 5, 10):
            for aa in np.arange(0.1, 0.96, 0.05):
                for bb in np.arange(0.05, aa - 0.01, 0.05):
                    assert snr_scale_factor(float(aa), float(bb), K) > 0


class TestInverseLemma:
    def test_identity_pair(self):
        for t in (0.0, 0.3, 1.0):
            np.testing.assert_allclose(
                inverse_convex_2x2(np.eye(2), np.eye(2), t), np.eye(2), atol=1e-14
            )

    def test_scaled_identity(self):
        np.testing.assert_allclose(
            inverse_convex_2x2(np.eye(2), 2 * np.eye(2), 0.5),
            (2.0 / 3.0) * np.eye(2),
            atol=1e-14,
        )

    def test_random_battery(self):
        rng = np.random.default_rng(77)
        checked = 0
        while checked < 1000:
            M0, M1 = rng.uniform(-2, 2, size=(2, 2, 2))
            t = float(rng.uniform(0, 1))
            M_t = (1 - t) * M0 + t * M1
            if min(abs(np.linalg.det(M0)), abs(np.linalg.det(M1)),
                   abs(np.linalg.det(M_t))) < 0.05:
                continue
            np.testing.assert_allclose(
                inverse_convex_2x2(M0, M1, t), np.linalg.inv(M_t), atol=1e-10
            )
            checked += 1

    def test_singular_inputs_rejected(self):
        with pytest.raises(SingularInput):
            inverse_convex_2x2(np.zeros((2, 2)), np.eye(2), 0.5)

    def test_singular_interpolant_rejected(self):
        M0 = np.eye(2)
        M1 = -np.eye(2)
        with pytest.raises(SingularInterpolant):
            inverse_convex_2x2(M0, M1, 0.5)

    def test_half_point_reduction(self):
        # det(M1 M0^-1) = 1 and tr != -2: M_1/2^-1 reduces to the scaled
        # sum of the inverses
        rng = np.random.default_rng(78)
        done = 0
        while done < 200:
            M0, M1 = rng.uniform(-2, 2, size=(2, 2, 2))
            d0, d1 = np.linalg.det(M0), np.linalg.det(M1)
            if abs(d0) < 0.05 or d1 / d0 <= 0.01:
                continue
            M1 = M1 / np.sqrt(d1 / d0)
            tr = float(np.trace(M1 @ np.linalg.inv(M0)))
            if abs(tr + 2.0) < 0.1 or abs(np.linalg.det(0.5 * (M0 + M1))) < 0.05:
                continue
            expected = (2.0 / (2.0 + tr)) * (np.linalg.inv(M0) + np.linalg.inv(M1))
            np.testing.assert_allclose(
                inverse_convex_2x2(M0, M1, 0.5), expected, atol=1e-10
            )
            done += 1


class TestVerdicts:
    def test_equality_band(self):
        assert verdict_from_rho(1.0) is Verdict.EQUAL
        assert verdict_from_rho(1.0 + 5e-10) is Verdict.EQUAL
        assert verdict_from_rho(1.0 + 5e-9) is Verdict.ASE_PREFERRED
        assert verdict_from_rho(1.0 - 5e-9) is Verdict.LSE_PREFERRED
