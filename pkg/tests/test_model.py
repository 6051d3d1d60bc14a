"""Block model validation, geometry classification, factorizations."""

import numpy as np
import pytest

from rhostar.errors import (
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
from rhostar.model import (
    GeometryClass,
    Signature,
    cholesky_homogeneous,
    classify_geometry,
    factorize_canonical_2block,
    factorize_spectral,
    homogeneous_matrix,
    rank_one_matrix,
    validate_model,
)


def _random_valid_model(rng, K):
    """Rejection-sample a valid block model with K blocks."""
    while True:
        root = rng.uniform(0.1, 0.9, size=(K, K))
        B = np.round(0.5 * (root + root.T), 6)
        Pi = rng.dirichlet(np.full(K, 5.0))
        Pi = Pi / Pi.sum()
        try:
            return validate_model(B, Pi)
        except (DuplicateRows, InvalidSimplex):
            continue


class TestValidateModel:
    def test_accepts_assortative_two_block(self):
        model = validate_model([[0.8, 0.2], [0.2, 0.8]], [0.5, 0.5])
        assert model.K == 2
        np.testing.assert_allclose(model.B, [[0.8, 0.2], [0.2, 0.8]])

    def test_rejects_constant_matrix_as_duplicate_rows(self):
        with pytest.raises(DuplicateRows):
            validate_model([[0.5, 0.5], [0.5, 0.5]], [0.5, 0.5])

    def test_rejects_simplex_violation(self):
        with pytest.raises(InvalidSimplex):
            validate_model([[0.8, 0.2], [0.2, 0.8]], [0.7, 0.4])

    def test_rejects_asymmetry(self):
        with pytest.raises(NotSymmetric):
            validate_model([[0.8, 0.2], [0.3, 0.8]], [0.5, 0.5])

    def test_rejects_boundary_entries(self):
        with pytest.raises(EntryOutOfRange):
            validate_model([[1.0, 0.2], [0.2, 0.8]], [0.5, 0.5])
        with pytest.raises(EntryOutOfRange):
            validate_model([[0.8, 0.0], [0.0, 0.7]], [0.5, 0.5])

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            validate_model([[0.8, 0.2]], [0.5, 0.5])
        with pytest.raises(ShapeMismatch):
            validate_model([[0.8, 0.2], [0.2, 0.8]], [1.0])

    def test_rejects_zero_weight(self):
        with pytest.raises(InvalidSimplex):
            validate_model([[0.8, 0.2], [0.2, 0.8]], [1.0, 0.0])

    def test_model_arrays_immutable(self):
        model = validate_model([[0.8, 0.2], [0.2, 0.8]], [0.5, 0.5])
        with pytest.raises(ValueError):
            model.B[0, 0] = 0.1


class TestClassifyGeometry:
    def test_rank_one(self):
        model = validate_model([[0.04, 0.06], [0.06, 0.09]], [0.5, 0.5])
        assert classify_geometry(model) is GeometryClass.RANK_ONE

    def test_positive_definite(self):
        model = validate_model([[0.8, 0.2], [0.2, 0.8]], [0.5, 0.5])
        assert classify_geometry(model) is GeometryClass.POSITIVE_DEFINITE

    def test_indefinite(self):
        model = validate_model([[0.2, 0.8], [0.8, 0.2]], [0.5, 0.5])
        assert classify_geometry(model) is GeometryClass.INDEFINITE


class TestFactorizeSpectral:
    def test_positive_definite_reconstruction(self):
        model = validate_model([[0.8, 0.2], [0.2, 0.8]], [0.5, 0.5])
        config = factorize_spectral(model)
        assert config.signature == Signature(2, 0)
        np.testing.assert_allclose(config.gram(), model.B, atol=1e-12)

    def test_indefinite_reconstruction(self):
        model = validate_model([[0.2, 0.8], [0.8, 0.2]], [0.5, 0.5])
        config = factorize_spectral(model)
        assert config.signature == Signature(1, 1)
        np.testing.assert_allclose(config.gram(), model.B, atol=1e-12)

    def test_rank_one_single_column(self):
        model = validate_model([[0.04, 0.06], [0.06, 0.09]], [0.5, 0.5])
        config = factorize_spectral(model)
        assert config.signature == Signature(1, 0)
        assert config.X.shape == (2, 1)
        np.testing.assert_allclose(config.gram(), model.B, atol=1e-12)

    def test_ambiguous_rank_raises(self):
        # eigenvalues 2c and 2e with e inside the ambiguity band of the
        # relative tolerance 1e-9 * lambda_max
        c, e = 0.25, 3e-10
        model = validate_model([[c + e, c - e], [c - e, c + e]], [0.5, 0.5])
        with pytest.raises(RankDeficiencyAmbiguous):
            factorize_spectral(model)

    def test_random_battery_reconstruction_and_signature(self):
        rng = np.random.default_rng(42)
        for _ in range(40):
            K = int(rng.integers(2, 7))
            model = _random_valid_model(rng, K)
            config = factorize_spectral(model)
            np.testing.assert_allclose(config.gram(), model.B, atol=1e-10)
            geometry = classify_geometry(model)
            if geometry is GeometryClass.POSITIVE_DEFINITE:
                assert config.signature == Signature(K, 0)
            assert config.signature.d_plus >= 1

    def test_column_order_by_magnitude_within_groups(self):
        rng = np.random.default_rng(7)
        model = _random_valid_model(rng, 5)
        config = factorize_spectral(model)
        norms = np.linalg.norm(config.X, axis=0) ** 2  # |eigenvalue| per column
        dp = config.signature.d_plus
        assert np.all(np.diff(norms[:dp]) <= 1e-12)
        assert np.all(np.diff(norms[dp:]) <= 1e-12)


class TestCanonicalTwoBlock:
    def test_positive_definite_values(self):
        model = validate_model([[0.8, 0.2], [0.2, 0.8]], [0.5, 0.5])
        config = factorize_canonical_2block(model)
        expected = np.array([[0.894427190999916, 0.0],
                             [0.223606797749979, 0.866025403784439]])
        np.testing.assert_allclose(config.X, expected, atol=1e-12)
        assert config.signature == Signature(2, 0)
        np.testing.assert_allclose(config.gram(), model.B, atol=1e-12)

    def test_indefinite_values(self):
        # X = [[sqrt(a), 0], [b/sqrt(a), sqrt(b^2 - ac)/sqrt(a)]]; for
        # a = c = 0.2, b = 0.8 the corner entry is sqrt(0.6/0.2) = sqrt(3)
        model = validate_model([[0.2, 0.8], [0.8, 0.2]], [0.5, 0.5])
        config = factorize_canonical_2block(model)
        expected = np.array([[0.447213595499958, 0.0],
                             [1.788854381999832, np.sqrt(3.0)]])
        np.testing.assert_allclose(config.X, expected, atol=1e-12)
        assert config.signature == Signature(1, 1)
        np.testing.assert_allclose(config.gram(), model.B, atol=1e-12)

    def test_rank_one_rejected(self):
        model = validate_model([[0.04, 0.06], [0.06, 0.09]], [0.5, 0.5])
        with pytest.raises(RankOneInput):
            factorize_canonical_2block(model)

    def test_fully_degenerate_rejected_upstream(self):
        # a = b = c never reaches the factorization: the rows coincide
        with pytest.raises(DuplicateRows):
            validate_model([[0.25, 0.25], [0.25, 0.25]], [0.5, 0.5])

    def test_three_block_rejected(self):
        model = validate_model(homogeneous_matrix(3, 0.7, 0.3), np.full(3, 1 / 3))
        with pytest.raises(NotTwoBlock):
            factorize_canonical_2block(model)

    def test_gram_matches_spectral_factorization(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            a, c = rng.uniform(0.3, 0.9, 2)
            b = rng.uniform(0.05, min(np.sqrt(a * c) - 0.02, 0.9))
            model = validate_model([[a, b], [b, c]], [0.5, 0.5])
            canonical = factorize_canonical_2block(model)
            spectral = factorize_spectral(model)
            np.testing.assert_allclose(canonical.gram(), spectral.gram(), atol=1e-10)


class TestCholeskyHomogeneous:
    def test_two_block_entries(self):
        config = cholesky_homogeneous(2, 0.8, 0.2)
        expected = np.array([[0.894427190999916, 0.0],
                             [0.223606797749979, 0.866025403784439]])
        np.testing.assert_allclose(config.X, expected, atol=1e-12)

    def test_three_block_third_row(self):
        config = cholesky_homogeneous(3, 0.8, 0.2)
        # b/sqrt(a), sqrt((a-b)(a+b)/a) * b/(a+b), sqrt((a-b)(a+2b)/(a+b))
        expected_row = np.array([0.223606797749979, 0.173205080756888,
                                 0.848528137423857])
        np.testing.assert_allclose(config.X[2], expected_row, atol=1e-12)

    def test_matches_library_cholesky(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            K = int(rng.integers(2, 9))
            b = rng.uniform(0.05, 0.6)
            a = rng.uniform(b + 0.05, 0.95)
            config = cholesky_homogeneous(K, a, b)
            np.testing.assert_allclose(
                config.X, np.linalg.cholesky(homogeneous_matrix(K, a, b)), atol=1e-12
            )

    def test_row_geometry_up_to_K_50(self):
        for K in (2, 5, 17, 50):
            config = cholesky_homogeneous(K, 0.73, 0.21)
            gram = config.X @ config.X.T
            np.testing.assert_allclose(np.diag(gram), 0.73, atol=1e-12)
            off = gram[~np.eye(K, dtype=bool)]
            np.testing.assert_allclose(off, 0.21, atol=1e-12)

    def test_parameter_order_enforced(self):
        with pytest.raises(ParameterOrder):
            cholesky_homogeneous(4, 0.5, 0.5)
        with pytest.raises(ParameterOrder):
            cholesky_homogeneous(4, 0.2, 0.6)

    def test_lower_triangular_positive_diagonal(self):
        config = cholesky_homogeneous(6, 0.8, 0.3)
        X = config.X
        assert np.allclose(X, np.tril(X))
        assert np.all(np.diag(X) > 0)


def test_rank_one_matrix_builder():
    B = rank_one_matrix(0.2, 0.3)
    np.testing.assert_allclose(B, [[0.04, 0.06], [0.06, 0.09]], atol=1e-15)
    assert abs(np.linalg.det(B)) < 1e-15
