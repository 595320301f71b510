"""
Tests for the BePre transform construction and its verification report.
"""
import numpy as np
import pytest
from scipy.linalg import svdvals

from src.link_model.channel import channel_matrix
from src.schemes.base import DimensionMismatchError, NonFiniteInputError, SchemeError
from src.schemes.bepre import (
    VerificationReport,
    bepre_transforms,
    build_circulant,
    numerical_rank,
    svd,
    verify_transforms,
)
from src.schemes.oam_transform import circulant_residual, diag_of_conjugated, idft_matrix

pytestmark = [pytest.mark.unit, pytest.mark.schemes]


def random_complex(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def test_svd_of_identity():
    """Test unit singular values of I."""
    factors = svd(np.eye(4))

    np.testing.assert_allclose(factors.singular_values, np.ones(4))


def test_svd_of_diagonal():
    """Test descending singular values of diag(1, 3, 2)."""
    factors = svd(np.diag([1.0, 3.0, 2.0]))

    np.testing.assert_allclose(factors.singular_values, [3.0, 2.0, 1.0], rtol=1e-15)


def test_svd_reconstruction(rng):
    """Test unitary factors and H = S V U* for a random matrix."""
    matrix = random_complex(rng, 8)

    factors = svd(matrix)

    assert np.linalg.norm(factors.reconstruct() - matrix) / np.linalg.norm(matrix) <= 1e-12
    for unitary in (factors.left, factors.right):
        assert np.linalg.norm(unitary.conj().T @ unitary - np.eye(8)) <= 1e-12
    assert np.all(np.diff(factors.singular_values) <= 0)
    assert np.all(factors.singular_values >= 0)


def test_svd_input_validation():
    """Test non-square and non-finite inputs."""
    with pytest.raises(DimensionMismatchError):
        svd(np.ones((2, 3)))
    with pytest.raises(NonFiniteInputError):
        svd(np.array([[1.0, np.nan], [0.0, 1.0]]))


def test_svd_accepts_channel_matrix(evaluation_geometry):
    """Test SVD of a ChannelMatrix against scipy singular values."""
    channel = channel_matrix(evaluation_geometry)

    np.testing.assert_allclose(svd(channel).singular_values, svdvals(channel.entries), rtol=1e-12)


@pytest.mark.parametrize("values,expected", [
    ([3.0, 2.0, 0.0, 0.0], 2),
    ([1.0, 1e-17], 1),
    ([0.0, 0.0], 0),
    ([1.0, 0.5, 0.25], 3),
])
def test_numerical_rank(values, expected):
    """Test counting against the N * eps * gamma_max tolerance."""
    assert numerical_rank(np.array(values)) == expected


def test_build_circulant_examples():
    """Test all-ones gains and the scalar case."""
    np.testing.assert_allclose(build_circulant(np.ones(6)), np.eye(6), atol=1e-14)
    np.testing.assert_allclose(build_circulant(np.array([2.5])), [[2.5]])


def test_build_circulant_validation():
    """Test negative and non-finite singular values."""
    with pytest.raises(SchemeError):
        build_circulant(np.array([1.0, -0.5]))
    with pytest.raises(NonFiniteInputError):
        build_circulant(np.array([1.0, np.inf]))


def test_build_circulant_structure(rng):
    """Test circulant structure and the first-column closed form."""
    values = np.sort(rng.uniform(0.1, 2.0, 8))[::-1]
    w = idft_matrix(8)

    circ = build_circulant(values)

    assert circulant_residual(circ) <= 1e-12
    np.testing.assert_allclose(circ[:, 0], w @ values / np.sqrt(8), atol=1e-14)
    np.testing.assert_allclose(circ[0], (w @ values / np.sqrt(8)).conj(), atol=1e-14)


def test_bepre_of_identity():
    """Test that H = I gives unit gains and an identity equivalent channel."""
    transforms = bepre_transforms(np.eye(4))

    np.testing.assert_allclose(transforms.lambdas, np.ones(4))
    np.testing.assert_allclose(
        transforms.predetect @ transforms.beamform, np.eye(4), atol=1e-14
    )
    assert transforms.numerical_rank == 4


def test_bepre_rejects_non_square():
    """Test the N = M requirement."""
    with pytest.raises(DimensionMismatchError) as excinfo:
        bepre_transforms(np.ones((4, 8), dtype=complex))

    assert "N = M" in str(excinfo.value)


def test_bepre_on_aligned_circulant(aligned_geometry):
    """Test that a circulant channel keeps its DFT-domain gain magnitudes."""
    channel = channel_matrix(aligned_geometry)
    transforms = bepre_transforms(channel)
    diagonal, off_diagonal = diag_of_conjugated(channel.entries)

    assert off_diagonal <= 1e-10
    np.testing.assert_allclose(
        transforms.lambdas, np.sort(np.abs(diagonal))[::-1], rtol=1e-10
    )
    assert verify_transforms(channel, transforms).equivalence_residual <= 1e-10


def test_bepre_on_evaluation_geometry(evaluation_geometry):
    """Test the full report on the off-axis N = 8 link."""
    channel = channel_matrix(evaluation_geometry)
    transforms = bepre_transforms(channel)

    report = verify_transforms(channel, transforms)

    assert report.equivalence_residual <= 1e-10
    assert max(report.unitarity_residuals.values()) <= 1e-12
    assert set(report.unitarity_residuals) == {"beamform", "predetect", "noise_whitening"}
    assert report.circulant_residual <= 1e-10
    assert report.first_column_residual <= 1e-10
    assert report.diagonal_residual <= 1e-10
    assert report.numerical_rank == 8
    assert report.model_dump(by_alias=True)["lambda"] == [float(v) for v in transforms.lambdas]


def test_report_accepts_alias():
    """Test populating the gains by their alias."""
    report = VerificationReport(
        equivalence_residual=0.0,
        unitarity_residuals={},
        circulant_residual=0.0,
        first_column_residual=0.0,
        diagonal_residual=0.0,
        **{"lambda": [1.0]},
        numerical_rank=1,
    )

    assert report.lambdas == [1.0]


def test_noise_statistics_preserved(evaluation_geometry):
    """Test (W* Pr)(W* Pr)* = I, so white noise stays white after decomposition."""
    transforms = bepre_transforms(channel_matrix(evaluation_geometry))
    whitening = idft_matrix(8).conj().T @ transforms.predetect

    assert np.linalg.norm(whitening @ whitening.conj().T - np.eye(8)) <= 1e-12


@pytest.mark.slow
def test_equivalence_suite(random_geometry):
    """Test every BePre identity on 500 random misaligned geometries."""
    for _ in range(500):
        geom = random_geometry()
        channel = channel_matrix(geom)
        transforms = bepre_transforms(channel)
        report = verify_transforms(channel, transforms)
        singular_values = svdvals(channel.entries)

        assert report.equivalence_residual <= 1e-10
        assert max(report.unitarity_residuals.values()) <= 1e-12
        assert report.circulant_residual <= 1e-10
        assert np.abs(transforms.lambdas - singular_values).max() <= 1e-10 * singular_values.max()


def test_random_matrix_identities(rng):
    """Test the identities on a generic complex matrix, independent of geometry."""
    matrix = random_complex(rng, 6)
    transforms = bepre_transforms(matrix)

    equivalent = transforms.predetect @ matrix @ transforms.beamform

    assert np.linalg.norm(equivalent - transforms.circulant) / np.linalg.norm(transforms.circulant) <= 1e-12
    diagonal, off_diagonal = diag_of_conjugated(equivalent)
    assert off_diagonal <= 1e-12
    np.testing.assert_allclose(diagonal.real, transforms.lambdas, atol=1e-12 * transforms.lambdas.max())
