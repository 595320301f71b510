"""
Tests for the free-space channel matrix.
"""
import numpy as np
import pytest

from src.link_model.channel import ChannelMatrix, channel_gain, channel_matrix
from src.link_model.exceptions import DegenerateGeometryError, IndexOutOfRangeError
from src.link_model.geometry import distance_matrix
from src.link_model.schemas import LinkGeometry

pytestmark = [pytest.mark.unit, pytest.mark.link_model]


def test_gain_at_one_wavelength():
    """Test |h| = 1/(4 pi) with zero phase when d_mn equals the wavelength."""
    geom = LinkGeometry.square(1, distance=0.01, radius_tx=0.04, radius_rx=0.04)

    gain = channel_gain(geom, 1, 1)

    assert gain.real == pytest.approx(1.0 / (4.0 * np.pi), rel=1e-12)
    assert abs(gain.imag) < 1e-12


def test_gain_at_half_wavelength():
    """Test h = -1/(2 pi) when d_mn is half a wavelength."""
    geom = LinkGeometry.square(1, distance=0.005, radius_tx=0.04, radius_rx=0.04)

    gain = channel_gain(geom, 1, 1)

    assert gain.real == pytest.approx(-1.0 / (2.0 * np.pi), rel=1e-12)
    assert abs(gain.imag) < 1e-12


def test_gain_scales_with_beta():
    """Test that the antenna constant multiplies every entry."""
    base = LinkGeometry.square(4, phi=0.2)
    scaled = base.with_updates(beta=2.0 - 1.0j)

    np.testing.assert_allclose(
        channel_matrix(scaled).entries, (2.0 - 1.0j) * channel_matrix(base).entries, rtol=1e-14
    )


def test_single_element_matrix():
    """Test that N = M = 1 gives the 1x1 matrix of the single gain."""
    geom = LinkGeometry.square(1, phi=0.3)

    channel = channel_matrix(geom)

    assert channel.shape == (1, 1)
    assert channel.entries[0, 0] == channel_gain(geom, 1, 1)


def test_matrix_matches_entrywise_gains(evaluation_geometry):
    """Test entry (m, n) against channel_gain(m, n)."""
    channel = channel_matrix(evaluation_geometry)

    for m in range(1, 9):
        for n in range(1, 9):
            assert channel.entries[m - 1, n - 1] == pytest.approx(
                channel_gain(evaluation_geometry, m, n), rel=1e-14
            )


def test_matrix_matches_direct_gain_law(random_geometry):
    """Test entries against beta lambda exp(-j k d_mn) / (4 pi d_mn) evaluated directly."""
    geom = random_geometry(n_elements=8, beta=0.5 + 0.25j)
    distances = distance_matrix(geom)

    expected = geom.beta * geom.wavelength * np.exp(-2j * np.pi * distances / geom.wavelength) / (
        4.0 * np.pi * distances
    )

    np.testing.assert_allclose(channel_matrix(geom).entries, expected, rtol=1e-9)


def test_magnitude_law(random_geometry):
    """Test |h_mn| 4 pi d_mn / (|beta| lambda) = 1 for every entry."""
    for _ in range(20):
        geom = random_geometry()
        ratio = (
            np.abs(channel_matrix(geom).entries) * 4.0 * np.pi * distance_matrix(geom)
            / (abs(geom.beta) * geom.wavelength)
        )
        np.testing.assert_allclose(ratio, 1.0, rtol=0, atol=1e-13)


def test_aligned_channel_is_circulant(aligned_geometry):
    """Test H[m][n] = H[m+1][n+1] cyclically for the aligned link."""
    entries = channel_matrix(aligned_geometry).entries
    shifted = np.roll(np.roll(entries, -1, axis=0), -1, axis=1)

    assert np.abs(entries - shifted).max() <= 1e-13 * np.abs(entries).max()


def test_misaligned_channel_is_not_circulant(evaluation_geometry):
    """Test that an off-axis receiver breaks the circulant structure."""
    entries = channel_matrix(evaluation_geometry).entries
    shifted = np.roll(np.roll(entries, -1, axis=0), -1, axis=1)

    assert np.abs(entries - shifted).max() > 1e-3 * np.abs(entries).max()


def test_channel_is_deterministic(evaluation_geometry):
    """Test bit-identical matrices from repeated builds."""
    np.testing.assert_array_equal(
        channel_matrix(evaluation_geometry).entries, channel_matrix(evaluation_geometry).entries
    )


def test_non_square_channel():
    """Test an M x N channel with different element counts."""
    geom = LinkGeometry(n_tx=8, n_rx=4, phi=0.1)

    channel = channel_matrix(geom)

    assert channel.shape == (4, 8)
    assert channel.entries[3, 7] == pytest.approx(channel_gain(geom, 4, 8), rel=1e-14)
    with pytest.raises(IndexOutOfRangeError):
        channel_gain(geom, 5, 1)


def test_degenerate_geometry_propagates():
    """Test that coincident elements surface as DegenerateGeometryError."""
    geom = LinkGeometry.square(4, distance=1e-12)

    with pytest.raises(DegenerateGeometryError):
        channel_matrix(geom)
    with pytest.raises(DegenerateGeometryError):
        channel_gain(geom, 3, 3)


def test_to_record_is_row_major():
    """Test the JSON dump layout."""
    geom = LinkGeometry(n_tx=3, n_rx=2, phi=0.2)
    channel = channel_matrix(geom)

    record = channel.to_record()

    assert record["m"] == 2 and record["n"] == 3
    assert len(record["entries_re"]) == 6
    assert record["entries_re"][4] == channel.entries[1, 1].real
    assert record["entries_im"][2] == channel.entries[0, 2].imag


def test_to_frame_columns():
    """Test the CSV frame columns, 1-based indices and polar parts."""
    channel = channel_matrix(LinkGeometry.square(4, phi=0.2))

    frame = channel.to_frame()

    assert list(frame.columns) == ["m", "n", "re", "im", "abs", "phase_rad"]
    assert len(frame) == 16
    row = frame.iloc[6]
    assert (row["m"], row["n"]) == (2, 3)
    assert row["abs"] == pytest.approx(abs(channel.entries[1, 2]), rel=1e-15)
    assert row["phase_rad"] == pytest.approx(np.angle(channel.entries[1, 2]), abs=1e-15)


def test_channel_matrix_keeps_geometry(evaluation_geometry):
    """Test that the matrix carries the geometry it was built from."""
    channel = channel_matrix(evaluation_geometry)

    assert isinstance(channel, ChannelMatrix)
    assert channel.geometry == evaluation_geometry
