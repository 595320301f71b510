"""
Tests for constellations, the signal chain, ML detection and Monte-Carlo SER.
"""
import itertools

import numpy as np
import pytest
from pydantic import ValidationError

from src.link_model.channel import channel_matrix
from src.link_model.schemas import LinkGeometry
from src.schemes.base import ConstellationError, DimensionMismatchError, SchemeError, SearchSpaceTooLargeError
from src.schemes.bepre import BePreTransforms, bepre_transforms
from src.schemes.detection import (
    Constellation,
    ConstellationFactory,
    NoiseModel,
    SerReport,
    awgn,
    decompose,
    ml_joint_indices,
    ml_joint_oracle,
    ml_per_mode,
    ml_per_mode_indices,
    monte_carlo_ser,
    register_constellation,
    transmit,
)
from src.schemes.oam_transform import idft_matrix

pytestmark = [pytest.mark.unit, pytest.mark.schemes]


@pytest.fixture
def qpsk():
    return ConstellationFactory.create("qpsk")


def identity_transforms(n_modes):
    return BePreTransforms(
        beamform=np.eye(n_modes, dtype=complex),
        predetect=np.eye(n_modes, dtype=complex),
        circulant=np.eye(n_modes, dtype=complex),
        lambdas=np.ones(n_modes),
        numerical_rank=n_modes,
    )


@pytest.mark.parametrize("name,size", [("bpsk", 2), ("qpsk", 4), ("8psk", 8), ("16qam", 16)])
def test_builtin_constellations(name, size):
    """Test size, unit energy, distinct points and Gray labels."""
    constellation = ConstellationFactory.create(name)

    assert constellation.size == size
    assert constellation.bits_per_symbol == np.log2(size)
    assert np.mean(np.abs(constellation.points) ** 2) == pytest.approx(1.0, abs=1e-12)
    assert np.unique(constellation.points).size == size
    assert sorted(constellation.labels) == list(range(size))


def test_gray_neighbours_differ_in_one_bit():
    """Test that adjacent 8-PSK points differ in exactly one label bit."""
    labels = ConstellationFactory.create("8psk").labels

    for k in range(8):
        assert bin(labels[k] ^ labels[(k + 1) % 8]).count("1") == 1


def test_factory_lookup_is_case_insensitive():
    """Test name normalisation and unknown names."""
    assert ConstellationFactory.create(" QPSK ").name == "qpsk"
    with pytest.raises(ConstellationError):
        ConstellationFactory.create("64apsk")


def test_register_constellation():
    """Test adding a custom alphabet to the registry."""
    register_constellation("ook-balanced", lambda: Constellation("ook-balanced", np.array([1.0, -1.0]), (1, 0)))

    assert "ook-balanced" in ConstellationFactory.available()
    assert ConstellationFactory.create("ook-balanced").labels == (1, 0)


@pytest.mark.parametrize("points,labels", [
    ([1.0], (0,)),
    ([1.0, 1.0], (0, 1)),
    ([2.0, -2.0], (0, 1)),
    ([1.0, -1.0], (0,)),
])
def test_malformed_constellations(points, labels):
    """Test size, distinctness, energy and label validation."""
    with pytest.raises(ConstellationError):
        Constellation("bad", np.array(points), labels)


def test_transmit_with_identity_beamformer():
    """Test that s = e_1 produces the first column of W."""
    symbols = np.zeros(4, dtype=complex)
    symbols[0] = 1.0

    signal = transmit(symbols, identity_transforms(4))

    np.testing.assert_allclose(signal, idft_matrix(4)[:, 0])


def test_transmit_preserves_norm(evaluation_geometry, rng, qpsk):
    """Test ||x~|| = ||s|| through the unitary chain."""
    transforms = bepre_transforms(channel_matrix(evaluation_geometry))
    symbols = qpsk.points[rng.integers(4, size=8)]

    signal = transmit(symbols, transforms, alpha_tx=0.7)

    assert np.linalg.norm(signal) == pytest.approx(np.linalg.norm(symbols), rel=1e-12)


def test_transmit_dimension_mismatch(evaluation_geometry):
    """Test symbol-vector length validation."""
    transforms = bepre_transforms(channel_matrix(evaluation_geometry))

    with pytest.raises(DimensionMismatchError):
        transmit(np.ones(5), transforms)
    with pytest.raises(DimensionMismatchError):
        decompose(np.ones(9), transforms)


def test_noiseless_decomposition(random_geometry, rng, qpsk):
    """Test y~ = lambda * s end to end for random geometries."""
    for _ in range(50):
        geom = random_geometry()
        channel = channel_matrix(geom)
        transforms = bepre_transforms(channel)
        symbols = qpsk.points[rng.integers(4, size=geom.n_tx)]

        decomposed = decompose(channel.entries @ transmit(symbols, transforms), transforms)

        expected = transforms.lambdas * symbols
        assert np.linalg.norm(decomposed - expected) <= 1e-9 * np.linalg.norm(transforms.lambdas)


def test_unit_vector_is_scaled_by_its_gain(evaluation_geometry):
    """Test that s = e_k comes back as lambda_k e_k."""
    channel = channel_matrix(evaluation_geometry)
    transforms = bepre_transforms(channel)
    symbols = np.zeros(8, dtype=complex)
    symbols[2] = 1.0

    decomposed = decompose(channel.entries @ transmit(symbols, transforms), transforms)

    expected = np.zeros(8, dtype=complex)
    expected[2] = transforms.lambdas[2]
    np.testing.assert_allclose(decomposed, expected, atol=1e-12 * transforms.lambdas.max())


def test_decompose_zero():
    """Test that y = 0 decomposes to 0."""
    np.testing.assert_array_equal(decompose(np.zeros(3), identity_transforms(3)), np.zeros(3))


def test_awgn_statistics():
    """Test per-element variance and zero mean over 10^6 samples."""
    noise = NoiseModel(np.array([0.5, 2.0]))

    samples = awgn(np.zeros((2, 1_000_000)), noise, 7)

    np.testing.assert_allclose(samples.var(axis=1), [0.5, 2.0], rtol=0.01)
    np.testing.assert_allclose(samples.real.var(axis=1), [0.25, 1.0], rtol=0.01)
    assert np.all(np.abs(samples.mean(axis=1)) <= 3 * np.sqrt(noise.variances / 1_000_000) * np.sqrt(2))


def test_awgn_is_deterministic_per_seed():
    """Test identical output for identical seeds and different for others."""
    noise = NoiseModel.from_snr_db(4, 10.0)
    signal = np.ones(4, dtype=complex)

    np.testing.assert_array_equal(awgn(signal, noise, 11), awgn(signal, noise, 11))
    assert not np.array_equal(awgn(signal, noise, 11), awgn(signal, noise, 12))


def test_awgn_noiseless_is_identity():
    """Test that zero variances leave the signal unchanged."""
    signal = np.arange(3, dtype=complex)

    np.testing.assert_array_equal(awgn(signal, NoiseModel.from_snr_db(3, float("inf")), 1), signal)


def test_per_mode_exact_symbols(qpsk):
    """Test zero-residual observations decode to the sent symbols."""
    gains = np.array([0.5, 1.0, 2.0, 3.0])
    sent = qpsk.points[[3, 0, 2, 1]]

    np.testing.assert_array_equal(ml_per_mode(gains * sent, gains, qpsk), sent)


def test_per_mode_zero_gain_tie_break(qpsk):
    """Test that a dead mode decodes to the first constellation point."""
    detected = ml_per_mode_indices(np.array([0.3 + 0.1j, 0.0]), np.array([1.0, 0.0]), qpsk)

    assert detected[1] == 0


def test_per_mode_batch(qpsk, rng):
    """Test (N, T) batches against column-wise detection."""
    gains = np.array([1.0, 0.5, 0.25])
    observations = rng.standard_normal((3, 6)) + 1j * rng.standard_normal((3, 6))

    batch = ml_per_mode_indices(observations, gains, qpsk)

    assert batch.shape == (3, 6)
    np.testing.assert_array_equal(batch[:, 4], ml_per_mode_indices(observations[:, 4], gains, qpsk))


def test_joint_oracle_recovers_noiseless(qpsk, rng):
    """Test recovery through a well-conditioned dense matrix."""
    matrix = np.eye(3) + 0.2 * (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
    sent = qpsk.points[[1, 3, 2]]

    np.testing.assert_array_equal(ml_joint_oracle(matrix @ sent, matrix, qpsk), sent)


def test_joint_oracle_against_independent_enumeration(qpsk, rng):
    """Test the minimiser against a reverse-order itertools enumeration."""
    matrix = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    for _ in range(20):
        observed = rng.standard_normal(3) + 1j * rng.standard_normal(3)

        costs = {
            candidate: np.sum(np.abs(observed - matrix @ qpsk.points[list(candidate)]) ** 2)
            for candidate in reversed(list(itertools.product(range(4), repeat=3)))
        }
        best = min(costs.values())

        detected = ml_joint_indices(observed, matrix, qpsk)
        assert costs[tuple(int(v) for v in detected)] == pytest.approx(best, rel=1e-12)


@pytest.mark.slow
def test_joint_matches_per_mode_for_diagonal_channels(qpsk, rng):
    """Test zero decision mismatches on 10^4 noisy diagonal instances."""
    mismatches = 0
    for trial in range(10_000):
        n_modes = 1 + trial % 4
        gains = rng.uniform(0.05, 2.0, n_modes)
        sent = qpsk.points[rng.integers(4, size=n_modes)]
        observed = gains * sent + 0.3 * (rng.standard_normal(n_modes) + 1j * rng.standard_normal(n_modes))

        joint = ml_joint_indices(observed, np.diag(gains), qpsk)
        per_mode = ml_per_mode_indices(observed, gains, qpsk)
        mismatches += int(np.any(joint != per_mode))

    assert mismatches == 0


def test_joint_search_cap(qpsk):
    """Test the hypothesis cap and matrix shape checks."""
    with pytest.raises(SearchSpaceTooLargeError):
        ml_joint_oracle(np.zeros(11), np.eye(11), qpsk)
    with pytest.raises(SearchSpaceTooLargeError):
        ml_joint_oracle(np.zeros(3), np.eye(3), qpsk, max_hypotheses=63)
    with pytest.raises(DimensionMismatchError):
        ml_joint_oracle(np.zeros(3), np.eye(2), qpsk)


def test_ser_noiseless_with_bepre_is_zero(evaluation_geometry):
    """Test exact recovery with BePre when the noise is off."""
    report = monte_carlo_ser(evaluation_geometry, "qpsk", float("inf"), 2000, seed=1, mode="with_bepre")

    assert report.ser_with == 0.0
    assert report.ser_without is None
    assert report.symbol_errors_without_bepre is None


def test_ser_noiseless_aligned_without_bepre_is_zero(aligned_geometry):
    """Test that the circulant aligned channel needs no BePre."""
    report = monte_carlo_ser(aligned_geometry, "qpsk", float("inf"), 2000, seed=1, mode="without_bepre")

    assert report.ser_without == 0.0
    assert report.ser_with is None


def test_ser_contrast_when_misaligned():
    """Test that misalignment breaks plain OAM detection but not BePre."""
    geom = LinkGeometry.square(8, phi=np.pi / 8)

    report = monte_carlo_ser(geom, "qpsk", float("inf"), 5000, seed=2019)

    assert report.ser_with == 0.0
    assert report.ser_without > 0.05
    assert report.trials == 5000 and report.n_modes == 8


def test_ser_is_seed_deterministic(evaluation_geometry):
    """Test identical reports for identical seeds and worker counts."""
    first = monte_carlo_ser(evaluation_geometry, "qpsk", 40.0, 5000, seed=5, n_jobs=1)
    second = monte_carlo_ser(evaluation_geometry, "qpsk", 40.0, 5000, seed=5, n_jobs=2)

    assert first == second


def test_ser_non_increasing_in_snr(evaluation_geometry):
    """Test that common random numbers make BePre SER monotone in SNR."""
    rates = [
        monte_carlo_ser(evaluation_geometry, "qpsk", snr, 4096, seed=3, mode="with_bepre").ser_with
        for snr in (40.0, 50.0, 60.0, 70.0, 80.0)
    ]

    assert all(later <= earlier for earlier, later in zip(rates, rates[1:]))


def test_ser_argument_validation(evaluation_geometry):
    """Test unknown modes and empty runs."""
    with pytest.raises(SchemeError):
        monte_carlo_ser(evaluation_geometry, "qpsk", 20.0, 10, seed=1, mode="sideways")
    with pytest.raises(SchemeError):
        monte_carlo_ser(evaluation_geometry, "qpsk", 20.0, 0, seed=1)
    with pytest.raises(ConstellationError):
        monte_carlo_ser(evaluation_geometry, "64apsk", 20.0, 10, seed=1)


def test_ser_report_validation():
    """Test rate bounds and pairing of counts with rates."""
    report = SerReport(
        trials=10, n_modes=2, constellation="qpsk", snr_db=10.0, seed=1,
        symbol_errors_with_bepre=5, ser_with=0.25,
    )

    assert report.standard_error("with") == pytest.approx(np.sqrt(0.25 * 0.75 / 20))
    assert report.standard_error("without") is None
    with pytest.raises(ValidationError):
        SerReport(trials=10, n_modes=2, constellation="qpsk", snr_db=10.0, seed=1, symbol_errors_with_bepre=5)
    with pytest.raises(ValidationError):
        SerReport(
            trials=1, n_modes=2, constellation="qpsk", snr_db=10.0, seed=1,
            symbol_errors_with_bepre=3, ser_with=1.0,
        )
