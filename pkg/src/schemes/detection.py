"""
Transmit chain, mode decomposition, ML detection and Monte-Carlo SER.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, Field, model_validator

from src.link_model.channel import channel_matrix
from src.link_model.config import MAX_JOINT_HYPOTHESES, SER_CHUNK_TRIALS, resolve_n_jobs
from src.link_model.schemas import LinkGeometry

from .base import (
    BaseLinkScheme,
    ConstellationError,
    DimensionMismatchError,
    NoiseModel,
    SchemeError,
    SearchSpaceTooLargeError,
)
from .bepre import BePreTransforms
from .links import BePreLink, PlainOamLink
from .oam_transform import idft_matrix, mode_phase

logger = logging.getLogger(__name__)

SER_MODES = ("with_bepre", "without_bepre", "both")

RandomSource = Union[int, np.random.Generator, np.random.SeedSequence, None]


@dataclass(frozen=True)
class Constellation:
    """Finite symbol alphabet with unit average energy and Gray bit labels."""
    name: str
    points: np.ndarray
    labels: Tuple[int, ...]

    def __post_init__(self):
        points = np.asarray(self.points, dtype=complex).ravel()
        if points.size < 2:
            raise ConstellationError(f"Constellation {self.name} needs at least 2 points")
        if np.unique(points).size != points.size:
            raise ConstellationError(f"Constellation {self.name} has repeated points")
        energy = np.mean(np.abs(points) ** 2)
        if abs(energy - 1.0) > 1e-12:
            raise ConstellationError(f"Constellation {self.name} has average energy {energy!r}")
        if len(self.labels) != points.size:
            raise ConstellationError(f"Constellation {self.name} needs one label per point")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @property
    def size(self) -> int:
        return int(self.points.size)

    @property
    def bits_per_symbol(self) -> float:
        return float(np.log2(self.size))

    def random_indices(self, rng: np.random.Generator, shape) -> np.ndarray:
        """Uniform symbol indices."""
        return rng.integers(self.size, size=shape)


def _gray(value: int) -> int:
    return value ^ (value >> 1)


def _bpsk() -> Constellation:
    return Constellation("bpsk", np.array([1.0, -1.0]), (0, 1))


def _qpsk() -> Constellation:
    points = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2.0)
    return Constellation("qpsk", points, (0, 1, 2, 3))


def _psk8() -> Constellation:
    steps = np.arange(8)
    return Constellation("8psk", np.exp(2j * np.pi * steps / 8), tuple(_gray(k) for k in steps))


def _qam16() -> Constellation:
    levels = np.array([-3.0, -1.0, 1.0, 3.0])
    points, labels = [], []
    for i, real in enumerate(levels):
        for q, imag in enumerate(levels):
            points.append(complex(real, imag))
            labels.append((_gray(i) << 2) | _gray(q))
    return Constellation("16qam", np.array(points) / np.sqrt(10.0), tuple(labels))


class ConstellationFactory:
    """Factory for named constellations."""

    _registry: Dict[str, Callable[[], Constellation]] = {
        "bpsk": _bpsk,
        "qpsk": _qpsk,
        "8psk": _psk8,
        "16qam": _qam16,
    }

    @classmethod
    def create(cls, name: str) -> Constellation:
        """
        Build a constellation by name.

        Raises:
            ConstellationError: If the name is not registered
        """
        key = name.strip().lower()
        if key not in cls._registry:
            raise ConstellationError(
                f"Unsupported constellation: {name} (available: {', '.join(cls.available())})"
            )
        return cls._registry[key]()

    @classmethod
    def register(cls, name: str, builder: Callable[[], Constellation]) -> None:
        """Register a new constellation builder."""
        cls._registry[name.strip().lower()] = builder

    @classmethod
    def available(cls) -> List[str]:
        return sorted(cls._registry)


def register_constellation(name: str, builder: Callable[[], Constellation]) -> None:
    ConstellationFactory.register(name, builder)


def _as_generator(random_source: RandomSource) -> np.random.Generator:
    if isinstance(random_source, np.random.Generator):
        return random_source
    return np.random.default_rng(random_source)


def _check_leading(values: np.ndarray, n_modes: int, what: str) -> np.ndarray:
    array = np.asarray(values, dtype=complex)
    if array.ndim not in (1, 2) or array.shape[0] != n_modes:
        raise DimensionMismatchError(
            f"{what} has shape {array.shape}; expected ({n_modes},) or ({n_modes}, T)"
        )
    return array


def _squared_magnitude(values: np.ndarray) -> np.ndarray:
    return values.real ** 2 + values.imag ** 2


def awgn(signal: np.ndarray, noise: NoiseModel, random_source: RandomSource = None) -> np.ndarray:
    """
    Add circularly symmetric complex Gaussian noise.

    Element i receives variance sigma_i^2, split equally between the real and
    imaginary parts. Identical seeds give identical output.

    Args:
        signal: Shape (N,) or (N, T)
        noise: Per-element variances
        random_source: Seed, SeedSequence or Generator

    Returns:
        ndarray: Noisy signal
    """
    values = _check_leading(signal, noise.size, "Signal")
    rng = _as_generator(random_source)
    unit = rng.standard_normal(values.shape) + 1j * rng.standard_normal(values.shape)
    scale = np.sqrt(noise.variances / 2.0)
    if values.ndim == 2:
        scale = scale[:, None]
    return values + scale * unit


def transmit(
    symbols: np.ndarray,
    transforms: BePreTransforms,
    w: Optional[np.ndarray] = None,
    alpha_tx: float = 0.0
) -> np.ndarray:
    """
    Beamformed transmit signal x~ = H^Pt W diag(exp(j alpha l)) s.

    Args:
        symbols: Mode symbols, shape (N,) or (N, T)
        transforms: BePre transform set
        w: IDFT matrix (built for N when omitted)
        alpha_tx: First-element phase offset of the transmit array

    Returns:
        ndarray: Element signals, same shape as symbols
    """
    n_modes = transforms.n_modes
    values = _check_leading(symbols, n_modes, "Symbol vector")
    w = idft_matrix(n_modes) if w is None else w
    phased = mode_phase(n_modes, alpha_tx) @ values
    return transforms.beamform @ (w @ phased)


def decompose(
    received: np.ndarray,
    transforms: BePreTransforms,
    w: Optional[np.ndarray] = None
) -> np.ndarray:
    """Mode decomposition y~ = W* H^Pr y."""
    n_modes = transforms.n_modes
    values = _check_leading(received, n_modes, "Received vector")
    w = idft_matrix(n_modes) if w is None else w
    return w.conj().T @ (transforms.predetect @ values)


def ml_per_mode_indices(
    decomposed: np.ndarray,
    gains: np.ndarray,
    constellation: Constellation
) -> np.ndarray:
    """
    Constellation indices minimising |y~_i - g_i w| mode by mode.

    Ties resolve to the lowest constellation index.
    """
    values = np.asarray(decomposed, dtype=complex)
    gains = np.asarray(gains, dtype=complex).ravel()
    values = _check_leading(values, gains.size, "Decomposed vector")
    if values.ndim == 1:
        residual = values[:, None] - gains[:, None] * constellation.points[None, :]
    else:
        residual = values[:, :, None] - gains[:, None, None] * constellation.points[None, None, :]
    return np.argmin(_squared_magnitude(residual), axis=-1)


def ml_per_mode(decomposed: np.ndarray, gains: np.ndarray, constellation: Constellation) -> np.ndarray:
    """
    Per-mode ML decisions argmin_{w in Omega} |y~_i - lambda_i w|.

    Args:
        decomposed: Mode-domain observations, shape (N,) or (N, T)
        gains: Effective per-mode gains (nonnegative lambda, or complex with a phase offset)
        constellation: Symbol alphabet

    Returns:
        ndarray: Detected symbols, same shape as decomposed
    """
    return constellation.points[ml_per_mode_indices(decomposed, gains, constellation)]


def ml_joint_indices(
    decomposed: np.ndarray,
    effective: np.ndarray,
    constellation: Constellation,
    max_hypotheses: int = MAX_JOINT_HYPOTHESES,
    chunk_size: int = 1 << 16
) -> np.ndarray:
    """
    Exhaustive minimiser of ||y~ - G s||^2 over all symbol vectors.

    Hypotheses are enumerated in lexicographic index order with mode 1 most
    significant; the first minimum found wins.

    Raises:
        SearchSpaceTooLargeError: If size**N exceeds max_hypotheses
    """
    values = np.asarray(decomposed, dtype=complex).ravel()
    matrix = np.asarray(effective, dtype=complex)
    n_modes = values.size
    if matrix.shape != (n_modes, n_modes):
        raise DimensionMismatchError(f"Effective matrix {matrix.shape} does not match {n_modes} modes")
    size = constellation.size
    total = size ** n_modes
    if total > max_hypotheses:
        raise SearchSpaceTooLargeError(
            f"{size}^{n_modes} = {total} hypotheses exceed the cap of {max_hypotheses}"
        )

    place_values = size ** np.arange(n_modes - 1, -1, -1, dtype=np.int64)
    best_cost = np.inf
    best_index = 0
    for start in range(0, total, chunk_size):
        hypotheses = np.arange(start, min(start + chunk_size, total), dtype=np.int64)
        digits = (hypotheses[None, :] // place_values[:, None]) % size
        residual = values[:, None] - matrix @ constellation.points[digits]
        costs = _squared_magnitude(residual).sum(axis=0)
        local = int(np.argmin(costs))
        if costs[local] < best_cost:
            best_cost = costs[local]
            best_index = start + local
    return (best_index // place_values) % size


def ml_joint_oracle(
    decomposed: np.ndarray,
    effective: np.ndarray,
    constellation: Constellation,
    max_hypotheses: int = MAX_JOINT_HYPOTHESES
) -> np.ndarray:
    """
    Joint ML detection argmin_{s in Omega^N} ||y~ - G s||^2 by full enumeration.

    Args:
        decomposed: Mode-domain observation y~, shape (N,)
        effective: Effective N x N matrix G
        constellation: Symbol alphabet
        max_hypotheses: Enumeration cap

    Returns:
        ndarray: Detected symbol vector
    """
    indices = ml_joint_indices(decomposed, effective, constellation, max_hypotheses)
    return constellation.points[indices]


class SerReport(BaseModel):
    """Monte-Carlo symbol error rates of the two link schemes."""

    trials: int = Field(..., ge=1, description="Symbol vectors simulated")
    n_modes: int = Field(..., ge=1, description="Symbols per vector")
    constellation: str = Field(..., description="Constellation name")
    snr_db: float = Field(..., description="SNR setting (inf means noiseless)")
    seed: int = Field(..., description="Root seed of the per-chunk RNG streams")
    symbol_errors_with_bepre: Optional[int] = Field(None, ge=0)
    symbol_errors_without_bepre: Optional[int] = Field(None, ge=0)
    ser_with: Optional[float] = Field(None, ge=0, le=1)
    ser_without: Optional[float] = Field(None, ge=0, le=1)

    @model_validator(mode="after")
    def check_rates(self) -> "SerReport":
        symbols = self.trials * self.n_modes
        for errors, rate in (
            (self.symbol_errors_with_bepre, self.ser_with),
            (self.symbol_errors_without_bepre, self.ser_without),
        ):
            if (errors is None) != (rate is None):
                raise ValueError("Error count and rate must be given together")
            if errors is not None and errors > symbols:
                raise ValueError("More symbol errors than symbols")
        return self

    def standard_error(self, which: str = "with") -> Optional[float]:
        """Binomial standard error of ser_with or ser_without."""
        rate = self.ser_with if which == "with" else self.ser_without
        if rate is None:
            return None
        return float(np.sqrt(rate * (1.0 - rate) / (self.trials * self.n_modes)))


def _chunk_errors(
    links: List[BaseLinkScheme],
    constellation: Constellation,
    noise: NoiseModel,
    seed: int,
    chunk: int,
    trials: int
) -> List[int]:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))
    n_modes = noise.size
    sent = constellation.random_indices(rng, (n_modes, trials))
    symbols = constellation.points[sent]
    unit = rng.standard_normal((n_modes, trials)) + 1j * rng.standard_normal((n_modes, trials))
    noise_samples = np.sqrt(noise.variances / 2.0)[:, None] * unit

    errors = []
    for link in links:
        received = link.propagate(link.transmit(symbols)) + noise_samples
        detected = ml_per_mode_indices(link.receive(received), link.effective_gains(), constellation)
        errors.append(int(np.count_nonzero(detected != sent)))
    return errors


def monte_carlo_ser(
    geom: LinkGeometry,
    constellation: Union[Constellation, str],
    snr_db: float,
    trials: int,
    seed: int,
    mode: str = "both",
    n_jobs: Optional[int] = None
) -> SerReport:
    """
    Empirical symbol error rate with and/or without BePre.

    Trials run in fixed-size chunks, each with its own RNG stream derived
    from (seed, chunk), so the counts do not depend on the worker count.
    With mode="both" the two links see identical symbols and noise.

    Args:
        geom: Square link geometry
        constellation: Constellation or registered name
        snr_db: Per-element SNR setting; inf disables noise
        trials: Number of symbol vectors (>= 1)
        seed: Root seed
        mode: "with_bepre", "without_bepre" or "both"
        n_jobs: Worker count (OAM_LINK_N_JOBS when omitted)

    Returns:
        SerReport: Error counts and rates
    """
    if mode not in SER_MODES:
        raise SchemeError(f"Unknown SER mode: {mode} (expected one of {SER_MODES})")
    if trials < 1:
        raise SchemeError(f"trials must be >= 1, got {trials}")
    if isinstance(constellation, str):
        constellation = ConstellationFactory.create(constellation)

    channel = channel_matrix(geom)
    links: List[BaseLinkScheme] = []
    if mode in ("with_bepre", "both"):
        links.append(BePreLink(channel, alpha_tx=geom.alpha_tx))
    if mode in ("without_bepre", "both"):
        links.append(PlainOamLink(channel, alpha_tx=geom.alpha_tx))
    noise = NoiseModel.from_snr_db(geom.n_tx, snr_db)

    chunks = [
        (index, min(SER_CHUNK_TRIALS, trials - start))
        for index, start in enumerate(range(0, trials, SER_CHUNK_TRIALS))
    ]
    logger.info(
        "SER run: %d trials in %d chunks, %s, %.2f dB, mode %s",
        trials, len(chunks), constellation.name, snr_db, mode
    )
    results = Parallel(n_jobs=resolve_n_jobs(n_jobs))(
        delayed(_chunk_errors)(links, constellation, noise, seed, index, size)
        for index, size in chunks
    )
    totals = np.sum(np.array(results, dtype=np.int64), axis=0)

    counts = dict(zip((link.name for link in links), (int(v) for v in totals)))
    symbols = trials * geom.n_tx
    with_errors = counts.get(BePreLink.name)
    without_errors = counts.get(PlainOamLink.name)
    return SerReport(
        trials=trials,
        n_modes=geom.n_tx,
        constellation=constellation.name,
        snr_db=snr_db,
        seed=seed,
        symbol_errors_with_bepre=with_errors,
        symbol_errors_without_bepre=without_errors,
        ser_with=None if with_errors is None else with_errors / symbols,
        ser_without=None if without_errors is None else without_errors / symbols,
    )
