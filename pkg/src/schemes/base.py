"""
Base classes and shared types for OAM link schemes.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, Union

import numpy as np

from src.link_model.channel import ChannelMatrix
from src.link_model.exceptions import LinkModelError


class SchemeError(LinkModelError):
    """Base class for link scheme exceptions."""
    pass


class DimensionMismatchError(SchemeError):
    """Raised when array shapes do not agree."""
    pass


class NonFiniteInputError(SchemeError):
    """Raised when a matrix or vector contains NaN or infinite entries."""
    pass


class SearchSpaceTooLargeError(SchemeError):
    """Raised when an exhaustive search would exceed the hypothesis cap."""
    pass


class PowerAllocationError(SchemeError):
    """Raised when a power allocation cannot be formed."""
    pass


class ConstellationError(SchemeError):
    """Raised for unknown or malformed symbol alphabets."""
    pass


ChannelLike = Union[ChannelMatrix, np.ndarray]


def as_channel_array(channel: ChannelLike, square: bool = True) -> np.ndarray:
    """
    Extract a finite complex matrix from a channel or array.

    Args:
        channel: ChannelMatrix or 2-D array
        square: Require N = M

    Returns:
        ndarray: Complex matrix

    Raises:
        DimensionMismatchError: For non-2-D input, or non-square input when required
        NonFiniteInputError: If any entry is NaN or infinite
    """
    entries = channel.entries if isinstance(channel, ChannelMatrix) else channel
    matrix = np.asarray(entries, dtype=complex)
    if matrix.ndim != 2:
        raise DimensionMismatchError(f"Expected a matrix, got shape {matrix.shape}")
    if square and matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatchError(
            f"Channel is {matrix.shape[0]}x{matrix.shape[1]}; the mode-domain "
            "schemes need equal transmit and receive element counts (N = M)"
        )
    if not np.all(np.isfinite(matrix)):
        raise NonFiniteInputError("Channel matrix contains non-finite entries")
    return matrix


@dataclass(frozen=True)
class NoiseModel:
    """Per-receive-element noise variances sigma_i^2."""
    variances: np.ndarray

    def __post_init__(self):
        variances = np.asarray(self.variances, dtype=float).ravel()
        if variances.size == 0:
            raise DimensionMismatchError("Noise model needs at least one variance")
        if not np.all(np.isfinite(variances)) or np.any(variances < 0):
            raise NonFiniteInputError("Noise variances must be finite and nonnegative")
        object.__setattr__(self, "variances", variances)

    @classmethod
    def from_snr_db(cls, n_elements: int, snr_db: float) -> "NoiseModel":
        """
        Equal variances 10**(-snr_db/10) for unit transmit power per mode.

        snr_db = inf gives a noiseless model.
        """
        variance = 0.0 if np.isposinf(snr_db) else 10.0 ** (-snr_db / 10.0)
        return cls(np.full(n_elements, variance))

    @property
    def size(self) -> int:
        return int(self.variances.size)

    @property
    def std(self) -> np.ndarray:
        """Per-element standard deviations."""
        return np.sqrt(self.variances)

    @property
    def is_noiseless(self) -> bool:
        return bool(np.all(self.variances == 0))

    def require_positive(self) -> None:
        """Raise unless every variance is strictly positive."""
        if np.any(self.variances <= 0):
            raise PowerAllocationError("Spectrum efficiency needs positive noise variances")


class BaseLinkScheme(ABC):
    """
    Abstract base class for an OAM link over a square channel.

    A scheme maps mode-domain symbols s to element signals x (transmit) and
    received element signals y back to the mode domain (receive). Vectors
    are shaped (N,) or (N, T) with one trial per column.
    """

    name: str = "base"

    def __init__(self, channel: ChannelLike, alpha_tx: float = 0.0):
        """Initialize the scheme on a square channel."""
        self.channel = as_channel_array(channel)
        self.n_modes = self.channel.shape[0]
        self.alpha_tx = float(alpha_tx)

    @abstractmethod
    def transmit(self, symbols: np.ndarray) -> np.ndarray:
        """
        Map mode symbols to transmit element signals.

        Args:
            symbols: Mode-domain symbols, shape (N,) or (N, T)

        Returns:
            ndarray: Element signals of the same shape
        """
        pass

    @abstractmethod
    def receive(self, received: np.ndarray) -> np.ndarray:
        """
        Map received element signals to the mode domain.

        Args:
            received: Element signals, shape (N,) or (N, T)

        Returns:
            ndarray: Decomposed mode-domain signals
        """
        pass

    @abstractmethod
    def effective_matrix(self) -> np.ndarray:
        """Noiseless mode-to-mode matrix G with receive(H transmit(s)) = G s."""
        pass

    @abstractmethod
    def allocate_power(self, policy: str, total_power: float, noise: NoiseModel) -> Any:
        """
        Per-mode transmit powers under the named policy ("equal" or "waterfill").

        Returns:
            PowerAllocation: Allocation over all N modes
        """
        pass

    @abstractmethod
    def spectrum_efficiency(self, power: Any, noise: NoiseModel, **kwargs: Any) -> float:
        """Spectrum efficiency in bits/s/Hz for the given allocation."""
        pass

    def effective_gains(self) -> np.ndarray:
        """Diagonal of the effective matrix, used by per-mode detection."""
        return np.diag(self.effective_matrix()).copy()

    def propagate(self, signal: np.ndarray) -> np.ndarray:
        """Pass element signals through the channel."""
        return self.channel @ self.check_shape(signal)

    def check_shape(self, values: np.ndarray) -> np.ndarray:
        """
        Validate a (N,) or (N, T) array against the mode count.

        Raises:
            DimensionMismatchError: If the leading dimension is not N
        """
        array = np.asarray(values, dtype=complex)
        if array.ndim not in (1, 2) or array.shape[0] != self.n_modes:
            raise DimensionMismatchError(
                f"Expected shape ({self.n_modes},) or ({self.n_modes}, T), got {array.shape}"
            )
        return array

    def describe(self) -> Dict[str, Any]:
        """Summary of the scheme for output metadata."""
        return {
            "scheme": self.name,
            "n_modes": self.n_modes,
            "alpha_tx": self.alpha_tx,
        }
