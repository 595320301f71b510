"""
Spectrum efficiency with and without BePre, and water-filling power allocation.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import svdvals

from .base import (
    ChannelLike,
    DimensionMismatchError,
    NoiseModel,
    PowerAllocationError,
    as_channel_array,
)
from .bepre import BePreTransforms
from .oam_transform import idft_matrix

logger = logging.getLogger(__name__)

POWER_POLICIES = ("equal", "waterfill")

# Relative width at which the water-level bisection stops
WATERFILL_BISECTION_TOL = 1e-15
WATERFILL_MAX_ITERATIONS = 200


@dataclass(frozen=True)
class PowerAllocation:
    """Per-mode transmit powers P_i summing to the total budget."""
    per_mode: np.ndarray
    total: float
    water_level: Optional[float] = None

    def __post_init__(self):
        per_mode = np.asarray(self.per_mode, dtype=float).ravel()
        if not np.all(np.isfinite(per_mode)) or np.any(per_mode < 0):
            raise PowerAllocationError("Per-mode powers must be finite and nonnegative")
        if abs(per_mode.sum() - self.total) > 1e-9 * max(1.0, abs(self.total)):
            raise PowerAllocationError(
                f"Per-mode powers sum to {per_mode.sum()!r}, expected {self.total!r}"
            )
        object.__setattr__(self, "per_mode", per_mode)
        object.__setattr__(self, "total", float(self.total))

    @classmethod
    def equal(cls, n_modes: int, total_power: float) -> "PowerAllocation":
        """Uniform allocation P/N per mode."""
        if n_modes < 1:
            raise PowerAllocationError("Allocation needs at least one mode")
        return cls(per_mode=np.full(n_modes, total_power / n_modes), total=total_power)

    @property
    def size(self) -> int:
        return int(self.per_mode.size)


def _check_sizes(n_modes: int, power: PowerAllocation, noise: NoiseModel) -> None:
    if power.size != n_modes or noise.size != n_modes:
        raise DimensionMismatchError(
            f"Channel has {n_modes} modes; allocation has {power.size}, noise has {noise.size}"
        )
    noise.require_positive()


def mode_domain_channel(channel: ChannelLike) -> np.ndarray:
    """h~ = W* H W, the channel seen by plain OAM mode multiplexing."""
    matrix = as_channel_array(channel)
    w = idft_matrix(matrix.shape[0])
    return w.conj().T @ matrix @ w


def se_without_bepre(channel: ChannelLike, power: PowerAllocation, noise: NoiseModel) -> float:
    """
    Spectrum efficiency of plain OAM multiplexing over a misaligned channel.

    Each mode sees its own gain |h~_ii|^2 P_i against noise plus the
    leakage sum_{k != i} |h~_ik|^2 P_k.

    Returns:
        float: bits/s/Hz
    """
    mode_channel = mode_domain_channel(channel)
    _check_sizes(mode_channel.shape[0], power, noise)
    magnitudes = np.abs(mode_channel) ** 2
    signal = np.diag(magnitudes) * power.per_mode
    leakage = magnitudes.copy()
    np.fill_diagonal(leakage, 0.0)
    interference = leakage @ power.per_mode
    return float(np.sum(np.log2(1.0 + signal / (noise.variances + interference))))


def effective_noise(transforms: BePreTransforms, noise: NoiseModel) -> np.ndarray:
    """sigma~_i^2 = sum_k |Pr_ik|^2 sigma_k^2 after pre-detection."""
    if noise.size != transforms.n_modes:
        raise DimensionMismatchError(
            f"Noise has {noise.size} variances for {transforms.n_modes} modes"
        )
    return (np.abs(transforms.predetect) ** 2) @ noise.variances


def se_with_bepre(
    transforms: BePreTransforms,
    power: PowerAllocation,
    noise: NoiseModel,
    linear_gamma: bool = False
) -> float:
    """
    Spectrum efficiency of the BePre link.

    Sums log2(1 + gamma_i^2 P_i / sigma~_i^2) over the numerical-rank leading
    modes, pairing descending gains with P_i in order.

    Args:
        transforms: BePre transform set
        power: Per-mode allocation
        noise: Receive noise
        linear_gamma: Use the linear singular value gamma_i instead of gamma_i^2

    Returns:
        float: bits/s/Hz
    """
    _check_sizes(transforms.n_modes, power, noise)
    rank = transforms.numerical_rank
    gains = transforms.lambdas if linear_gamma else transforms.lambdas ** 2
    sigma = effective_noise(transforms, noise)
    snr = gains[:rank] * power.per_mode[:rank] / sigma[:rank]
    return float(np.sum(np.log2(1.0 + snr)))


def water_filling(gains: np.ndarray, noise: np.ndarray, total_power: float) -> PowerAllocation:
    """
    Capacity-maximising allocation P_i = max(0, mu - noise_i / gains_i).

    The water level mu is bracketed by bisection and then set exactly from
    the active set so that the powers sum to the budget.

    Args:
        gains: Power gains gamma_i^2 (nonnegative)
        noise: Noise variances (positive)
        total_power: Budget P > 0

    Returns:
        PowerAllocation: Allocation with its water level

    Raises:
        PowerAllocationError: For a nonpositive budget, mismatched shapes or all-zero gains
    """
    gains = np.asarray(gains, dtype=float).ravel()
    noise = np.asarray(noise, dtype=float).ravel()
    if gains.shape != noise.shape:
        raise PowerAllocationError(f"{gains.size} gains but {noise.size} noise levels")
    if not total_power > 0:
        raise PowerAllocationError(f"Total power must be positive, got {total_power}")
    if np.any(gains < 0) or np.any(noise <= 0):
        raise PowerAllocationError("Gains must be nonnegative and noise levels positive")
    usable = gains > 0
    if not usable.any():
        raise PowerAllocationError("All channel gains are zero")

    floors = np.full(gains.shape, np.inf)
    floors[usable] = noise[usable] / gains[usable]

    low = floors[usable].min()
    high = floors[usable].max() + total_power
    for _ in range(WATERFILL_MAX_ITERATIONS):
        middle = 0.5 * (low + high)
        if np.maximum(middle - floors, 0.0).sum() > total_power:
            high = middle
        else:
            low = middle
        if high - low <= WATERFILL_BISECTION_TOL * high:
            break

    active = floors < high
    while True:
        level = (total_power + floors[active].sum()) / active.sum()
        dropped = active & (floors >= level)
        if not dropped.any():
            break
        active &= ~dropped

    per_mode = np.where(active, level - floors, 0.0)
    logger.debug("Water level %.6g with %d of %d modes active", level, active.sum(), gains.size)
    return PowerAllocation(per_mode=per_mode, total=total_power, water_level=float(level))


def allocate(policy: str, gains: np.ndarray, noise: np.ndarray, total_power: float) -> PowerAllocation:
    """
    Allocation under a named policy.

    Raises:
        PowerAllocationError: For an unknown policy
    """
    if policy == "equal":
        return PowerAllocation.equal(np.asarray(gains).size, total_power)
    if policy == "waterfill":
        return water_filling(gains, noise, total_power)
    raise PowerAllocationError(f"Unknown power policy: {policy} (expected one of {POWER_POLICIES})")


def svd_capacity(
    channel: ChannelLike,
    total_power: float,
    noise: NoiseModel,
    policy: str = "waterfill"
) -> float:
    """
    Capacity of parallel SVD subchannels, an independent check on se_with_bepre.

    Descending squared singular values are paired with the noise variances
    in order.
    """
    matrix = as_channel_array(channel)
    if noise.size != matrix.shape[0]:
        raise DimensionMismatchError(f"Noise has {noise.size} variances for {matrix.shape[0]} modes")
    noise.require_positive()
    gains = svdvals(matrix) ** 2
    power = allocate(policy, gains, noise.variances, total_power)
    return float(np.sum(np.log2(1.0 + gains * power.per_mode / noise.variances)))
