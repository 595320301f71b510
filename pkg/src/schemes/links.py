"""
OAM link schemes with and without joint BePre.
"""
import logging
from typing import Any, Dict, Optional

import numpy as np

from .base import BaseLinkScheme, ChannelLike, NoiseModel
from .bepre import BePreTransforms, bepre_transforms
from .capacity import (
    PowerAllocation,
    allocate,
    effective_noise,
    mode_domain_channel,
    se_with_bepre,
    se_without_bepre,
)
from .oam_transform import ModeIndexMap, idft_matrix, mode_phase

logger = logging.getLogger(__name__)


class BePreLink(BaseLinkScheme):
    """OAM link with beamforming before the IDFT and pre-detection before the DFT."""

    name = "with_bepre"

    def __init__(
        self,
        channel: ChannelLike,
        alpha_tx: float = 0.0,
        transforms: Optional[BePreTransforms] = None
    ):
        super().__init__(channel, alpha_tx)
        self.transforms = transforms or bepre_transforms(self.channel)
        w = idft_matrix(self.n_modes)
        self._phase = np.diag(mode_phase(self.n_modes, self.alpha_tx))
        self._tx = self.transforms.beamform @ w * self._phase
        self._rx = w.conj().T @ self.transforms.predetect

    def transmit(self, symbols: np.ndarray) -> np.ndarray:
        return self._tx @ self.check_shape(symbols)

    def receive(self, received: np.ndarray) -> np.ndarray:
        return self._rx @ self.check_shape(received)

    def effective_matrix(self) -> np.ndarray:
        return np.diag(self.effective_gains())

    def effective_gains(self) -> np.ndarray:
        return self.transforms.lambdas * self._phase

    def allocate_power(self, policy: str, total_power: float, noise: NoiseModel) -> PowerAllocation:
        gains = self.transforms.lambdas ** 2
        gains[self.transforms.numerical_rank:] = 0.0
        return allocate(policy, gains, effective_noise(self.transforms, noise), total_power)

    def spectrum_efficiency(
        self,
        power: PowerAllocation,
        noise: NoiseModel,
        linear_gamma: bool = False,
        **kwargs: Any
    ) -> float:
        return se_with_bepre(self.transforms, power, noise, linear_gamma=linear_gamma)

    def describe(self) -> Dict[str, Any]:
        summary = super().describe()
        summary.update({
            "numerical_rank": self.transforms.numerical_rank,
            "lambda": [float(v) for v in self.transforms.lambdas],
        })
        return summary


class PlainOamLink(BaseLinkScheme):
    """
    OAM mode multiplexing straight through the channel.

    Only the IDFT and DFT are applied, so any misalignment leaves
    inter-mode leakage in the effective matrix W* H W.
    """

    name = "without_bepre"

    def __init__(self, channel: ChannelLike, alpha_tx: float = 0.0):
        super().__init__(channel, alpha_tx)
        w = idft_matrix(self.n_modes)
        self._phase = np.diag(mode_phase(self.n_modes, self.alpha_tx))
        self._tx = w * self._phase
        self._rx = w.conj().T
        self._mode_channel = mode_domain_channel(self.channel)

    def transmit(self, symbols: np.ndarray) -> np.ndarray:
        return self._tx @ self.check_shape(symbols)

    def receive(self, received: np.ndarray) -> np.ndarray:
        return self._rx @ self.check_shape(received)

    def effective_matrix(self) -> np.ndarray:
        return self._mode_channel * self._phase

    def allocate_power(self, policy: str, total_power: float, noise: NoiseModel) -> PowerAllocation:
        gains = np.abs(np.diag(self._mode_channel)) ** 2
        return allocate(policy, gains, noise.variances, total_power)

    def spectrum_efficiency(self, power: PowerAllocation, noise: NoiseModel, **kwargs: Any) -> float:
        return se_without_bepre(self.channel, power, noise)

    def describe(self) -> Dict[str, Any]:
        summary = super().describe()
        summary["mode_map"] = ModeIndexMap.for_modes(self.n_modes).to_record()
        return summary
