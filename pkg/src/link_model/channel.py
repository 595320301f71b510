"""
Free-space line-of-sight channel between the two UCAs.
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np
import pandas as pd

from .exceptions import DegenerateGeometryError
from .geometry import checked_distance_excess, distance_excess, zero_based_index
from .config import MIN_ELEMENT_DISTANCE_M
from .schemas import LinkGeometry

logger = logging.getLogger(__name__)


def _gain_law(geom: LinkGeometry, excess: np.ndarray) -> np.ndarray:
    """
    beta * lambda * exp(-j 2 pi d_mn / lambda) / (4 pi d_mn) from d_mn - d.

    The common factor exp(-j k d) is evaluated once so that entries differ
    only through their (small) excess path lengths.
    """
    k = geom.wavenumber
    distances = geom.distance + excess
    phase = np.exp(-1j * k * geom.distance) * np.exp(-1j * k * excess)
    return geom.beta * geom.wavelength * phase / (4.0 * np.pi * distances)


@dataclass(frozen=True)
class ChannelMatrix:
    """M x N matrix of element-to-element gains and the geometry behind it."""
    entries: np.ndarray
    geometry: LinkGeometry

    @property
    def shape(self):
        return self.entries.shape

    def to_record(self) -> Dict[str, Any]:
        """JSON dump: sizes plus row-major real and imaginary parts."""
        m, n = self.entries.shape
        return {
            "m": int(m),
            "n": int(n),
            "entries_re": [float(v) for v in self.entries.real.ravel()],
            "entries_im": [float(v) for v in self.entries.imag.ravel()],
        }

    def to_frame(self) -> pd.DataFrame:
        """One row per entry with 1-based indices, parts, magnitude and phase."""
        m, n = self.entries.shape
        rows, cols = np.meshgrid(np.arange(1, m + 1), np.arange(1, n + 1), indexing="ij")
        values = self.entries.ravel()
        return pd.DataFrame({
            "m": rows.ravel(),
            "n": cols.ravel(),
            "re": values.real,
            "im": values.imag,
            "abs": np.abs(values),
            "phase_rad": np.angle(values),
        })


def channel_gain(geom: LinkGeometry, m: int, n: int) -> complex:
    """
    Gain from transmit element n to receive element m (1-based).

    Raises:
        DegenerateGeometryError: If the two elements are closer than 1e-9 m
    """
    row = zero_based_index(m, geom.n_rx, "m")
    col = zero_based_index(n, geom.n_tx, "n")
    excess = distance_excess(geom)[row, col]
    if geom.distance + excess < MIN_ELEMENT_DISTANCE_M:
        raise DegenerateGeometryError((m, n), float(geom.distance + excess))
    return complex(_gain_law(geom, excess))


def channel_matrix(geom: LinkGeometry) -> ChannelMatrix:
    """
    Assemble the channel matrix H with entry (m, n) = channel_gain(geom, m, n).

    Args:
        geom: Link geometry

    Returns:
        ChannelMatrix: M x N complex gains

    Raises:
        DegenerateGeometryError: Naming the offending (m, n) pair
    """
    entries = _gain_law(geom, checked_distance_excess(geom))
    logger.debug("Built %dx%d channel matrix, max |h| = %.4e", *entries.shape, np.abs(entries).max())
    return ChannelMatrix(entries=entries, geometry=geom)
