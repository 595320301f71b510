"""
IDFT/DFT matrices, the OAM mode-index map and circulant utilities.

W[n][k] = exp(+j 2 pi n k / N) / sqrt(N) (0-based) is the transmit-side
IDFT; its conjugate transpose W* is the receive-side DFT.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, Tuple

import numpy as np
from scipy.linalg import circulant, dft

from .base import DimensionMismatchError

logger = logging.getLogger(__name__)


@lru_cache(maxsize=64)
def _cached_idft(n_modes: int) -> np.ndarray:
    matrix = dft(n_modes, scale="sqrtn").conj()
    matrix.setflags(write=False)
    return matrix


def idft_matrix(n_modes: int) -> np.ndarray:
    """
    Unitary N x N IDFT matrix W (read-only, cached per N).

    Raises:
        DimensionMismatchError: If N < 1
    """
    if int(n_modes) < 1:
        raise DimensionMismatchError(f"IDFT size must be >= 1, got {n_modes}")
    return _cached_idft(int(n_modes))


def dft_matrix(n_modes: int) -> np.ndarray:
    """Receive-side DFT W*, the conjugate transpose of idft_matrix."""
    return idft_matrix(n_modes).conj().T


@dataclass(frozen=True)
class ModeIndexMap:
    """
    Bijection between DFT columns and OAM mode indices.

    Column k (1-based) carries mode l = k-1 for k-1 <= N//2 and k-1-N
    otherwise, so N = 8 covers l in {-3, ..., 4} and l = 0 sits in column 1.
    """
    n_modes: int
    mode_of_column: Tuple[int, ...]

    @classmethod
    def for_modes(cls, n_modes: int) -> "ModeIndexMap":
        if int(n_modes) < 1:
            raise DimensionMismatchError(f"Mode count must be >= 1, got {n_modes}")
        half = n_modes // 2
        modes = tuple(j if j <= half else j - n_modes for j in range(n_modes))
        return cls(n_modes=int(n_modes), mode_of_column=modes)

    @property
    def modes(self) -> np.ndarray:
        return np.array(self.mode_of_column)

    def column_of_mode(self, mode: int) -> int:
        """1-based DFT column carrying OAM mode l."""
        if mode not in self.mode_of_column:
            raise DimensionMismatchError(
                f"Mode {mode} outside {min(self.mode_of_column)}..{max(self.mode_of_column)}"
            )
        return (mode % self.n_modes) + 1

    def to_record(self) -> Dict[str, Any]:
        return {
            "n_modes": self.n_modes,
            "mode_of_column": list(self.mode_of_column),
        }


def mode_phase(n_modes: int, alpha: float) -> np.ndarray:
    """Diagonal matrix diag(exp(j alpha l)) over the mapped OAM modes."""
    modes = ModeIndexMap.for_modes(n_modes).modes
    return np.diag(np.exp(1j * alpha * modes))


def circulant_from_first_row(row: np.ndarray) -> np.ndarray:
    """
    Circulant matrix whose row i is the first row cyclically shifted right by i.

    Raises:
        DimensionMismatchError: For an empty row
    """
    values = np.asarray(row, dtype=complex).ravel()
    if values.size == 0:
        raise DimensionMismatchError("Circulant first row must not be empty")
    return circulant(values).T


def circulant_residual(matrix: np.ndarray) -> float:
    """Largest deviation from circulant structure, relative to max |entry|."""
    values = np.asarray(matrix, dtype=complex)
    scale = np.abs(values).max() if values.size else 0.0
    if scale == 0:
        return 0.0
    deviation = np.abs(values - circulant_from_first_row(values[0])).max()
    return float(deviation / scale)


def diag_of_conjugated(matrix: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Diagonal of W* C W and the relative off-diagonal energy.

    For a circulant C the off-diagonal energy vanishes and the diagonal
    equals sqrt(N) W (first row of C).

    Args:
        matrix: Square N x N matrix C

    Returns:
        Tuple of the diagonal (length N) and ||offdiag||_F / ||W* C W||_F

    Raises:
        DimensionMismatchError: For a non-square matrix
    """
    values = np.asarray(matrix, dtype=complex)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise DimensionMismatchError(f"Expected a square matrix, got shape {values.shape}")
    w = idft_matrix(values.shape[0])
    conjugated = w.conj().T @ values @ w
    diagonal = np.diag(conjugated).copy()
    total = np.linalg.norm(conjugated)
    if total == 0:
        return diagonal, 0.0
    off_diagonal = np.linalg.norm(conjugated - np.diag(diagonal))
    return diagonal, float(off_diagonal / total)
