"""
Joint beamforming and pre-detection (BePre).

Given a square channel H = S V U*, the transmit beamformer U W* and the
receive pre-detector W S* turn H into the circulant H^c = W V W*, which
the receive DFT diagonalises into the singular values of H.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.linalg import LinAlgError
from scipy.linalg import svd as scipy_svd

from .base import ChannelLike, NonFiniteInputError, SchemeError, as_channel_array
from .oam_transform import circulant_residual, idft_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SvdFactors:
    """H = left @ diag(singular_values) @ right^H, singular values descending."""
    left: np.ndarray
    singular_values: np.ndarray
    right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.singular_values) @ self.right.conj().T


@dataclass(frozen=True)
class BePreTransforms:
    """Unitary BePre pair, equivalent circulant and per-mode gains."""
    beamform: np.ndarray
    predetect: np.ndarray
    circulant: np.ndarray
    lambdas: np.ndarray
    numerical_rank: int

    @property
    def n_modes(self) -> int:
        return int(self.lambdas.size)


class VerificationReport(BaseModel):
    """Residuals showing that a transform set satisfies the BePre identities."""
    model_config = ConfigDict(populate_by_name=True)

    equivalence_residual: float = Field(..., description="||Pr H Pt - H^c||_F / ||H^c||_F")
    unitarity_residuals: Dict[str, float] = Field(
        ..., description="||X^H X - I||_2 for beamform, predetect and the noise whitening W* Pr"
    )
    circulant_residual: float = Field(..., description="Max deviation of H^c from circulant structure")
    first_column_residual: float = Field(
        ..., description="Relative distance between the first column of H^c and W diag(V) 1 / sqrt(N)"
    )
    diagonal_residual: float = Field(
        ..., description="max |diag(W* H^c W) - lambda| relative to the largest gain"
    )
    lambdas: List[float] = Field(..., alias="lambda", description="Effective per-mode gains")
    numerical_rank: int = Field(..., ge=0, description="Rank of H under N * eps * gamma_max")


def svd(channel: ChannelLike) -> SvdFactors:
    """
    Singular value decomposition of a square channel matrix.

    Args:
        channel: Square complex matrix

    Returns:
        SvdFactors: Unitary factors and descending singular values

    Raises:
        DimensionMismatchError: For non-square input
        NonFiniteInputError: For NaN or infinite entries
        SchemeError: If the decomposition does not converge
    """
    matrix = as_channel_array(channel)
    try:
        left, singular_values, right_h = scipy_svd(matrix)
    except LinAlgError as e:
        raise SchemeError(f"SVD did not converge: {str(e)}") from e
    return SvdFactors(left=left, singular_values=singular_values, right=right_h.conj().T)


def numerical_rank(singular_values: np.ndarray) -> int:
    """Count of singular values above N * eps * gamma_max."""
    values = np.asarray(singular_values, dtype=float)
    if values.size == 0 or values.max() == 0:
        return 0
    tolerance = values.size * np.finfo(float).eps * values.max()
    return int(np.count_nonzero(values > tolerance))


def build_circulant(singular_values: np.ndarray) -> np.ndarray:
    """
    Circulant H^c = W diag(V) W* sharing the given singular values.

    Raises:
        NonFiniteInputError: For non-finite values
        SchemeError: For negative values
    """
    values = np.asarray(singular_values, dtype=float).ravel()
    if not np.all(np.isfinite(values)):
        raise NonFiniteInputError("Singular values must be finite")
    if np.any(values < 0):
        raise SchemeError("Singular values must be nonnegative")
    w = idft_matrix(values.size)
    return (w * values) @ w.conj().T


def bepre_transforms(channel: ChannelLike) -> BePreTransforms:
    """
    Build the BePre pair for a square channel.

    Args:
        channel: Square channel matrix H (N = M)

    Returns:
        BePreTransforms: predetect @ H @ beamform equals the circulant

    Raises:
        DimensionMismatchError: If H is not square
    """
    factors = svd(channel)
    n_modes = factors.singular_values.size
    w = idft_matrix(n_modes)
    transforms = BePreTransforms(
        beamform=factors.right @ w.conj().T,
        predetect=w @ factors.left.conj().T,
        circulant=build_circulant(factors.singular_values),
        lambdas=factors.singular_values.copy(),
        numerical_rank=numerical_rank(factors.singular_values),
    )
    logger.debug(
        "BePre for N=%d: rank %d, gains %.3e..%.3e",
        n_modes, transforms.numerical_rank,
        factors.singular_values.min(), factors.singular_values.max()
    )
    return transforms


def _unitarity_residual(matrix: np.ndarray) -> float:
    identity = np.eye(matrix.shape[1])
    return float(np.linalg.norm(matrix.conj().T @ matrix - identity, ord=2))


def _relative(difference: float, scale: float) -> float:
    return float(difference / scale) if scale > 0 else float(difference)


def verify_transforms(channel: ChannelLike, transforms: BePreTransforms) -> VerificationReport:
    """
    Measure how closely a transform set satisfies the BePre identities.

    Args:
        channel: The channel H the transforms were built for
        transforms: Output of bepre_transforms

    Returns:
        VerificationReport: Equivalence, unitarity, circulant and gain residuals
    """
    matrix = as_channel_array(channel)
    n_modes = transforms.n_modes
    w = idft_matrix(n_modes)
    circ = transforms.circulant

    equivalent = transforms.predetect @ matrix @ transforms.beamform
    equivalence = _relative(np.linalg.norm(equivalent - circ), np.linalg.norm(circ))

    whitening = w.conj().T @ transforms.predetect
    unitarity = {
        "beamform": _unitarity_residual(transforms.beamform),
        "predetect": _unitarity_residual(transforms.predetect),
        "noise_whitening": _unitarity_residual(whitening.conj().T),
    }

    expected_column = w @ transforms.lambdas / np.sqrt(n_modes)
    first_column = _relative(
        np.linalg.norm(circ[:, 0] - expected_column), np.linalg.norm(expected_column)
    )

    gain_scale = transforms.lambdas.max() if n_modes else 0.0
    diagonal = np.diag(w.conj().T @ circ @ w)
    diagonal_residual = _relative(np.abs(diagonal - transforms.lambdas).max(), gain_scale)

    report = VerificationReport(
        equivalence_residual=equivalence,
        unitarity_residuals=unitarity,
        circulant_residual=circulant_residual(circ),
        first_column_residual=first_column,
        diagonal_residual=diagonal_residual,
        lambdas=[float(v) for v in transforms.lambdas],
        numerical_rank=transforms.numerical_rank,
    )
    logger.debug(
        "BePre residuals: equivalence %.2e, circulant %.2e, unitarity %s",
        report.equivalence_residual, report.circulant_residual, unitarity
    )
    return report
