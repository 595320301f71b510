"""
Analytic real-operation counts for ML detection with and without BePre.

Cost model "cm1": a complex multiplication is 4 real multiplications and
2 real additions, a complex addition or subtraction is 2 real additions,
|z|^2 is 2 real multiplications and 1 real addition. Comparisons are free.
Counts are Python integers, so they never overflow.
"""
from typing import Iterable

import pandas as pd
from pydantic import BaseModel, Field

from .base import SchemeError

COST_MODEL_VERSION = "cm1"

COMPLEXITY_COLUMNS = [
    "N", "xi", "adds_joint", "mults_joint", "adds_permode", "mults_permode", "model_version"
]


class OpCount(BaseModel):
    """Real additions and multiplications under a versioned cost model."""

    real_additions: int = Field(..., ge=0, description="Real additions")
    real_multiplications: int = Field(..., ge=0, description="Real multiplications")
    model_version: str = Field(COST_MODEL_VERSION, description="Cost model label")

    def __add__(self, other: "OpCount") -> "OpCount":
        return OpCount(
            real_additions=self.real_additions + other.real_additions,
            real_multiplications=self.real_multiplications + other.real_multiplications,
            model_version=self.model_version,
        )


def _validate(n_modes: int, xi: int) -> None:
    if n_modes < 1:
        raise SchemeError(f"N must be >= 1, got {n_modes}")
    if xi < 2:
        raise SchemeError(f"Constellation size must be >= 2, got {xi}")


def count_joint_ml(n_modes: int, xi: int) -> OpCount:
    """
    Exhaustive search of ||y~ - G s||^2 with a dense G over xi^N hypotheses.

    Per hypothesis: N^2 complex multiplications and N(N-1) complex additions
    for G s, N complex subtractions, N squared magnitudes and N-1 real
    additions, i.e. 4N^2+2N multiplications and 4N^2+2N-1 additions.
    """
    _validate(n_modes, xi)
    hypotheses = xi ** n_modes
    adds = 4 * n_modes ** 2 + 2 * n_modes - 1
    mults = 4 * n_modes ** 2 + 2 * n_modes
    return OpCount(real_additions=hypotheses * adds, real_multiplications=hypotheses * mults)


def count_permode_detection(n_modes: int, xi: int) -> OpCount:
    """N xi scalar hypotheses at one complex multiply, subtract and |z|^2 each."""
    _validate(n_modes, xi)
    hypotheses = n_modes * xi
    return OpCount(real_additions=5 * hypotheses, real_multiplications=6 * hypotheses)


def count_front_end(n_modes: int) -> OpCount:
    """Two dense N x N complex matrix-vector products (W* then H^Pr)."""
    adds = 2 * (2 * n_modes ** 2 + 2 * n_modes * (n_modes - 1))
    mults = 2 * 4 * n_modes ** 2
    return OpCount(real_additions=adds, real_multiplications=mults)


def count_permode_ml(n_modes: int, xi: int, include_front_end: bool = True) -> OpCount:
    """Per-mode ML after BePre decomposition, optionally with the linear front-end."""
    detection = count_permode_detection(n_modes, xi)
    if not include_front_end:
        return detection
    return detection + count_front_end(n_modes)


def complexity_table(n_values: Iterable[int], xi: int) -> pd.DataFrame:
    """One row of joint and per-mode counts for every N."""
    rows = []
    for n_modes in n_values:
        joint = count_joint_ml(n_modes, xi)
        permode = count_permode_ml(n_modes, xi)
        rows.append({
            "N": n_modes,
            "xi": xi,
            "adds_joint": joint.real_additions,
            "mults_joint": joint.real_multiplications,
            "adds_permode": permode.real_additions,
            "mults_permode": permode.real_multiplications,
            "model_version": COST_MODEL_VERSION,
        })
    return pd.DataFrame(rows, columns=COMPLEXITY_COLUMNS)
