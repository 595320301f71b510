"""
Experiment configuration models for the command-line tools.
"""
import itertools
from typing import Any, Dict, Iterator, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.link_model.config import (
    DEFAULT_CONSTELLATION,
    DEFAULT_POWER_POLICY,
    DEFAULT_SEED,
    DEFAULT_SNR_DB,
    DEFAULT_TRIALS,
)
from src.link_model.exceptions import GeometryError, LinkModelError
from src.link_model.schemas import LinkGeometry
from src.schemes.detection import ConstellationFactory

# Sweepable parameters and the LinkGeometry field each one drives
SWEEP_PARAMETERS = {
    "n_elements": None,
    "snr_db": None,
    "wavelength": "wavelength",
    "radius_tx": "radius_tx",
    "radius_rx": "radius_rx",
    "distance": "distance",
    "theta": "theta",
    "phi": "phi",
    "tilt_x": "tilt_x",
    "tilt_y": "tilt_y",
    "alpha_tx": "alpha_tx",
    "alpha_rx": "alpha_rx",
}


class ConfigError(LinkModelError):
    """Raised for an invalid experiment configuration, naming key and line."""

    def __init__(self, key: str, line: Optional[int], message: str):
        self.key = key
        self.line = line
        self.message = message
        where = f"line {line}" if line is not None else "not set"
        super().__init__(f"Config key '{key}' ({where}): {message}")


class SweepAxis(BaseModel):
    """One swept parameter with a linear grid."""
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    param: str = Field(..., description="Swept parameter name")
    start: float = Field(..., description="First grid value (SI units, radians)")
    stop: float = Field(..., description="Last grid value (SI units, radians)")
    count: int = Field(..., ge=1, description="Number of grid points")

    @field_validator("param")
    @classmethod
    def check_param(cls, v: str) -> str:
        if v not in SWEEP_PARAMETERS:
            raise ValueError(f"cannot sweep '{v}' (allowed: {', '.join(sorted(SWEEP_PARAMETERS))})")
        return v

    @model_validator(mode="after")
    def check_integer_grid(self) -> "SweepAxis":
        if self.param == "n_elements":
            grid = np.linspace(self.start, self.stop, self.count)
            if np.any(np.abs(grid - np.round(grid)) > 1e-9) or np.any(grid < 1):
                raise ValueError("n_elements grid must consist of positive integers")
        return self

    def values(self) -> List[Any]:
        """Grid values, integers for n_elements."""
        grid = np.linspace(self.start, self.stop, self.count)
        if self.param == "n_elements":
            return [int(round(v)) for v in grid]
        return [float(v) for v in grid]


class SweepSpec(BaseModel):
    """A validated experiment: base geometry, settings and up to two swept axes."""
    model_config = ConfigDict(frozen=True)

    geometry: LinkGeometry = Field(..., description="Base geometry")
    snr_db: float = Field(DEFAULT_SNR_DB, description="Per-element SNR setting (dB)")
    constellation: str = Field(DEFAULT_CONSTELLATION, description="Constellation name")
    power_policy: Literal["equal", "waterfill"] = Field(DEFAULT_POWER_POLICY, description="Power allocation")
    trials: int = Field(DEFAULT_TRIALS, ge=0, description="Monte-Carlo symbol vectors per point")
    seed: int = Field(DEFAULT_SEED, ge=0, description="Root RNG seed")
    axes: List[SweepAxis] = Field(default_factory=list, max_length=2, description="Swept axes")
    defaults_applied: List[str] = Field(default_factory=list, description="Config keys left at defaults")
    key_lines: Dict[str, int] = Field(default_factory=dict, description="Line of every given key")

    @field_validator("snr_db")
    @classmethod
    def check_snr(cls, v: float) -> float:
        if np.isnan(v) or np.isneginf(v):
            raise ValueError("snr_db must be a number or inf")
        return v

    @field_validator("constellation")
    @classmethod
    def check_constellation(cls, v: str) -> str:
        name = v.strip().lower()
        if name not in ConstellationFactory.available():
            raise ValueError(f"unknown constellation (available: {', '.join(ConstellationFactory.available())})")
        return name

    @model_validator(mode="after")
    def check_axes(self) -> "SweepSpec":
        params = [axis.param for axis in self.axes]
        if len(set(params)) != len(params):
            raise ValueError("the two sweep axes must differ")
        return self

    @property
    def n_elements(self) -> int:
        return self.geometry.n_tx

    @property
    def axis_names(self) -> List[str]:
        return [axis.param for axis in self.axes]

    def grid(self) -> Iterator[Dict[str, Any]]:
        """Grid points in row-major order, first axis outermost."""
        if not self.axes:
            yield {}
            return
        for values in itertools.product(*(axis.values() for axis in self.axes)):
            yield dict(zip(self.axis_names, values))

    def grid_size(self) -> int:
        return int(np.prod([axis.count for axis in self.axes])) if self.axes else 1

    def geometry_at(self, point: Dict[str, Any]) -> LinkGeometry:
        """Base geometry with the point's geometric values applied."""
        updates = {
            SWEEP_PARAMETERS[name]: value
            for name, value in point.items()
            if SWEEP_PARAMETERS.get(name)
        }
        if "n_elements" in point:
            updates["n_tx"] = updates["n_rx"] = point["n_elements"]
        if not updates:
            return self.geometry
        try:
            return self.geometry.with_updates(**updates)
        except ValidationError as e:
            raise GeometryError(f"Invalid geometry at {point}: {e.errors()[0]['msg']}") from e

    def snr_at(self, point: Dict[str, Any]) -> float:
        return float(point.get("snr_db", self.snr_db))

    def to_record(self) -> Dict[str, Any]:
        """JSON-friendly description for output metadata."""
        return {
            "geometry": self.geometry.to_record(),
            "snr_db": self.snr_db,
            "constellation": self.constellation,
            "power_policy": self.power_policy,
            "trials": self.trials,
            "seed": self.seed,
            "axes": [axis.model_dump() for axis in self.axes],
        }
