"""
Validation schemas for link geometry inputs.
"""
from typing import Any, Dict

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import (
    DEFAULT_ALPHA_RAD,
    DEFAULT_BETA,
    DEFAULT_DISTANCE_M,
    DEFAULT_WAVELENGTH_M,
    default_radius,
)


class Point3(BaseModel):
    """Cartesian coordinate of one antenna element, in metres."""
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    x: float = Field(..., description="x coordinate (m)")
    y: float = Field(..., description="y coordinate (m)")
    z: float = Field(..., description="z coordinate (m)")

    @classmethod
    def from_array(cls, values: np.ndarray) -> "Point3":
        """Build a point from a length-3 array."""
        x, y, z = (float(v) for v in values)
        return cls(x=x, y=y, z=z)

    def as_array(self) -> np.ndarray:
        """Return the coordinate as a length-3 float array."""
        return np.array([self.x, self.y, self.z])


class LinkGeometry(BaseModel):
    """
    Geometry of a transmit UCA in the xy-plane and a displaced, tilted receive UCA.

    The transmit array is centred at the origin. The receive centre sits at
    distance `distance` along the direction given by the polar angle `phi`
    (from the z-axis) and azimuth `theta`. The receive plane is rotated by
    `tilt_x` about the y-axis and by `tilt_y` about the x-axis.
    """
    model_config = ConfigDict(frozen=True, allow_inf_nan=False, arbitrary_types_allowed=True)

    n_tx: int = Field(..., ge=1, description="Transmit element count N")
    n_rx: int = Field(..., ge=1, description="Receive element count M")
    radius_tx: float = Field(..., gt=0, description="Transmit UCA radius r (m)")
    radius_rx: float = Field(..., gt=0, description="Receive UCA radius R (m)")
    distance: float = Field(DEFAULT_DISTANCE_M, gt=0, description="Centre-to-centre distance d (m)")
    theta: float = Field(0.0, description="Azimuth of the receive-centre projection (rad)")
    phi: float = Field(0.0, description="Polar angle between z-axis and centre line (rad)")
    tilt_x: float = Field(0.0, description="Receive rotation about the y-axis (rad)")
    tilt_y: float = Field(0.0, description="Receive rotation about the x-axis (rad)")
    alpha_tx: float = Field(DEFAULT_ALPHA_RAD, description="Phase offset of transmit element 1 (rad)")
    alpha_rx: float = Field(DEFAULT_ALPHA_RAD, description="Phase offset of receive element 1 (rad)")
    wavelength: float = Field(DEFAULT_WAVELENGTH_M, gt=0, description="Carrier wavelength (m)")
    beta: complex = Field(DEFAULT_BETA, description="Antenna/pattern constant of the gain law")

    @model_validator(mode="before")
    @classmethod
    def fill_radius_defaults(cls, data: Any) -> Any:
        """Radii default to four wavelengths."""
        if isinstance(data, dict):
            data = dict(data)
            wavelength = data.get("wavelength", DEFAULT_WAVELENGTH_M)
            if wavelength is not None and wavelength > 0:
                data.setdefault("radius_tx", default_radius(wavelength))
                data.setdefault("radius_rx", default_radius(wavelength))
        return data

    @field_validator("beta", mode="before")
    @classmethod
    def coerce_beta(cls, v: Any) -> complex:
        """Accept real or complex antenna constants."""
        value = complex(v)
        if not (np.isfinite(value.real) and np.isfinite(value.imag)):
            raise ValueError("beta must be finite")
        if value == 0:
            raise ValueError("beta must be nonzero")
        return value

    @classmethod
    def square(cls, n_elements: int, **kwargs: Any) -> "LinkGeometry":
        """Geometry with N = M elements on both arrays."""
        return cls(n_tx=n_elements, n_rx=n_elements, **kwargs)

    @property
    def is_square(self) -> bool:
        """Whether both arrays carry the same number of elements."""
        return self.n_tx == self.n_rx

    @property
    def wavenumber(self) -> float:
        """2*pi / wavelength."""
        return 2.0 * np.pi / self.wavelength

    def center_rx(self) -> np.ndarray:
        """Coordinate of the receive UCA centre."""
        return self.distance * np.array([
            np.sin(self.phi) * np.cos(self.theta),
            np.sin(self.phi) * np.sin(self.theta),
            np.cos(self.phi),
        ])

    def with_updates(self, **updates: Any) -> "LinkGeometry":
        """Return a validated copy with some fields replaced."""
        data = self.model_dump()
        data.update(updates)
        return LinkGeometry(**data)

    def to_record(self) -> Dict[str, Any]:
        """Flat, JSON-friendly description of the geometry."""
        record = self.model_dump()
        record["beta"] = [self.beta.real, self.beta.imag]
        return record
