"""
Element coordinates and pairwise distances for misaligned UCAs.

Element indices are 1-based in the public single-element functions and
0-based in the vectorised helpers; `zero_based_index` is the only conversion point.
Receive coordinates always come from the rotation-matrix construction.
"""
import logging

import numpy as np

from .config import MIN_ELEMENT_DISTANCE_M
from .exceptions import DegenerateGeometryError, IndexOutOfRangeError
from .schemas import LinkGeometry, Point3

logger = logging.getLogger(__name__)


def zero_based_index(index: int, count: int, name: str) -> int:
    if not 1 <= int(index) <= count:
        raise IndexOutOfRangeError(name, int(index), count)
    return int(index) - 1


def element_angles(count: int, offset: float = 0.0) -> np.ndarray:
    """Azimuth 2*pi*(k-1)/count + offset of every element on a UCA."""
    return 2.0 * np.pi * np.arange(count) / count + offset


def rotation_x(angle: float) -> np.ndarray:
    """
    Attitude matrix about the x-axis.

    Args:
        angle: Rotation angle (rad)

    Returns:
        ndarray: [[1, 0, 0], [0, cos, sin], [0, -sin, cos]]
    """
    c, s = np.cos(angle), np.sin(angle)
    return np.array([
        [1.0, 0.0, 0.0],
        [0.0, c, s],
        [0.0, -s, c],
    ])


def rotation_y(angle: float) -> np.ndarray:
    """
    Attitude matrix about the y-axis.

    Args:
        angle: Rotation angle (rad)

    Returns:
        ndarray: [[cos, 0, -sin], [0, 1, 0], [sin, 0, cos]]
    """
    c, s = np.cos(angle), np.sin(angle)
    return np.array([
        [c, 0.0, -s],
        [0.0, 1.0, 0.0],
        [s, 0.0, c],
    ])


def receive_attitude(tilt_x: float, tilt_y: float) -> np.ndarray:
    """
    Orientation of the receive plane relative to the transmit plane.

    Equals [rotation_x(-tilt_x) rotation_y(-tilt_y)]^T, the composition
    whose element coordinates match the closed-form receive coordinates.
    """
    return rotation_y(tilt_y) @ rotation_x(tilt_x)


def tx_positions(geom: LinkGeometry) -> np.ndarray:
    """All transmit element coordinates, shape (N, 3)."""
    angles = element_angles(geom.n_tx, geom.alpha_tx)
    return np.column_stack((
        geom.radius_tx * np.cos(angles),
        geom.radius_tx * np.sin(angles),
        np.zeros(geom.n_tx),
    ))


def rx_offsets(geom: LinkGeometry) -> np.ndarray:
    """Receive element coordinates relative to the receive centre, shape (M, 3)."""
    angles = element_angles(geom.n_rx, geom.alpha_rx)
    local = np.column_stack((
        geom.radius_rx * np.cos(angles),
        geom.radius_rx * np.sin(angles),
        np.zeros(geom.n_rx),
    ))
    return local @ receive_attitude(geom.tilt_x, geom.tilt_y).T


def rx_positions(geom: LinkGeometry) -> np.ndarray:
    """All receive element coordinates, shape (M, 3)."""
    return rx_offsets(geom) + geom.center_rx()


def distance_excess(geom: LinkGeometry) -> np.ndarray:
    """
    d_mn - d for every element pair, shape (M, N).

    Evaluated as s / (d + sqrt(d^2 + s)) with s = |delta|^2 + 2 c.delta,
    delta = rx offset - tx position, so the small excess keeps full relative
    precision even when d is many wavelengths.
    """
    center = geom.center_rx()
    delta = rx_offsets(geom)[:, None, :] - tx_positions(geom)[None, :, :]
    s = np.einsum("mnk,mnk->mn", delta, delta) + 2.0 * (delta @ center)
    d = geom.distance
    radicand = np.maximum(d * d + s, 0.0)
    return s / (d + np.sqrt(radicand))


def checked_distance_excess(geom: LinkGeometry) -> np.ndarray:
    """
    distance_excess after verifying that no element pair (nearly) coincides.

    Raises:
        DegenerateGeometryError: If any pair is closer than 1e-9 m
    """
    excess = distance_excess(geom)
    distances = geom.distance + excess
    closest = np.unravel_index(np.argmin(distances), distances.shape)
    if distances[closest] < MIN_ELEMENT_DISTANCE_M:
        pair = (int(closest[0]) + 1, int(closest[1]) + 1)
        raise DegenerateGeometryError(pair, float(distances[closest]))
    logger.debug(
        "Distances for %dx%d geometry span %.6g..%.6g m",
        geom.n_rx, geom.n_tx, distances.min(), distances.max()
    )
    return excess


def distance_matrix(geom: LinkGeometry) -> np.ndarray:
    """
    Pairwise distances d_mn between receive element m and transmit element n.

    Returns:
        ndarray: Real matrix of shape (M, N)

    Raises:
        DegenerateGeometryError: If any pair is closer than 1e-9 m
    """
    return geom.distance + checked_distance_excess(geom)


def tx_element_position(geom: LinkGeometry, n: int) -> Point3:
    """Coordinate of transmit element n (1-based)."""
    index = zero_based_index(n, geom.n_tx, "n")
    angle = element_angles(geom.n_tx, geom.alpha_tx)[index]
    return Point3(
        x=geom.radius_tx * np.cos(angle),
        y=geom.radius_tx * np.sin(angle),
        z=0.0,
    )


def rx_element_position(geom: LinkGeometry, m: int) -> Point3:
    """Coordinate of receive element m (1-based)."""
    index = zero_based_index(m, geom.n_rx, "m")
    return Point3.from_array(rx_positions(geom)[index])


def element_distance(geom: LinkGeometry, m: int, n: int) -> float:
    """
    Distance between receive element m and transmit element n (1-based).

    Raises:
        IndexOutOfRangeError: For indices outside the arrays
        DegenerateGeometryError: If the elements are closer than 1e-9 m
    """
    row = zero_based_index(m, geom.n_rx, "m")
    col = zero_based_index(n, geom.n_tx, "n")
    distance = float(geom.distance + distance_excess(geom)[row, col])
    if distance < MIN_ELEMENT_DISTANCE_M:
        raise DegenerateGeometryError((m, n), distance)
    return distance
