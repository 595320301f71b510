"""
Exception hierarchy shared by the link simulator packages.
"""
from typing import Optional, Tuple


class LinkModelError(Exception):
    """Base class for link simulator exceptions."""
    pass


class GeometryError(LinkModelError):
    """Raised when an array geometry cannot be evaluated."""
    pass


class IndexOutOfRangeError(GeometryError):
    """Raised when an element index lies outside 1..count."""

    def __init__(self, name: str, index: int, count: int):
        self.name = name
        self.index = index
        self.count = count
        super().__init__(f"{name}={index} outside valid range 1..{count}")


class DegenerateGeometryError(GeometryError):
    """Raised when a transmit and a receive element (nearly) coincide."""

    def __init__(self, pair: Tuple[int, int], distance: float, message: Optional[str] = None):
        self.pair = pair
        self.distance = distance
        m, n = pair
        super().__init__(
            message or f"Degenerate geometry: rx element {m} and tx element {n} "
                       f"are {distance:.3e} m apart"
        )
