"""Node placement, rectangular areas and UPA steering vectors.

The RIS lies parallel to the yz plane. Angles of departure toward a node
are measured from the RIS with

    elevation = arccos((x_ris - x_i) / D)
    azimuth   = atan2(y_ris - y_i, z_ris - z_i)

and the per-element phase of the line-of-sight response uses the
row-major (vertical-major) element ordering of a Kronecker UPA.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Position3D:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.x, self.y, self.z)):
            raise ValueError(f"non-finite coordinate in {self!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_sequence(cls, seq) -> "Position3D":
        x, y, z = (float(c) for c in seq)
        return cls(x, y, z)


@dataclass(frozen=True)
class PlanarArea:
    """Axis-aligned rectangle at a fixed height.

    ``width`` is the extent along x and ``length`` the extent along y.
    """

    center_x: float
    center_y: float
    width: float
    length: float
    z: float

    def __post_init__(self):
        vals = (self.center_x, self.center_y, self.width, self.length, self.z)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite field in {self!r}")
        if self.width <= 0 or self.length <= 0:
            raise ValueError("area width and length must be positive")

    def measure(self) -> float:
        return self.width * self.length

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        """(x_min, x_max, y_min, y_max)."""
        hw, hl = 0.5 * self.width, 0.5 * self.length
        return (self.center_x - hw, self.center_x + hw,
                self.center_y - hl, self.center_y + hl)

    def intersects(self, other: "PlanarArea") -> bool:
        """True when the open rectangles overlap (shared edges do not count)."""
        ax0, ax1, ay0, ay1 = self.bounds
        bx0, bx1, by0, by1 = other.bounds
        return ax0 < bx1 and bx0 < ax1 and ay0 < by1 and by0 < ay1

    def cell_centers(self, nx: int, ny: int) -> tuple[np.ndarray, np.ndarray]:
        """Midpoints of an ``nx`` x ``ny`` partition, as 1-D x and y arrays."""
        x0, x1, y0, y1 = self.bounds
        xs = x0 + (np.arange(nx) + 0.5) * (x1 - x0) / nx
        ys = y0 + (np.arange(ny) + 0.5) * (y1 - y0) / ny
        return xs, ys

    def cell_points(self, nx: int, ny: int) -> np.ndarray:
        """Cell centers as an (nx*ny, 3) array, x-major (x index varies slowest)."""
        xs, ys = self.cell_centers(nx, ny)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        return np.column_stack([gx.ravel(), gy.ravel(), np.full(gx.size, self.z)])

    def sample_uniform(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """``n`` points drawn uniformly over the rectangle, shape (n, 3)."""
        x0, x1, y0, y1 = self.bounds
        xs = rng.uniform(x0, x1, n)
        ys = rng.uniform(y0, y1, n)
        return np.column_stack([xs, ys, np.full(n, self.z)])


@dataclass(frozen=True)
class UpaGeometry:
    n_vertical: int
    n_horizontal: int
    spacing_ratio: float = 0.5

    def __post_init__(self):
        if self.n_vertical < 1 or self.n_horizontal < 1:
            raise ValueError("UPA dimensions must be >= 1")
        if not self.spacing_ratio > 0:
            raise ValueError("spacing_ratio must be positive")

    @property
    def n_elements(self) -> int:
        return self.n_vertical * self.n_horizontal


@dataclass(frozen=True)
class AnglePair:
    elevation: float
    azimuth: float

    def __post_init__(self):
        if not (math.isfinite(self.elevation) and math.isfinite(self.azimuth)):
            raise ValueError("angles must be finite")
        if not 0.0 <= self.elevation <= math.pi:
            raise ValueError(f"elevation {self.elevation} outside [0, pi]")


def distance(p: Position3D, q: Position3D) -> float:
    return math.dist((p.x, p.y, p.z), (q.x, q.y, q.z))


def departure_angles(p_ris: Position3D, p_i: Position3D) -> AnglePair:
    d = distance(p_ris, p_i)
    if d == 0.0:
        raise ValueError("departure angles undefined for coincident points")
    cos_el = min(1.0, max(-1.0, (p_ris.x - p_i.x) / d))
    return AnglePair(math.acos(cos_el), math.atan2(p_ris.y - p_i.y, p_ris.z - p_i.z))


def departure_angles_many(p_ris: Position3D, points: np.ndarray):
    """Vectorised :func:`departure_angles` for an (M, 3) array of points.

    Returns ``(dist, elevation, azimuth)`` arrays of length M.
    """
    diff = p_ris.as_array()[None, :] - np.asarray(points, dtype=float)
    dist = np.linalg.norm(diff, axis=1)
    if np.any(dist == 0.0):
        raise ValueError("departure angles undefined for coincident points")
    elevation = np.arccos(np.clip(diff[:, 0] / dist, -1.0, 1.0))
    azimuth = np.arctan2(diff[:, 1], diff[:, 2])
    return dist, elevation, azimuth


def _element_indices(geom: UpaGeometry) -> tuple[np.ndarray, np.ndarray]:
    ell = np.arange(geom.n_elements)  # zero-based, i.e. ell - 1
    vert = ell // geom.n_horizontal
    horiz = ell - vert * geom.n_horizontal
    return vert, horiz


def steering_vector(geom: UpaGeometry, angles: AnglePair) -> np.ndarray:
    """Unit-norm UPA response, entry l = exp(j 2 pi (d/lambda) xi_l) / sqrt(L)."""
    return steering_vectors(geom, np.array([angles.elevation]),
                            np.array([angles.azimuth]))[0]


def steering_vectors(geom: UpaGeometry, elevation, azimuth) -> np.ndarray:
    """Steering vectors for M angle pairs, shape (M, L)."""
    elevation = np.atleast_1d(np.asarray(elevation, dtype=float))
    azimuth = np.atleast_1d(np.asarray(azimuth, dtype=float))
    vert, horiz = _element_indices(geom)
    s = np.sin(elevation)
    xi = (np.outer(s * np.cos(azimuth), vert)
          + np.outer(s * np.sin(azimuth), horiz))
    return np.exp(2j * np.pi * geom.spacing_ratio * xi) / math.sqrt(geom.n_elements)
