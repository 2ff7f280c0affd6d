"""Area-integrated channel correlation matrices.

For a rectangular placement area S the correlation matrix is

    J = integral over S of (M_f(p) + mean_f(p) mean_f(p)^H) dA

evaluated with the midpoint rule on a regular grid. No 1/|S| density is
applied here; callers divide by the area measure where needed.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .channel import PathlossModel, RicianModel, pathloss_gain
from .geometry import (PlanarArea, Position3D, UpaGeometry,
                       departure_angles_many, steering_vectors)


@dataclass(frozen=True)
class QuadratureGrid:
    nx: int = 64
    ny: int = 64

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("quadrature grid needs at least one cell per axis")

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny


def area_measure(area: PlanarArea) -> float:
    return area.measure()


def second_moment_at(points: np.ndarray, p_ris: Position3D, ris_geom: UpaGeometry,
                     model: PathlossModel, rician: RicianModel,
                     weights: np.ndarray | None = None) -> np.ndarray:
    """Weighted sum of E{f f^H} over an (M, 3) array of receiver positions."""
    dist, el, az = departure_angles_many(p_ris, points)
    kappa = pathloss_gain(model, dist)
    kappa = np.atleast_1d(kappa)
    if weights is not None:
        kappa = kappa * weights
    a = steering_vectors(ris_geom, el, az)  # (M, L)
    L = ris_geom.n_elements
    # sum_p kappa_p (K/(1+K) a_p a_p^H + 1/(1+K) I)
    los = (a * (rician.los_weight * kappa)[:, None]).T @ a.conj()
    return los + rician.nlos_weight * kappa.sum() * np.eye(L)


def compute_correlation(area: PlanarArea, grid: QuadratureGrid, p_ris: Position3D,
                        ris_geom: UpaGeometry, model: PathlossModel,
                        rician: RicianModel) -> np.ndarray:
    """Midpoint-rule approximation of the area correlation matrix (L x L)."""
    points = area.cell_points(grid.nx, grid.ny)
    cell_area = area.measure() / grid.n_cells
    J = cell_area * second_moment_at(points, p_ris, ris_geom, model, rician)
    return 0.5 * (J + J.conj().T)


def check_correlation(J: np.ndarray) -> None:
    """Raise ValueError if J violates Hermitian / PSD / positive-trace invariants."""
    norm = np.linalg.norm(J)
    if np.linalg.norm(J - J.conj().T) > 1e-12 * norm:
        raise ValueError("correlation matrix is not Hermitian")
    tr = np.trace(J).real
    if not tr > 0:
        raise ValueError("correlation matrix must have positive trace")
    if np.linalg.eigvalsh(J)[0] < -1e-10 * tr:
        raise ValueError("correlation matrix is not positive semi-definite")


def correlation_key(area: PlanarArea, grid: QuadratureGrid, p_ris: Position3D,
                    ris_geom: UpaGeometry, model: PathlossModel,
                    rician: RicianModel) -> str:
    """Short content hash identifying a correlation matrix computation."""
    blob = json.dumps([asdict(area), asdict(grid), asdict(p_ris), asdict(ris_geom),
                       asdict(model), asdict(rician)], sort_keys=True)
    return hashlib.sha1(blob.encode()).hexdigest()[:16]


def save_correlation(path, J: np.ndarray, grid: QuadratureGrid, key: str) -> None:
    """Write J as text: one header line, then L rows of interleaved re/im pairs."""
    L = J.shape[0]
    rows = np.empty((L, 2 * L))
    rows[:, 0::2] = J.real
    rows[:, 1::2] = J.imag
    header = f"L={L} nx={grid.nx} ny={grid.ny} area={key}"
    np.savetxt(path, rows, fmt="%.17g", header=header)


def load_correlation(path, expect_key: str | None = None) -> np.ndarray:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().lstrip("#").split()
    meta = dict(item.split("=", 1) for item in header)
    if expect_key is not None and meta.get("area") != expect_key:
        raise ValueError(f"cached correlation {path} does not match the requested area")
    rows = np.loadtxt(path, ndmin=2)
    L = int(meta["L"])
    if rows.shape != (L, 2 * L):
        raise ValueError(f"cached correlation {path} has shape {rows.shape}, expected {(L, 2 * L)}")
    return rows[:, 0::2] + 1j * rows[:, 1::2]
