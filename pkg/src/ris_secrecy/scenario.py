"""Physical deployment: node positions, arrays, areas and propagation models."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .channel import (PathlossModel, RicianModel, RngStream, dbm_to_watt,
                      sample_bs_ris)
from .geometry import PlanarArea, Position3D, UpaGeometry
from .optimizer import SystemMatrices
from .spatial import QuadratureGrid, compute_correlation


@dataclass(frozen=True)
class Scenario:
    p_bs: Position3D
    p_ris: Position3D
    bs_geom: UpaGeometry
    ris_geom: UpaGeometry
    area_rx: PlanarArea
    area_e: PlanarArea
    pathloss: PathlossModel           # RIS -> RX / Eve links
    rician: RicianModel
    noise_power: float                # W
    pathloss_bs: PathlossModel | None = None  # BS -> RIS; defaults to ``pathloss``
    rician_bs: RicianModel | None = None
    correlation_grid: QuadratureGrid = field(default_factory=QuadratureGrid)

    def __post_init__(self):
        if not self.noise_power > 0:
            raise ValueError("noise power must be positive")
        if self.area_rx.intersects(self.area_e):
            raise ValueError("areas must be disjoint")
        if self.area_rx.z != self.area_e.z:
            raise ValueError("both areas must share the same receiver height")

    @property
    def link_pathloss_bs(self) -> PathlossModel:
        return self.pathloss_bs or self.pathloss

    @property
    def link_rician_bs(self) -> RicianModel:
        return self.rician_bs or self.rician

    @property
    def n_antennas(self) -> int:
        return self.bs_geom.n_elements

    @property
    def n_elements(self) -> int:
        return self.ris_geom.n_elements

    @cached_property
    def correlations(self) -> tuple[np.ndarray, np.ndarray]:
        """(J_rx, J_e), computed once per scenario."""
        return tuple(
            compute_correlation(area, self.correlation_grid, self.p_ris, self.ris_geom,
                                self.pathloss, self.rician)
            for area in (self.area_rx, self.area_e))

    def draw_bs_ris(self, rng: RngStream) -> np.ndarray:
        return sample_bs_ris(self.bs_geom, self.ris_geom, self.p_bs, self.p_ris,
                             self.link_pathloss_bs, self.link_rician_bs, rng)

    def system(self, h_matrix: np.ndarray, transmit_power: float) -> SystemMatrices:
        j_rx, j_e = self.correlations
        return SystemMatrices(h_matrix=h_matrix, j_rx=j_rx, j_e=j_e,
                              noise_power=self.noise_power,
                              s_rx=self.area_rx.measure(), s_e=self.area_e.measure(),
                              transmit_power=transmit_power)


def reference_scenario(**overrides) -> Scenario:
    """The reference deployment: BS at (0, 0, 7.5), RIS at (0, 50, 3), 24 x 15 m areas."""
    z = 1.5
    params = dict(
        p_bs=Position3D(0.0, 0.0, 7.5),
        p_ris=Position3D(0.0, 50.0, 3.0),
        bs_geom=UpaGeometry(4, 4, 0.5),
        ris_geom=UpaGeometry(10, 15, 0.5),
        area_rx=PlanarArea(-15.0, 30.0, 24.0, 15.0, z),
        area_e=PlanarArea(15.0, 27.5, 24.0, 15.0, z),
        pathloss=PathlossModel.from_db(-30.0, 1.0, 2.2),
        rician=RicianModel(13.2),
        noise_power=dbm_to_watt(-105.0),
    )
    params.update(overrides)
    return Scenario(**params)
