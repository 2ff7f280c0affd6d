"""Monte-Carlo rate evaluation, power sweeps and spatial gain maps.

Every trial owns an :class:`RngStream` substream keyed by the trial index,
split further by purpose (BS-RIS draw, fading at each area, random
configuration). Results are therefore identical for any worker count.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .channel import RngStream, dbm_to_watt, pathloss_gain, sample_rician_many
from .geometry import PlanarArea, departure_angles_many, steering_vectors
from .optimizer import (AOConfig, alternating_optimize, random_config)
from .scenario import Scenario
from .spatial import QuadratureGrid

# substream purposes inside a trial
_H_STREAM, _RX_STREAM, _E_STREAM, _CONFIG_STREAM, _POSITION_STREAM = range(5)


class SchemeKind(str, Enum):
    PROPOSED = "proposed"
    RX_ONLY = "rx_only"
    RANDOM = "random"

    @property
    def code(self) -> int:
        return list(SchemeKind).index(self)


@dataclass(frozen=True)
class MonteCarloConfig:
    n_trials: int = 100
    base_seed: int = 0

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")

    def trial_stream(self, trial: int) -> RngStream:
        return RngStream(self.base_seed).substream(trial)


@dataclass
class RateMapGrid:
    area: PlanarArea
    nx: int
    ny: int
    rates: np.ndarray  # (nx, ny), bps/Hz

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        return self.area.cell_centers(self.nx, self.ny)


@dataclass
class PowerSweepResult:
    powers_dbm: list[float]
    rx_max: dict[SchemeKind, np.ndarray] = field(default_factory=dict)
    eve_max: dict[SchemeKind, np.ndarray] = field(default_factory=dict)

    @property
    def schemes(self) -> list[SchemeKind]:
        return list(self.rx_max)

    def gap(self, scheme: SchemeKind) -> np.ndarray:
        return self.rx_max[scheme] - self.eve_max[scheme]


@dataclass(frozen=True)
class SpatialEstimate:
    mean: float
    stderr: float
    n_samples: int
    min_secrecy: float  # smallest per-sample R_rx - R_e (before clamping)

    def __float__(self):
        return self.mean


def worker_count() -> int:
    try:
        n = int(os.environ.get("RIS_SECRECY_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


def _map_trials(fn, n_trials: int) -> list:
    workers = min(worker_count(), n_trials)
    if workers == 1:
        return [fn(t) for t in range(n_trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_trials)))


def link_rate(f, phi, h_matrix, v, noise_power):
    """log2(1 + |f^H Phi H v|^2 / s2).

    ``f`` may carry leading batch dimensions, e.g. (draws, positions, L).
    """
    g = np.asarray(phi) * (np.asarray(h_matrix) @ np.asarray(v))
    x = np.asarray(f).conj() @ g
    return np.log2(1.0 + np.abs(x) ** 2 / noise_power)


def _link_statistics(scenario: Scenario, points: np.ndarray):
    """Per-position channel means (M, L) and NLOS variances (M,)."""
    dist, el, az = departure_angles_many(scenario.p_ris, points)
    kappa = np.atleast_1d(pathloss_gain(scenario.pathloss, dist))
    los = steering_vectors(scenario.ris_geom, el, az)
    means = np.sqrt(kappa * scenario.rician.los_weight)[:, None] * los
    return means, kappa * scenario.rician.nlos_weight


def _draw_area_channels(scenario, points, rng, n_draws):
    means, scales = _link_statistics(scenario, points)
    return sample_rician_many(means, scales, rng, n_draws)


def configure(scheme: SchemeKind, scenario: Scenario, h_matrix: np.ndarray,
              transmit_power: float, ao_cfg: AOConfig, rng: RngStream,
              phi_init: np.ndarray | None = None):
    """(v, phi) for one scheme on one BS-RIS realisation."""
    sys = scenario.system(h_matrix, transmit_power)
    if scheme is SchemeKind.RANDOM:
        return random_config(sys, rng)
    if scheme is SchemeKind.RX_ONLY:
        sys = sys.without_eavesdropper()
    v, phi, _ = alternating_optimize(sys, ao_cfg, phi_init)
    return v, phi


def _secrecy_samples(scenario, h_matrix, v, phi, mc, grid):
    if scenario.area_rx.intersects(scenario.area_e):
        raise ValueError("areas must be disjoint")
    n = grid.n_cells

    def trial(t):
        rng = mc.trial_stream(t)
        pos = rng.substream(_POSITION_STREAM)
        p_rx = scenario.area_rx.sample_uniform(pos.generator, n)
        p_e = scenario.area_e.sample_uniform(pos.generator, n)
        h = _draw_area_channels(scenario, p_rx, rng.substream(_RX_STREAM), None)
        g = _draw_area_channels(scenario, p_e, rng.substream(_E_STREAM), None)
        r_rx = link_rate(h, phi, h_matrix, v, scenario.noise_power)
        r_e = link_rate(g, phi, h_matrix, v, scenario.noise_power)
        return r_rx, r_e

    out = _map_trials(trial, mc.n_trials)
    r_rx = np.concatenate([o[0] for o in out])
    r_e = np.concatenate([o[1] for o in out])
    return r_rx, r_e


def _estimate(samples: np.ndarray, diff: np.ndarray) -> SpatialEstimate:
    n = samples.size
    return SpatialEstimate(float(samples.mean()), float(samples.std(ddof=1) / math.sqrt(n)),
                           n, float(diff.min()))


def spatial_secrecy_mc(scenario: Scenario, h_matrix, v, phi, mc: MonteCarloConfig,
                       grid: QuadratureGrid) -> SpatialEstimate:
    """Clamped estimator: mean of [R_rx - R_e]^+ over random placements and fading.

    Each trial pairs ``grid.n_cells`` uniform RX positions with as many
    independent Eve positions.
    """
    r_rx, r_e = _secrecy_samples(scenario, h_matrix, v, phi, mc, grid)
    diff = r_rx - r_e
    return _estimate(np.maximum(diff, 0.0), diff)


def decomposed_secrecy(scenario: Scenario, h_matrix, v, phi, mc: MonteCarloConfig,
                       grid: QuadratureGrid) -> SpatialEstimate:
    """Difference of the two area-averaged rates, without the clamp. May be negative."""
    r_rx, r_e = _secrecy_samples(scenario, h_matrix, v, phi, mc, grid)
    diff = r_rx - r_e
    return _estimate(diff, diff)


def area_rate(scenario: Scenario, area: PlanarArea, h_matrix, v, phi,
              mc: MonteCarloConfig, grid: QuadratureGrid) -> SpatialEstimate:
    """Area-averaged expected rate of a single link (uniform placement)."""
    n = grid.n_cells

    def trial(t):
        rng = mc.trial_stream(t)
        pts = area.sample_uniform(rng.substream(_POSITION_STREAM).generator, n)
        f = _draw_area_channels(scenario, pts, rng.substream(_RX_STREAM), None)
        return link_rate(f, phi, h_matrix, v, scenario.noise_power)

    r = np.concatenate(_map_trials(trial, mc.n_trials))
    return _estimate(r, r)


def power_sweep(scenario: Scenario, schemes, powers_dbm, mc: MonteCarloConfig,
                ao_cfg: AOConfig | None = None, cells: QuadratureGrid | None = None,
                fading_draws: int = 10, max_mode: str = "per_trial",
                warm_start: bool = True) -> PowerSweepResult:
    """Maximum achievable rate over each area versus transmit power.

    Per trial one BS-RIS matrix and one set of per-cell fading draws are
    shared by all schemes and power levels. Optimised schemes are re-run at
    every power; with ``warm_start`` each run starts from the phase profile
    found at the previous (lower) power. The Random scheme draws one
    direction per trial and scales it to each power.

    ``max_mode`` chooses how the maximum is taken:
    ``"per_trial"`` -- max over cells of the fading-averaged rate, then mean over trials;
    ``"mean_map"`` -- mean over trials per cell, then max over cells.
    """
    ao_cfg = ao_cfg or AOConfig()
    cells = cells or QuadratureGrid(48, 30)
    schemes = [SchemeKind(s) for s in schemes]
    powers_dbm = [float(p) for p in powers_dbm]
    if max_mode not in ("per_trial", "mean_map"):
        raise ValueError(f"unknown max_mode {max_mode!r}")
    order = np.argsort(powers_dbm)
    pts_rx = scenario.area_rx.cell_points(cells.nx, cells.ny)
    pts_e = scenario.area_e.cell_points(cells.nx, cells.ny)
    scenario.correlations  # computed once, before any threads start

    def trial(t):
        rng = mc.trial_stream(t)
        H = scenario.draw_bs_ris(rng.substream(_H_STREAM))
        h = _draw_area_channels(scenario, pts_rx, rng.substream(_RX_STREAM), fading_draws)
        g = _draw_area_channels(scenario, pts_e, rng.substream(_E_STREAM), fading_draws)
        # per scheme: (n_powers, n_cells) fading-averaged rate maps
        maps = {}
        for s in schemes:
            m_rx = np.empty((len(powers_dbm), pts_rx.shape[0]))
            m_e = np.empty((len(powers_dbm), pts_e.shape[0]))
            phi_prev = None
            for k in order:
                pt = dbm_to_watt(powers_dbm[k])
                cfg_rng = rng.substream(_CONFIG_STREAM, s.code)
                v, phi = configure(s, scenario, H, pt, ao_cfg, cfg_rng,
                                   phi_prev if warm_start else None)
                if s is not SchemeKind.RANDOM:
                    phi_prev = phi
                m_rx[k] = link_rate(h, phi, H, v, scenario.noise_power).mean(axis=0)
                m_e[k] = link_rate(g, phi, H, v, scenario.noise_power).mean(axis=0)
            maps[s] = (m_rx, m_e)
        return maps

    per_trial = _map_trials(trial, mc.n_trials)
    result = PowerSweepResult(powers_dbm)
    for s in schemes:
        rx = np.stack([m[s][0] for m in per_trial])  # (trials, powers, cells)
        ev = np.stack([m[s][1] for m in per_trial])
        if max_mode == "per_trial":
            result.rx_max[s] = rx.max(axis=2).mean(axis=0)
            result.eve_max[s] = ev.max(axis=2).mean(axis=0)
        else:
            result.rx_max[s] = rx.mean(axis=0).max(axis=1)
            result.eve_max[s] = ev.mean(axis=0).max(axis=1)
    return result


def rate_heatmaps(schemes, scenario: Scenario, mc: MonteCarloConfig,
                  cells: QuadratureGrid | None = None, transmit_power_dbm: float = 35.0,
                  ao_cfg: AOConfig | None = None, fading_draws: int = 1):
    """Mean rate at every cell center of both areas, for several schemes.

    Within a trial each scheme's configuration is held fixed over both
    areas; schemes share the BS-RIS draw and the fading draws of the trial.
    Returns ``{scheme: (RateMapGrid rx, RateMapGrid eve)}``.
    """
    ao_cfg = ao_cfg or AOConfig()
    cells = cells or QuadratureGrid(48, 30)
    schemes = [SchemeKind(s) for s in schemes]
    pt = dbm_to_watt(transmit_power_dbm)
    pts_rx = scenario.area_rx.cell_points(cells.nx, cells.ny)
    pts_e = scenario.area_e.cell_points(cells.nx, cells.ny)
    scenario.correlations

    def trial(t):
        rng = mc.trial_stream(t)
        H = scenario.draw_bs_ris(rng.substream(_H_STREAM))
        h = _draw_area_channels(scenario, pts_rx, rng.substream(_RX_STREAM), fading_draws)
        g = _draw_area_channels(scenario, pts_e, rng.substream(_E_STREAM), fading_draws)
        out = {}
        for s in schemes:
            v, phi = configure(s, scenario, H, pt, ao_cfg, rng.substream(_CONFIG_STREAM, s.code))
            out[s] = (link_rate(h, phi, H, v, scenario.noise_power).mean(axis=0),
                      link_rate(g, phi, H, v, scenario.noise_power).mean(axis=0))
        return out

    per_trial = _map_trials(trial, mc.n_trials)
    maps = {}
    for s in schemes:
        rx = np.mean([o[s][0] for o in per_trial], axis=0).reshape(cells.nx, cells.ny)
        ev = np.mean([o[s][1] for o in per_trial], axis=0).reshape(cells.nx, cells.ny)
        maps[s] = (RateMapGrid(scenario.area_rx, cells.nx, cells.ny, rx),
                   RateMapGrid(scenario.area_e, cells.nx, cells.ny, ev))
    return maps


def rate_heatmap(scheme, scenario: Scenario, mc: MonteCarloConfig,
                 cells: QuadratureGrid | None = None, **kwargs):
    """Single-scheme wrapper around :func:`rate_heatmaps`."""
    scheme = SchemeKind(scheme)
    return rate_heatmaps([scheme], scenario, mc, cells, **kwargs)[scheme]


def gain_map(map_optimized: RateMapGrid, map_baseline: RateMapGrid) -> np.ndarray:
    """Per-cell percentage gain; cells with a zero baseline are NaN."""
    a, b = map_optimized.rates, map_baseline.rates
    if a.shape != b.shape or map_optimized.area != map_baseline.area:
        raise ValueError(f"rate maps are not aligned: {a.shape} vs {b.shape}")
    with np.errstate(divide="ignore", invalid="ignore"):
        g = 100.0 * (a - b) / b
    return np.where(b == 0, np.nan, g)


# --- CSV output -----------------------------------------------------------

def fmt(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "NaN"
    return f"{x:.9g}"


def write_power_sweep_csv(path, result: PowerSweepResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["power_dbm", "scheme", "rx_max_rate", "eve_max_rate"])
        for s in result.schemes:
            for k, p in enumerate(result.powers_dbm):
                w.writerow([fmt(p), s.value, fmt(result.rx_max[s][k]), fmt(result.eve_max[s][k])])


def write_grid_csv(path, area: PlanarArea, values: np.ndarray, column: str) -> None:
    nx, ny = values.shape
    xs, ys = area.cell_centers(nx, ny)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x_m", "y_m", column])
        for i in range(nx):
            for j in range(ny):
                w.writerow([fmt(xs[i]), fmt(ys[j]), fmt(values[i, j])])


def write_rate_map_csv(path, grid: RateMapGrid) -> None:
    write_grid_csv(path, grid.area, grid.rates, "rate_bpshz")


def write_gain_csv(path, area: PlanarArea, gains: np.ndarray) -> None:
    write_grid_csv(path, area, gains, "gain_percent")
