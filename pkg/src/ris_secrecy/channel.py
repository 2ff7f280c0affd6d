"""Pathloss, Rician channel statistics and random channel draws."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (Position3D, UpaGeometry, departure_angles, distance,
                       steering_vector)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class PathlossModel:
    pl0: float  # linear gain at d0
    d0: float = 1.0
    alpha: float = 2.2

    def __post_init__(self):
        if not (self.pl0 > 0 and self.d0 > 0 and self.alpha > 0):
            raise ValueError(f"invalid pathloss parameters {self!r}")

    @classmethod
    def from_db(cls, pl0_db: float, d0: float = 1.0, alpha: float = 2.2) -> "PathlossModel":
        return cls(db_to_linear(pl0_db), d0, alpha)


@dataclass(frozen=True)
class RicianModel:
    k_factor: float

    def __post_init__(self):
        if not (math.isfinite(self.k_factor) and self.k_factor >= 0):
            raise ValueError("Rician K-factor must be finite and >= 0")

    @property
    def los_weight(self) -> float:
        """Power fraction K/(1+K) carried by the LOS component."""
        return self.k_factor / (1.0 + self.k_factor)

    @property
    def nlos_weight(self) -> float:
        return 1.0 / (1.0 + self.k_factor)


@dataclass(frozen=True)
class ChannelStatistics:
    """Mean and scaled-identity covariance of a Rician link vector."""

    mean: np.ndarray
    covariance_scale: float

    def __post_init__(self):
        if self.covariance_scale < 0:
            raise ValueError("covariance_scale must be >= 0")

    @property
    def covariance(self) -> np.ndarray:
        return self.covariance_scale * np.eye(self.mean.size)

    def second_moment(self) -> np.ndarray:
        """E{f f^H} = M_f + mean mean^H."""
        return self.covariance + np.outer(self.mean, self.mean.conj())


class RngStream:
    """Seeded random stream with deterministic, order-independent substreams.

    Substreams are keyed by integers (trial index, scheme code, ...) through
    :class:`numpy.random.SeedSequence` spawn keys, so a given key always
    yields the same draws regardless of how work is scheduled.
    """

    def __init__(self, seed: int = 0, _key: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.key = tuple(int(k) for k in _key)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.key)
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def substream(self, *key: int) -> "RngStream":
        return RngStream(self.seed, self.key + tuple(key))

    def complex_normal(self, shape) -> np.ndarray:
        """Standard circularly-symmetric complex Gaussian samples, CN(0, 1)."""
        g = self.generator
        return (g.standard_normal(shape) + 1j * g.standard_normal(shape)) / math.sqrt(2.0)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, key={self.key})"


def pathloss_gain(model: PathlossModel, d) -> float:
    """kappa = PL0 (d / d0)^-alpha. Accepts scalars or arrays."""
    d_arr = np.asarray(d, dtype=float)
    if np.any(d_arr <= 0):
        raise ValueError("pathloss distance must be positive")
    out = model.pl0 * (d_arr / model.d0) ** (-model.alpha)
    return float(out) if out.ndim == 0 else out


def channel_statistics(kappa: float, rician: RicianModel, los: np.ndarray) -> ChannelStatistics:
    los = np.asarray(los, dtype=complex)
    mean = math.sqrt(kappa * rician.los_weight) * los
    return ChannelStatistics(mean=mean, covariance_scale=kappa * rician.nlos_weight)


def sample_rician(stats: ChannelStatistics, rng: RngStream) -> np.ndarray:
    w = rng.complex_normal(stats.mean.shape)
    return stats.mean + math.sqrt(stats.covariance_scale) * w


def sample_rician_many(means: np.ndarray, scales: np.ndarray, rng: RngStream,
                       n_draws: int | None = None) -> np.ndarray:
    """Independent draws for many links at once.

    ``means`` is (M, L) and ``scales`` (M,). With ``n_draws`` the result is
    (n_draws, M, L), otherwise (M, L).
    """
    shape = means.shape if n_draws is None else (n_draws,) + means.shape
    w = rng.complex_normal(shape)
    return means + np.sqrt(scales)[:, None] * w


def bs_ris_los(bs_geom: UpaGeometry, ris_geom: UpaGeometry,
               p_bs: Position3D, p_ris: Position3D) -> np.ndarray:
    """Unit-Frobenius LOS matrix a_ris a_bs^H, shape (L, N)."""
    a_ris = steering_vector(ris_geom, departure_angles(p_ris, p_bs))
    a_bs = steering_vector(bs_geom, departure_angles(p_bs, p_ris))
    return np.outer(a_ris, a_bs.conj())


def sample_bs_ris(bs_geom: UpaGeometry, ris_geom: UpaGeometry, p_bs: Position3D,
                  p_ris: Position3D, model: PathlossModel, rician: RicianModel,
                  rng: RngStream) -> np.ndarray:
    """Draw the BS-RIS matrix H (L x N).

    H = sqrt(kappa) (sqrt(K/(1+K)) a_ris a_bs^H + sqrt(1/(1+K)) W), W_ij ~ CN(0, 1),
    so E||H||_F^2 = kappa (K + L N) / (1 + K).
    """
    kappa = pathloss_gain(model, distance(p_bs, p_ris))
    los = bs_ris_los(bs_geom, ris_geom, p_bs, p_ris)
    w = rng.complex_normal(los.shape)
    return math.sqrt(kappa) * (math.sqrt(rician.los_weight) * los
                               + math.sqrt(rician.nlos_weight) * w)


def expected_bs_ris_power(n_bs: int, n_ris: int, kappa: float, rician: RicianModel) -> float:
    """Closed-form E||H||_F^2 for :func:`sample_bs_ris`."""
    return kappa * (rician.k_factor + n_bs * n_ris) / (1.0 + rician.k_factor)
