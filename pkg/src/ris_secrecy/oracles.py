"""Brute-force reference computations for small instances.

These deliberately avoid the optimizer and quadrature code paths: they
enumerate grids, sample at random, or spell the algebra out by hand. Used
by the test-suite and by the ``selftest`` command.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .channel import PathlossModel, RicianModel, RngStream
from .geometry import PlanarArea, Position3D, UpaGeometry


def explicit_objective_2x2(v, phi, sys) -> float:
    """Objective for N = L = 2 with every product written out as scalars."""
    H = sys.h_matrix
    g0 = phi[0] * (H[0, 0] * v[0] + H[0, 1] * v[1])
    g1 = phi[1] * (H[1, 0] * v[0] + H[1, 1] * v[1])

    def form(J):
        return (np.conj(g0) * J[0, 0] * g0 + np.conj(g0) * J[0, 1] * g1
                + np.conj(g1) * J[1, 0] * g0 + np.conj(g1) * J[1, 1] * g1).real

    num = 1 + form(sys.j_rx) / (sys.noise_power * sys.s_rx)
    den = 1 + form(sys.j_e) / (sys.noise_power * sys.s_e)
    return math.log2(num / den)


def unit_directions_c2(n_alpha: int = 100, n_beta: int = 100) -> np.ndarray:
    """Grid of unit vectors (cos a, sin a e^{jb}) in C^2, shape (n_alpha*n_beta, 2).

    Covers every direction up to a global phase, which the objective ignores.
    """
    a = np.linspace(0.0, 0.5 * np.pi, n_alpha)
    b = np.linspace(0.0, 2 * np.pi, n_beta, endpoint=False)
    A, B = np.meshgrid(a, b, indexing="ij")
    return np.column_stack([np.cos(A).ravel(), (np.sin(A) * np.exp(1j * B)).ravel()])


def _objective_over_directions(B, sys, dirs):
    """Objective for Phi H = B and every precoder in ``dirs`` (already power-scaled)."""
    g = dirs @ B.T  # (K, L)
    q_rx = np.einsum("ki,ij,kj->k", g.conj(), sys.j_rx, g).real
    q_e = np.einsum("ki,ij,kj->k", g.conj(), sys.j_e, g).real
    return np.log2((1 + q_rx / (sys.noise_power * sys.s_rx))
                   / (1 + q_e / (sys.noise_power * sys.s_e)))


def precoder_grid_best(phi, sys, n_alpha: int = 100, n_beta: int = 100):
    """Best objective over a grid of N = 2 precoders on the power sphere."""
    dirs = math.sqrt(sys.transmit_power) * unit_directions_c2(n_alpha, n_beta)
    vals = _objective_over_directions(phi[:, None] * sys.h_matrix, sys, dirs)
    k = int(np.argmax(vals))
    return float(vals[k]), dirs[k]


def joint_grid_best(sys, n_alpha: int = 100, n_beta: int = 100, n_phase: int = 60) -> float:
    """Exhaustive optimum for N = L = 2: precoder grid x (theta1, theta2) grid."""
    dirs = math.sqrt(sys.transmit_power) * unit_directions_c2(n_alpha, n_beta)
    thetas = np.linspace(0.0, 2 * np.pi, n_phase, endpoint=False)
    best = -np.inf
    for t1 in thetas:
        for t2 in thetas:
            phi = np.exp(1j * np.array([t1, t2]))
            vals = _objective_over_directions(phi[:, None] * sys.h_matrix, sys, dirs)
            best = max(best, float(vals.max()))
    return best


def phase_grid_max(d: np.ndarray, n_phase: int = 60) -> float:
    """max Re{d^H phi} over a (theta1, theta2) grid for L = 2."""
    thetas = np.linspace(0.0, 2 * np.pi, n_phase, endpoint=False)
    T1, T2 = np.meshgrid(thetas, thetas, indexing="ij")
    vals = (np.conj(d[0]) * np.exp(1j * T1) + np.conj(d[1]) * np.exp(1j * T2)).real
    return float(vals.max())


def pathloss_integral(area: PlanarArea, p_ris: Position3D, model: PathlossModel) -> float:
    """Adaptive 2-D quadrature of the pathloss gain over the area."""
    x0, x1, y0, y1 = area.bounds

    def kappa(y, x):
        d = math.sqrt((p_ris.x - x) ** 2 + (p_ris.y - y) ** 2 + (p_ris.z - area.z) ** 2)
        return model.pl0 * (d / model.d0) ** (-model.alpha)

    val, _ = integrate.dblquad(kappa, x0, x1, y0, y1, epsabs=0.0, epsrel=1e-10)
    return val


def monte_carlo_correlation(area: PlanarArea, p_ris: Position3D, ris_geom: UpaGeometry,
                            model: PathlossModel, rician: RicianModel,
                            n_points: int, rng: RngStream, chunk: int = 200_000) -> np.ndarray:
    """Correlation matrix from uniform random points.

    Entry (l, m) of a_p a_p^H only depends on the element offsets
    (dv, dh) = (v_l - v_m, h_l - h_m), so the sample sum is accumulated on
    the offset lattice and scattered into the L x L matrix at the end.
    """
    Lv, Lh = ris_geom.n_vertical, ris_geom.n_horizontal
    L = Lv * Lh
    dv = np.arange(-(Lv - 1), Lv)
    dh = np.arange(-(Lh - 1), Lh)
    acc = np.zeros((dv.size, dh.size), dtype=complex)
    kappa_sum = 0.0
    done = 0
    x0, x1, y0, y1 = area.bounds
    while done < n_points:
        m = min(chunk, n_points - done)
        x = rng.generator.uniform(x0, x1, m)
        y = rng.generator.uniform(y0, y1, m)
        dx, dy, dz = p_ris.x - x, p_ris.y - y, p_ris.z - area.z
        D = np.sqrt(dx**2 + dy**2 + dz**2)
        kap = model.pl0 * (D / model.d0) ** (-model.alpha)
        sin_el = np.sqrt(np.maximum(0.0, 1.0 - (dx / D) ** 2))
        az = np.arctan2(dy, dz)
        u = 2 * np.pi * ris_geom.spacing_ratio * sin_el * np.cos(az)
        w = 2 * np.pi * ris_geom.spacing_ratio * sin_el * np.sin(az)
        ev = np.exp(1j * np.outer(dv, u))      # (2Lv-1, m)
        eh = np.exp(1j * np.outer(dh, w))      # (2Lh-1, m)
        acc += (ev * kap) @ eh.T
        kappa_sum += kap.sum()
        done += m
    scale = area.measure() / n_points
    vi = np.arange(L) // Lh
    hi = np.arange(L) % Lh
    off_v = vi[:, None] - vi[None, :] + (Lv - 1)
    off_h = hi[:, None] - hi[None, :] + (Lh - 1)
    los = acc[off_v, off_h] / L
    return scale * (rician.los_weight * los + rician.nlos_weight * kappa_sum * np.eye(L))
