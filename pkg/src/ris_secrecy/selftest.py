"""Small-scale oracle checks behind ``ris-secrecy selftest``."""

from __future__ import annotations

import numpy as np

from . import oracles
from .channel import PathlossModel, RicianModel, RngStream
from .geometry import PlanarArea, Position3D, UpaGeometry
from .optimizer import (AOConfig, SystemMatrices, alternating_optimize, mm_direction,
                        mm_step, objective_rate, optimize_precoder, phase_quadratics,
                        quadratic_ratio)
from .spatial import QuadratureGrid, compute_correlation


def random_psd(rng: RngStream, n: int, rank: int | None = None) -> np.ndarray:
    A = rng.complex_normal((n, rank or n))
    return A @ A.conj().T


def small_system(seed: int, N: int = 2, L: int = 2, power: float = 1.0) -> SystemMatrices:
    rng = RngStream(seed)
    return SystemMatrices(h_matrix=rng.complex_normal((L, N)),
                          j_rx=random_psd(rng, L), j_e=random_psd(rng, L),
                          noise_power=0.5, s_rx=1.5, s_e=2.0, transmit_power=power)


def _check(name, ok, detail) -> bool:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return bool(ok)


def run_selftest() -> bool:
    results = []
    sys_ = small_system(11)
    rng = RngStream(12)

    v = rng.complex_normal(2)
    v *= np.sqrt(sys_.transmit_power) / np.linalg.norm(v)
    phi = np.exp(1j * rng.generator.uniform(0, 2 * np.pi, 2))
    a, b = objective_rate(v, phi, sys_), oracles.explicit_objective_2x2(v, phi, sys_)
    results.append(_check("objective vs scalar arithmetic", abs(a - b) < 1e-10, f"|diff|={abs(a - b):.2e}"))

    q_rx, q_e = phase_quadratics(v, sys_)
    c = np.log2(quadratic_ratio(phi, q_rx, q_e))
    results.append(_check("objective vs phase-quadratic form", abs(a - c) < 1e-10, f"|diff|={abs(a - c):.2e}"))

    v_opt = optimize_precoder(phi, sys_)
    best, _ = oracles.precoder_grid_best(phi, sys_)
    got = objective_rate(v_opt, phi, sys_)
    results.append(_check("precoder vs direction grid", got >= best - 1e-3, f"{got:.6f} vs grid {best:.6f}"))

    d = mm_direction(phi, q_rx, q_e)
    nxt = mm_step(phi, q_rx, q_e)
    lin = float(np.real(np.vdot(d, nxt)))
    gmax = oracles.phase_grid_max(d)
    results.append(_check("MM step vs phase grid", lin >= gmax - 1e-6, f"{lin:.6f} vs grid {gmax:.6f}"))

    v_ao, phi_ao, tr = alternating_optimize(sys_, AOConfig())
    got = objective_rate(v_ao, phi_ao, sys_)
    joint = oracles.joint_grid_best(sys_, 40, 40, 24)
    results.append(_check("AO vs joint grid (coarse)", got >= joint - 1e-2 and tr.is_monotone(),
                          f"{got:.6f} vs grid {joint:.6f}, {tr.iterations_used} iterations"))

    area = PlanarArea(-3.0, 4.0, 4.0, 3.0, 1.0)
    p_ris = Position3D(0.0, 10.0, 3.0)
    geom = UpaGeometry(2, 2)
    model, rician = PathlossModel.from_db(-30.0), RicianModel(5.0)
    J = compute_correlation(area, QuadratureGrid(64, 64), p_ris, geom, model, rician)
    ref = (4 + 5.0) / 6.0 * oracles.pathloss_integral(area, p_ris, model)
    err = abs(np.trace(J).real - ref) / ref
    results.append(_check("J trace identity", err < 5e-3, f"rel err {err:.2e}"))
    J_mc = oracles.monte_carlo_correlation(area, p_ris, geom, model, rician, 200_000, RngStream(5))
    err = np.linalg.norm(J - J_mc) / np.linalg.norm(J_mc)
    results.append(_check("J vs Monte-Carlo integration", err < 1e-2, f"rel Frobenius err {err:.2e}"))

    ok = all(results)
    print("selftest", "passed" if ok else "FAILED")
    return ok
