"""Alternating optimisation of the BS precoder and the RIS phase profile.

The objective is the area-averaged secrecy rate approximation

    R(v, phi) = log2( (1 + v^H H^H Phi^H J_rx Phi H v / (s2 S_rx))
                    / (1 + v^H H^H Phi^H J_e  Phi H v / (s2 S_e )) )

For fixed phi the optimal v is the principal generalized eigenvector of the
pencil (P_rx, P_e). For fixed v the objective is the ratio of two quadratic
forms in phi, increased with minorization-maximization steps that keep
every element on the unit circle.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .channel import RngStream

log = logging.getLogger(__name__)

# Acceptance slack for the safeguarded phase update.
RATIO_TOL = 1e-12
# Absolute floor on the outer convergence test (objective ~ 0 cases).
ABS_TOL = 1e-12


class NumericalError(RuntimeError):
    """Raised when a linear-algebra step fails or loses accuracy."""


@dataclass(frozen=True)
class SystemMatrices:
    h_matrix: np.ndarray  # (L, N)
    j_rx: np.ndarray      # (L, L)
    j_e: np.ndarray       # (L, L)
    noise_power: float
    s_rx: float
    s_e: float
    transmit_power: float

    def __post_init__(self):
        if not self.noise_power > 0:
            raise ValueError("noise_power must be positive")
        if not self.transmit_power > 0:
            raise ValueError("transmit_power must be positive")
        if not (self.s_rx > 0 and self.s_e > 0):
            raise ValueError("area measures must be positive")
        L, _ = self.h_matrix.shape
        if self.j_rx.shape != (L, L) or self.j_e.shape != (L, L):
            raise ValueError("correlation matrices must be L x L with L = H.shape[0]")

    @property
    def n_antennas(self) -> int:
        return self.h_matrix.shape[1]

    @property
    def n_elements(self) -> int:
        return self.h_matrix.shape[0]

    def with_power(self, transmit_power: float) -> "SystemMatrices":
        return replace(self, transmit_power=transmit_power)

    def without_eavesdropper(self) -> "SystemMatrices":
        return replace(self, j_e=np.zeros_like(self.j_e))


@dataclass(frozen=True)
class AOConfig:
    epsilon: float = 1e-5
    max_outer: int = 200
    max_inner_mm: int = 1000
    inner_epsilon: float = 1e-7  # relative ratio change ending an MM pass
    init: str = "ones"          # "ones" or "random"
    init_seed: int = 0

    def __post_init__(self):
        if not (self.epsilon > 0 and self.inner_epsilon > 0):
            raise ValueError("convergence thresholds must be positive")
        if self.max_outer < 1 or self.max_inner_mm < 1:
            raise ValueError("iteration limits must be >= 1")
        if self.init not in ("ones", "random"):
            raise ValueError(f"unknown phase initialisation {self.init!r}")


@dataclass
class AOTrace:
    objective_per_iteration: list[float] = field(default_factory=list)
    precoder_power: list[float] = field(default_factory=list)
    mm_inner_iters: list[int] = field(default_factory=list)
    eig_residuals: list[float] = field(default_factory=list)
    converged: bool = False

    @property
    def iterations_used(self) -> int:
        return len(self.objective_per_iteration)

    def is_monotone(self, slack: float = 1e-9) -> bool:
        obj = np.asarray(self.objective_per_iteration)
        return bool(np.all(np.diff(obj) >= -slack))


def _check_phases(phi: np.ndarray) -> None:
    if np.max(np.abs(np.abs(phi) - 1.0)) > 1e-12:
        raise ValueError("phase profile entries must be unit modulus")


def initial_phases(L: int, cfg: AOConfig) -> np.ndarray:
    if cfg.init == "ones":
        return np.ones(L, dtype=complex)
    theta = RngStream(cfg.init_seed).generator.uniform(0.0, 2 * np.pi, L)
    return np.exp(1j * theta)


def _quad(x: np.ndarray, A: np.ndarray) -> float:
    return float(np.real(np.vdot(x, A @ x)))


def objective_rate(v: np.ndarray, phi: np.ndarray, sys: SystemMatrices) -> float:
    """Approximate spatial secrecy rate in bps/Hz."""
    g = phi * (sys.h_matrix @ v)  # Phi H v
    num = 1.0 + _quad(g, sys.j_rx) / (sys.noise_power * sys.s_rx)
    den = 1.0 + _quad(g, sys.j_e) / (sys.noise_power * sys.s_e)
    return math.log2(num / den)


def precoder_matrices(phi: np.ndarray, sys: SystemMatrices) -> tuple[np.ndarray, np.ndarray]:
    """P_i = I_N + P_T/(s2 S_i) H^H Phi^H J_i Phi H for i in (rx, e)."""
    B = phi[:, None] * sys.h_matrix  # Phi H
    N = sys.n_antennas
    out = []
    for J, S in ((sys.j_rx, sys.s_rx), (sys.j_e, sys.s_e)):
        P = np.eye(N) + (sys.transmit_power / (sys.noise_power * S)) * (B.conj().T @ J @ B)
        out.append(0.5 * (P + P.conj().T))
    return out[0], out[1]


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    if v[k] == 0:
        return v
    return v * (abs(v[k]) / v[k])


def generalized_residual(v: np.ndarray, P_rx: np.ndarray, P_e: np.ndarray) -> float:
    """Relative residual of P_rx v = lambda P_e v with the Rayleigh-quotient lambda."""
    lam = _quad(v, P_rx) / _quad(v, P_e)
    r = P_rx @ v - lam * (P_e @ v)
    return float(np.linalg.norm(r) / (np.linalg.norm(P_rx) * np.linalg.norm(v)))


def principal_generalized_eigvec(P_rx: np.ndarray, P_e: np.ndarray) -> tuple[float, np.ndarray]:
    N = P_rx.shape[0]
    try:
        w, V = scipy.linalg.eigh(P_rx, P_e, subset_by_index=[N - 1, N - 1])
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(
            f"generalized eigensolver failed (N={N}, cond(P_e)={np.linalg.cond(P_e):.3g}): {exc}"
        ) from exc
    u = V[:, 0]
    return float(w[0]), u / np.linalg.norm(u)


def optimize_precoder(phi: np.ndarray, sys: SystemMatrices,
                      residual_tol: float = 1e-8) -> np.ndarray:
    """Optimal precoder sqrt(P_T) u_max(P_e^-1 P_rx) for a fixed phase profile."""
    P_rx, P_e = precoder_matrices(phi, sys)
    _, u = principal_generalized_eigvec(P_rx, P_e)
    v = math.sqrt(sys.transmit_power) * _fix_phase(u)
    res = generalized_residual(v, P_rx, P_e)
    if not res < residual_tol:
        raise NumericalError(f"generalized eigen residual {res:.3g} exceeds {residual_tol:g}")
    return v


def phase_quadratics(v: np.ndarray, sys: SystemMatrices) -> tuple[np.ndarray, np.ndarray]:
    """Q_i = I/L + diag(Hv)^H J_i diag(Hv) / (s2 S_i) for i in (rx, e)."""
    vt = sys.h_matrix @ v
    L = sys.n_elements
    out = []
    for J, S in ((sys.j_rx, sys.s_rx), (sys.j_e, sys.s_e)):
        Q = np.eye(L) / L + (vt.conj()[:, None] * J * vt[None, :]) / (sys.noise_power * S)
        out.append(0.5 * (Q + Q.conj().T))
    return out[0], out[1]


def quadratic_ratio(phi: np.ndarray, q_rx: np.ndarray, q_e: np.ndarray) -> float:
    return _quad(phi, q_rx) / _quad(phi, q_e)


def mm_direction(phi_t: np.ndarray, q_rx: np.ndarray, q_e: np.ndarray) -> np.ndarray:
    """Linear coefficient of the minorizer built at ``phi_t``.

    The surrogate is maximised over unit-modulus vectors by phase-aligning
    with this vector.
    """
    a = _quad(phi_t, q_rx)
    b = _quad(phi_t, q_e)
    t = np.trace(q_e).real
    return (q_rx @ phi_t) / b - (a / b**2) * (q_e @ phi_t - t * phi_t)


def mm_step(phi_t: np.ndarray, q_rx: np.ndarray, q_e: np.ndarray) -> np.ndarray:
    return _unit_phase(mm_direction(phi_t, q_rx, q_e), phi_t)


def _unit_phase(d: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    mag = np.abs(d)
    if mag.all():
        return d / mag
    # zero coefficient: any phase is optimal, keep the current one
    return np.where(mag > 0, d / np.where(mag > 0, mag, 1.0), fallback)


def _mm_ascent(v, sys, cfg, phi_init):
    q_rx, q_e = phase_quadratics(v, sys)
    L = sys.n_elements
    t = np.trace(q_e).real
    stacked = np.vstack([q_rx, q_e])
    phi = np.asarray(phi_init, dtype=complex)
    # Q phi products are carried from one step to the next
    x = stacked @ phi
    a, b = np.vdot(phi, x[:L]).real, np.vdot(phi, x[L:]).real
    ratio = a / b
    n = 0
    for n in range(1, cfg.max_inner_mm + 1):
        d = x[:L] / b - (a / b**2) * (x[L:] - t * phi)
        cand = _unit_phase(d, phi)
        cx = stacked @ cand
        ca, cb = np.vdot(cand, cx[:L]).real, np.vdot(cand, cx[L:]).real
        new_ratio = ca / cb
        if new_ratio < ratio - RATIO_TOL * abs(ratio):
            break
        change = abs(new_ratio - ratio) / abs(ratio)
        phi, x, a, b, ratio = cand, cx, ca, cb, new_ratio
        if change < cfg.inner_epsilon:
            break
    return phi, n


def optimize_phases(v: np.ndarray, sys: SystemMatrices, cfg: AOConfig,
                    phi_init: np.ndarray) -> np.ndarray:
    """Safeguarded MM ascent of the phase ratio for a fixed precoder."""
    _check_phases(phi_init)
    return _mm_ascent(v, sys, cfg, phi_init)[0]


def alternating_optimize(sys: SystemMatrices, cfg: AOConfig | None = None,
                         phi_init: np.ndarray | None = None):
    """Run the precoder / phase alternation until the objective settles.

    Returns ``(v, phi, trace)``.
    """
    cfg = cfg or AOConfig()
    phi = initial_phases(sys.n_elements, cfg) if phi_init is None else np.asarray(phi_init, complex)
    _check_phases(phi)
    trace = AOTrace()
    prev = None
    v = None
    for it in range(1, cfg.max_outer + 1):
        try:
            v = optimize_precoder(phi, sys)
        except NumericalError as exc:
            raise NumericalError(f"outer iteration {it}: {exc}") from exc
        P_rx, P_e = precoder_matrices(phi, sys)
        trace.eig_residuals.append(generalized_residual(v, P_rx, P_e))
        phi, n_inner = _mm_ascent(v, sys, cfg, phi)
        obj = objective_rate(v, phi, sys)
        trace.objective_per_iteration.append(obj)
        trace.precoder_power.append(float(np.vdot(v, v).real))
        trace.mm_inner_iters.append(n_inner)
        if prev is not None and abs(obj - prev) <= cfg.epsilon * abs(prev) + ABS_TOL:
            trace.converged = True
            break
        prev = obj
    log.debug("AO finished after %d iterations (converged=%s, objective=%.6g)",
              trace.iterations_used, trace.converged, trace.objective_per_iteration[-1])
    return v, phi, trace


def rx_only_optimize(sys: SystemMatrices, cfg: AOConfig | None = None):
    """Maximise the legitimate area rate alone (eavesdropper ignored)."""
    v, phi, _ = alternating_optimize(sys.without_eavesdropper(), cfg)
    return v, phi


def random_config(sys: SystemMatrices, rng: RngStream):
    g = rng.complex_normal(sys.n_antennas)
    v = math.sqrt(sys.transmit_power) * g / np.linalg.norm(g)
    phi = np.exp(1j * rng.generator.uniform(0.0, 2 * np.pi, sys.n_elements))
    return v, phi
