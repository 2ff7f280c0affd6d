import numpy as np

from ris_secrecy.channel import RngStream
from ris_secrecy.optimizer import SystemMatrices
from ris_secrecy.selftest import random_psd, small_system  # noqa: F401


def random_system(seed, N=4, L=6, power=2.0, rank_e=None) -> SystemMatrices:
    rng = RngStream(seed)
    return SystemMatrices(h_matrix=rng.complex_normal((L, N)),
                          j_rx=random_psd(rng, L), j_e=random_psd(rng, L, rank_e),
                          noise_power=0.7, s_rx=3.0, s_e=2.5, transmit_power=power)


def random_phases(rng: RngStream, L: int) -> np.ndarray:
    return np.exp(1j * rng.generator.uniform(0, 2 * np.pi, L))


def random_precoder(rng: RngStream, N: int, power: float) -> np.ndarray:
    v = rng.complex_normal(N)
    return v * np.sqrt(power) / np.linalg.norm(v)
