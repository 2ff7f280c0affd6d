import numpy as np
import pytest

from ris_secrecy.channel import PathlossModel, RicianModel, RngStream
from ris_secrecy.geometry import PlanarArea, Position3D, UpaGeometry
from ris_secrecy.oracles import monte_carlo_correlation, pathloss_integral
from ris_secrecy.spatial import (QuadratureGrid, check_correlation, compute_correlation,
                                 correlation_key, load_correlation, save_correlation,
                                 second_moment_at)

AREA = PlanarArea(-3.0, 4.0, 4.0, 3.0, 1.0)
P_RIS = Position3D(0.0, 10.0, 3.0)
GEOM = UpaGeometry(2, 3)
MODEL = PathlossModel.from_db(-30.0)
RICIAN = RicianModel(5.0)


def _J(grid=QuadratureGrid(64, 64), area=AREA, geom=GEOM, rician=RICIAN):
    return compute_correlation(area, grid, P_RIS, geom, MODEL, rician)


def test_single_cell_is_center_integrand():
    J = _J(QuadratureGrid(1, 1))
    center = np.array([[AREA.center_x, AREA.center_y, AREA.z]])
    expected = AREA.measure() * second_moment_at(center, P_RIS, GEOM, MODEL, RICIAN)
    np.testing.assert_allclose(J, expected, rtol=1e-14, atol=0)


def test_invariants():
    J = _J()
    check_correlation(J)
    assert np.linalg.norm(J - J.conj().T) <= 1e-12 * np.linalg.norm(J)
    assert np.linalg.eigvalsh(J)[0] >= -1e-10 * np.trace(J).real


@pytest.mark.parametrize("k", [0.0, 5.0, 13.2])
def test_trace_identity(k):
    J = _J(rician=RicianModel(k))
    L = GEOM.n_elements
    ref = (L + k) / (1 + k) * pathloss_integral(AREA, P_RIS, MODEL)
    assert abs(np.trace(J).real - ref) / ref < 5e-3


def test_monte_carlo_oracle():
    J = _J()
    J_mc = monte_carlo_correlation(AREA, P_RIS, GEOM, MODEL, RICIAN, 200_000, RngStream(5))
    assert np.linalg.norm(J - J_mc) / np.linalg.norm(J_mc) < 1e-2


def test_grid_refinement_converges():
    ref = _J(QuadratureGrid(256, 256))
    errs = [np.linalg.norm(_J(QuadratureGrid(n, n)) - ref) for n in (8, 16, 32)]
    assert errs[0] > errs[1] > errs[2]
    # midpoint rule: error shrinks roughly fourfold per halving
    assert errs[1] / errs[2] > 3.0


def test_pure_nlos_is_scaled_identity():
    J = _J(rician=RicianModel(0.0))
    kint = pathloss_integral(AREA, P_RIS, MODEL)
    np.testing.assert_allclose(J, kint * np.eye(GEOM.n_elements), atol=5e-3 * kint)


def test_reference_area_measure(scenario):
    assert scenario.area_rx.measure() == 360.0
    J_rx, J_e = scenario.correlations
    assert J_rx.shape == (150, 150)
    check_correlation(J_rx)
    check_correlation(J_e)


def test_save_load_round_trip(tmp_path):
    J = _J(QuadratureGrid(8, 8))
    key = correlation_key(AREA, QuadratureGrid(8, 8), P_RIS, GEOM, MODEL, RICIAN)
    path = tmp_path / "J.txt"
    save_correlation(path, J, QuadratureGrid(8, 8), key)
    np.testing.assert_array_equal(load_correlation(path, key), J)
    with pytest.raises(ValueError):
        load_correlation(path, "0" * 16)


def test_check_correlation_rejects_bad_matrices():
    with pytest.raises(ValueError):
        check_correlation(np.array([[1, 1j], [1j, 1]]))
    with pytest.raises(ValueError):
        check_correlation(np.diag([1.0, -1.0]) * 1.0 + 0j)
    with pytest.raises(ValueError):
        check_correlation(np.zeros((2, 2), complex))
