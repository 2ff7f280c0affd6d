import csv

import numpy as np
import pytest

from ris_secrecy.channel import RngStream
from ris_secrecy.evaluation import (MonteCarloConfig, RateMapGrid, SchemeKind, area_rate,
                                    configure, decomposed_secrecy, fmt, gain_map, link_rate,
                                    power_sweep, rate_heatmaps, spatial_secrecy_mc,
                                    write_power_sweep_csv, write_rate_map_csv)
from ris_secrecy.geometry import PlanarArea, UpaGeometry
from ris_secrecy.optimizer import AOConfig
from ris_secrecy.scenario import reference_scenario
from ris_secrecy.spatial import QuadratureGrid

CELLS = QuadratureGrid(6, 4)


@pytest.fixture(scope="module")
def small():
    return reference_scenario(bs_geom=UpaGeometry(2, 1), ris_geom=UpaGeometry(2, 4),
                          correlation_grid=QuadratureGrid(16, 16))


def test_link_rate_batched_matches_loop():
    rng = RngStream(1)
    H, v = rng.complex_normal((4, 2)), rng.complex_normal(2)
    phi = np.exp(1j * rng.generator.uniform(0, 6, 4))
    f = rng.complex_normal((3, 5, 4))
    batch = link_rate(f, phi, H, v, 0.1)
    assert batch.shape == (3, 5)
    for i in range(3):
        for j in range(5):
            x = np.vdot(f[i, j], phi * (H @ v))
            assert batch[i, j] == pytest.approx(np.log2(1 + abs(x) ** 2 / 0.1))


def test_link_rate_zero_channel():
    assert link_rate(np.zeros(3), np.ones(3), np.ones((3, 1)), np.ones(1), 1.0) == 0.0


def test_clamped_dominates_decomposed(small):
    mc = MonteCarloConfig(3, 4)
    H = small.draw_bs_ris(RngStream(0))
    v, phi = configure(SchemeKind.PROPOSED, small, H, 3.0, AOConfig(), RngStream(0))
    c = spatial_secrecy_mc(small, H, v, phi, mc, CELLS)
    d = decomposed_secrecy(small, H, v, phi, mc, CELLS)
    assert c.n_samples == d.n_samples == 3 * CELLS.n_cells
    assert c.mean >= d.mean
    assert c.min_secrecy == d.min_secrecy
    rx = area_rate(small, small.area_rx, H, v, phi, mc, CELLS)
    assert rx.mean > 0 and rx.stderr > 0


def test_configure_schemes_are_feasible(small):
    H = small.draw_bs_ris(RngStream(0))
    for s in SchemeKind:
        v, phi = configure(s, small, H, 2.0, AOConfig(), RngStream(3))
        assert np.vdot(v, v).real == pytest.approx(2.0)
        np.testing.assert_allclose(np.abs(phi), 1.0)


def _sweep(small, **kw):
    return power_sweep(small, list(SchemeKind), [20.0, 30.0, 40.0], MonteCarloConfig(2, 0),
                       cells=CELLS, fading_draws=3, **kw)


def test_power_sweep_shapes_and_determinism(small, monkeypatch):
    a = _sweep(small)
    monkeypatch.setenv("RIS_SECRECY_THREADS", "2")
    b = _sweep(small)
    assert a.schemes == list(SchemeKind)
    for s in SchemeKind:
        assert a.rx_max[s].shape == (3,)
        np.testing.assert_array_equal(a.rx_max[s], b.rx_max[s])
        np.testing.assert_array_equal(a.eve_max[s], b.eve_max[s])
        np.testing.assert_array_equal(a.gap(s), a.rx_max[s] - a.eve_max[s])


def test_power_sweep_rx_grows_with_power(small):
    res = _sweep(small)
    for s in SchemeKind:
        assert np.all(np.diff(res.rx_max[s]) > 0)


def test_power_sweep_modes(small):
    with pytest.raises(ValueError):
        _sweep(small, max_mode="median")
    per_trial = _sweep(small)
    mean_map = _sweep(small, max_mode="mean_map")
    # mean of maxima bounds the maximum of means
    for s in SchemeKind:
        assert np.all(per_trial.rx_max[s] >= mean_map.rx_max[s] - 1e-12)


def test_rate_heatmaps(small):
    maps = rate_heatmaps([SchemeKind.RX_ONLY, SchemeKind.RANDOM], small,
                         MonteCarloConfig(2, 0), CELLS)
    rx, eve = maps[SchemeKind.RX_ONLY]
    assert rx.rates.shape == (6, 4) and eve.area == small.area_e
    g = gain_map(rx, maps[SchemeKind.RANDOM][0])
    assert g.shape == (6, 4) and np.all(np.isfinite(g))


def test_gain_map_edge_cases():
    area = PlanarArea(0, 0, 2, 2, 0)
    a = RateMapGrid(area, 1, 2, np.array([[2.0, 1.0]]))
    b = RateMapGrid(area, 1, 2, np.array([[1.0, 0.0]]))
    g = gain_map(a, b)
    assert g[0, 0] == pytest.approx(100.0) and np.isnan(g[0, 1])
    with pytest.raises(ValueError):
        gain_map(a, RateMapGrid(area, 2, 1, np.ones((2, 1))))


def test_csv_writers(tmp_path, small):
    res = _sweep(small)
    path = tmp_path / "sweep.csv"
    write_power_sweep_csv(path, res)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["power_dbm", "scheme", "rx_max_rate", "eve_max_rate"]
    assert len(rows) == 1 + 3 * 3
    grid = RateMapGrid(PlanarArea(0, 0, 2, 2, 0), 2, 1, np.array([[1.5], [np.nan]]))
    write_rate_map_csv(tmp_path / "map.csv", grid)
    rows = list(csv.reader(open(tmp_path / "map.csv")))
    assert rows == [["x_m", "y_m", "rate_bpshz"], ["-0.5", "0", "1.5"], ["0.5", "0", "NaN"]]


def test_fmt():
    assert fmt(1 / 3) == "0.333333333"
    assert fmt(float("nan")) == "NaN"
    assert fmt(35) == "35"


def test_monte_carlo_config():
    with pytest.raises(ValueError):
        MonteCarloConfig(0)
    a = MonteCarloConfig(1, 5).trial_stream(2).complex_normal(3)
    b = MonteCarloConfig(1, 5).trial_stream(2).complex_normal(3)
    np.testing.assert_array_equal(a, b)
