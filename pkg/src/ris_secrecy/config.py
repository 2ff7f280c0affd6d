"""JSON scenario configuration: defaults, validation and unit conversion.

Levels in the file are logarithmic (dB / dBm) and may be given either as
plain numbers or as strings with a unit, e.g. ``"-105 dBm"`` or ``"1 W"``.
Everything is converted to linear scale once, here.
"""

from __future__ import annotations

import copy
import json
import math
import re
from dataclasses import dataclass

from .channel import PathlossModel, RicianModel, dbm_to_watt
from .evaluation import MonteCarloConfig, SchemeKind
from .geometry import PlanarArea, Position3D, UpaGeometry
from .optimizer import AOConfig
from .scenario import Scenario
from .spatial import QuadratureGrid

REQUIRED_KEYS = ("bs_position", "ris_position", "rx_area", "eve_area")

DEFAULTS = {
    "receiver_height_m": 1.5,
    "bs_array": {"n_vertical": 4, "n_horizontal": 4, "spacing_ratio": 0.5},
    "ris_array": {"n_vertical": 10, "n_horizontal": 15, "spacing_ratio": 0.5},
    "pathloss_ref_db": -30.0,
    "reference_distance_m": 1.0,
    "pathloss_exponent": 2.2,
    "bs_ris_pathloss_exponent": None,   # None: same as pathloss_exponent
    "rician_k": 13.2,
    "bs_ris_rician_k": None,            # None: same as rician_k
    "noise_dbm": -105.0,
    "transmit_power_dbm": 35.0,
    "power_grid_dbm": [20.0, 22.5, 25.0, 27.5, 30.0, 32.5, 35.0, 37.5, 40.0],
    "correlation_grid": [64, 64],
    "heatmap_grid": [48, 30],
    "fading_draws": 10,
    "max_mode": "per_trial",
    "warm_start": True,
    "schemes": ["proposed", "rx_only", "random"],
    "ao": {"epsilon": 1e-5, "max_outer": 200, "max_inner_mm": 1000,
           "inner_epsilon": 1e-7, "init": "ones", "init_seed": 0},
    "monte_carlo": {"n_trials": 100, "base_seed": 0},
}

_NESTED = ("bs_array", "ris_array", "ao", "monte_carlo")
_AREA_KEYS = {"center", "width", "length"}


class ConfigError(ValueError):
    """Invalid or incomplete configuration."""


_LEVEL_RE = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]*)\s*$")


def parse_level(value, key: str, unit: str) -> float:
    """Read a dB/dBm quantity. Strings may carry their unit; watts are accepted for dBm keys."""
    if isinstance(value, bool):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        out = float(value)
    elif isinstance(value, str):
        m = _LEVEL_RE.match(value.replace("−", "-"))
        if not m:
            raise ConfigError(f"{key}: cannot parse {value!r}")
        num, u = float(m.group(1)), m.group(2)
        if u in ("", unit):
            out = num
        elif unit == "dBm" and u in ("W", "mW"):
            mw = num * (1000.0 if u == "W" else 1.0)
            if mw <= 0:
                raise ConfigError(f"{key}: power must be positive, got {value!r}")
            out = 10.0 * math.log10(mw)
        else:
            raise ConfigError(f"{key}: unit {u!r} not accepted, expected {unit}")
    else:
        raise ConfigError(f"{key}: expected a number or string, got {type(value).__name__}")
    if not math.isfinite(out):
        raise ConfigError(f"{key}: value must be finite")
    return out


def _number(d, key, positive=False, integer=False):
    val = d[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {val!r}")
    if integer and int(val) != val:
        raise ConfigError(f"{key}: expected an integer, got {val!r}")
    if positive and not val > 0:
        raise ConfigError(f"{key}: must be positive, got {val!r}")
    return int(val) if integer else float(val)


def _pair(val, key, integer=False):
    if not (isinstance(val, (list, tuple)) and len(val) == 2):
        raise ConfigError(f"{key}: expected a two-element list")
    out = []
    for i, v in enumerate(val):
        out.append(_number({f"{key}[{i}]": v}, f"{key}[{i}]", positive=integer, integer=integer))
    return out


@dataclass
class ScenarioConfig:
    scenario: Scenario
    transmit_power_dbm: float
    power_grid_dbm: list[float]
    heatmap_grid: QuadratureGrid
    ao: AOConfig
    monte_carlo: MonteCarloConfig
    schemes: list[SchemeKind]
    fading_draws: int
    max_mode: str
    warm_start: bool
    resolved: dict

    def to_dict(self) -> dict:
        """Fully resolved configuration, re-loadable with :func:`parse_config`."""
        return copy.deepcopy(self.resolved)


def _merge(raw: dict) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    allowed = set(DEFAULTS) | set(REQUIRED_KEYS)
    for key in raw:
        if key not in allowed:
            raise ConfigError(f"{key}: unknown configuration key")
    for key in REQUIRED_KEYS:
        if key not in raw:
            raise ConfigError(f"{key}: missing required key")
    merged = copy.deepcopy(DEFAULTS)
    for key, val in raw.items():
        if key in _NESTED:
            if not isinstance(val, dict):
                raise ConfigError(f"{key}: expected an object")
            for sub in val:
                if sub not in DEFAULTS[key]:
                    raise ConfigError(f"{key}.{sub}: unknown configuration key")
            merged[key].update(copy.deepcopy(val))
        else:
            merged[key] = copy.deepcopy(val)
    return merged


def _area(d: dict, key: str, z: float) -> PlanarArea:
    if not isinstance(d, dict) or set(d) != _AREA_KEYS:
        raise ConfigError(f"{key}: expected an object with keys {sorted(_AREA_KEYS)}")
    cx, cy = _pair(d["center"], f"{key}.center")
    w = _number({f"{key}.width": d["width"]}, f"{key}.width", positive=True)
    ln = _number({f"{key}.length": d["length"]}, f"{key}.length", positive=True)
    return PlanarArea(cx, cy, w, ln, z)


def _position(val, key) -> Position3D:
    if not (isinstance(val, (list, tuple)) and len(val) == 3):
        raise ConfigError(f"{key}: expected [x, y, z]")
    try:
        return Position3D.from_sequence(float(v) for v in val)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def _upa(d: dict, key: str) -> UpaGeometry:
    try:
        return UpaGeometry(_number(d, "n_vertical", True, True),
                           _number(d, "n_horizontal", True, True),
                           _number(d, "spacing_ratio", True))
    except ConfigError as exc:
        raise ConfigError(f"{key}.{exc}") from exc


def parse_config(raw: dict) -> ScenarioConfig:
    m = _merge(raw)
    try:
        z = _number(m, "receiver_height_m")
        area_rx = _area(m["rx_area"], "rx_area", z)
        area_e = _area(m["eve_area"], "eve_area", z)
        if area_rx.intersects(area_e):
            raise ConfigError("rx_area/eve_area: areas must be disjoint")

        pl_db = parse_level(m["pathloss_ref_db"], "pathloss_ref_db", "dB")
        m["pathloss_ref_db"] = pl_db
        d0 = _number(m, "reference_distance_m", positive=True)
        alpha = _number(m, "pathloss_exponent", positive=True)
        alpha_bs = alpha if m["bs_ris_pathloss_exponent"] is None else \
            _number(m, "bs_ris_pathloss_exponent", positive=True)
        k = _number(m, "rician_k")
        k_bs = k if m["bs_ris_rician_k"] is None else _number(m, "bs_ris_rician_k")
        if k < 0 or k_bs < 0:
            raise ConfigError("rician_k: must be >= 0")
        m["bs_ris_pathloss_exponent"], m["bs_ris_rician_k"] = alpha_bs, k_bs

        noise_dbm = parse_level(m["noise_dbm"], "noise_dbm", "dBm")
        m["noise_dbm"] = noise_dbm
        pt_dbm = parse_level(m["transmit_power_dbm"], "transmit_power_dbm", "dBm")
        m["transmit_power_dbm"] = pt_dbm
        grid_vals = m["power_grid_dbm"]
        if not isinstance(grid_vals, list) or not grid_vals:
            raise ConfigError("power_grid_dbm: expected a non-empty list")
        powers = [parse_level(p, "power_grid_dbm", "dBm") for p in grid_vals]
        m["power_grid_dbm"] = powers

        jx, jy = _pair(m["correlation_grid"], "correlation_grid", integer=True)
        hx, hy = _pair(m["heatmap_grid"], "heatmap_grid", integer=True)
        fading = _number(m, "fading_draws", positive=True, integer=True)
        if m["max_mode"] not in ("per_trial", "mean_map"):
            raise ConfigError(f"max_mode: expected 'per_trial' or 'mean_map', got {m['max_mode']!r}")
        if not isinstance(m["warm_start"], bool):
            raise ConfigError("warm_start: expected true or false")
        try:
            schemes = [SchemeKind(s) for s in m["schemes"]]
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"schemes: {exc}") from exc
        if not schemes:
            raise ConfigError("schemes: at least one scheme required")

        ao_d = m["ao"]
        try:
            ao = AOConfig(epsilon=_number(ao_d, "epsilon", positive=True),
                          max_outer=_number(ao_d, "max_outer", True, True),
                          max_inner_mm=_number(ao_d, "max_inner_mm", True, True),
                          inner_epsilon=_number(ao_d, "inner_epsilon", positive=True),
                          init=ao_d["init"],
                          init_seed=_number(ao_d, "init_seed", integer=True))
        except ConfigError as exc:
            raise ConfigError(f"ao.{exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"ao: {exc}") from exc
        mc_d = m["monte_carlo"]
        try:
            mc = MonteCarloConfig(_number(mc_d, "n_trials", True, True),
                                  _number(mc_d, "base_seed", integer=True))
        except ConfigError as exc:
            raise ConfigError(f"monte_carlo.{exc}") from exc

        scenario = Scenario(
            p_bs=_position(m["bs_position"], "bs_position"),
            p_ris=_position(m["ris_position"], "ris_position"),
            bs_geom=_upa(m["bs_array"], "bs_array"),
            ris_geom=_upa(m["ris_array"], "ris_array"),
            area_rx=area_rx, area_e=area_e,
            pathloss=PathlossModel.from_db(pl_db, d0, alpha),
            rician=RicianModel(k),
            noise_power=dbm_to_watt(noise_dbm),
            pathloss_bs=PathlossModel.from_db(pl_db, d0, alpha_bs),
            rician_bs=RicianModel(k_bs),
            correlation_grid=QuadratureGrid(jx, jy),
        )
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc

    return ScenarioConfig(
        scenario=scenario, transmit_power_dbm=pt_dbm, power_grid_dbm=powers,
        heatmap_grid=QuadratureGrid(hx, hy), ao=ao, monte_carlo=mc, schemes=schemes,
        fading_draws=fading, max_mode=m["max_mode"], warm_start=m["warm_start"],
        resolved=m)


def load_config(path) -> ScenarioConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return parse_config(raw)
