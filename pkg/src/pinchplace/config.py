"""Parsing of unit-suffixed values, user lists and scenario files.

Scenario files are flat ``key = value`` text. A leading ``[section]`` header
is optional. Lists are comma separated and may be wrapped in brackets.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import replace
from pathlib import Path
from typing import Any, Mapping

from .experiments import ScenarioConfig
from .model import Point3, ServiceArea, SystemParams, dbm_to_watts, watts_to_dbm

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_SUFFIXED = re.compile(rf"^\s*({_NUMBER})\s*([A-Za-z]*)\s*$")

_POWER_SCALE = {"w": 1.0, "mw": 1e-3, "uw": 1e-6, "nw": 1e-9, "pw": 1e-12}
_FREQ_SCALE = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9, "thz": 1e12}


def _split(text: str) -> tuple[float, str]:
    m = _SUFFIXED.match(text)
    if not m:
        raise ValueError(f"not a number: {text!r}")
    return float(m.group(1)), m.group(2).lower()


def parse_power_w(text: str) -> float:
    """``-90dBm``, ``1mW``, ``1W`` or a bare number of watts."""
    value, unit = _split(str(text))
    if unit == "dbm":
        return dbm_to_watts(value)
    if unit == "dbw":
        return dbm_to_watts(value + 30.0)
    if unit in ("",) + tuple(_POWER_SCALE):
        watts = value * _POWER_SCALE.get(unit, 1.0)
        if watts <= 0:
            raise ValueError(f"power must be positive: {text!r}")
        return watts
    raise ValueError(f"unknown power unit in {text!r}")


def parse_power_dbm(text: str) -> float:
    """Like :func:`parse_power_w` but bare numbers are dBm."""
    value, unit = _split(str(text))
    if unit in ("", "dbm"):
        return value
    return watts_to_dbm(parse_power_w(text))


def parse_frequency(text: str) -> float:
    value, unit = _split(str(text))
    if unit not in ("",) + tuple(_FREQ_SCALE):
        raise ValueError(f"unknown frequency unit in {text!r}")
    hz = value * _FREQ_SCALE.get(unit, 1.0)
    if hz <= 0:
        raise ValueError(f"frequency must be positive: {text!r}")
    return hz


def parse_point(text: str) -> Point3:
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) not in (2, 3):
        raise ValueError(f"expected 'x,y' or 'x,y,z', got {text!r}")
    return Point3(*(float(p) for p in parts))


def parse_users(text: str) -> list[Point3]:
    """Users as ``x,y`` pairs separated by ``;``, e.g. ``"-2,0;0,0;2,0"``."""
    chunks = [c for c in str(text).split(";") if c.strip()]
    if not chunks:
        raise ValueError("empty user list")
    return [parse_point(c) for c in chunks]


def load_users(path) -> list[Point3]:
    """One ``x,y`` pair per line; blank lines and ``#`` comments ignored."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    rows = [ln.split("#", 1)[0].strip() for ln in lines]
    return parse_users(";".join(r for r in rows if r))


def _parse_list(text: str, item=float) -> tuple:
    body = str(text).strip()
    if body.startswith("[") and body.endswith("]"):
        body = body[1:-1]
    items = [s.strip().strip("\"'") for s in body.split(",") if s.strip()]
    if not items:
        raise ValueError("empty list")
    return tuple(item(s) for s in items)


def _unquote(text: str) -> str:
    return str(text).strip().strip("\"'")


def _as_int(text: str) -> int:
    return int(_unquote(text), 0)


# key -> (target, parser); target is "area", "params" or "" for ScenarioConfig
_KEYS: dict[str, tuple[str, Any]] = {
    "scheme": ("", lambda v: _parse_list(v, str)),
    "schemes": ("", lambda v: _parse_list(v, str)),
    "user_count": ("", _as_int),
    "antenna_count": ("", _as_int),
    "antenna_counts": ("", lambda v: _parse_list(v, int)),
    "tx_power_sweep_dbm": ("", lambda v: _parse_list(v, parse_power_dbm)),
    "half_length_sweep_m": ("", lambda v: _parse_list(v, float)),
    "fig3_tx_power_dbm": ("", lambda v: parse_power_dbm(_unquote(v))),
    "target_rate": ("", lambda v: float(_unquote(v))),
    "trial_count": ("", _as_int),
    "master_seed": ("", _as_int),
    "n_jobs": ("", _as_int),
    "half_length_x_m": ("area", lambda v: float(_unquote(v))),
    "half_length_y_m": ("area", lambda v: float(_unquote(v))),
    "carrier_frequency_hz": ("params", lambda v: parse_frequency(_unquote(v))),
    "noise_power_w": ("params", lambda v: parse_power_w(_unquote(v))),
    "refractive_index": ("params", lambda v: float(_unquote(v))),
    "antenna_height_m": ("params", lambda v: float(_unquote(v))),
}

CONFIG_KEYS = tuple(sorted(_KEYS))


def apply_overrides(base: ScenarioConfig, values: Mapping[str, Any]) -> ScenarioConfig:
    """Return ``base`` with already-parsed flat ``values`` applied."""
    unknown = sorted(set(values) - set(_KEYS))
    if unknown:
        raise KeyError(f"unknown config keys: {', '.join(unknown)}")
    top: dict[str, Any] = {}
    area: dict[str, Any] = {}
    params: dict[str, Any] = {}
    for key, value in values.items():
        target = _KEYS[key][0]
        if key == "scheme":
            key = "schemes"
        {"": top, "area": area, "params": params}[target][key] = value
    new_area = replace(base.area, **area) if area else base.area
    new_params = replace(base.params, **params) if params else base.params
    return replace(base, area=new_area, params=new_params.for_area(new_area), **top)


def parse_config_text(text: str, base: ScenarioConfig | None = None) -> ScenarioConfig:
    base = ScenarioConfig() if base is None else base
    if not re.match(r"^\s*\[", text):
        text = "[scenario]\n" + text
    cp = configparser.ConfigParser(
        interpolation=None, comment_prefixes=("#", ";"), inline_comment_prefixes=("#",)
    )
    cp.optionxform = str  # keep keys case-sensitive
    cp.read_string(text)
    raw: dict[str, str] = {}
    for section in cp.sections():
        raw.update(cp[section])
    unknown = sorted(set(raw) - set(_KEYS))
    if unknown:
        raise KeyError(f"unknown config keys: {', '.join(unknown)}")
    parsed = {}
    for key, value in raw.items():
        try:
            parsed[key] = _KEYS[key][1](value)
        except ValueError as exc:
            raise ValueError(f"bad value for {key}: {exc}") from exc
    return apply_overrides(base, parsed)


def load_config(path, base: ScenarioConfig | None = None) -> ScenarioConfig:
    return parse_config_text(Path(path).read_text(encoding="utf-8"), base)


def default_system() -> tuple[ServiceArea, SystemParams]:
    area = ServiceArea()
    return area, SystemParams().for_area(area)
