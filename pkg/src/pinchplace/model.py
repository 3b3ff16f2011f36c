"""Geometry, system constants and LoS channel quantities.

Everything is in SI units (W, m, Hz). dBm only appears at the I/O boundary,
through :func:`dbm_to_watts` and :func:`watts_to_dbm`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

from .exceptions import OffWaveguide, ZeroDistance

SPEED_OF_LIGHT = 299_792_458.0

# tolerance for "lies on the waveguide" checks, in meters
ON_WAVEGUIDE_TOL = 1e-9


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class Point3:
    """A point in the 3D Cartesian frame, in meters."""

    x: float
    y: float
    z: float = 0.0

    def __post_init__(self) -> None:
        for name in ("x", "y", "z"):
            value = float(getattr(self, name))
            _require_finite(name, value)
            object.__setattr__(self, name, value)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class ServiceArea:
    """The rectangle [-Lx, Lx] x [-Ly, Ly] on the ground plane."""

    half_length_x_m: float = 60.0
    half_length_y_m: float = 5.0

    def __post_init__(self) -> None:
        for name in ("half_length_x_m", "half_length_y_m"):
            value = float(getattr(self, name))
            _require_finite(name, value)
            if value <= 0:
                raise ValueError(f"{name} must be > 0, got {value}")
            object.__setattr__(self, name, value)

    def contains(self, p: Point3, tol: float = 0.0) -> bool:
        return (
            abs(p.x) <= self.half_length_x_m + tol
            and abs(p.y) <= self.half_length_y_m + tol
        )


@dataclass(frozen=True)
class SystemParams:
    """Carrier, noise and waveguide description.

    The waveguide runs parallel to the x axis at height ``antenna_height_m``
    from ``-waveguide_half_length_m`` to ``+waveguide_half_length_m``, and is
    fed at its negative end, so the guided path to a pinch at ``x`` has
    length ``waveguide_half_length_m + x``.
    """

    carrier_frequency_hz: float = 28e9
    noise_power_w: float = 1e-12
    refractive_index: float = 1.4
    antenna_height_m: float = 3.0
    waveguide_half_length_m: float = 60.0
    speed_of_light: float = field(default=SPEED_OF_LIGHT, repr=False)

    def __post_init__(self) -> None:
        for name in (
            "carrier_frequency_hz",
            "noise_power_w",
            "refractive_index",
            "antenna_height_m",
            "waveguide_half_length_m",
        ):
            value = float(getattr(self, name))
            _require_finite(name, value)
            object.__setattr__(self, name, value)
        if self.carrier_frequency_hz <= 0:
            raise ValueError("carrier_frequency_hz must be > 0")
        if self.noise_power_w <= 0:
            raise ValueError("noise_power_w must be > 0")
        if self.antenna_height_m <= 0:
            raise ValueError("antenna_height_m must be > 0")
        if self.waveguide_half_length_m <= 0:
            raise ValueError("waveguide_half_length_m must be > 0")
        if self.refractive_index <= 1:
            raise ValueError("refractive_index must be > 1")

    @property
    def wavelength(self) -> float:
        return self.speed_of_light / self.carrier_frequency_hz

    @property
    def guide_wavelength(self) -> float:
        return self.wavelength / self.refractive_index

    @property
    def eta(self) -> float:
        return eta(self)

    @property
    def feed_point(self) -> Point3:
        return Point3(-self.waveguide_half_length_m, 0.0, self.antenna_height_m)

    def for_area(self, area: ServiceArea) -> SystemParams:
        """Copy with the waveguide stretched to span ``area`` along x."""
        return replace(self, waveguide_half_length_m=area.half_length_x_m)


def eta(params: SystemParams) -> float:
    """Free-space gain constant c^2 / (16 pi^2 f_c^2), i.e. (lambda / 4pi)^2."""
    c = params.speed_of_light
    fc = params.carrier_frequency_hz
    return c * c / (16.0 * math.pi**2 * fc * fc)


def distance(a: Point3, b: Point3) -> float:
    return math.hypot(a.x - b.x, a.y - b.y, a.z - b.z)


def _nonzero_distance(user: Point3, pin: Point3) -> float:
    r = distance(user, pin)
    if r == 0.0:
        raise ZeroDistance(f"user {user} coincides with antenna {pin}")
    return r


def channel_gain_scalar(user: Point3, pin: Point3, params: SystemParams) -> float:
    """Amplitude gain sqrt(eta) / |user - pin| of a single LoS link."""
    return math.sqrt(eta(params)) / _nonzero_distance(user, pin)


def channel_vector(
    user: Point3, pins: list[Point3], params: SystemParams
) -> list[complex]:
    """Spherical-wave channel from each antenna in ``pins`` to ``user``."""
    k = 2.0 * math.pi / params.wavelength
    root_eta = math.sqrt(eta(params))
    out = []
    for pin in pins:
        r = _nonzero_distance(user, pin)
        out.append(root_eta * cmath.exp(-1j * k * r) / r)
    return out


def check_on_waveguide(pin: Point3, params: SystemParams) -> None:
    if abs(pin.y) > ON_WAVEGUIDE_TOL or abs(pin.z - params.antenna_height_m) > ON_WAVEGUIDE_TOL:
        raise OffWaveguide(
            f"{pin} is not on the waveguide (y=0, z={params.antenna_height_m})"
        )


def guided_length(pin: Point3, params: SystemParams) -> float:
    """Distance travelled inside the waveguide from the feed to ``pin``."""
    check_on_waveguide(pin, params)
    return distance(params.feed_point, pin)


def phase_shift(pin: Point3, params: SystemParams) -> float:
    """In-waveguide phase 2 pi |feed - pin| / lambda_g, in radians."""
    return 2.0 * math.pi * guided_length(pin, params) / params.guide_wavelength


def los_path_loss_db(user: Point3, pin: Point3, params: SystemParams) -> float:
    r = _nonzero_distance(user, pin)
    return 20.0 * math.log10(
        4.0 * math.pi * params.carrier_frequency_hz * r / params.speed_of_light
    )


def dbm_to_watts(p_dbm: float) -> float:
    _require_finite("p_dbm", p_dbm)
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watts_to_dbm(p_w: float) -> float:
    if not p_w > 0:
        raise ValueError(f"power must be > 0 W, got {p_w}")
    return 10.0 * math.log10(p_w) + 30.0
