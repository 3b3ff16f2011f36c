"""N phase-aligned pinching antennas serving TDMA users.

For each antenna ``n`` the solver picks the smallest non-negative offset
``delta`` from the user's projection on the waveguide such that the free-space
path plus the guided path is an integer number ``k`` of carrier wavelengths,
i.e. ``f(delta) = sqrt(delta^2 + D1) + n_eff (delta + D2) = k lambda`` with
``D1 = y^2 + d^2`` and ``D2 = L_x + x``. All N terms of the received sum then
add in phase.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .exceptions import AntennaOffWaveguide, NumericalFailure, ZeroDistance
from .model import Point3, ServiceArea, SystemParams, distance, eta, phase_shift

RESIDUAL_TOL = 1e-9  # times lambda
BISECTION_WIDTH = 1e-12  # times lambda
ALIGNMENT_TOL = 1e-6  # radians


@dataclass(frozen=True)
class OffsetProblem:
    """One antenna's alignment equation for one user.

    ``antenna_index`` is 1-based: antenna ``n`` targets the ``(n-1)``-th
    wavelength multiple above the first one reachable at zero offset.
    """

    d1_m2: float
    d2_m: float
    antenna_index: int
    wavelength: float
    guide_index: float

    def __post_init__(self) -> None:
        if not self.d1_m2 > 0:
            raise ValueError(f"d1_m2 must be > 0, got {self.d1_m2}")
        if not self.d2_m >= 0:
            raise ValueError(f"d2_m must be >= 0, got {self.d2_m}")
        if self.antenna_index < 1:
            raise ValueError("antenna_index is 1-based")
        if not self.wavelength > 0:
            raise ValueError("wavelength must be > 0")
        if not self.guide_index >= 1:
            raise ValueError("guide_index must be >= 1")

    @classmethod
    def for_user(
        cls, user: Point3, antenna_index: int, params: SystemParams
    ) -> OffsetProblem:
        return cls(
            d1_m2=user.y**2 + params.antenna_height_m**2,
            d2_m=params.waveguide_half_length_m + user.x,
            antenna_index=antenna_index,
            wavelength=params.wavelength,
            guide_index=params.refractive_index,
        )


@dataclass(frozen=True)
class MultiPlacement:
    base_position: Point3
    offsets: tuple[float, ...]
    positions: tuple[Point3, ...]

    @property
    def n_antennas(self) -> int:
        return len(self.positions)


def f_offset(x: float, prob: OffsetProblem) -> float:
    """Free-space plus guided path length, in meters, at offset ``x``."""
    return math.sqrt(x * x + prob.d1_m2) + prob.guide_index * (x + prob.d2_m)


def k_star(prob: OffsetProblem) -> int:
    """Smallest admissible wavelength multiple for this antenna index."""
    lam = prob.wavelength
    f0 = f_offset(0.0, prob)
    delta = math.fmod(f0, lam)
    whole = round((f0 - delta) / lam)
    return int(whole) + math.ceil(delta / lam) + (prob.antenna_index - 1)


def _quadratic_roots(a: float, b: float, c: float) -> list[float]:
    # Numerically stable form; see e.g. Numerical Recipes 5.6.
    if a == 0.0:
        return [] if b == 0.0 else [-c / b]
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        # tangency up to rounding
        if disc > -1e-12 * b * b:
            disc = 0.0
        else:
            return []
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    roots = [q / a]
    if q != 0.0:
        roots.append(c / q)
    return sorted(roots)


def _bisect(prob: OffsetProblem, target: float) -> float:
    lam = prob.wavelength
    lo, hi = 0.0, target
    g_lo = f_offset(lo, prob) - target
    g_hi = f_offset(hi, prob) - target
    if g_lo == 0.0:
        return 0.0
    if g_lo > 0.0 or g_hi <= 0.0:
        raise NumericalFailure(
            f"cannot bracket root: g(0)={g_lo!r}, g({hi!r})={g_hi!r} for {prob}"
        )
    while hi - lo > BISECTION_WIDTH * lam:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f_offset(mid, prob) - target > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def solve_offset(prob: OffsetProblem) -> float:
    """Smallest non-negative offset satisfying the alignment equation.

    Squaring ``sqrt(x^2 + D1) = A - n_eff x`` with ``A = k lambda - n_eff D2``
    gives ``(1 - n_eff^2) x^2 + 2 n_eff A x + (D1 - A^2) = 0``. Squaring
    admits a spurious branch, so each candidate is checked against the
    unsquared equation. Bisection is the fallback.
    """
    lam = prob.wavelength
    n_eff = prob.guide_index
    target = k_star(prob) * lam
    a_term = target - n_eff * prob.d2_m
    root_d1 = math.sqrt(prob.d1_m2)
    a = 1.0 - n_eff * n_eff
    b = 2.0 * n_eff * a_term
    # D1 - A^2 factored to avoid cancellation when A ~ sqrt(D1)
    c = (root_d1 - a_term) * (root_d1 + a_term)
    tol = RESIDUAL_TOL * lam
    for root in _quadratic_roots(a, b, c):
        if root < 0.0:
            if root < -tol:
                continue
            root = 0.0
        if abs(f_offset(root, prob) - target) < tol:
            return root + 0.0  # drop a negative zero
    return _bisect(prob, target)


def place_multi(
    user: Point3, antenna_count: int, area: ServiceArea, params: SystemParams
) -> MultiPlacement:
    """Phase-aligned positions of ``antenna_count`` antennas for one user."""
    if antenna_count < 1:
        raise ValueError("antenna_count must be >= 1")
    lx = area.half_length_x_m
    if abs(params.waveguide_half_length_m - lx) > 1e-9 * lx:
        raise ValueError(
            "params.waveguide_half_length_m must match the area half length; "
            "use params.for_area(area)"
        )
    if not area.contains(user):
        raise ValueError(f"user {user} lies outside the service area")
    d = params.antenna_height_m
    offsets = tuple(
        solve_offset(OffsetProblem.for_user(user, n, params))
        for n in range(1, antenna_count + 1)
    )
    if user.x + offsets[-1] > lx:
        raise AntennaOffWaveguide(
            f"antenna {antenna_count} for user at x={user.x} would sit at "
            f"x={user.x + offsets[-1]} > {lx}"
        )
    base = Point3(user.x, 0.0, d)
    positions = tuple(Point3(user.x + off, 0.0, d) for off in offsets)
    return MultiPlacement(base, offsets, positions)


def _coherent_sum(
    user: Point3, positions: tuple[Point3, ...] | list[Point3], params: SystemParams
) -> complex:
    k = 2.0 * math.pi / params.wavelength
    root_eta = math.sqrt(eta(params))
    total = 0j
    for pos in positions:
        r = distance(user, pos)
        if r == 0.0:
            raise ZeroDistance(f"user {user} coincides with antenna {pos}")
        total += root_eta / r * cmath.exp(-1j * (k * r + phase_shift(pos, params)))
    return total


def alignment_phases(
    user: Point3, placement: MultiPlacement, params: SystemParams
) -> list[float]:
    """Total phase of each antenna's path, reduced to [0, 2 pi)."""
    k = 2.0 * math.pi / params.wavelength
    return [
        math.fmod(k * distance(user, pos) + phase_shift(pos, params), 2.0 * math.pi)
        for pos in placement.positions
    ]


def is_phase_aligned(
    user: Point3, placement: MultiPlacement, params: SystemParams,
    tol: float = ALIGNMENT_TOL,
) -> bool:
    two_pi = 2.0 * math.pi
    return all(
        ph < tol or ph > two_pi - tol
        for ph in alignment_phases(user, placement, params)
    )


def _check_rate_args(tx_power_w: float, slot_count: int) -> None:
    if slot_count < 1:
        raise ValueError("slot_count must be >= 1")
    if tx_power_w < 0:
        raise ValueError("tx_power_w must be >= 0")


def exact_rate_multi(
    user: Point3,
    placement: MultiPlacement,
    tx_power_w: float,
    slot_count: int,
    params: SystemParams,
) -> float:
    """TDMA slot rate with equal power split and the exact coherent sum."""
    _check_rate_args(tx_power_w, slot_count)
    n = placement.n_antennas
    if n == 0:
        raise ValueError("placement has no antennas")
    gain = abs(_coherent_sum(user, placement.positions, params)) ** 2
    snr = tx_power_w / (n * params.noise_power_w) * gain
    return math.log2(1.0 + snr) / slot_count


def approx_rate_multi(
    user: Point3,
    tx_power_w: float,
    slot_count: int,
    antenna_count: int,
    params: SystemParams,
) -> float:
    """Rate assuming every antenna sits at the user's projection point."""
    _check_rate_args(tx_power_w, slot_count)
    d2 = user.y**2 + params.antenna_height_m**2
    snr = antenna_count * tx_power_w * eta(params) / (params.noise_power_w * d2)
    return math.log2(1.0 + snr) / slot_count


def rate_upper_bound(
    user: Point3,
    placement: MultiPlacement,
    tx_power_w: float,
    slot_count: int,
    params: SystemParams,
) -> float:
    """Cauchy-Schwarz bound on :func:`exact_rate_multi` for this placement."""
    _check_rate_args(tx_power_w, slot_count)
    e = eta(params)
    s = 0.0
    for pos in placement.positions:
        r = distance(user, pos)
        if r == 0.0:
            raise ZeroDistance(f"user {user} coincides with antenna {pos}")
        s += e / (r * r)
    return math.log2(1.0 + tx_power_w / params.noise_power_w * s) / slot_count


def sum_rate_tdma_multi(
    users: list[Point3],
    tx_power_w: float,
    antenna_count: int,
    area: ServiceArea,
    params: SystemParams,
) -> tuple[float, list[MultiPlacement]]:
    """Sum of exact per-slot rates with each slot's antennas phase-aligned."""
    if not users:
        raise ValueError("at least one user is required")
    m = len(users)
    placements = [place_multi(u, antenna_count, area, params) for u in users]
    total = sum(
        exact_rate_multi(u, pl, tx_power_w, m, params)
        for u, pl in zip(users, placements)
    )
    return total, placements
