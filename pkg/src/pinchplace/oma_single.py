"""One pinching antenna serving TDMA users, one slot per user."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import ZeroDistance
from .model import Point3, ServiceArea, SystemParams, distance, eta


@dataclass(frozen=True)
class TdmaSlotPlan:
    user_index: int
    pin_position: Point3
    tx_power_w: float


def place_single(user: Point3, area: ServiceArea, params: SystemParams) -> Point3:
    """Put the antenna directly above the user's projection on the waveguide.

    The x coordinate is clamped to the waveguide span; for users inside the
    service area the clamp never triggers.
    """
    lx = area.half_length_x_m
    x = min(max(user.x, -lx), lx)
    return Point3(x, 0.0, params.antenna_height_m)


def rate_oma_single(
    user: Point3,
    pin: Point3,
    tx_power_w: float,
    slot_count: int,
    params: SystemParams,
) -> float:
    """Rate of one TDMA slot out of ``slot_count``, in bits/s/Hz."""
    if slot_count < 1:
        raise ValueError("slot_count must be >= 1")
    if tx_power_w < 0:
        raise ValueError("tx_power_w must be >= 0")
    r = distance(user, pin)
    if r == 0.0:
        raise ZeroDistance(f"user {user} coincides with antenna {pin}")
    snr = eta(params) * tx_power_w / (r * r * params.noise_power_w)
    return math.log2(1.0 + snr) / slot_count


def sum_rate_tdma_single(
    users: list[Point3],
    tx_power_w: float,
    area: ServiceArea,
    params: SystemParams,
) -> tuple[float, list[TdmaSlotPlan]]:
    if not users:
        raise ValueError("at least one user is required")
    m = len(users)
    plans = []
    total = 0.0
    for i, user in enumerate(users):
        pin = place_single(user, area, params)
        plans.append(TdmaSlotPlan(i, pin, tx_power_w))
        total += rate_oma_single(user, pin, tx_power_w, m, params)
    return total, plans
