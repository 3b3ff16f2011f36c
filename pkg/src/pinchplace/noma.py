"""Single pinching antenna serving all users at once with power-domain NOMA.

Two phases: the antenna goes to the centroid of the users' x coordinates,
then power is split so that every user but the strongest gets exactly the
target rate and the strongest takes whatever is left.

Indices inside :class:`PowerAllocation` and the ``*_rate`` helpers refer to
positions in the ascending-gain (SIC) order, not to the caller's user list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .exceptions import Infeasible
from .model import Point3, ServiceArea, SystemParams, channel_gain_scalar


@dataclass(frozen=True)
class SicOrdering:
    """User indices sorted by ascending channel gain (weakest decoded first)."""

    permutation: tuple[int, ...]

    def interference_set(self, position: int) -> range:
        """Sorted positions whose signals interfere when decoding ``position``."""
        return range(position + 1, len(self.permutation))


@dataclass(frozen=True)
class PowerAllocation:
    powers_w: tuple[float, ...]
    target_rate: float
    budget_w: float
    ordering: Optional[SicOrdering] = None

    @property
    def total_w(self) -> float:
        return math.fsum(self.powers_w)

    def by_user(self) -> list[float]:
        """Powers re-indexed to the caller's original user order."""
        if self.ordering is None:
            return list(self.powers_w)
        out = [0.0] * len(self.powers_w)
        for pos, user in enumerate(self.ordering.permutation):
            out[user] = self.powers_w[pos]
        return out


def place_noma(
    users: Sequence[Point3], area: ServiceArea, params: SystemParams
) -> Point3:
    """Antenna at the mean user x, which minimizes the summed squared distance."""
    if not users:
        raise ValueError("at least one user is required")
    x = math.fsum(u.x for u in users) / len(users)
    lx = area.half_length_x_m
    x = min(max(x, -lx), lx)
    return Point3(x, 0.0, params.antenna_height_m)


def sic_order(gains: Sequence[float]) -> SicOrdering:
    if not gains:
        raise ValueError("at least one gain is required")
    for g in gains:
        if not (math.isfinite(g) and g > 0):
            raise ValueError(f"gains must be finite and positive, got {g!r}")
    # sorted() is stable, so ties keep the lower index first
    return SicOrdering(tuple(sorted(range(len(gains)), key=lambda i: gains[i])))


def decode_rate(
    decoder: int,
    signal: int,
    sorted_gains: Sequence[float],
    alloc: PowerAllocation,
    noise_power_w: float,
) -> float:
    """Rate at which ``decoder`` can decode ``signal`` (both SIC positions).

    Users after ``signal`` in the ascending order are still superposed and
    act as interference.
    """
    if decoder < signal:
        raise ValueError("a weaker user never decodes a stronger user's signal")
    h = sorted_gains[decoder]
    p = alloc.powers_w
    interference = h * math.fsum(p[signal + 1:])
    return math.log2(1.0 + h * p[signal] / (interference + noise_power_w))


def achievable_rate(
    m: int,
    sorted_gains: Sequence[float],
    alloc: PowerAllocation,
    noise_power_w: float,
) -> float:
    """Rate of the user at SIC position ``m``: the worst of all its decoders."""
    return min(
        decode_rate(i, m, sorted_gains, alloc, noise_power_w)
        for i in range(m, len(sorted_gains))
    )


def allocate_power(
    sorted_gains: Sequence[float],
    budget_w: float,
    target_rate: float,
    noise_power_w: float,
) -> PowerAllocation:
    """Give each weaker user just enough power for ``target_rate``.

    ``sorted_gains`` are power gains |h|^2 in ascending order. The last
    (strongest) user receives the remaining budget; with a zero target
    the weaker users get nothing. Raises
    :class:`Infeasible` if the budget runs out or the strongest user cannot
    reach ``target_rate`` with what is left.
    """
    if budget_w <= 0:
        raise ValueError("budget_w must be > 0")
    if target_rate < 0:
        raise ValueError("target_rate must be >= 0")
    if any(b < a for a, b in zip(sorted_gains, sorted_gains[1:])):
        raise ValueError("sorted_gains must be ascending")
    frac = (2.0**target_rate - 1.0) / 2.0**target_rate
    powers: list[float] = []
    used = 0.0
    for g in sorted_gains[:-1]:
        p = frac * (budget_w - used + noise_power_w / g)
        # a zero target is met exactly by zero power
        if p < 0 or (p == 0 and target_rate > 0):
            raise Infeasible(f"non-positive power {p} for a weak user")
        powers.append(p)
        used += p
    last = budget_w - used
    if last <= 0:
        raise Infeasible(
            f"weak users need {used} W of a {budget_w} W budget at R_t={target_rate}"
        )
    powers.append(last)
    alloc = PowerAllocation(tuple(powers), target_rate, budget_w)
    strongest = achievable_rate(len(powers) - 1, sorted_gains, alloc, noise_power_w)
    if strongest < target_rate:
        raise Infeasible(
            f"strongest user reaches {strongest} < R_t={target_rate} bits/s/Hz"
        )
    return alloc


def noma_sum_rate_at(
    users: Sequence[Point3],
    pin: Point3,
    budget_w: float,
    target_rate: float,
    params: SystemParams,
) -> tuple[float, PowerAllocation]:
    """Order, allocate and sum rates with the antenna held at ``pin``."""
    gains = [channel_gain_scalar(u, pin, params) ** 2 for u in users]
    order = sic_order(gains)
    sorted_gains = [gains[i] for i in order.permutation]
    alloc = allocate_power(sorted_gains, budget_w, target_rate, params.noise_power_w)
    alloc = PowerAllocation(alloc.powers_w, target_rate, budget_w, order)
    total = math.fsum(
        achievable_rate(m, sorted_gains, alloc, params.noise_power_w)
        for m in range(len(users))
    )
    return total, alloc


def sum_rate_noma(
    users: Sequence[Point3],
    budget_w: float,
    target_rate: float,
    area: ServiceArea,
    params: SystemParams,
) -> tuple[float, Point3, PowerAllocation]:
    pin = place_noma(users, area, params)
    total, alloc = noma_sum_rate_at(users, pin, budget_w, target_rate, params)
    return total, pin, alloc


def closed_form_sum_rate(
    sorted_gains: Sequence[float], alloc: PowerAllocation, noise_power_w: float
) -> float:
    """(M-1) R_t plus the strongest user's interference-free rate."""
    m = len(sorted_gains)
    return (m - 1) * alloc.target_rate + math.log2(
        1.0 + sorted_gains[-1] * alloc.powers_w[-1] / noise_power_w
    )
