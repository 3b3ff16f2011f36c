"""Conventional fixed antenna used as the reference system."""

from __future__ import annotations

import math
from typing import Optional, Sequence

from .model import Point3, SystemParams
from .noma import noma_sum_rate_at
from .oma_single import rate_oma_single


def default_anchor(params: SystemParams) -> Point3:
    """Center of the waveguide, (0, 0, d)."""
    return Point3(0.0, 0.0, params.antenna_height_m)


def fixed_rate_tdma(
    users: Sequence[Point3],
    tx_power_w: float,
    params: SystemParams,
    anchor: Optional[Point3] = None,
) -> float:
    if not users:
        raise ValueError("at least one user is required")
    anchor = default_anchor(params) if anchor is None else anchor
    m = len(users)
    return math.fsum(rate_oma_single(u, anchor, tx_power_w, m, params) for u in users)


def fixed_rate_noma(
    users: Sequence[Point3],
    budget_w: float,
    target_rate: float,
    params: SystemParams,
    anchor: Optional[Point3] = None,
) -> float:
    anchor = default_anchor(params) if anchor is None else anchor
    total, _ = noma_sum_rate_at(users, anchor, budget_w, target_rate, params)
    return total
