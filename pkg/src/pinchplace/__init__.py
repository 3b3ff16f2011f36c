"""Closed-form placement of pinching antennas on a dielectric waveguide."""

__version__ = "0.1.0"

from .baseline import fixed_rate_noma, fixed_rate_tdma
from .estimators import NomaPinching, TdmaPinching, check_users
from .exceptions import (
    AntennaOffWaveguide,
    Infeasible,
    IoFailure,
    NumericalFailure,
    OffWaveguide,
    PinchingError,
    ZeroDistance,
)
from .model import Point3, ServiceArea, SystemParams
from .noma import place_noma, sum_rate_noma
from .oma_multi import place_multi, solve_offset, sum_rate_tdma_multi
from .oma_single import place_single, sum_rate_tdma_single

__all__ = [
    "AntennaOffWaveguide",
    "Infeasible",
    "IoFailure",
    "NomaPinching",
    "NumericalFailure",
    "OffWaveguide",
    "PinchingError",
    "Point3",
    "ServiceArea",
    "SystemParams",
    "TdmaPinching",
    "ZeroDistance",
    "check_users",
    "fixed_rate_noma",
    "fixed_rate_tdma",
    "place_multi",
    "place_noma",
    "place_single",
    "solve_offset",
    "sum_rate_noma",
    "sum_rate_tdma_multi",
    "sum_rate_tdma_single",
]
