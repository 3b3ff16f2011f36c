"""scikit-learn style wrappers around the placement designs.

Users are passed as an array ``X`` of shape ``(n_users, 2)`` holding ground
coordinates ``(x, y)`` in meters, or ``(n_users, 3)`` with ``z == 0``. All
users in one ``X`` form one TDMA frame or one NOMA group.

>>> est = TdmaPinching(n_antennas=1).fit([[10.0, 2.0], [-20.0, -1.0]])
>>> est.pin_x_.ravel().tolist()
[10.0, -20.0]
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .baseline import default_anchor
from .model import Point3, ServiceArea, SystemParams, channel_gain_scalar
from .noma import (
    achievable_rate,
    allocate_power,
    noma_sum_rate_at,
    place_noma,
    sic_order,
)
from .oma_multi import MultiPlacement, exact_rate_multi, place_multi
from .oma_single import place_single, rate_oma_single

_PLACEMENTS = ("pinching", "fixed")


def check_users(X, area: ServiceArea | None = None) -> np.ndarray:
    """Validate a user array and return it as float ``(n_users, 2)``.

    Raises ``ValueError`` for the wrong shape, non-finite values, users off
    the ground plane or, when ``area`` is given, users outside the area.
    """
    X = check_array(X, dtype=np.float64, ensure_min_samples=1)
    if X.shape[1] == 3:
        if np.any(X[:, 2] != 0.0):
            raise ValueError("users must lie on the ground plane (z == 0)")
        X = X[:, :2]
    elif X.shape[1] != 2:
        raise ValueError(f"expected 2 or 3 columns, got {X.shape[1]}")
    if area is not None:
        outside = (np.abs(X[:, 0]) > area.half_length_x_m) | (
            np.abs(X[:, 1]) > area.half_length_y_m
        )
        if outside.any():
            raise ValueError(f"{int(outside.sum())} users lie outside the service area")
    return X


def _points(X: np.ndarray) -> list[Point3]:
    return [Point3(float(x), float(y), 0.0) for x, y in X]


class _SystemMixin:
    def _system(self) -> tuple[ServiceArea, SystemParams]:
        area = ServiceArea(self.half_length_x_m, self.half_length_y_m)
        params = SystemParams(
            carrier_frequency_hz=self.carrier_frequency_hz,
            noise_power_w=self.noise_power_w,
            refractive_index=self.refractive_index,
            antenna_height_m=self.antenna_height_m,
        ).for_area(area)
        return area, params

    def _check_placement(self) -> None:
        if self.placement not in _PLACEMENTS:
            raise ValueError(f"placement must be one of {_PLACEMENTS}, got {self.placement!r}")
        if self.tx_power_w < 0:
            raise ValueError("tx_power_w must be >= 0")


class TdmaPinching(_SystemMixin, TransformerMixin, BaseEstimator):
    """TDMA downlink where the antennas move to each user in turn.

    Parameters
    ----------
    n_antennas : int
        Pinching antennas on the waveguide. With more than one, antennas are
        phase-aligned to the served user.
    placement : {"pinching", "fixed"}
        ``"fixed"`` keeps a single antenna at the waveguide center, the
        conventional baseline. ``n_antennas`` must then be 1.
    tx_power_w : float
        Transmit power per slot.

    Attributes
    ----------
    pin_x_ : ndarray of shape (n_users, n_antennas)
        Antenna x coordinates in each user's slot.
    rates_ : ndarray of shape (n_users,)
        Per-slot rates, already divided by the number of slots.
    sum_rate_ : float
    """

    def __init__(
        self,
        n_antennas=1,
        placement="pinching",
        tx_power_w=1.0,
        carrier_frequency_hz=28e9,
        noise_power_w=1e-12,
        refractive_index=1.4,
        antenna_height_m=3.0,
        half_length_x_m=60.0,
        half_length_y_m=5.0,
    ):
        self.n_antennas = n_antennas
        self.placement = placement
        self.tx_power_w = tx_power_w
        self.carrier_frequency_hz = carrier_frequency_hz
        self.noise_power_w = noise_power_w
        self.refractive_index = refractive_index
        self.antenna_height_m = antenna_height_m
        self.half_length_x_m = half_length_x_m
        self.half_length_y_m = half_length_y_m

    def _validate(self):
        self._check_placement()
        if int(self.n_antennas) < 1:
            raise ValueError("n_antennas must be >= 1")
        if self.placement == "fixed" and self.n_antennas != 1:
            raise ValueError("the fixed baseline has a single antenna")

    def _positions(self, users, area, params) -> list[tuple[Point3, ...]]:
        if self.placement == "fixed":
            anchor = default_anchor(params)
            return [(anchor,) for _ in users]
        if self.n_antennas == 1:
            return [(place_single(u, area, params),) for u in users]
        return [place_multi(u, self.n_antennas, area, params).positions for u in users]

    def _rates(self, users, positions, params) -> np.ndarray:
        m = len(users)
        out = []
        for u, pos in zip(users, positions):
            if len(pos) == 1:
                out.append(rate_oma_single(u, pos[0], self.tx_power_w, m, params))
            else:
                base = Point3(u.x, 0.0, params.antenna_height_m)
                pl = MultiPlacement(base, tuple(p.x - u.x for p in pos), pos)
                out.append(exact_rate_multi(u, pl, self.tx_power_w, m, params))
        return np.asarray(out)

    def fit(self, X, y=None):
        self._validate()
        area, params = self._system()
        X = check_users(X, area)
        users = _points(X)
        positions = self._positions(users, area, params)
        self.n_features_in_ = 2
        self.pin_x_ = np.array([[p.x for p in pos] for pos in positions])
        self.rates_ = self._rates(users, positions, params)
        self.sum_rate_ = float(self.rates_.sum())
        return self

    def transform(self, X):
        """Antenna x coordinates that serve each user in ``X``."""
        check_is_fitted(self, "pin_x_")
        area, params = self._system()
        users = _points(check_users(X, area))
        return np.array([[p.x for p in pos] for pos in self._positions(users, area, params)])

    def predict(self, X):
        """Per-user rates when ``X`` is served as one TDMA frame."""
        check_is_fitted(self, "pin_x_")
        area, params = self._system()
        users = _points(check_users(X, area))
        return self._rates(users, self._positions(users, area, params), params)

    def score(self, X, y=None):
        return float(self.predict(X).sum())


class NomaPinching(_SystemMixin, TransformerMixin, BaseEstimator):
    """NOMA downlink with one antenna held at a single position.

    ``fit`` places the antenna at the users' mean x (or at the waveguide
    center for ``placement="fixed"``) and allocates power so every user but
    the strongest reaches ``target_rate`` exactly.

    Attributes
    ----------
    pin_x_ : float
    powers_ : ndarray of shape (n_users,)
        Transmit powers in the order of the fitted users.
    order_ : ndarray of shape (n_users,)
        User indices from weakest to strongest channel (SIC order).
    sum_rate_ : float

    ``fit`` raises :class:`~pinchplace.exceptions.Infeasible` when the
    budget cannot meet ``target_rate``.
    """

    def __init__(
        self,
        target_rate=1.0,
        placement="pinching",
        tx_power_w=1.0,
        carrier_frequency_hz=28e9,
        noise_power_w=1e-12,
        refractive_index=1.4,
        antenna_height_m=3.0,
        half_length_x_m=60.0,
        half_length_y_m=5.0,
    ):
        self.target_rate = target_rate
        self.placement = placement
        self.tx_power_w = tx_power_w
        self.carrier_frequency_hz = carrier_frequency_hz
        self.noise_power_w = noise_power_w
        self.refractive_index = refractive_index
        self.antenna_height_m = antenna_height_m
        self.half_length_x_m = half_length_x_m
        self.half_length_y_m = half_length_y_m

    def fit(self, X, y=None):
        self._check_placement()
        area, params = self._system()
        users = _points(check_users(X, area))
        if self.placement == "fixed":
            pin = default_anchor(params)
        else:
            pin = place_noma(users, area, params)
        total, alloc = noma_sum_rate_at(users, pin, self.tx_power_w, self.target_rate, params)
        self.n_features_in_ = 2
        self.pin_x_ = pin.x
        self.powers_ = np.asarray(alloc.by_user())
        self.order_ = np.asarray(alloc.ordering.permutation)
        self.sum_rate_ = total
        return self

    def _pin(self, params: SystemParams) -> Point3:
        return Point3(self.pin_x_, 0.0, params.antenna_height_m)

    def transform(self, X):
        """Channel power gains |h|^2 from the fitted antenna, shape (n_users, 1)."""
        check_is_fitted(self, "pin_x_")
        area, params = self._system()
        pin = self._pin(params)
        users = _points(check_users(X, area))
        return np.array([[channel_gain_scalar(u, pin, params) ** 2] for u in users])

    def predict(self, X):
        """Per-user achievable rates for ``X`` served from the fitted position."""
        check_is_fitted(self, "pin_x_")
        area, params = self._system()
        gains = self.transform(X).ravel().tolist()
        order = sic_order(gains)
        sorted_gains = [gains[i] for i in order.permutation]
        alloc = allocate_power(
            sorted_gains, self.tx_power_w, self.target_rate, params.noise_power_w
        )
        rates = np.empty(len(gains))
        for pos, user in enumerate(order.permutation):
            rates[user] = achievable_rate(pos, sorted_gains, alloc, params.noise_power_w)
        return rates

    def score(self, X, y=None):
        return float(self.predict(X).sum())
