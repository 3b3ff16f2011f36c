"""Deterministic Monte Carlo sweeps comparing pinching and fixed antennas.

Every trial draws its users from its own random stream, seeded from
``(master_seed, trial_index)`` by :func:`substream_seed`. The same drops are
reused across schemes, transmit powers and (scaled) area sizes, so schemes
are compared on paired samples, and trials can be evaluated in any order or
in parallel without changing the output.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Optional, Sequence

import numpy as np

from .baseline import fixed_rate_noma, fixed_rate_tdma
from .exceptions import AntennaOffWaveguide, Infeasible, IoFailure
from .model import Point3, ServiceArea, SystemParams, dbm_to_watts
from .noma import sum_rate_noma
from .oma_multi import sum_rate_tdma_multi
from .oma_single import sum_rate_tdma_single

SCHEMES = ("tdma-pinch", "tdma-fixed", "noma-pinch", "noma-fixed", "tdma-pinch-multi")
FIG2_SCHEMES = SCHEMES[:4]

CSV_COLUMNS = (
    "scheme",
    "x_axis_name",
    "x_value",
    "n_antennas",
    "n_users",
    "trials",
    "infeasible_trials",
    "mean_sum_rate_bps_hz",
    "std_dev",
    "ci95",
)

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(z: int) -> int:
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def substream_seed(master_seed: int, trial_index: int) -> int:
    """64-bit seed of one trial's stream.

    ``splitmix64(splitmix64(master_seed) ^ trial_index)``, all arithmetic
    modulo 2**64. The result keys a Philox counter-based generator.
    """
    return _splitmix64(_splitmix64(master_seed & _MASK64) ^ (trial_index & _MASK64))


def drop_users(
    master_seed: int, trial_index: int, user_count: int, area: ServiceArea
) -> list[Point3]:
    """Users i.i.d. uniform on the service area, on the ground plane.

    Draws are made on [-1, 1]^2 and scaled by the area half lengths, so the
    same trial yields geometrically similar drops for every area size.
    """
    rng = np.random.Generator(np.random.Philox(key=substream_seed(master_seed, trial_index)))
    unit = rng.uniform(-1.0, 1.0, size=(user_count, 2))
    lx, ly = area.half_length_x_m, area.half_length_y_m
    return [Point3(float(u) * lx, float(v) * ly, 0.0) for u, v in unit]


def _default_powers() -> tuple[float, ...]:
    return tuple(float(p) for p in range(0, 45, 5))


@dataclass(frozen=True)
class ScenarioConfig:
    schemes: tuple[str, ...] = FIG2_SCHEMES
    user_count: int = 4
    antenna_count: int = 1
    antenna_counts: tuple[int, ...] = (2, 4, 6)
    area: ServiceArea = field(default_factory=ServiceArea)
    params: SystemParams = field(default_factory=SystemParams)
    tx_power_sweep_dbm: tuple[float, ...] = field(default_factory=_default_powers)
    half_length_sweep_m: tuple[float, ...] = (5.0, 10.0, 20.0, 40.0, 60.0, 80.0, 100.0)
    fig3_tx_power_dbm: float = 30.0
    target_rate: float = 1.0
    trial_count: int = 1000
    master_seed: int = 0
    n_jobs: int = 1

    def __post_init__(self) -> None:
        unknown = set(self.schemes) - set(SCHEMES)
        if unknown:
            raise ValueError(f"unknown schemes: {sorted(unknown)}")
        if not self.schemes:
            raise ValueError("at least one scheme is required")
        if self.trial_count < 1:
            raise ValueError("trial_count must be >= 1")
        if self.user_count < 1:
            raise ValueError("user_count must be >= 1")
        if self.antenna_count < 1 or any(n < 1 for n in self.antenna_counts):
            raise ValueError("antenna counts must be >= 1")
        if not self.tx_power_sweep_dbm:
            raise ValueError("tx_power_sweep_dbm must be nonempty")
        if not self.half_length_sweep_m or any(v <= 0 for v in self.half_length_sweep_m):
            raise ValueError("half_length_sweep_m must be nonempty and positive")
        if self.target_rate < 0:
            raise ValueError("target_rate must be >= 0")
        if self.n_jobs < 1:
            raise ValueError("n_jobs must be >= 1")


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    x_axis_name: str
    x_value: float
    n_antennas: int
    n_users: int
    trials: int
    infeasible_trials: int
    mean_sum_rate_bps_hz: float
    std_dev: float
    ci95: float


@dataclass
class SweepTable:
    """Aggregated rows plus the per-trial samples they came from.

    ``samples`` maps ``(scheme, n_antennas, x_value)`` to one entry per trial
    in trial-index order, ``None`` for infeasible trials. It is not written
    to CSV.
    """

    rows: list[SweepRow] = field(default_factory=list)
    samples: dict[tuple[str, int, float], tuple[Optional[float], ...]] = field(
        default_factory=dict
    )

    def row(self, scheme: str, x_value: float, n_antennas: Optional[int] = None) -> SweepRow:
        for r in self.rows:
            if r.scheme == scheme and r.x_value == x_value and (
                n_antennas is None or r.n_antennas == n_antennas
            ):
                return r
        raise KeyError((scheme, x_value, n_antennas))


def _aggregate(
    scheme: str,
    x_axis_name: str,
    x_value: float,
    n_antennas: int,
    n_users: int,
    values: Sequence[Optional[float]],
) -> SweepRow:
    ok = [v for v in values if v is not None]
    n = len(ok)
    if n == 0:
        mean = std = ci = math.nan
    else:
        mean = math.fsum(ok) / n
        if n > 1:
            std = math.sqrt(math.fsum((v - mean) ** 2 for v in ok) / (n - 1))
        else:
            std = 0.0
        ci = 1.96 * std / math.sqrt(n)
    return SweepRow(
        scheme, x_axis_name, float(x_value), n_antennas, n_users,
        len(values), len(values) - n, mean, std, ci,
    )


def _guarded(fn: Callable[[], float]) -> Optional[float]:
    try:
        return fn()
    except (Infeasible, AntennaOffWaveguide):
        return None


def _power_trial(cfg: ScenarioConfig, trial_index: int) -> dict[str, list[Optional[float]]]:
    params = cfg.params.for_area(cfg.area)
    users = drop_users(cfg.master_seed, trial_index, cfg.user_count, cfg.area)
    out: dict[str, list[Optional[float]]] = {s: [] for s in cfg.schemes}
    for dbm in cfg.tx_power_sweep_dbm:
        p = dbm_to_watts(dbm)
        for scheme in cfg.schemes:
            if scheme == "tdma-pinch":
                value = sum_rate_tdma_single(users, p, cfg.area, params)[0]
            elif scheme == "tdma-fixed":
                value = fixed_rate_tdma(users, p, params)
            elif scheme == "noma-pinch":
                value = _guarded(
                    lambda: sum_rate_noma(users, p, cfg.target_rate, cfg.area, params)[0]
                )
            elif scheme == "noma-fixed":
                value = _guarded(lambda: fixed_rate_noma(users, p, cfg.target_rate, params))
            else:
                value = _guarded(
                    lambda: sum_rate_tdma_multi(
                        users, p, cfg.antenna_count, cfg.area, params
                    )[0]
                )
            out[scheme].append(value)
    return out


def _area_trial(
    cfg: ScenarioConfig, trial_index: int
) -> dict[tuple[str, int], list[Optional[float]]]:
    p = dbm_to_watts(cfg.fig3_tx_power_dbm)
    keys = [("tdma-pinch-multi", n) for n in cfg.antenna_counts] + [("tdma-fixed", 1)]
    out: dict[tuple[str, int], list[Optional[float]]] = {k: [] for k in keys}
    for half in cfg.half_length_sweep_m:
        area = ServiceArea(half, half)
        params = cfg.params.for_area(area)
        users = drop_users(cfg.master_seed, trial_index, cfg.user_count, area)
        for n in cfg.antenna_counts:
            out[("tdma-pinch-multi", n)].append(
                _guarded(lambda: sum_rate_tdma_multi(users, p, n, area, params)[0])
            )
        out[("tdma-fixed", 1)].append(fixed_rate_tdma(users, p, params))
    return out


def _run_trials(fn, cfg: ScenarioConfig) -> list:
    indices = range(cfg.trial_count)
    if cfg.n_jobs == 1:
        return [fn(cfg, t) for t in indices]
    chunk = max(1, cfg.trial_count // (4 * cfg.n_jobs))
    with ProcessPoolExecutor(max_workers=cfg.n_jobs) as pool:
        # map() yields in submission order, so the fold below is order-stable
        return list(pool.map(partial(fn, cfg), indices, chunksize=chunk))


def run_power_sweep(cfg: ScenarioConfig) -> SweepTable:
    """Mean sum rate of each scheme versus transmit power."""
    trials = _run_trials(_power_trial, cfg)
    table = SweepTable()
    n_ant = {s: (cfg.antenna_count if s == "tdma-pinch-multi" else 1) for s in cfg.schemes}
    for scheme in cfg.schemes:
        for j, dbm in enumerate(cfg.tx_power_sweep_dbm):
            values = tuple(t[scheme][j] for t in trials)
            table.samples[(scheme, n_ant[scheme], float(dbm))] = values
            table.rows.append(
                _aggregate(scheme, "tx_power_dbm", dbm, n_ant[scheme], cfg.user_count, values)
            )
    return table


def run_fig2(cfg: ScenarioConfig) -> SweepTable:
    """Single pinching antenna, TDMA and NOMA against the fixed antenna."""
    bad = set(cfg.schemes) - set(FIG2_SCHEMES)
    if bad:
        raise ValueError(f"fig2 does not cover schemes {sorted(bad)}")
    return run_power_sweep(cfg)


def run_fig3(cfg: ScenarioConfig) -> SweepTable:
    """Multi-antenna TDMA versus square service-area half length."""
    trials = _run_trials(_area_trial, cfg)
    table = SweepTable()
    keys = [("tdma-pinch-multi", n) for n in cfg.antenna_counts] + [("tdma-fixed", 1)]
    for scheme, n in keys:
        for j, half in enumerate(cfg.half_length_sweep_m):
            values = tuple(t[(scheme, n)][j] for t in trials)
            table.samples[(scheme, n, float(half))] = values
            table.rows.append(
                _aggregate(scheme, "half_length_m", half, n, cfg.user_count, values)
            )
    return table


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_table(table: SweepTable, destination) -> None:
    """Write ``table`` as CSV to a path or an open text stream."""
    def emit(fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in table.rows:
            w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])

    if hasattr(destination, "write"):
        emit(destination)
        return
    try:
        with open(os.fspath(destination), "w", newline="", encoding="utf-8") as fh:
            emit(fh)
    except OSError as exc:
        raise IoFailure(f"cannot write {destination}: {exc}") from exc


def read_table(source) -> SweepTable:
    with open(os.fspath(source), newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        rows = [
            SweepRow(
                scheme=rec["scheme"],
                x_axis_name=rec["x_axis_name"],
                x_value=float(rec["x_value"]),
                n_antennas=int(rec["n_antennas"]),
                n_users=int(rec["n_users"]),
                trials=int(rec["trials"]),
                infeasible_trials=int(rec["infeasible_trials"]),
                mean_sum_rate_bps_hz=float(rec["mean_sum_rate_bps_hz"]),
                std_dev=float(rec["std_dev"]),
                ci95=float(rec["ci95"]),
            )
            for rec in reader
        ]
    return SweepTable(rows)
