"""Randomized oracle suites for the closed-form solvers.

Each suite draws random instances, solves them with the library and checks
the result against an independent route (bisection, grid search, direct
re-evaluation). The suites back ``pinchplace validate`` and the acceptance
tests.
"""

from __future__ import annotations

import math
import sys
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, TextIO

import numpy as np

from .exceptions import Infeasible
from .model import SPEED_OF_LIGHT, Point3, ServiceArea, SystemParams
from .noma import achievable_rate, allocate_power, closed_form_sum_rate, place_noma
from .oma_multi import RESIDUAL_TOL, OffsetProblem, k_star, solve_offset

DEPTHS = {"quick": 100, "full": 10_000}


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    failed: int = 0
    first_failure: Optional[str] = None
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.failed == 0 and self.passed > 0

    def record(self, ok: bool, instance: str) -> None:
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            if self.first_failure is None:
                self.first_failure = instance


@dataclass
class ValidationReport:
    suites: list[SuiteResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.suites)


# ---------------------------------------------------------------- offsets

def random_offset_problems(count: int, seed: int = 0) -> list[OffsetProblem]:
    """D1 in [1, 1e4] m^2, D2 in [0, 200] m, n_eff in (1, 3], f_c in [1, 100] GHz, n in 1..8."""
    rng = np.random.default_rng(seed)
    d1 = rng.uniform(1.0, 1e4, count)
    d2 = rng.uniform(0.0, 200.0, count)
    # 1 + 2 * (1 - u) with u in [0, 1) lands in (1, 3]
    n_eff = 1.0 + 2.0 * (1.0 - rng.random(count))
    fc = rng.uniform(1e9, 1e11, count)
    n = rng.integers(1, 9, count)
    return [
        OffsetProblem(float(a), float(b), int(k), SPEED_OF_LIGHT / float(f), float(e))
        for a, b, e, f, k in zip(d1, d2, n_eff, fc, n)
    ]


def bisection_oracle(
    d1: float, d2: float, n_eff: float, target: float, width: float
) -> float:
    """Root of sqrt(x^2 + d1) + n_eff (d2 + x) - target on [0, target]."""
    def g(x: float) -> float:
        return math.sqrt(x * x + d1) + n_eff * (d2 + x) - target

    lo, hi = 0.0, target
    if g(lo) >= 0.0:
        return lo
    while hi - lo > width:
        mid = lo + 0.5 * (hi - lo)
        if mid in (lo, hi):
            break
        if g(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return lo + 0.5 * (hi - lo)


@dataclass(frozen=True)
class OffsetCheck:
    bracket: bool  # g(0) <= 0 < g(k lambda)
    in_range: bool  # 0 <= delta <= k lambda
    residual: bool
    below_n_lambda: bool
    matches_oracle: bool
    minimal_k: bool

    @property
    def ok(self) -> bool:
        return all(
            (self.bracket, self.in_range, self.residual, self.below_n_lambda,
             self.matches_oracle, self.minimal_k)
        )


def check_offset(prob: OffsetProblem, perturbation: float = 0.0) -> OffsetCheck:
    """Check one solved offset; ``perturbation`` (in wavelengths) is a mutation hook."""
    lam = prob.wavelength
    k = k_star(prob)
    target = k * lam

    def g(x: float) -> float:
        return math.sqrt(x * x + prob.d1_m2) + prob.guide_index * (prob.d2_m + x) - target

    delta = solve_offset(prob) + perturbation * lam
    tol = RESIDUAL_TOL * lam
    oracle = bisection_oracle(prob.d1_m2, prob.d2_m, prob.guide_index, target, 1e-12 * lam)
    f0 = math.sqrt(prob.d1_m2) + prob.guide_index * prob.d2_m
    return OffsetCheck(
        bracket=g(0.0) <= 0.0 < g(target),
        in_range=0.0 <= delta <= target,
        residual=abs(g(delta)) < tol,
        below_n_lambda=delta < prob.antenna_index * lam,
        matches_oracle=abs(delta - oracle) < tol,
        minimal_k=k == math.ceil(f0 / lam) + prob.antenna_index - 1,
    )


def offset_suite(count: int, seed: int = 0, perturbation: float = 0.0) -> SuiteResult:
    res = SuiteResult("offset solver vs bisection")
    for prob in random_offset_problems(count, seed):
        chk = check_offset(prob, perturbation)
        res.record(chk.ok, f"{prob} -> {chk}")
    return res


# ---------------------------------------------------------------- centroid

def centroid_suite(
    count: int, seed: int = 0, grid_points: int = 10_000, half_length: float = 60.0
) -> SuiteResult:
    """Grid search over the waveguide never beats the mean on sum (x - x_m)^2."""
    res = SuiteResult("centroid vs grid")
    rng = np.random.default_rng(seed)
    area = ServiceArea(half_length, 5.0)
    params = SystemParams(waveguide_half_length_m=half_length)
    grid = np.linspace(-half_length, half_length, grid_points)
    for _ in range(count):
        m = int(rng.integers(1, 9))
        xs = rng.uniform(-half_length, half_length, m)
        users = [Point3(float(x), 0.0, 0.0) for x in xs]
        x_pin = place_noma(users, area, params).x
        best_at_pin = float(np.sum((x_pin - xs) ** 2))
        grid_obj = ((grid[:, None] - xs[None, :]) ** 2).sum(axis=1)
        # only float rounding can let the grid win
        ok = grid_obj.min() >= best_at_pin - 1e-9 * max(1.0, best_at_pin)
        res.record(ok, f"xs={xs.tolist()} x*={x_pin} grid_min={grid_obj.min()}")
    return res


# ---------------------------------------------------------------- NOMA power

def random_noma_instance(rng: np.random.Generator, m: Optional[int] = None):
    """Ascending gains, noise, budget and target; may be infeasible."""
    m = int(rng.integers(1, 7)) if m is None else m
    gains = np.sort(10.0 ** rng.uniform(-2.0, 2.0, m))
    noise = 10.0 ** rng.uniform(-2.0, 0.0)
    budget = 10.0 ** rng.uniform(0.0, 2.0)
    target = rng.uniform(0.0, 2.0)
    return gains.tolist(), noise, budget, target


def allocation_suite(count: int, seed: int = 0) -> SuiteResult:
    """Rate targets, power conservation and the closed-form sum identity."""
    res = SuiteResult("NOMA allocation targets and sum identity")
    rng = np.random.default_rng(seed)
    while res.passed + res.failed < count:
        gains, noise, budget, target = random_noma_instance(rng)
        try:
            alloc = allocate_power(gains, budget, target, noise)
        except Infeasible:
            continue
        m = len(gains)
        rates = [achievable_rate(i, gains, alloc, noise) for i in range(m)]
        targets_ok = all(abs(r - target) < 1e-9 for r in rates[:-1])
        targets_ok = targets_ok and rates[-1] >= target - 1e-9
        conserved = abs(math.fsum(alloc.powers_w) - budget) <= 1e-12 * budget
        identity = abs(math.fsum(rates) - closed_form_sum_rate(gains, alloc, noise)) < 1e-9
        positive = target == 0 or all(p > 0 for p in alloc.powers_w)
        res.record(
            targets_ok and conserved and identity and positive,
            f"gains={gains} noise={noise} budget={budget} R_t={target} "
            f"powers={alloc.powers_w} rates={rates}",
        )
    return res


def two_user_grid_best(
    gains: list[float], noise: float, budget: float, target: float, points: int = 10_000
) -> tuple[float, float]:
    """Best feasible sum rate over ``points`` splits of the budget, and the grid step's rate bound."""
    h1, h2 = gains
    p1 = np.linspace(0.0, budget, points)
    p2 = budget - p1
    with np.errstate(divide="ignore", invalid="ignore"):
        # weak user's signal decoded by itself and by the strong user
        r11 = np.log2(1.0 + h1 * p1 / (h1 * p2 + noise))
        r21 = np.log2(1.0 + h2 * p1 / (h2 * p2 + noise))
        r1 = np.minimum(r11, r21)
        r2 = np.log2(1.0 + h2 * p2 / noise)
    total = r1 + r2
    feasible = (r1 >= target) & (r2 >= target) & (p1 > 0) & (p2 > 0)
    step_bound = float(np.max(np.abs(np.diff(total)))) if points > 1 else 0.0
    if not feasible.any():
        return -math.inf, step_bound
    return float(total[feasible].max()), step_bound


def two_user_grid_suite(count: int, seed: int = 0, points: int = 10_000) -> SuiteResult:
    res = SuiteResult("NOMA allocation vs 2-user grid")
    rng = np.random.default_rng(seed)
    while res.passed + res.failed < count:
        gains, noise, budget, target = random_noma_instance(rng, m=2)
        try:
            alloc = allocate_power(gains, budget, target, noise)
        except Infeasible:
            continue
        closed = math.fsum(achievable_rate(i, gains, alloc, noise) for i in range(2))
        grid_best, step = two_user_grid_best(gains, noise, budget, target, points)
        res.record(
            grid_best <= closed + step + 1e-9,
            f"gains={gains} noise={noise} budget={budget} R_t={target} "
            f"closed={closed} grid={grid_best}",
        )
    return res


# ---------------------------------------------------------------- driver

def run_validate(
    depth: str = "quick",
    seed: int = 0,
    stream: Optional[TextIO] = None,
    offset_perturbation: float = 0.0,
) -> ValidationReport:
    """Run every suite at ``depth`` and print one line per suite."""
    if depth not in DEPTHS:
        raise ValueError(f"depth must be one of {sorted(DEPTHS)}")
    count = DEPTHS[depth]
    stream = sys.stdout if stream is None else stream
    runs: list[Callable[[], SuiteResult]] = [
        lambda: offset_suite(count, seed, offset_perturbation),
        lambda: centroid_suite(min(count, 1000), seed),
        lambda: allocation_suite(count, seed),
        lambda: two_user_grid_suite(max(1, count // 10), seed),
    ]
    report = ValidationReport()
    for run in runs:
        t0 = time.perf_counter()
        suite = run()
        suite.seconds = time.perf_counter() - t0
        report.suites.append(suite)
        status = "PASS" if suite.ok else "FAIL"
        print(
            f"{status} {suite.name}: {suite.passed} passed, {suite.failed} failed "
            f"({suite.seconds:.2f}s)",
            file=stream,
        )
        if suite.first_failure is not None:
            print(f"  first failure: {suite.first_failure}", file=stream)
    return report

