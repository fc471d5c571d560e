"""Estimation-fraction search, QBER thresholds, sweeps and the FME/AEP window."""

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from finitekey.model import ProtocolConfig
from finitekey.rates import (
    METHODS, MethodId, RatePoint, asymptotic_point, epsilon_total, rate,
)
from finitekey.search import bisect_last_true, golden_section_max

ASYMPTOTIC = math.inf
F_BOUNDS = (1e-4, 0.5)
COARSE_POINTS = 200
THRESHOLD_TOL = 1e-4


@dataclass(frozen=True)
class FOptimum:
    f: float
    point: RatePoint

    @property
    def feasible(self) -> bool:
        return self.point.feasible


def _config(template: ProtocolConfig, **changes) -> ProtocolConfig:
    try:
        return replace(template, **changes)
    except ValueError:
        if "estimation_fraction" in changes:
            raise
        # template f leaves no estimation samples at this N; the caller overrides f anyway
        return replace(template, estimation_fraction=F_BOUNDS[1], **changes)


def _score(pt):
    return pt.raw_rate if pt.feasible else -math.inf


def f_search_bounds(template: ProtocolConfig, bounds=F_BOUNDS):
    """Search interval for f, raised so that eta f N >= 1."""
    lo, hi = bounds
    lo = max(lo, 1.0 / (template.eta * template.block_size))
    return lo, hi


def optimize_f(method, template: ProtocolConfig, bounds=F_BOUNDS,
               points: int = COARSE_POINTS) -> FOptimum:
    """Estimation fraction maximizing the rate of ``method``.

    A log-spaced coarse grid of ``points`` values is scanned, then the best
    bracket is refined by golden-section search in log f. The template's own
    estimation fraction is ignored.
    """
    method = MethodId(method)
    if math.isinf(template.block_size):
        return FOptimum(0.0, asymptotic_point(method, template))
    lo, hi = f_search_bounds(template, bounds)
    if lo > hi:
        pt = RatePoint(method, math.nan, math.nan, math.nan, math.nan,
                       epsilon_total(method, template.budget), 0.0, feasible=False)
        return FOptimum(math.nan, pt)

    def evaluate(f):
        return rate(method, _config(template, estimation_fraction=f))

    grid = np.logspace(math.log10(lo), math.log10(hi), points)
    pts = [evaluate(f) for f in grid]
    scores = [_score(pt) for pt in pts]
    k = int(np.argmax(scores))
    if scores[k] == -math.inf:
        return FOptimum(float(grid[k]), pts[k])

    a = math.log10(grid[max(k - 1, 0)])
    b = math.log10(grid[min(k + 1, points - 1)])
    x, best = golden_section_max(lambda x: _score(evaluate(10.0 ** x)), a, b, tol=1e-9)
    if best > scores[k]:
        f = min(max(10.0 ** x, lo), hi)
        return FOptimum(f, evaluate(f))
    return FOptimum(float(grid[k]), pts[k])


def evaluate_cell(method, template: ProtocolConfig, fixed_f=None) -> FOptimum:
    """Rate at ``template`` with f optimized, or at ``fixed_f`` when given."""
    if math.isinf(template.block_size):
        return FOptimum(0.0, asymptotic_point(method, template))
    if fixed_f is not None:
        return FOptimum(fixed_f, rate(method, _config(template, estimation_fraction=fixed_f)))
    return optimize_f(method, template)


class NoKeyError(ValueError):
    """The method certifies no key even at zero QBER."""


@dataclass(frozen=True)
class ThresholdResult:
    method: MethodId
    threshold_qber: float
    bracket_width: float
    at_block_size: float


def qber_threshold(method, template: ProtocolConfig, fixed_f=None,
                   tol: float = THRESHOLD_TOL) -> ThresholdResult:
    """Largest QBER with a positive (f-optimized, clamped) rate.

    ``template.block_size`` may be ``ASYMPTOTIC``.

    Raises:
        NoKeyError: if the rate is already zero at QBER 0.
    """
    method = MethodId(method)

    def positive(q):
        cfg = _config(template, observed_qber=q)
        return evaluate_cell(method, cfg, fixed_f).point.clamped_rate > 0

    if not positive(0.0):
        raise NoKeyError(f"{method.value} gives no key at QBER 0 for N={template.block_size}")
    if positive(0.5):
        return ThresholdResult(method, 0.5, 0.0, template.block_size)
    lo, hi = bisect_last_true(positive, 0.0, 0.5, tol)
    return ThresholdResult(method, lo, hi - lo, template.block_size)


class Axis(str, enum.Enum):
    BLOCK_SIZE = "block_size"
    QBER = "qber"


@dataclass(frozen=True)
class SweepSpec:
    methods: tuple
    axis: Axis
    grid: tuple
    template: ProtocolConfig
    optimize_f: bool = True
    fixed_f: float = None

    def __post_init__(self):
        if not self.methods:
            raise ValueError("sweep needs at least one method")
        grid = tuple(float(x) for x in self.grid)
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("sweep grid must be non-empty and strictly increasing")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "methods", tuple(MethodId(m) for m in self.methods))
        object.__setattr__(self, "axis", Axis(self.axis))
        if not self.optimize_f and self.fixed_f is None:
            object.__setattr__(self, "fixed_f", self.template.estimation_fraction)


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    method: MethodId
    point: RatePoint
    f_opt: float


def log_grid(start, stop, num):
    return tuple(np.logspace(math.log10(start), math.log10(stop), num))


def linear_grid(start, stop, num):
    return tuple(np.linspace(start, stop, num))


def sweep(spec: SweepSpec) -> list:
    """Evaluate every (axis value, method) cell, grid-major then method-major."""
    rows = []
    field = "block_size" if spec.axis is Axis.BLOCK_SIZE else "observed_qber"
    fixed_f = None if spec.optimize_f else spec.fixed_f
    for value in spec.grid:
        if spec.axis is Axis.BLOCK_SIZE and fixed_f is not None:
            cfg = replace(spec.template, block_size=value, estimation_fraction=fixed_f)
        else:
            cfg = _config(spec.template, **{field: value})
        for method in spec.methods:
            opt = evaluate_cell(method, cfg, fixed_f)
            rows.append(SweepRow(value, method, opt.point, opt.f))
    return rows


def _advantage(template, block_size):
    cfg = _config(template, block_size=block_size)
    fme = optimize_f(MethodId.FME, cfg).point.clamped_rate
    aep = optimize_f(MethodId.AEP, cfg).point.clamped_rate
    return fme > aep


def crossover_window(template: ProtocolConfig, n_range, points: int = COARSE_POINTS,
                     rel_tol: float = 0.01):
    """Block sizes in ``n_range`` where the FME rate beats the AEP rate.

    Scans ``points`` log-spaced block sizes, keeps the longest contiguous run
    with FME > AEP (clamped, f-optimized), and bisects each endpoint in log N
    to ``rel_tol`` relative width.

    Returns:
        (n_low, n_high), or None when FME never wins.
    """
    n_lo, n_hi = n_range
    if not 0 < n_lo < n_hi:
        raise ValueError(f"invalid block-size range {n_range!r}")
    grid = np.logspace(math.log10(n_lo), math.log10(n_hi), points)
    wins = [_advantage(template, n) for n in grid]

    best, run_start = None, None
    for i, w in enumerate(wins + [False]):
        if w and run_start is None:
            run_start = i
        elif not w and run_start is not None:
            if best is None or i - run_start > best[1] - best[0] + 1:
                best = (run_start, i - 1)
            run_start = None
    if best is None:
        return None

    i, j = best
    log_tol = math.log10(1 + rel_tol)
    lo_n = float(grid[i])
    if i > 0:
        # boundary lies between a losing and a winning grid point
        _, first_win = bisect_last_true(
            lambda x: not _advantage(template, 10.0 ** x),
            math.log10(grid[i - 1]), math.log10(grid[i]), log_tol)
        lo_n = 10.0 ** first_win
    hi_n = float(grid[j])
    if j < points - 1:
        last_win, _ = bisect_last_true(
            lambda x: _advantage(template, 10.0 ** x),
            math.log10(grid[j]), math.log10(grid[j + 1]), log_tol)
        hi_n = 10.0 ** last_win
    return lo_n, hi_n


__all__ = [
    "ASYMPTOTIC", "Axis", "FOptimum", "METHODS", "NoKeyError", "SweepRow", "SweepSpec",
    "ThresholdResult", "crossover_window", "evaluate_cell", "linear_grid", "log_grid",
    "optimize_f", "qber_threshold", "sweep",
]
