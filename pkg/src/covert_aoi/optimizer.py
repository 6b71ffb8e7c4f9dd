"""Transmit-probability optimization under an average-AoI budget.

Maximizes the expected detection error over ``p`` subject to
``average_aoi(p, q) <= delta``, i.e. ``p >= 1 / (q * delta)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import analysis
from .model import ParameterError, SystemParams, dbm_to_mw, validate

CASES = ("infeasible", "case1_boundary", "case2_half", "case2_interior")
SWEEP_AXES = ("delta", "p_a", "p_b")
COARSE_POINTS = 1024
REFINE_XATOL = 1e-10
TIE_TOL = 1e-12


class NoRootError(ValueError):
    """``q(P_A) = target`` has no finite solution."""


@dataclass(frozen=True)
class OptimizationResult:
    feasible: bool
    case_taken: str
    q: float
    p_star: Optional[float] = None
    xi_bar_star: Optional[float] = None
    rho1: Optional[float] = None
    rho2: Optional[float] = None
    reason: str = ""


def _interior_search(params: SystemParams, lo: float, variant: str) -> tuple[float, float]:
    """Maximize the ``p < 1/2`` branch on ``[lo, 1/2)``.

    The coarse grid is fixed on ``(0, 1/2)`` (plus ``lo`` itself) so an
    interior maximizer comes out bit-identical for every AoI budget that
    leaves it feasible. The best cell is refined with a bounded
    golden-section/Brent search, then polished by a root-find on the analytic
    slope when the slope changes sign across the cell.
    """
    fixed = np.linspace(0.0, 0.5, COARSE_POINTS + 1)[1:-1]
    grid = np.concatenate(([lo], fixed[fixed > lo]))
    values = analysis.expected_det_error(params, grid, variant)
    i = int(np.argmax(values))
    best_p, best_v = float(grid[i]), float(values[i])

    left = grid[max(i - 1, 0)]
    right = grid[i + 1] if i + 1 < len(grid) else np.nextafter(0.5, 0.0)
    if right > left:
        res = minimize_scalar(
            lambda x: -float(analysis.expected_det_error(params, x, variant)),
            bounds=(float(left), float(right)),
            method="bounded",
            options={"xatol": REFINE_XATOL},
        )
        if -res.fun > best_v:
            best_p, best_v = float(res.x), float(-res.fun)
        def slope(x):
            return float(analysis.expected_det_error_slope(params, x, variant))

        if slope(left) > 0 > slope(right):
            root = brentq(slope, float(left), float(right), xtol=1e-15, rtol=4 * np.finfo(float).eps)
            v_root = float(analysis.expected_det_error(params, root, variant))
            if v_root >= best_v - TIE_TOL:
                best_p, best_v = root, v_root
    return best_p, best_v


def _rho_or_none(params: SystemParams, target: float) -> Optional[float]:
    try:
        return find_rho(params, target)
    except NoRootError:
        return None


def solve_p_star(params: SystemParams, variant: str = "derived") -> OptimizationResult:
    """Optimal transmit probability and the case of the solution it falls in."""
    analysis._check_variant(variant)
    q = analysis.decode_success_prob(params)
    rho1 = _rho_or_none(params, 1.0 / params.delta)
    rho2 = _rho_or_none(params, 2.0 / params.delta)
    floor = 1.0 / (q * params.delta) if q > 0 else math.inf

    if floor > 1.0:
        reason = (
            "average AoI cannot be below 1 slot"
            if params.delta <= 1.0
            else "decoding probability too low for the AoI budget"
        )
        return OptimizationResult(False, "infeasible", q, rho1=rho1, rho2=rho2, reason=reason)

    if floor >= 0.5:
        xi = float(analysis.expected_det_error(params, floor, variant))
        return OptimizationResult(True, "case1_boundary", q, floor, xi, rho1, rho2)

    xi_half = analysis.theta1(params) / 2.0
    p_in, xi_in = _interior_search(params, floor, variant)
    if xi_half >= xi_in - TIE_TOL:
        return OptimizationResult(True, "case2_half", q, 0.5, xi_half, rho1, rho2)
    return OptimizationResult(True, "case2_interior", q, p_in, xi_in, rho1, rho2)


def find_rho(params: SystemParams, target: float, bracket_hint: Optional[tuple[float, float]] = None) -> float:
    """Alice power (mW) at which the decoding probability equals ``target``.

    ``params.p_a`` is ignored. The root is searched on ``log(p_a)``; the
    bracket grows by decades until it straddles the target.
    """
    if not 0.0 < target < 1.0:
        raise NoRootError(f"target {target!r} not in (0, 1); q(P_A) < 1 for every finite P_A")
    if params.phi_c * params.p_b == 0 and params.sigma_b2 == 0:
        raise NoRootError("q constant at 1, no crossing")

    def gap(log_pa: float) -> float:
        return analysis.decode_success_prob(params.replace(p_a=math.exp(log_pa))) - target

    lo, hi = bracket_hint or (1e-3, 1e3)
    lo, hi = math.log(lo), math.log(hi)
    step = math.log(10.0)
    for _ in range(300):
        if gap(lo) <= 0:
            break
        lo -= step
    else:
        raise NoRootError("bracket expansion failed below")
    for _ in range(300):
        if hi > 700:
            raise NoRootError(f"bracket expansion failed: q(P_A) stays below {target!r}")
        if gap(hi) >= 0:
            break
        hi += step
    else:
        raise NoRootError("bracket expansion failed above")
    root = brentq(gap, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return math.exp(root)


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    result: Optional[OptimizationResult]
    error: str = ""

    @property
    def feasible(self) -> bool:
        return self.result is not None and self.result.feasible

    @property
    def case(self) -> str:
        return self.result.case_taken if self.result is not None else "error"


def _apply_axis(params: SystemParams, axis: str, value: float) -> SystemParams:
    if axis == "delta":
        return params.replace(delta=value)
    return params.replace(**{axis: dbm_to_mw(value)})


def sweep(
    params: SystemParams,
    axis: str,
    grid: Sequence[float],
    variant: str = "derived",
    workers: int = 1,
) -> list[SweepRow]:
    """Solve the problem at every grid point along one axis.

    ``grid`` holds ``delta`` values in slots, or powers in dBm for the
    ``p_a``/``p_b`` axes. Points that fail validation become error rows.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")
    analysis._check_variant(variant)
    grid = [float(v) for v in grid]
    if not grid:
        raise ValueError("sweep grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("sweep grid must be strictly increasing")

    def one(value: float) -> SweepRow:
        try:
            point = validate(_apply_axis(params, axis, value))
        except ParameterError as exc:
            return SweepRow(axis, value, None, str(exc))
        return SweepRow(axis, value, solve_p_star(point, variant))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, grid))
    return [one(v) for v in grid]
