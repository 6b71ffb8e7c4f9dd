"""Closed-form performance expressions.

Every function is pure. Functions taking ``p`` or ``g_aw`` accept numpy
arrays and broadcast; scalar inputs give ``float`` results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import SystemParams

VARIANTS = ("paper", "derived")


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def _ratio(num, den):
    # x/0 = inf for x > 0, 0/0 = 0 (limits used for p_b = 0)
    num = np.asarray(num, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = num / den
    return np.where(num == 0, 0.0, r)


def _exp_neg(x):
    # values above the branch knee overflow; callers mask them out
    with np.errstate(over="ignore"):
        return np.exp(-x)


def _check_variant(variant: str) -> None:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")


def decode_success_prob(params: SystemParams) -> float:
    """Probability that Bob's SINR exceeds ``beta`` under Rayleigh fading."""
    interference = params.beta * params.phi_c * params.p_b * params.lambda_ab
    outage_free = params.p_a * params.lambda_bb / (params.p_a * params.lambda_bb + interference)
    return outage_free * math.exp(-params.lambda_ab * params.beta * params.sigma_b2 / params.p_a)


def interval_moments(p: float, q: float) -> tuple[float, float]:
    """First and second moments of the time between successful decodings.

    Returns ``(inf, inf)`` when ``p * q == 0``.
    """
    pq = p * q
    if pq <= 0:
        return math.inf, math.inf
    return 1.0 / pq, (2.0 - pq) / pq**2


def average_aoi(p: float, q: float) -> float:
    """Long-run average AoI in slots; ``inf`` if no update ever gets through."""
    pq = p * q
    if pq <= 0:
        return math.inf
    return 1.0 / pq


def rho0(params: SystemParams, p):
    """Alice-Willie channel-quality threshold separating Willie's two regimes.

    ``+inf`` at ``p = 0`` and ``-inf`` at ``p = 1``.
    """
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore"):
        log_odds = np.log1p(-p) - np.log(p)
    scale = params.p_b / (params.lambda_bw * params.p_a)
    if scale == 0:
        return _out(np.zeros_like(p))
    return _out(scale * log_odds)


def theta0(params: SystemParams, g_aw):
    """False-alarm probability at the radiometer threshold ``g_aw * p_a + sigma_w2``."""
    return _out(_exp_neg(_ratio(params.lambda_bw * np.asarray(g_aw) * params.p_a, params.p_b)))


def theta2(params: SystemParams, tau):
    """False-alarm probability ``Pr(P_W > tau | H0)`` for ``tau > sigma_w2``."""
    excess = np.asarray(tau, dtype=float) - params.sigma_w2
    return _out(_exp_neg(_ratio(params.lambda_bw * excess, params.p_b)))


def theta3(params: SystemParams, g_aw, tau):
    """``Pr(P_W > tau | H1)`` for ``tau > sigma_w2 + g_aw * p_a``."""
    excess = np.asarray(tau, dtype=float) - params.sigma_w2 - np.asarray(g_aw) * params.p_a
    return _out(_exp_neg(_ratio(params.lambda_bw * excess, params.p_b)))


def optimal_threshold(params: SystemParams, p, g_aw):
    """Willie's error-minimizing radiometer threshold (``inf`` means always decide H0)."""
    g_aw = np.asarray(g_aw, dtype=float)
    radiometer = g_aw >= rho0(params, p)
    return _out(np.where(radiometer, g_aw * params.p_a + params.sigma_w2, math.inf))


def min_det_error(params: SystemParams, p, g_aw):
    """Willie's minimum detection error given the instantaneous ``g_aw``."""
    p = np.asarray(p, dtype=float)
    g_aw = np.asarray(g_aw, dtype=float)
    radiometer = g_aw >= rho0(params, p)
    return _out(np.where(radiometer, (1.0 - p) * theta0(params, g_aw), p))


def det_error_given_threshold(params: SystemParams, p, g_aw, tau):
    """Detection error of a radiometer with an arbitrary threshold ``tau``."""
    p = np.asarray(p, dtype=float)
    g_aw = np.asarray(g_aw, dtype=float)
    tau = np.asarray(tau, dtype=float)
    knee = params.sigma_w2 + g_aw * params.p_a
    fa = np.where(tau <= params.sigma_w2, 1.0, theta2(params, tau))
    md = np.where(tau <= knee, 0.0, 1.0 - theta3(params, g_aw, tau))
    return _out((1.0 - p) * fa + p * md)


def theta1(params: SystemParams) -> float:
    """Expected radiometer false alarm over the Alice-Willie fading."""
    num = params.lambda_aw * params.p_b
    return num / (num + params.lambda_bw * params.p_a)


def varphi(params: SystemParams, p):
    """Weight of the radiometer regime for ``p < 1/2``; clipped to 1 for ``p >= 1/2``."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        log_odds = np.log1p(-p) - np.log(p)
        value = np.exp(-log_odds / (1.0 - theta1(params)))
    return _out(np.where(p < 0.5, value, 1.0))


def expected_det_error(params: SystemParams, p, variant: str = "derived"):
    """Willie's minimum detection error averaged over ``|h_AW|^2``.

    ``variant="paper"`` uses the published blind-regime term ``p * (1 - varphi)``;
    ``variant="derived"`` uses ``p * Pr(g_aw < rho0) = p - (1 - p) * varphi``,
    which is what integrating :func:`min_det_error` against the exponential
    density yields.
    """
    _check_variant(variant)
    p = np.asarray(p, dtype=float)
    t1 = theta1(params)
    vp = varphi(params, p)
    radiometer_part = (1.0 - p) * t1 * vp
    if variant == "paper":
        blind_part = p * (1.0 - vp)
    else:
        blind_part = p - (1.0 - p) * vp
    low = radiometer_part + blind_part
    return _out(np.where(p < 0.5, low, (1.0 - p) * t1))


def expected_det_error_slope(params: SystemParams, p, variant: str = "derived"):
    """Derivative in ``p`` of the ``p < 1/2`` branch of :func:`expected_det_error`.

    Root-finding on this resolves the interior maximizer to machine precision,
    which maximizing the (flat-topped) objective directly cannot.
    """
    _check_variant(variant)
    p = np.asarray(p, dtype=float)
    t1 = theta1(params)
    k = 1.0 / (1.0 - t1)
    vp = varphi(params, p)
    if variant == "derived":
        slope = 1.0 - vp * ((1.0 - p) / p + t1)
    else:
        slope = t1 * vp * (k / p - 1.0) + 1.0 - vp - k * vp / (1.0 - p)
    return _out(slope)


@dataclass(frozen=True)
class DetectionReport:
    rho0: float
    tau_star: float
    xi_star: float
    theta0: float
    theta1: float
    theta2: float
    theta3: float
    varphi: float
    xi_bar_star: float


def detection_report(params: SystemParams, p: float, g_aw: float, variant: str = "derived") -> DetectionReport:
    """Collect the analytical detection quantities at one ``(p, g_aw)``.

    ``theta2``/``theta3`` are evaluated at the optimal threshold (both 0 when it
    is infinite).
    """
    tau = optimal_threshold(params, p, g_aw)
    if math.isinf(tau):
        t2 = t3 = 0.0
    else:
        t2 = theta2(params, tau)
        t3 = 1.0
    return DetectionReport(
        rho0=rho0(params, p),
        tau_star=tau,
        xi_star=min_det_error(params, p, g_aw),
        theta0=theta0(params, g_aw),
        theta1=theta1(params),
        theta2=t2,
        theta3=t3,
        varphi=varphi(params, p),
        xi_bar_star=expected_det_error(params, p, variant),
    )
