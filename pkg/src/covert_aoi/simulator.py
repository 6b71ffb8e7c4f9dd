"""Slot-level Monte Carlo of Bob's AoI process and Willie's radiometer.

Randomness comes from counter-based Philox streams keyed by
``(seed, block, role)``, where a block is a fixed run of ``BLOCK`` consecutive
slots (or trials). The draws for a given slot never depend on how blocks are
scheduled, so results are identical for any ``workers`` setting.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from . import analysis
from .model import SystemParams

BLOCK = 1 << 16

# draw roles; part of the stream key, never renumber
TRANSMIT, G_AB, G_BB, G_AW, G_BW, HYPOTHESIS = range(6)


def stream(seed: int, block: int, role: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(block), int(role)))
    return np.random.Generator(np.random.Philox(ss))


def sample_gain(lambda_x: float, rng: np.random.Generator, size=None):
    """Exponential(rate=lambda_x) squared channel magnitude by inversion."""
    u = 1.0 - rng.random(size)  # (0, 1]
    return -np.log(u) / lambda_x


def _blocks(total: int, fn: Callable[[int, int, int], object], workers: int) -> list:
    starts = range(0, total, BLOCK)
    jobs = [(b, s, min(BLOCK, total - s)) for b, s in enumerate(starts)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda job: fn(*job), jobs))
    return [fn(*job) for job in jobs]


@dataclass(frozen=True)
class AoiStats:
    slots: int
    time_avg_aoi: float
    mean_x: float
    mean_x2: float
    successes: int
    attempts: int
    empirical_q: float

    @property
    def renewal_aoi(self) -> float:
        """Average AoI implied by the interval moments."""
        return self.mean_x2 / (2.0 * self.mean_x) + 0.5


def simulate_aoi(params: SystemParams, p: float, slots: int, seed: int, workers: int = 1) -> AoiStats:
    """Simulate ``slots`` slots of the randomized stationary policy.

    A success in slot ``s`` is a decoding instant at ``s + 1``. The AoI is
    ``A(t) = t - r(t)`` for ``t = 1..slots`` with ``r`` the latest decoding
    instant before ``t`` (starting from 0). Interval moments use complete
    intervals only; the trailing partial interval still counts toward the
    time average.
    """
    if slots < 1:
        raise ValueError("slots must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p out of [0,1]")

    def block(b: int, start: int, n: int):
        transmit = stream(seed, b, TRANSMIT).random(n) < p
        g_ab = sample_gain(params.lambda_ab, stream(seed, b, G_AB), n)
        g_bb = sample_gain(params.lambda_bb, stream(seed, b, G_BB), n)
        # gamma_B > beta without dividing by a possibly zero interference term
        decoded = params.p_a * g_ab > params.beta * (params.phi_c * params.p_b * g_bb + params.sigma_b2)
        success = transmit & decoded
        return int(transmit.sum()), np.flatnonzero(success) + start

    parts = _blocks(slots, block, workers)
    attempts = sum(a for a, _ in parts)
    decode_times = np.concatenate([idx for _, idx in parts]) + 1

    if decode_times.size:
        x = np.diff(decode_times, prepend=0)
        tail = slots - int(decode_times[-1])
        area = int(np.sum(x * (x + 1) // 2)) + tail * (tail + 1) // 2
        mean_x = float(x.mean())
        mean_x2 = float(np.mean(x.astype(float) ** 2))
    else:
        area = slots * (slots + 1) // 2
        mean_x = mean_x2 = math.nan
    successes = int(decode_times.size)
    return AoiStats(
        slots=slots,
        time_avg_aoi=area / slots,
        mean_x=mean_x,
        mean_x2=mean_x2,
        successes=successes,
        attempts=attempts,
        empirical_q=successes / attempts if attempts else math.nan,
    )


@dataclass(frozen=True)
class DetectionStats:
    trials: int
    h0_count: int
    h1_count: int
    false_alarms: int
    misses: int

    @property
    def empirical_xi(self) -> float:
        return (self.false_alarms + self.misses) / self.trials

    @property
    def empirical_pfa(self) -> float:
        return self.false_alarms / self.h0_count if self.h0_count else math.nan

    @property
    def empirical_pmd(self) -> float:
        return self.misses / self.h1_count if self.h1_count else math.nan


def simulate_detection(
    params: SystemParams,
    p: float,
    trials: int,
    seed: int,
    threshold: Union[str, float] = "optimal",
    workers: int = 1,
) -> DetectionStats:
    """Willie's radiometer over independent fading slots.

    Each trial draws ``g_aw`` (known to Willie), ``g_bw`` and the hypothesis;
    Willie decides "transmitting" iff the received power exceeds the
    threshold. ``threshold`` is ``"optimal"`` (per-trial optimal threshold for
    the drawn ``g_aw``) or a fixed value in mW (``inf`` allowed).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0.0 < p < 1.0:
        raise ValueError("p out of (0,1)")
    optimal = isinstance(threshold, str)
    if optimal and threshold != "optimal":
        raise ValueError(f"unknown threshold mode {threshold!r}")

    def block(b: int, start: int, n: int):
        g_aw = sample_gain(params.lambda_aw, stream(seed, b, G_AW), n)
        g_bw = sample_gain(params.lambda_bw, stream(seed, b, G_BW), n)
        h1 = stream(seed, b, HYPOTHESIS).random(n) < p
        power = params.p_b * g_bw + params.sigma_w2 + np.where(h1, params.p_a * g_aw, 0.0)
        tau = analysis.optimal_threshold(params, p, g_aw) if optimal else float(threshold)
        d1 = power > tau
        n1 = int(h1.sum())
        return n - n1, n1, int(np.sum(d1 & ~h1)), int(np.sum(~d1 & h1))

    parts = _blocks(trials, block, workers)
    h0, h1, fa, md = (sum(col) for col in zip(*parts))
    return DetectionStats(trials, h0, h1, fa, md)


@dataclass(frozen=True)
class ThresholdSweep:
    best_tau: float
    best_xi: float
    taus: np.ndarray
    xis: np.ndarray
    trials: int


def default_tau_grid(params: SystemParams, g_aw: float, points: int = 50) -> np.ndarray:
    """``points`` thresholds over ``[sigma_w2, sigma_w2 + 4 g_aw p_a]`` plus ``inf``."""
    span = 4.0 * g_aw * params.p_a
    grid = np.linspace(params.sigma_w2, params.sigma_w2 + span, points)
    return np.append(grid, math.inf)


def threshold_sweep_oracle(
    params: SystemParams,
    p: float,
    g_aw: float,
    tau_grid: Sequence[float],
    trials: int,
    seed: int,
    workers: int = 1,
) -> ThresholdSweep:
    """Empirical detection error for every threshold in ``tau_grid`` at fixed ``g_aw``.

    All thresholds share the same simulated slots, so the curve is smooth in
    ``tau`` and differences between points are not inflated by independent
    noise.
    """
    taus = np.asarray(tau_grid, dtype=float)
    if taus.size == 0:
        raise ValueError("tau_grid is empty")
    if trials < 1:
        raise ValueError("trials must be >= 1")

    def block(b: int, start: int, n: int):
        g_bw = sample_gain(params.lambda_bw, stream(seed, b, G_BW), n)
        h1 = stream(seed, b, HYPOTHESIS).random(n) < p
        power = params.p_b * g_bw + params.sigma_w2 + np.where(h1, params.p_a * g_aw, 0.0)
        p0 = np.sort(power[~h1])
        p1 = np.sort(power[h1])
        fa = p0.size - np.searchsorted(p0, taus, side="right")  # power > tau under H0
        md = np.searchsorted(p1, taus, side="right")  # power <= tau under H1
        return fa + md

    errors = np.sum(_blocks(trials, block, workers), axis=0)
    xis = errors / trials
    i = int(np.argmin(xis))
    return ThresholdSweep(float(taus[i]), float(xis[i]), taus, xis, trials)
