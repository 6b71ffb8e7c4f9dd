"""Domain types, unit conversion and parameter validation.

All powers are linear milliwatts. Fading gains ``|h_x|^2`` are exponential
with *rate* ``lambda_x``, i.e. ``Pr(|h_x|^2 > x) = exp(-lambda_x * x)``; the
closed forms in :mod:`covert_aoi.analysis` depend on this convention and the
simulator samples with it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping


class ParameterError(ValueError):
    """Raised when a parameter set violates one or more invariants."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw: float) -> float:
    if mw <= 0.0:
        return -math.inf
    return 10.0 * math.log10(mw)


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of the Alice/Bob/Willie link.

    Defaults are the numerical-results setting: R = 1, noise at -60 dBm,
    unit fading rates, cancellation coefficient 0.01 and 0 dBm powers.
    """

    p_a: float = 1.0
    p_b: float = 1.0
    phi_c: float = 0.01
    sigma_b2: float = 1e-6
    sigma_w2: float = 1e-6
    rate_r: float = 1.0
    lambda_ab: float = 1.0
    lambda_aw: float = 1.0
    lambda_bw: float = 1.0
    lambda_bb: float = 1.0
    delta: float = 5.0
    beta: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "beta", 2.0 ** self.rate_r - 1.0)

    def replace(self, **changes) -> "SystemParams":
        values = {k: getattr(self, k) for k in FIELD_NAMES}
        values.update(changes)
        return SystemParams(**values)


FIELD_NAMES = (
    "p_a", "p_b", "phi_c", "sigma_b2", "sigma_w2", "rate_r",
    "lambda_ab", "lambda_aw", "lambda_bw", "lambda_bb", "delta",
)
LAMBDA_NAMES = ("lambda_ab", "lambda_aw", "lambda_bw", "lambda_bb")


def problems(params: SystemParams) -> list[str]:
    """Return a message for every violated invariant (empty if valid)."""
    out = []
    for name in FIELD_NAMES:
        value = getattr(params, name)
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            out.append(f"{name} must be a finite number")
    if out:
        return out
    if not params.p_a > 0:
        out.append("p_a must be > 0")
    if not params.p_b >= 0:
        out.append("p_b must be >= 0")
    if not 0.0 <= params.phi_c <= 1.0:
        out.append("phi_c out of [0,1]")
    if not params.sigma_b2 >= 0:
        out.append("sigma_b2 must be >= 0")
    if not params.sigma_w2 >= 0:
        out.append("sigma_w2 must be >= 0")
    if not params.rate_r > 0:
        out.append("rate_r must be > 0")
    elif params.beta != 2.0 ** params.rate_r - 1.0:
        out.append("beta must equal 2**rate_r - 1")
    for name in LAMBDA_NAMES:
        if not getattr(params, name) > 0:
            out.append(f"{name} must be > 0")
    if not params.delta > 0:
        out.append("delta must be > 0")
    return out


def validate(params: SystemParams) -> SystemParams:
    """Check every invariant; raise :class:`ParameterError` listing all failures."""
    found = problems(params)
    if found:
        raise ParameterError(found)
    return params


def params_from_db(
    p_a_dbm: float = 0.0,
    p_b_dbm: float = 0.0,
    sigma_b2_dbm: float = -60.0,
    sigma_w2_dbm: float = -60.0,
    rate_r: float = 1.0,
    phi_c: float = 0.01,
    lambdas: float | Mapping[str, float] = 1.0,
    delta: float = 5.0,
) -> SystemParams:
    """Build validated :class:`SystemParams` from dBm-valued powers.

    ``lambdas`` is either one rate shared by all four links or a mapping with
    keys ``ab``, ``aw``, ``bw``, ``bb`` (``lambda_`` prefix optional).
    """
    if isinstance(lambdas, Mapping):
        rates = {}
        for key, value in lambdas.items():
            name = key if key.startswith("lambda_") else f"lambda_{key}"
            if name not in LAMBDA_NAMES:
                raise ParameterError([f"unknown fading rate {key!r}"])
            rates[name] = float(value)
        missing = [n for n in LAMBDA_NAMES if n not in rates]
        if missing:
            raise ParameterError([f"{n} missing" for n in missing])
    else:
        rates = {name: float(lambdas) for name in LAMBDA_NAMES}
    params = SystemParams(
        p_a=dbm_to_mw(p_a_dbm),
        p_b=dbm_to_mw(p_b_dbm),
        phi_c=phi_c,
        sigma_b2=dbm_to_mw(sigma_b2_dbm),
        sigma_w2=dbm_to_mw(sigma_w2_dbm),
        rate_r=rate_r,
        delta=delta,
        **rates,
    )
    return validate(params)


@dataclass(frozen=True)
class ChannelDraw:
    """One block-fading realization of all squared channel magnitudes."""

    g_ab: float
    g_aw: float
    g_bw: float
    g_bb: float

    def __post_init__(self):
        for name in ("g_ab", "g_aw", "g_bw", "g_bb"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ParameterError([f"{name} must be a finite nonnegative gain"])


@dataclass(frozen=True)
class TransmitPolicy:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ParameterError(["p out of [0,1]"])
