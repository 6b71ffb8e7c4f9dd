"""Command-line front end.

Examples::

    covert-aoi optimize --delta 2
    covert-aoi sweep --axis delta --from 1.1 --to 10 --points 90 --p-b-dbm 10 --format csv
    covert-aoi simulate-aoi --p 0.5 --slots 1000000 --seed 1 --format csv
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import analysis, optimizer, simulator
from .model import ParameterError, SystemParams, params_from_db

CONFIG_ENV = "COVERT_AOI_CONFIG"
COMMANDS = ("analyze", "simulate-aoi", "simulate-detection", "optimize", "sweep")

# config key -> params_from_db keyword
PARAM_KEYS = {
    "p_a_dbm": "p_a_dbm",
    "p_b_dbm": "p_b_dbm",
    "sigma_b2_dbm": "sigma_b2_dbm",
    "sigma_w2_dbm": "sigma_w2_dbm",
    "rate_r": "rate_r",
    "phi_c": "phi_c",
    "lambda_ab": "ab",
    "lambda_aw": "aw",
    "lambda_bw": "bw",
    "lambda_bb": "bb",
    "delta": "delta",
}
DEFAULTS = {
    "p_a_dbm": 0.0,
    "p_b_dbm": 0.0,
    "sigma_b2_dbm": -60.0,
    "sigma_w2_dbm": -60.0,
    "rate_r": 1.0,
    "phi_c": 0.01,
    "lambda_ab": 1.0,
    "lambda_aw": 1.0,
    "lambda_bw": 1.0,
    "lambda_bb": 1.0,
    "delta": 5.0,
}

HEADERS = {
    "sweep": "axis,value,feasible,case,p_star,xi_bar_star,q,rho1_mw,rho2_mw",
    "simulate-aoi": "slots,seed,time_avg_aoi,mean_x,mean_x2,empirical_q,closed_form_aoi",
    "simulate-detection": (
        "trials,seed,p,empirical_xi,empirical_pfa,empirical_pmd,"
        "closed_form_xi_paper,closed_form_xi_derived"
    ),
    "optimize": "delta,feasible,case,p_star,xi_bar_star,q,rho1_mw,rho2_mw",
    "analyze": (
        "p,q,average_aoi,mean_x,mean_x2,rho0,theta1,varphi,"
        "xi_bar_star_paper,xi_bar_star_derived,g_aw,tau_star,xi_star"
    ),
}


class UsageError(Exception):
    pass


def fmt(value) -> str:
    """Serialize one field: 12 significant digits, ``inf``, empty for missing."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    value = float(value)
    if math.isnan(value):
        return ""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".12g")


def read_config(path: str) -> dict[str, float]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    values = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, text = line.partition("=")
        key = key.strip()
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        if key not in PARAM_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = float(text.strip())
        except ValueError:
            raise UsageError(f"{path}:{lineno}: {key} is not a number") from None
    return values


def build_params(values: dict[str, float]) -> SystemParams:
    merged = dict(DEFAULTS, **values)
    kwargs = {PARAM_KEYS[k]: v for k, v in merged.items() if not k.startswith("lambda_")}
    kwargs["lambdas"] = {PARAM_KEYS[k]: v for k, v in merged.items() if k.startswith("lambda_")}
    return params_from_db(**kwargs)


@dataclass
class RunSpec:
    command: str
    params: SystemParams
    out: Optional[str] = None
    format: str = "text"
    seed: Optional[int] = None
    slots: int = 1_000_000
    trials: int = 1_000_000
    variant: str = "derived"
    p: Optional[float] = None
    g_aw: Optional[float] = None
    threshold: object = "optimal"
    axis: Optional[str] = None
    grid: list = field(default_factory=list)
    workers: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.command.startswith("simulate-") and self.seed is None:
            raise UsageError(f"{self.command} requires --seed")
        if (self.command == "sweep") != bool(self.grid):
            raise UsageError("a grid is required for sweep and only for sweep")


def _records(spec: RunSpec) -> list[list]:
    params = spec.params
    if spec.command == "analyze":
        q = analysis.decode_success_prob(params)
        mean_x, mean_x2 = analysis.interval_moments(spec.p, q)
        row = [
            spec.p, q, analysis.average_aoi(spec.p, q), mean_x, mean_x2,
            analysis.rho0(params, spec.p), analysis.theta1(params), analysis.varphi(params, spec.p),
            analysis.expected_det_error(params, spec.p, "paper"),
            analysis.expected_det_error(params, spec.p, "derived"),
        ]
        if spec.g_aw is None:
            row += [None, None, None]
        else:
            row += [
                spec.g_aw,
                analysis.optimal_threshold(params, spec.p, spec.g_aw),
                analysis.min_det_error(params, spec.p, spec.g_aw),
            ]
        return [row]
    if spec.command == "optimize":
        r = optimizer.solve_p_star(params, spec.variant)
        return [[params.delta, r.feasible, r.case_taken, r.p_star, r.xi_bar_star, r.q, r.rho1, r.rho2]]
    if spec.command == "sweep":
        rows = []
        for row in optimizer.sweep(params, spec.axis, spec.grid, spec.variant, spec.workers):
            r = row.result
            if r is None:
                rows.append([row.axis, row.value, False, "error", None, None, None, None, None])
            else:
                rows.append([row.axis, row.value, r.feasible, r.case_taken, r.p_star,
                             r.xi_bar_star, r.q, r.rho1, r.rho2])
        return rows
    if spec.command == "simulate-aoi":
        stats = simulator.simulate_aoi(params, spec.p, spec.slots, spec.seed, spec.workers)
        q = analysis.decode_success_prob(params)
        return [[stats.slots, spec.seed, stats.time_avg_aoi, stats.mean_x, stats.mean_x2,
                 stats.empirical_q, analysis.average_aoi(spec.p, q)]]
    # simulate-detection
    stats = simulator.simulate_detection(
        params, spec.p, spec.trials, spec.seed, spec.threshold, spec.workers
    )
    if spec.threshold == "optimal":
        closed = [analysis.expected_det_error(params, spec.p, v) for v in ("paper", "derived")]
    else:
        closed = [None, None]
    return [[stats.trials, spec.seed, spec.p, stats.empirical_xi, stats.empirical_pfa,
             stats.empirical_pmd, *closed]]


def render(spec: RunSpec, records: list[list]) -> str:
    header = HEADERS[spec.command].split(",")
    cells = [[fmt(v) for v in rec] for rec in records]
    if spec.format == "csv":
        return "\n".join([",".join(header)] + [",".join(c) for c in cells]) + "\n"
    if len(cells) == 1:
        width = max(len(h) for h in header)
        return "".join(f"{h:<{width}} = {v}\n" for h, v in zip(header, cells[0]))
    widths = [max(len(h), *(len(c[i]) for c in cells)) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(c, widths)) for c in cells]
    return "\n".join(lines) + "\n"


def run(spec: RunSpec, stdout=None) -> int:
    """Execute a validated run and write its output; returns the exit status."""
    text = render(spec, _records(spec))
    if spec.out:
        with open(spec.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        (stdout or sys.stdout).write(text)
    return 0


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"key = value parameter file (default: ${CONFIG_ENV})")
    common.add_argument("--out", help="write output to PATH instead of stdout")
    common.add_argument("--format", choices=("text", "csv"), default="text")
    common.add_argument("--variant", choices=analysis.VARIANTS, default="derived")
    common.add_argument("--workers", type=int, default=1)
    for key in PARAM_KEYS:
        common.add_argument("--" + key.replace("_", "-"), dest=key, type=float)

    parser = argparse.ArgumentParser(prog="covert-aoi", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="closed-form quantities at one p")
    a.add_argument("--p", type=float, required=True)
    a.add_argument("--g-aw", type=float)

    s = sub.add_parser("simulate-aoi", parents=[common], help="Monte Carlo AoI at Bob")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--slots", type=int, default=1_000_000)

    d = sub.add_parser("simulate-detection", parents=[common], help="Monte Carlo detection at Willie")
    d.add_argument("--p", type=float, required=True)
    d.add_argument("--seed", type=int, required=True)
    d.add_argument("--trials", type=int, default=1_000_000)
    d.add_argument("--threshold", default="optimal", help="'optimal' or a fixed threshold in mW")

    sub.add_parser("optimize", parents=[common], help="optimal transmit probability")

    w = sub.add_parser("sweep", parents=[common], help="optimize along one parameter axis")
    w.add_argument("--axis", choices=optimizer.SWEEP_AXES, required=True)
    w.add_argument("--from", dest="start", type=float, required=True)
    w.add_argument("--to", dest="stop", type=float, required=True)
    w.add_argument("--points", type=int, required=True)
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> RunSpec:
    args = _parser().parse_args(argv)
    values = {}
    config = args.config or os.environ.get(CONFIG_ENV)
    if config:
        values.update(read_config(config))
    values.update({k: getattr(args, k) for k in PARAM_KEYS if getattr(args, k) is not None})
    params = build_params(values)

    extra = {}
    if args.command == "sweep":
        if args.points < 1 or args.stop < args.start or (args.points > 1 and args.stop == args.start):
            raise UsageError("malformed grid: need --points >= 1 and --from < --to")
        extra["axis"] = args.axis
        extra["grid"] = [float(v) for v in np.linspace(args.start, args.stop, args.points)]
    if args.command == "simulate-detection" and args.threshold != "optimal":
        try:
            extra["threshold"] = float(args.threshold)
        except ValueError:
            raise UsageError(f"--threshold must be 'optimal' or a number, got {args.threshold!r}") from None
    for name in ("seed", "slots", "trials", "p", "g_aw"):
        if getattr(args, name, None) is not None:
            extra[name] = getattr(args, name)
    return RunSpec(
        command=args.command, params=params, out=args.out, format=args.format,
        variant=args.variant, workers=args.workers, **extra,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        spec = parse_args(argv)
        return run(spec)
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code or 0)
    except (UsageError, ParameterError, ValueError) as exc:
        print(f"covert-aoi: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
