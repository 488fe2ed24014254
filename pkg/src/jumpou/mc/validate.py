"""Cross-checks of the analytic transforms against the simulator.

Each check reports the analytic value, the MC mean and standard error and a
z-score; a check passes when ``|z| <= threshold``. Every group draws from its
own RNG stream so groups can be run separately without changing results.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from ..exit import downward_exit, upward_exit
from ..model import ModelParams, log_mgf_xt
from ..occupation import OccupationQuery, solve_occupation, v_eval
from ..quad import QuadConfig
from .sim import PathEstimate, SimConfig, simulate_exit, simulate_occupation, simulate_terminal

Z_THRESHOLD = 4.0
MGF_THETAS = (-1.0, 0.5, 1.0)
OMEGAS = (0.25, 0.5, 1.0)


@dataclass(frozen=True)
class Check:
    check: str
    analytic: float
    mc_mean: float
    mc_se: float
    z_score: float
    passed: bool

    def as_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def _check(name: str, analytic: float, est: PathEstimate, allowance: float = 0.0,
           threshold: float = Z_THRESHOLD) -> Check:
    signed = (est.mean - analytic) / est.std_error if est.std_error > 0 else 0.0
    z = math.copysign(est.z_score(analytic, allowance), signed)
    return Check(name, float(analytic), est.mean, est.std_error, z, abs(z) <= threshold)


def _stream(sim: SimConfig, offset: int) -> SimConfig:
    return sim.replace(stream_id=(sim.stream_id + offset) % 2**32)


def simulator_checks(params: ModelParams, sim: SimConfig, x0: float = 0.5, t: float = 1.0,
                     threshold: float = Z_THRESHOLD) -> list[Check]:
    """MGF of X_t, Poisson jump count and jump-sign split."""
    sample = simulate_terminal(params, x0, t, _stream(sim, 0))
    out = []
    for th in MGF_THETAS:
        est = PathEstimate.from_samples(np.exp(th * sample.x))
        out.append(_check(f"mgf_theta={th:g}", math.exp(log_mgf_xt(params, x0, th, t)), est, threshold=threshold))
    out.append(_check("jump_count_mean", params.lam * t, PathEstimate.from_samples(sample.jumps),
                      threshold=threshold))
    n_jumps = int(sample.jumps.sum())
    frac = float(sample.up_jumps.sum()) / n_jumps
    est = PathEstimate(frac, math.sqrt(frac * (1.0 - frac) / n_jumps), n_jumps)
    out.append(_check("up_jump_fraction", params.p_up, est, threshold=threshold))
    return out


def exit_checks(params: ModelParams, sim: SimConfig, level: float = 0.0, offset: float = 0.5,
                r: float = 1.0, cfg: QuadConfig | None = None, threshold: float = Z_THRESHOLD) -> list[Check]:
    """Downward exit from ``level + offset`` and upward exit from ``level - offset``."""
    out = []
    for k, (direction, x0) in enumerate((("down", level + offset), ("up", level - offset))):
        sample = simulate_exit(params, x0, level, direction, _stream(sim, 10 + k))
        creep, jump = sample.estimates(r)
        exact = (downward_exit if direction == "down" else upward_exit)(params, x0, level, r, 0.0, cfg)
        allowance = math.exp(-r * sample.horizon)
        out.append(_check(f"exit_{direction}_creep", exact.creep, creep, allowance, threshold))
        out.append(_check(f"exit_{direction}_jump", exact.jump_part, jump, allowance, threshold))
    return out


def occupation_checks(params: ModelParams, query: OccupationQuery, sim: SimConfig,
                      cfg: QuadConfig | None = None, omegas=OMEGAS, offsets=(-0.5, 0.0, 0.5),
                      threshold: float = Z_THRESHOLD) -> list[Check]:
    """V at ``b + offset`` for each penalty in ``omegas``; one simulation per start point."""
    sols = {w: solve_occupation(params, OccupationQuery(query.b, query.s, w, query.theta_T), cfg) for w in omegas}
    out = []
    for k, off in enumerate(offsets):
        x0 = query.b + off
        sample = simulate_occupation(params, x0, query.b, query.s, _stream(sim, 20 + k))
        for w in omegas:
            est = PathEstimate.from_samples(sample.payoff(w, query.theta_T))
            out.append(_check(f"occupation_x={x0:g}_omega={w:g}", v_eval(sols[w], x0, cfg), est,
                              threshold=threshold))
    return out


def run_validation(params: ModelParams, query: OccupationQuery, sim: SimConfig,
                   cfg: QuadConfig | None = None) -> dict:
    checks = (
        simulator_checks(params, sim)
        + exit_checks(params, sim, level=query.b, cfg=cfg)
        + occupation_checks(params, query, sim, cfg)
    )
    return {
        "seed": sim.seed,
        "stream_id": sim.stream_id,
        "n_paths": sim.n_paths,
        "z_threshold": Z_THRESHOLD,
        "checks": [c.as_dict() for c in checks],
        "all_pass": all(c.passed for c in checks),
    }


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False)
