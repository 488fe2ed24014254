"""Monte Carlo estimators built on the numba kernels.

Paths are farmed out in fixed-size chunks to a thread pool (the kernels
release the GIL). Each path writes its own output slot from its own RNG
substream and reductions run over the full per-path arrays, so results are
bit-identical for any worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from ..errors import DomainError
from ..model import ModelParams
from ..occupation import OccupationQuery
from . import kernels

CHUNK = 16384


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings. ``grid_dt`` defaults to ``1e-3/kappa`` and
    ``horizon`` to ``40/kappa``; ``max_step`` caps far-field steps (0 keeps
    every step on the grid_dt lattice)."""

    n_paths: int = 100_000
    grid_dt: float | None = None
    horizon: float | None = None
    seed: int = 20240601
    stream_id: int = 0
    workers: int | None = None
    max_step: float | None = None

    def __post_init__(self) -> None:
        if isinstance(self.n_paths, bool) or not isinstance(self.n_paths, int) or self.n_paths < 1:
            raise ValueError(f"n_paths must be an integer >= 1, got {self.n_paths!r}")
        for name in ("grid_dt", "horizon"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be > 0, got {v!r}")
        if self.max_step is not None and not self.max_step >= 0:
            raise ValueError(f"max_step must be >= 0, got {self.max_step!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if not 0 <= self.stream_id < 2**32:
            raise ValueError("stream_id must fit in 32 unsigned bits")
        if self.workers is not None and self.workers < 1:
            raise ValueError("workers must be >= 1")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SimConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown simulation keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict[str, Any]:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def replace(self, **changes: Any) -> "SimConfig":
        return SimConfig(**{**self.to_dict(), **changes})

    def dt(self, params: ModelParams) -> float:
        return self.grid_dt if self.grid_dt is not None else 1e-3 / params.kappa

    def horizon_for(self, params: ModelParams) -> float:
        return self.horizon if self.horizon is not None else 40.0 / params.kappa

    def step_cap(self, params: ModelParams) -> float:
        return self.max_step if self.max_step is not None else 0.1 / params.kappa


@dataclass(frozen=True)
class PathEstimate:
    mean: float
    std_error: float
    n: int
    bias_note: str = ""

    @classmethod
    def from_samples(cls, values: np.ndarray, bias_note: str = "") -> "PathEstimate":
        values = np.asarray(values, dtype=float)
        n = values.size
        sd = float(np.std(values, ddof=1)) if n > 1 else 0.0
        return cls(float(np.mean(values)), sd / math.sqrt(n), n, bias_note)

    def z_score(self, target: float, allowance: float = 0.0) -> float:
        """Standardised distance to ``target`` after removing a bias allowance."""
        gap = max(abs(self.mean - target) - allowance, 0.0)
        if gap == 0.0:
            return 0.0
        return gap / self.std_error if self.std_error > 0 else math.inf


def _pv(params: ModelParams) -> np.ndarray:
    return np.array([params.kappa, params.alpha, params.mu, params.sigma, params.lam,
                     params.p_up, params.eta, params.theta_down])


def _run(kernel: Callable, args: tuple, outs: tuple, n: int, sim: SimConfig) -> None:
    seed, stream = np.uint64(sim.seed), sim.stream_id
    chunks = [(a, min(a + CHUNK, n)) for a in range(0, n, CHUNK)]
    workers = sim.workers or os.cpu_count() or 1
    if workers == 1 or len(chunks) == 1:
        for a, b in chunks:
            kernel(*args, seed, stream, a, b, *outs)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(kernel, *args, seed, stream, a, b, *outs) for a, b in chunks]
        for f in futures:
            f.result()


def ou_exact_step(params: ModelParams, x: float, dt: float, gauss) -> float | np.ndarray:
    """Exact conditional law of the continuous part over ``dt`` (vectorised in ``gauss``)."""
    if not dt > 0:
        raise DomainError("dt must be > 0")
    k = params.kappa
    decay = math.exp(-k * dt)
    sd = params.sigma * math.sqrt(-math.expm1(-2.0 * k * dt) / (2.0 * k))
    return params.alpha + (x - params.alpha) * decay - params.mu / k * math.expm1(-k * dt) + sd * np.asarray(gauss)


@dataclass(frozen=True)
class TerminalSample:
    x: np.ndarray
    jumps: np.ndarray
    up_jumps: np.ndarray


def simulate_terminal(params: ModelParams, x0: float, t: float, sim: SimConfig) -> TerminalSample:
    """``X_t`` per path (jump-to-jump exact), with jump counts and up-jump counts."""
    if not t > 0:
        raise DomainError("t must be > 0")
    n = sim.n_paths
    outs = (np.empty(n), np.empty(n, dtype=np.int64), np.empty(n, dtype=np.int64))
    _run(kernels.terminal_paths, (_pv(params), float(x0), float(t)), outs, n, sim)
    return TerminalSample(*outs)


def simulate_levy(params: ModelParams, t: float, sim: SimConfig) -> np.ndarray:
    """Draws of ``L_t`` for the driving Levy process."""
    n = sim.n_paths
    out = np.empty(n)
    _run(kernels.levy_paths, (_pv(params), float(t)), (out,), n, sim)
    return out


@dataclass(frozen=True)
class Path:
    """Event list: lattice points plus a (pre, post) pair at each jump epoch.

    ``tags`` holds the lattice index, ``-1`` before a jump and ``-2`` after it.
    """

    times: np.ndarray
    values: np.ndarray
    tags: np.ndarray

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def n_jumps(self) -> int:
        return int(np.count_nonzero(self.tags == -1))

    def jump_sizes(self) -> np.ndarray:
        return self.values[self.tags == -2] - self.values[self.tags == -1]

    def coarsened(self) -> "Path":
        """Drop odd lattice points; the jump epochs stay."""
        keep = (self.tags < 0) | (self.tags % 2 == 0) | (np.arange(self.tags.size) == self.tags.size - 1)
        return Path(self.times[keep], self.values[keep], self.tags[keep])


def simulate_path(params: ModelParams, x0: float, horizon: float, sim: SimConfig, path_index: int = 0) -> Path:
    """One path on the grid_dt lattice from substream ``path_index``."""
    if not horizon > 0:
        raise DomainError("horizon must be > 0")
    t, v, tags = kernels.lattice_path(
        _pv(params), float(x0), float(horizon), sim.dt(params), np.uint64(sim.seed), sim.stream_id, path_index
    )
    return Path(t, v, tags)


def occupation_time(path: Path, b: float, upto: float) -> float:
    """Time in ``[0, upto]`` spent at or below ``b``, linearly interpolating
    crossing times inside cells where the indicator changes."""
    if upto > path.horizon * (1 + 1e-12):
        raise DomainError(f"upto={upto} exceeds the path horizon {path.horizon}")
    t, v = path.times, path.values
    t0, t1, x0, x1 = t[:-1], t[1:], v[:-1], v[1:]
    live = (t1 > t0) & (t0 < upto)
    t0, t1, x0, x1 = t0[live], t1[live], x0[live], x1[live]
    # Cut the last cell at upto.
    end = np.minimum(t1, upto)
    x1 = x0 + (x1 - x0) * (end - t0) / (t1 - t0)
    h = end - t0
    below0, below1 = x0 <= b, x1 <= b
    out = h * (below0 & below1)
    mixed = below0 != below1
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = (b - x0) / (x1 - x0)
    out = np.where(mixed, np.where(below0, h * frac, h * (1.0 - frac)), out)
    return float(out.sum())


@dataclass(frozen=True)
class OccupationSample:
    occupation: np.ndarray
    x_end: np.ndarray
    clock: np.ndarray

    def payoff(self, omega: float, theta_T: float) -> np.ndarray:
        return np.exp(-omega * self.occupation + theta_T * self.x_end)


def simulate_occupation(params: ModelParams, x0: float, b: float, s: float, sim: SimConfig) -> OccupationSample:
    """Per-path occupation below ``b`` up to an independent e(s) clock and X at the clock."""
    if not s > 0:
        raise DomainError("s must be > 0")
    n = sim.n_paths
    outs = (np.empty(n), np.empty(n), np.empty(n))
    args = (_pv(params), float(x0), float(b), float(s), sim.dt(params), sim.step_cap(params))
    _run(kernels.occupation_paths, args, outs, n, sim)
    return OccupationSample(*outs)


def estimate_v(params: ModelParams, query: OccupationQuery, x0: float, sim: SimConfig) -> PathEstimate:
    sample = simulate_occupation(params, x0, query.b, query.s, sim)
    note = f"occupation discretisation O(grid_dt={sim.dt(params):.3g}) per crossing"
    return PathEstimate.from_samples(sample.payoff(query.omega, query.theta_T), note)


@dataclass(frozen=True)
class ExitSample:
    tau: np.ndarray
    kind: np.ndarray
    overshoot: np.ndarray
    horizon: float

    def estimates(self, r: float, penalty: float = 0.0) -> tuple[PathEstimate, PathEstimate]:
        if not r > 0:
            raise DomainError("r must be > 0")
        note = f"truncation bias <= exp(-r*horizon) = {math.exp(-r * self.horizon):.3g}"
        disc = np.exp(-r * np.where(np.isfinite(self.tau), self.tau, 0.0))
        creep = np.where(self.kind == kernels.EXIT_CREEP, disc, 0.0)
        jump = np.where(self.kind == kernels.EXIT_JUMP, disc * np.exp(-penalty * self.overshoot), 0.0)
        return PathEstimate.from_samples(creep, note), PathEstimate.from_samples(jump, note)


def simulate_exit(params: ModelParams, x0: float, level: float, direction: str, sim: SimConfig) -> ExitSample:
    """First passage of ``level`` in ``direction`` ("up" or "down"), up to the horizon."""
    sign = {"up": 1, "down": -1}.get(direction)
    if sign is None:
        raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")
    if not sign * (level - x0) > 0:
        raise DomainError(f"x0={x0} is not strictly on the {direction}-exit side of level={level}")
    n = sim.n_paths
    outs = (np.empty(n), np.empty(n, dtype=np.int8), np.empty(n))
    horizon = sim.horizon_for(params)
    args = (_pv(params), float(x0), float(level), float(sign), horizon, sim.dt(params), sim.step_cap(params))
    _run(kernels.exit_paths, args, outs, n, sim)
    return ExitSample(*outs, horizon)


def estimate_exit(
    params: ModelParams, x0: float, level: float, direction: str, r: float, penalty: float, sim: SimConfig
) -> tuple[PathEstimate, PathEstimate]:
    """(creep, jump_part) with the overshoot penalised by ``exp(-penalty * overshoot)``."""
    return simulate_exit(params, x0, level, direction, sim).estimates(r, penalty)


@dataclass(frozen=True)
class TwoSidedSample:
    tau: np.ndarray
    side: np.ndarray

    def estimates(self, r: float) -> tuple[PathEstimate, PathEstimate]:
        """(up, down): ``E[exp(-r tau); exit at the upper / lower end]``."""
        disc = np.exp(-r * np.where(np.isfinite(self.tau), self.tau, 0.0))
        up = np.where(self.side == 1, disc, 0.0)
        down = np.where(self.side == -1, disc, 0.0)
        return PathEstimate.from_samples(up), PathEstimate.from_samples(down)


def simulate_two_sided_diffusion(
    params: ModelParams, x0: float, lo: float, hi: float, sim: SimConfig
) -> TwoSidedSample:
    """Exit of ``(lo, hi)`` by the jump-free part of the process."""
    if not lo < x0 < hi:
        raise DomainError("need lo < x0 < hi")
    n = sim.n_paths
    outs = (np.empty(n), np.empty(n, dtype=np.int8))
    args = (_pv(params), float(x0), float(lo), float(hi), sim.horizon_for(params), sim.dt(params))
    _run(kernels.two_sided_diffusion_paths, args, outs, n, sim)
    return TwoSidedSample(*outs)
