"""Exact-in-distribution simulator for the jump-OU process."""

from .sim import (
    ExitSample,
    OccupationSample,
    Path,
    PathEstimate,
    SimConfig,
    TerminalSample,
    TwoSidedSample,
    estimate_exit,
    estimate_v,
    occupation_time,
    ou_exact_step,
    simulate_exit,
    simulate_levy,
    simulate_occupation,
    simulate_path,
    simulate_terminal,
    simulate_two_sided_diffusion,
)

__all__ = [
    "ExitSample",
    "OccupationSample",
    "Path",
    "PathEstimate",
    "SimConfig",
    "TerminalSample",
    "TwoSidedSample",
    "estimate_exit",
    "estimate_v",
    "occupation_time",
    "ou_exact_step",
    "simulate_exit",
    "simulate_levy",
    "simulate_occupation",
    "simulate_path",
    "simulate_terminal",
    "simulate_two_sided_diffusion",
]
