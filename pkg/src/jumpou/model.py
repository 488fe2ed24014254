"""Parameters of the jump-driven Ornstein-Uhlenbeck process and the closed-form
transforms of its driver and of the marginal law of X_t.

The process solves ``dX_t = kappa (alpha - X_t) dt + dL_t`` where ``L`` is a
Brownian motion with drift plus compound Poisson jumps whose sizes follow a
two-sided exponential law (upward rate ``eta`` with probability ``p_up``,
downward rate ``theta_down`` otherwise).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any, Mapping

import numpy as np

from .errors import DomainError

# JSON key <-> attribute; "lambda" is a Python keyword.
_JSON_TO_ATTR = {
    "kappa": "kappa",
    "alpha": "alpha",
    "mu": "mu",
    "sigma": "sigma",
    "lambda": "lam",
    "p_up": "p_up",
    "eta": "eta",
    "theta_down": "theta_down",
}
_ATTR_TO_JSON = {v: k for k, v in _JSON_TO_ATTR.items()}


@dataclass(frozen=True)
class ModelParams:
    """Static parameters of the jump-OU process.

    Construction validates every constraint so downstream code can assume them.
    """

    kappa: float
    alpha: float
    mu: float
    sigma: float
    lam: float
    p_up: float
    eta: float
    theta_down: float

    def __post_init__(self) -> None:
        for name in _ATTR_TO_JSON:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TypeError(f"{_ATTR_TO_JSON[name]} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ValueError(f"{_ATTR_TO_JSON[name]} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        for name in ("kappa", "sigma", "lam", "eta", "theta_down"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{_ATTR_TO_JSON[name]} must be > 0, got {getattr(self, name)}")
        if not 0.0 < self.p_up < 1.0:
            raise ValueError(f"p_up must lie strictly inside (0, 1), got {self.p_up}")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ModelParams":
        unknown = set(data) - set(_JSON_TO_ATTR)
        if unknown:
            raise ValueError(f"unknown model keys: {sorted(unknown)}")
        missing = set(_JSON_TO_ATTR) - set(data)
        if missing:
            raise ValueError(f"missing model keys: {sorted(missing)}")
        return cls(**{_JSON_TO_ATTR[k]: v for k, v in data.items()})

    def to_dict(self) -> dict[str, float]:
        return {_ATTR_TO_JSON[k]: v for k, v in asdict(self).items()}

    def replace(self, **changes: float) -> "ModelParams":
        values = asdict(self)
        values.update(changes)
        return ModelParams(**values)

    def hat(self, x: float) -> "HatCoordinate":
        return HatCoordinate(x - self.alpha)

    @property
    def stationary_sd(self) -> float:
        """Standard deviation of the stationary law of the diffusion part."""
        return self.sigma / math.sqrt(2.0 * self.kappa)


@dataclass(frozen=True)
class HatCoordinate:
    """A level measured from the mean-reversion level: ``value = x - alpha``."""

    value: float

    def __float__(self) -> float:
        return self.value


def _check_theta(params: ModelParams, theta) -> None:
    th = np.asarray(theta, dtype=float)
    if np.any(th <= -params.theta_down) or np.any(th >= params.eta):
        raise DomainError(
            f"theta must lie in (-{params.theta_down}, {params.eta}), got {theta!r}"
        )


def levy_exponent(params: ModelParams, theta):
    """ln E[exp(theta L_1)] for the double-exponential jump diffusion."""
    _check_theta(params, theta)
    th = np.asarray(theta, dtype=float)
    p, eta, vt = params.p_up, params.eta, params.theta_down
    jumps = p * eta / (eta - th) + (1.0 - p) * vt / (vt + th) - 1.0
    out = params.mu * th + 0.5 * params.sigma**2 * th**2 + params.lam * jumps
    return float(out) if out.ndim == 0 else out


def jump_density(params: ModelParams, y):
    """Density of a single jump size; the value at y == 0 is the upward limit."""
    yy = np.asarray(y, dtype=float)
    up = params.p_up * params.eta * np.exp(-params.eta * np.maximum(yy, 0.0))
    down = (1.0 - params.p_up) * params.theta_down * np.exp(params.theta_down * np.minimum(yy, 0.0))
    out = np.where(yy >= 0.0, up, down)
    return float(out) if out.ndim == 0 else out


def log_mgf_xt(params: ModelParams, x: float, theta: float, t):
    """ln E_x[exp(theta X_t)], vectorised over ``t``."""
    _check_theta(params, theta)
    tt = np.asarray(t, dtype=float)
    if np.any(tt < 0.0):
        raise DomainError("t must be >= 0")
    k = params.kappa
    u = np.exp(-k * tt)
    one_minus_u = -np.expm1(-k * tt)
    out = _log_mgf_in_u(params, x, theta, u, one_minus_u)
    return float(out) if out.ndim == 0 else out


def _log_mgf_in_u(params: ModelParams, x: float, theta: float, u, one_minus_u):
    # Same five terms written in u = exp(-kappa t); used directly by quadrature.
    k, p = params.kappa, params.p_up
    eta, vt = params.eta, params.theta_down
    one_minus_u2 = one_minus_u * (1.0 + u)
    return (
        theta * u * x
        + theta * params.alpha * one_minus_u
        + params.mu * theta * one_minus_u / k
        + params.sigma**2 * one_minus_u2 * theta**2 / (4.0 * k)
        + params.lam
        * (
            p / k * (np.log(eta - theta * u) - math.log(eta - theta))
            + (1.0 - p) / k * (np.log(vt + theta * u) - math.log(vt + theta))
        )
    )


def stationary_log_mgf(params: ModelParams, theta):
    """Large-time limit of :func:`log_mgf_xt` (independent of the start)."""
    _check_theta(params, theta)
    th = np.asarray(theta, dtype=float)
    k, p = params.kappa, params.p_up
    eta, vt = params.eta, params.theta_down
    out = (
        th * params.alpha
        + params.mu * th / k
        + params.sigma**2 * th**2 / (4.0 * k)
        + params.lam * (p / k * np.log(eta / (eta - th)) + (1.0 - p) / k * np.log(vt / (vt + th)))
    )
    return float(out) if out.ndim == 0 else out
