"""One-sided exit transforms of the jump-OU process and the two-sided exit of
its continuous component.

Levels enter in natural coordinates and are converted to hat coordinates
(``x - alpha``) exactly once, here; the contour integrals only see hats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSystemError, DomainError, QuadratureError
from .model import ModelParams
from .psi import _check_rate, contour_C, contour_D, contour_F
from .quad import QuadConfig, integrate_semi_infinite

MAX_CONDITION = 1e12


@dataclass(frozen=True)
class ExitTransform:
    """Creeping and jump-over parts of a one-sided exit Laplace transform.

    ``creep`` is ``E_x[exp(-r tau); X_tau == level]`` and ``jump_part`` is
    ``E_x[exp(-r tau - penalty * overshoot); X_tau beyond level]``.
    """

    creep: float
    jump_part: float
    condition_estimate: float

    def as_dict(self) -> dict[str, float]:
        return {
            "creep": self.creep,
            "jump_part": self.jump_part,
            "condition_estimate": self.condition_estimate,
        }


def condition_2x2(m: np.ndarray) -> float:
    """Infinity-norm condition number after scaling each row to unit max."""
    scaled = m / np.max(np.abs(m), axis=1, keepdims=True)
    det = scaled[0, 0] * scaled[1, 1] - scaled[0, 1] * scaled[1, 0]
    if det == 0.0 or not np.isfinite(det):
        return math.inf
    inv = np.array([[scaled[1, 1], -scaled[0, 1]], [-scaled[1, 0], scaled[0, 0]]]) / det
    return float(np.max(np.abs(scaled).sum(axis=1)) * np.max(np.abs(inv).sum(axis=1)))


def _solve_2x2(m: np.ndarray, rhs: np.ndarray, what: str) -> tuple[float, float, float]:
    cond = condition_2x2(m)
    if not cond <= MAX_CONDITION:
        raise DegenerateSystemError(
            f"{what}: 2x2 system is degenerate (condition estimate {cond:.3g})\n{m!r}", m, cond
        )
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    first = (rhs[0] * m[1, 1] - m[0, 1] * rhs[1]) / det
    second = (m[0, 0] * rhs[1] - m[1, 0] * rhs[0]) / det
    return float(first), float(second), cond


def downward_exit(
    params: ModelParams, x: float, a: float, r: float, xi: float = 0.0, cfg: QuadConfig | None = None
) -> ExitTransform:
    """Laplace transform of the first passage below ``a`` from ``x > a``."""
    if not x > a:
        raise DomainError(f"downward exit needs x > a, got x={x}, a={a}")
    r = _check_rate(r)
    if xi < 0:
        raise DomainError(f"xi must be >= 0, got {xi}")
    a_hat, x_hat = a - params.alpha, x - params.alpha
    m = np.array([
        [contour_F(params, r, 1, a_hat, cfg), contour_C(params, r, 1, xi, a_hat, cfg)],
        [contour_F(params, r, 2, a_hat, cfg), contour_C(params, r, 2, xi, a_hat, cfg)],
    ])
    rhs = np.array([contour_F(params, r, 1, x_hat, cfg), contour_F(params, r, 2, x_hat, cfg)])
    creep, jump, cond = _solve_2x2(m, rhs, f"downward exit (x={x}, a={a}, r={r}, xi={xi})")
    return ExitTransform(creep, jump, cond)


def downward_exit_ratio(
    params: ModelParams, x: float, a: float, r: float, xi: float = 0.0, cfg: QuadConfig | None = None
) -> float:
    """Jump-over part of :func:`downward_exit` through its explicit ratio form."""
    if not x > a:
        raise DomainError(f"downward exit needs x > a, got x={x}, a={a}")
    r = _check_rate(r)
    a_hat, x_hat = a - params.alpha, x - params.alpha
    f1a, f2a = contour_F(params, r, 1, a_hat, cfg), contour_F(params, r, 2, a_hat, cfg)
    f1x, f2x = contour_F(params, r, 1, x_hat, cfg), contour_F(params, r, 2, x_hat, cfg)
    c1, c2 = contour_C(params, r, 1, xi, a_hat, cfg), contour_C(params, r, 2, xi, a_hat, cfg)
    denom = c2 * f1a - c1 * f2a
    if denom == 0.0:
        raise DegenerateSystemError("downward exit ratio: zero denominator")
    return (f1a * f2x - f2a * f1x) / denom


def upward_exit(
    params: ModelParams, x: float, c: float, r: float, rho: float = 0.0, cfg: QuadConfig | None = None
) -> ExitTransform:
    """Laplace transform of the first passage above ``c`` from ``x < c``."""
    if not x < c:
        raise DomainError(f"upward exit needs x < c, got x={x}, c={c}")
    r = _check_rate(r)
    if rho < 0:
        raise DomainError(f"rho must be >= 0, got {rho}")
    c_hat, x_hat = c - params.alpha, x - params.alpha
    m = np.array([
        [contour_F(params, r, 3, c_hat, cfg), contour_D(params, r, 3, rho, c_hat, cfg)],
        [contour_F(params, r, 4, c_hat, cfg), contour_D(params, r, 4, rho, c_hat, cfg)],
    ])
    rhs = np.array([contour_F(params, r, 3, x_hat, cfg), contour_F(params, r, 4, x_hat, cfg)])
    creep, jump, cond = _solve_2x2(m, rhs, f"upward exit (x={x}, c={c}, r={r}, rho={rho})")
    return ExitTransform(creep, jump, cond)


def exit_functional_down(
    params: ModelParams,
    x: float,
    a: float,
    r: float,
    f_at_a: float,
    f_tail_integral: float,
    cfg: QuadConfig | None = None,
) -> float:
    """``E_x[exp(-r tau_a) f(X_tau)]`` for the downward passage.

    ``f_tail_integral`` is ``int_{-inf}^0 f(a + y) theta_down exp(theta_down y) dy``.
    """
    t = downward_exit(params, x, a, r, 0.0, cfg)
    return t.jump_part * f_tail_integral + t.creep * f_at_a


def exit_functional_up(
    params: ModelParams,
    x: float,
    c: float,
    r: float,
    f_at_c: float,
    f_tail_integral: float,
    cfg: QuadConfig | None = None,
) -> float:
    """Upward mirror of :func:`exit_functional_down`; the tail integral uses
    the kernel ``eta exp(-eta y)`` on ``y > 0``."""
    t = upward_exit(params, x, c, r, 0.0, cfg)
    return t.jump_part * f_tail_integral + t.creep * f_at_c


def diffusion_L(
    params: ModelParams, r: float, i: int, x_hat, cfg: QuadConfig | None = None, order: int = 0
) -> float:
    """Jump-free analogue of the F integrals over the half-lines.

    ``order`` selects the x-derivative (0, 1 or 2); the derivative factor
    ``(-z)**order`` is folded into the integrand.
    """
    r = _check_rate(r)
    if i not in (1, 2):
        raise ValueError("diffusion_L index must be 1 or 2")
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    xh = float(getattr(x_hat, "value", x_hat))
    k = params.kappa
    power = r / k - 1.0 + order

    def f(z, dist, _far):
        with np.errstate(divide="ignore"):
            logabs = power * np.log(dist) - params.sigma**2 * z * z / (4.0 * k) + params.mu * z / k - xh * z
        sign = -np.sign(z) if order % 2 else np.ones_like(z)
        return logabs, sign

    direction = 1 if i == 1 else -1
    envelope = (params.sigma**2 / (4.0 * k), params.mu / k - xh)
    res = integrate_semi_infinite(f, 0.0, direction, envelope, power, cfg, log_form=True, offsets=True)
    if not res.converged:
        raise QuadratureError(f"L{i} (order {order}) at r={r}, x_hat={xh} did not converge: {res}")
    return res.value


def diffusion_two_sided_exit(
    params: ModelParams, b: float, eps: float, r: float, cfg: QuadConfig | None = None
) -> tuple[float, float]:
    """``(up, down)``: transforms of leaving ``(b - eps, b + eps)`` from ``b`` at
    the upper or lower end, for the continuous component only."""
    if not eps > 0:
        raise DomainError("eps must be > 0")
    bh = b - params.alpha
    L1 = {d: diffusion_L(params, r, 1, bh + d, cfg) for d in (-eps, 0.0, eps)}
    L2 = {d: diffusion_L(params, r, 2, bh + d, cfg) for d in (-eps, 0.0, eps)}
    denom = L1[eps] * L2[-eps] - L2[eps] * L1[-eps]
    if not abs(denom) >= 1e-300:
        raise DegenerateSystemError(f"two-sided exit determinant vanishes (b={b}, eps={eps})")
    up = (L1[0.0] * L2[-eps] - L2[0.0] * L1[-eps]) / denom
    down = (L2[0.0] * L1[eps] - L1[0.0] * L2[eps]) / denom
    return up, down


def smooth_pasting_ratios(
    params: ModelParams, b: float, r: float, cfg: QuadConfig | None = None
) -> tuple[float, float]:
    """Small-interval limits of the two-sided exit of the continuous part.

    ``first_order`` is the limit of ``(1/2 - down(eps)) / eps`` and
    ``second_order`` that of ``(1 - up(eps) - down(eps)) / eps**2``.
    """
    bh = b - params.alpha
    L = {(i, o): diffusion_L(params, r, i, bh, cfg, o) for i in (1, 2) for o in (0, 1, 2)}
    wronskian = L[1, 0] * L[2, 1] - L[2, 0] * L[1, 1]
    if wronskian == 0.0:
        raise DegenerateSystemError("L-Wronskian vanishes")
    first = (L[1, 2] * L[2, 0] - L[2, 2] * L[1, 0]) / (4.0 * wronskian)
    second = (L[1, 2] * L[2, 1] - L[1, 1] * L[2, 2]) / (2.0 * wronskian)
    return first, second
