"""The kernel |psi_r| and its Laplace-type integrals over the four contours.

For a rate ``r > 0`` the kernel is::

    |psi_r(z)| = |z|**(r/kappa - 1) * exp(-sigma**2 z**2 / (4 kappa) + mu z / kappa)
                 * |eta + z|**(lam p_up / kappa) * |z - theta_down|**(lam (1 - p_up) / kappa)

and the contours split the real line at its branch points::

    G1 = (0, theta_down), G2 = (theta_down, inf), G3 = (-eta, 0), G4 = (-inf, -eta)

Every integral here has the form ``int_Gi kernel(z) |psi_r(z)| exp(-x_hat z) dz``
with ``kernel`` one of ``1`` (F), ``-z`` (F'), ``(eta + rho)/(z + eta)`` (D) or
``-(theta_down + xi)/(z - theta_down)`` (C). All arguments are hat coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, QuadratureError
from .model import HatCoordinate, ModelParams
from .quad import IntegralResult, QuadConfig, integrate_semi_infinite, integrate_singular

CONTOUR_INDICES = (1, 2, 3, 4)


@dataclass(frozen=True)
class Contour:
    index: int
    lo: float
    hi: float

    @property
    def semi_infinite(self) -> bool:
        return math.isinf(self.lo) or math.isinf(self.hi)


def contour(params: ModelParams, index: int) -> Contour:
    if index == 1:
        return Contour(1, 0.0, params.theta_down)
    if index == 2:
        return Contour(2, params.theta_down, math.inf)
    if index == 3:
        return Contour(3, -params.eta, 0.0)
    if index == 4:
        return Contour(4, -math.inf, -params.eta)
    raise ValueError(f"contour index must be 1..4, got {index}")


def _check_rate(r: float) -> float:
    r = float(r)
    if not r > 0.0:
        raise DomainError(f"rate must be > 0, got {r}")
    return r


def _hat(x_hat) -> float:
    return x_hat.value if isinstance(x_hat, HatCoordinate) else float(x_hat)


def _exponents(params: ModelParams, r: float) -> tuple[float, float, float]:
    """Powers of |z|, |eta + z| and |z - theta_down| in |psi_r|."""
    k = params.kappa
    return r / k - 1.0, params.lam * params.p_up / k, params.lam * (1.0 - params.p_up) / k


def log_psi_mod(params: ModelParams, r: float, z, abs_z=None, abs_zeta=None, abs_ztheta=None):
    """ln|psi_r(z)|; the optional distances override |z|, |eta+z|, |z-theta_down|."""
    z = np.asarray(z, dtype=float)
    g0, g_eta, g_theta = _exponents(params, r)
    abs_z = np.abs(z) if abs_z is None else abs_z
    abs_zeta = np.abs(params.eta + z) if abs_zeta is None else abs_zeta
    abs_ztheta = np.abs(z - params.theta_down) if abs_ztheta is None else abs_ztheta
    with np.errstate(divide="ignore"):
        return (
            g0 * np.log(abs_z)
            - params.sigma**2 * z * z / (4.0 * params.kappa)
            + params.mu * z / params.kappa
            + g_eta * np.log(abs_zeta)
            + g_theta * np.log(abs_ztheta)
        )


def _check_not_branch_point(params: ModelParams, z: np.ndarray) -> None:
    bad = (z == 0.0) | (z == params.theta_down) | (z == -params.eta)
    if np.any(bad):
        raise DomainError("|psi| is not evaluated at 0, theta_down or -eta")


def psi_mod(params: ModelParams, r: float, z):
    """|psi_r(z)| evaluated as a product of absolute values."""
    r = _check_rate(r)
    zz = np.asarray(z, dtype=float)
    _check_not_branch_point(params, zz)
    out = np.exp(log_psi_mod(params, r, zz))
    return float(out) if out.ndim == 0 else out


def psi_log_derivative(params: ModelParams, r: float, z):
    """d/dz ln|psi_r(z)| in closed form."""
    zz = np.asarray(z, dtype=float)
    k = params.kappa
    g0, g_eta, g_theta = _exponents(params, r)
    out = (
        g0 / zz
        - params.sigma**2 * zz / (2.0 * k)
        + params.mu / k
        + g_eta / (params.eta + zz)
        + g_theta / (zz - params.theta_down)
    )
    return float(out) if out.ndim == 0 else out


def ode_residual(params: ModelParams, r: float, z):
    """Residual of the first-order ODE that characterises |psi_r|.

    ``kappa z |psi|' + |psi| (kappa + sigma^2 z^2/2 - mu z - lam p z/(eta+z)
    + lam (1-p) z/(theta_down - z) - r)``, with ``|psi|'`` from the analytic
    log-derivative, divided by the largest of its seven terms in magnitude.
    """
    r = _check_rate(r)
    zz = np.asarray(z, dtype=float)
    _check_not_branch_point(params, zz)
    k, p, lam = params.kappa, params.p_up, params.lam
    mag = np.exp(log_psi_mod(params, r, zz))
    # Factor |psi| out when it under/overflows; the ratio is unchanged.
    mag = np.where(np.isfinite(mag) & (mag > 0.0), mag, 1.0)
    terms = np.stack([
        k * zz * mag * psi_log_derivative(params, r, zz),
        k * mag,
        0.5 * params.sigma**2 * zz**2 * mag,
        -params.mu * zz * mag,
        -lam * p * zz / (params.eta + zz) * mag,
        lam * (1.0 - p) * zz / (params.theta_down - zz) * mag,
        -r * mag,
    ])
    out = terms.sum(axis=0) / np.max(np.abs(terms), axis=0)
    return float(out) if out.ndim == 0 else out


# kind: "F" (with derivative order), "D" (1/(z+eta)), "C" (-1/(z-theta_down)).
def _integrand(params: ModelParams, r: float, index: int, x_hat: float, kind: str, order: int):
    eta, th = params.eta, params.theta_down

    def distances(z, d_lo, d_hi):
        if index == 1:
            return d_lo, eta + z, d_hi
        if index == 2:
            return z, eta + z, d_lo
        if index == 3:
            return d_hi, d_lo, th - z
        return -z, d_lo, th - z

    def f(z, d_lo, d_hi):
        abs_z, abs_zeta, abs_zth = distances(z, d_lo, d_hi)
        logabs = log_psi_mod(params, r, z, abs_z, abs_zeta, abs_zth) - x_hat * z
        sign = np.ones_like(z)
        if order:
            with np.errstate(divide="ignore"):
                logabs = logabs + order * np.log(abs_z)
            if order % 2:
                sign = -np.sign(z)
        if kind == "D":
            with np.errstate(divide="ignore"):
                logabs = logabs - np.log(abs_zeta)
            sign = sign * (1.0 if index in (1, 2, 3) else -1.0)
        elif kind == "C":
            with np.errstate(divide="ignore"):
                logabs = logabs - np.log(abs_zth)
            # -1/(z - theta_down) is positive below theta_down.
            sign = sign * (1.0 if index in (1, 3, 4) else -1.0)
        return logabs, sign

    return f


def endpoint_exponents(params: ModelParams, r: float, index: int, kind: str = "F", order: int = 0):
    """Algebraic exponents of the integrand at the (lo, hi) ends of a contour."""
    g0, g_eta, g_theta = _exponents(params, r)
    at_zero = g0 + order
    at_eta = g_eta - (1.0 if kind == "D" else 0.0)
    at_theta = g_theta - (1.0 if kind == "C" else 0.0)
    return {1: (at_zero, at_theta), 2: (at_theta, 0.0), 3: (at_eta, at_zero), 4: (0.0, at_eta)}[index]


@lru_cache(maxsize=8192)
def _contour_integral(
    params: ModelParams, r: float, index: int, x_hat: float, kind: str, order: int, cfg: QuadConfig
) -> IntegralResult:
    f = _integrand(params, r, index, x_hat, kind, order)
    gam_lo, gam_hi = endpoint_exponents(params, r, index, kind, order)
    c = contour(params, index)
    if index in (1, 3):
        return integrate_singular(f, c.lo, c.hi, gam_lo, gam_hi, cfg, log_form=True, offsets=True)
    envelope = (params.sigma**2 / (4.0 * params.kappa), params.mu / params.kappa - x_hat)
    if index == 2:
        return integrate_semi_infinite(f, c.lo, +1, envelope, gam_lo, cfg, log_form=True, offsets=True)
    return integrate_semi_infinite(f, c.hi, -1, envelope, gam_hi, cfg, log_form=True, offsets=True)


def contour_integral(
    params: ModelParams,
    r: float,
    index: int,
    x_hat,
    kind: str = "F",
    order: int = 0,
    cfg: QuadConfig | None = None,
) -> IntegralResult:
    """Full :class:`IntegralResult` of a contour integral (no penalty factor)."""
    r = _check_rate(r)
    if kind not in ("F", "D", "C"):
        raise ValueError(f"kind must be F, D or C, got {kind!r}")
    contour(params, index)
    return _contour_integral(params, r, index, _hat(x_hat), kind, int(order), cfg or QuadConfig())


def _value(params, r, index, x_hat, kind, order, cfg) -> float:
    res = contour_integral(params, r, index, x_hat, kind, order, cfg)
    if not res.converged:
        raise QuadratureError(
            f"{kind}{'′' * order}_{index} at r={r}, x_hat={_hat(x_hat)} did not converge "
            f"(value={res.value}, error estimate={res.abs_error_estimate}, "
            f"evaluations={res.evaluations}, params={params.to_dict()})"
        )
    return res.value


def contour_F(params: ModelParams, r: float, i: int, x_hat, cfg: QuadConfig | None = None) -> float:
    return _value(params, r, i, x_hat, "F", 0, cfg)


def contour_F_prime(params: ModelParams, r: float, i: int, x_hat, cfg: QuadConfig | None = None) -> float:
    """x-derivative of :func:`contour_F`, integrated directly with the factor -z."""
    return _value(params, r, i, x_hat, "F", 1, cfg)


def contour_F_second(params: ModelParams, r: float, i: int, x_hat, cfg: QuadConfig | None = None) -> float:
    return _value(params, r, i, x_hat, "F", 2, cfg)


def contour_D(params: ModelParams, r: float, i: int, rho: float, x_hat, cfg: QuadConfig | None = None) -> float:
    """Integral with kernel (eta + rho)/(z + eta); the rho factor is pulled out exactly."""
    if rho < 0:
        raise DomainError(f"rho must be >= 0, got {rho}")
    return (params.eta + rho) * _value(params, r, i, x_hat, "D", 0, cfg)


def contour_C(params: ModelParams, r: float, i: int, xi: float, x_hat, cfg: QuadConfig | None = None) -> float:
    """Integral with kernel -(theta_down + xi)/(z - theta_down); xi factor pulled out exactly."""
    if xi < 0:
        raise DomainError(f"xi must be >= 0, got {xi}")
    return (params.theta_down + xi) * _value(params, r, i, x_hat, "C", 0, cfg)


def psi_table(params: ModelParams, r: float, z_grid) -> list[tuple[float, float, float]]:
    """Rows (z, |psi_r(z)|, normalised ODE residual); branch points are skipped."""
    z = np.asarray(z_grid, dtype=float)
    keep = (z != 0.0) & (z != params.theta_down) & (z != -params.eta)
    z = z[keep]
    if z.size == 0:
        return []
    mags = np.atleast_1d(psi_mod(params, r, z))
    res = np.atleast_1d(ode_residual(params, r, z))
    return [(float(a), float(b), float(c)) for a, b, c in zip(z, mags, res)]
