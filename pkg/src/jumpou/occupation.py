"""Joint Laplace transform of the occupation time below a barrier and the
terminal value, evaluated at an independent exponential time.

For a barrier ``b``, clock rate ``s``, occupation penalty ``omega`` and terminal
exponent ``theta_T`` the value function is::

    V(x) = E_x[exp(-omega * int_0^e(s) 1{X_t <= b} dt + theta_T X_e(s))]

It is piecewise: below ``b`` a combination of ``V1`` at rate ``k = s + omega``
and the decaying F integrals on contours 3 and 4; above ``b`` a combination of
``V1`` at rate ``s`` and the F integrals on contours 1 and 2. The four
coefficients come from a 4x4 system that encodes continuity, smooth pasting
and the two jump-kernel averages at ``b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSystemError, DomainError, QuadratureError
from .model import ModelParams, _check_theta, _log_mgf_in_u
from .psi import contour_C, contour_D, contour_F, contour_F_prime
from .quad import QuadConfig, laplace_time_integral

MAX_CONDITION = 1e12


@dataclass(frozen=True)
class OccupationQuery:
    b: float
    s: float
    omega: float
    theta_T: float

    def __post_init__(self) -> None:
        if not self.s > 0:
            raise DomainError(f"s must be > 0, got {self.s}")
        if not self.omega > -self.s:
            raise DomainError(f"omega must exceed -s, got omega={self.omega}, s={self.s}")

    @property
    def k(self) -> float:
        return self.s + self.omega

    def check(self, params: ModelParams) -> None:
        """Admissibility of theta_T for the given model (3 theta_T inside the jump strip)."""
        if not -params.theta_down < 3.0 * self.theta_T < params.eta:
            raise DomainError(
                f"need -theta_down < 3*theta_T < eta, got theta_T={self.theta_T} "
                f"(theta_down={params.theta_down}, eta={params.eta})"
            )

    def as_dict(self) -> dict[str, float]:
        return {"b": self.b, "s": self.s, "omega": self.omega, "theta_T": self.theta_T}


def _laplace_average(params, x, s, theta, factor, cfg, label):
    _check_theta(params, theta)

    def g(u):
        return factor(u) * np.exp(_log_mgf_in_u(params, x, theta, u, 1.0 - u))

    res = laplace_time_integral(g, s, params, cfg, in_u=True)
    if not res.converged:
        raise QuadratureError(f"{label}(x={x}, s={s}, theta_T={theta}) did not converge: {res}")
    return res.value


def v1(params: ModelParams, x: float, s: float, theta_T: float, cfg: QuadConfig | None = None) -> float:
    """E_x[exp(theta_T X_e(s))]."""
    return _laplace_average(params, x, s, theta_T, lambda u: 1.0, cfg, "V1")


def v1_prime(params: ModelParams, x: float, s: float, theta_T: float, cfg: QuadConfig | None = None) -> float:
    """x-derivative of :func:`v1`; the exponent is linear in x with slope theta_T e^{-kappa t}."""
    return _laplace_average(params, x, s, theta_T, lambda u: theta_T * u, cfg, "V1'")


def t_eta(params: ModelParams, x: float, s: float, theta_T: float, cfg: QuadConfig | None = None) -> float:
    """``int_0^inf V1(x + z) eta exp(-eta z) dz`` with the z-integral done in closed form."""
    eta = params.eta
    return _laplace_average(params, x, s, theta_T, lambda u: eta / (eta - theta_T * u), cfg, "T_eta")


def t_theta(params: ModelParams, x: float, s: float, theta_T: float, cfg: QuadConfig | None = None) -> float:
    """``int_{-inf}^0 V1(x + z) theta_down exp(theta_down z) dz``, same reduction."""
    th = params.theta_down
    return _laplace_average(params, x, s, theta_T, lambda u: th / (th + theta_T * u), cfg, "T_theta")


def solve_equilibrated(a: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, float, np.ndarray]:
    """Solve ``a @ y = rhs`` after row and column scaling to unit max-norm.

    Returns the solution, the 2-norm condition number of the scaled matrix and
    the scaled matrix itself.
    """
    a = np.asarray(a, dtype=float)
    row = 1.0 / np.max(np.abs(a), axis=1)
    scaled = a * row[:, None]
    col = 1.0 / np.max(np.abs(scaled), axis=0)
    scaled = scaled * col[None, :]
    cond = float(np.linalg.cond(scaled))
    if not np.isfinite(cond):
        return np.full(a.shape[1], np.nan), math.inf, scaled
    try:
        z = np.linalg.solve(scaled, rhs * row)
    except np.linalg.LinAlgError:
        return np.full(a.shape[1], np.nan), math.inf, scaled
    return z * col, cond, scaled


@dataclass(frozen=True)
class OccupationSolution:
    """Coefficients (J1, J2, N1, N2) with the system that produced them."""

    coeffs: tuple[float, float, float, float]
    k: float
    matrix: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)
    condition_estimate: float
    query: OccupationQuery
    params: ModelParams
    cfg: QuadConfig = field(default_factory=QuadConfig, repr=False)

    @property
    def residual(self) -> float:
        """``max |(J, N) Q - w|``."""
        return float(np.max(np.abs(np.asarray(self.coeffs) @ self.matrix - self.rhs)))


def assemble_system(params: ModelParams, query: OccupationQuery, cfg: QuadConfig | None = None):
    """The row-vector system ``(J1, J2, N1, N2) Q = w``; returns ``(Q, w)``."""
    query.check(params)
    s, k, th, b = query.s, query.k, query.theta_T, query.b
    bh = b - params.alpha

    def row(r, i, sign):
        return [
            sign * contour_F(params, r, i, bh, cfg),
            sign * contour_F_prime(params, r, i, bh, cfg),
            sign * contour_D(params, r, i, 0.0, bh, cfg),
            sign * contour_C(params, r, i, 0.0, bh, cfg),
        ]

    q = np.array([row(k, 3, 1.0), row(k, 4, 1.0), row(s, 1, -1.0), row(s, 2, -1.0)])
    w = np.array([
        v1(params, b, s, th, cfg) - s / k * v1(params, b, k, th, cfg),
        v1_prime(params, b, s, th, cfg) - s / k * v1_prime(params, b, k, th, cfg),
        t_eta(params, b, s, th, cfg) - s / k * t_eta(params, b, k, th, cfg),
        t_theta(params, b, s, th, cfg) - s / k * t_theta(params, b, k, th, cfg),
    ])
    return q, w


def solve_occupation(
    params: ModelParams, query: OccupationQuery, cfg: QuadConfig | None = None
) -> OccupationSolution:
    cfg = cfg or QuadConfig()
    q, w = assemble_system(params, query, cfg)
    coeffs, cond, _ = solve_equilibrated(q.T, w)
    if not cond <= MAX_CONDITION:
        raise DegenerateSystemError(
            f"occupation system is degenerate (condition estimate {cond:.3g}) for "
            f"{query.as_dict()}\n{q!r}",
            q,
            cond,
        )
    return OccupationSolution(
        coeffs=tuple(float(c) for c in coeffs),
        k=query.k,
        matrix=q,
        rhs=w,
        condition_estimate=cond,
        query=query,
        params=params,
        cfg=cfg,
    )


def v_eval(
    solution: OccupationSolution, x: float, cfg: QuadConfig | None = None, branch: str = "auto"
) -> float:
    """Evaluate V(x). ``branch`` forces the ``"below"`` or ``"above"`` formula
    (both are analytic across b); ``"auto"`` uses ``"above"`` for ``x >= b``."""
    cfg = cfg or solution.cfg
    p, qy = solution.params, solution.query
    j1, j2, n1, n2 = solution.coeffs
    xh = x - p.alpha
    if branch == "auto":
        branch = "above" if x >= qy.b else "below"
    if branch == "below":
        k = solution.k
        return (
            qy.s / k * v1(p, x, k, qy.theta_T, cfg)
            + j1 * contour_F(p, k, 3, xh, cfg)
            + j2 * contour_F(p, k, 4, xh, cfg)
        )
    if branch == "above":
        s = qy.s
        return (
            v1(p, x, s, qy.theta_T, cfg)
            + n1 * contour_F(p, s, 1, xh, cfg)
            + n2 * contour_F(p, s, 2, xh, cfg)
        )
    raise ValueError(f"branch must be 'auto', 'below' or 'above', got {branch!r}")


def v_curve(solution: OccupationSolution, x_grid, cfg: QuadConfig | None = None) -> list[tuple[float, float]]:
    out = []
    for x in sorted(float(v) for v in x_grid):
        try:
            out.append((x, v_eval(solution, x, cfg)))
        except QuadratureError as exc:
            raise QuadratureError(f"V at x={x}: {exc}") from exc
    return out
