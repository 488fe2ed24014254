"""The nine acceptance criteria at their stated tolerances.

Each test logs one PASS/FAIL line; the lines are repeated in the terminal
summary. Monte Carlo criteria run at 10^6 paths with fixed seeds.
"""

import math
import time

import numpy as np

from canon import P_STAR, Q_STAR
from jumpou.exit import (
    diffusion_two_sided_exit,
    downward_exit,
    downward_exit_ratio,
    smooth_pasting_ratios,
    upward_exit,
)
from jumpou.mc.sim import SimConfig
from jumpou.mc.validate import exit_checks, occupation_checks, report_json, run_validation, simulator_checks
from jumpou.occupation import OccupationQuery, solve_occupation, t_eta, t_theta, v1, v_eval
from jumpou.psi import contour, contour_C, contour_D, contour_F, contour_F_prime, ode_residual
from oracles import brute_contour, kernel_average_down, kernel_average_up

MILLION = 1_000_000
SD = P_STAR.stationary_sd


def summarise(checks):
    worst = max(checks, key=lambda c: abs(c.z_score))
    return f"worst |z|={abs(worst.z_score):.2f} ({worst.check})"


def failed(checks):
    return [f"{c.check}: z={c.z_score:.2f}" for c in checks if not c.passed]


def contour_grid(params, index, n=20):
    c = contour(params, index)
    lo = c.lo if math.isfinite(c.lo) else c.hi - 6.0
    hi = c.hi if math.isfinite(c.hi) else c.lo + 6.0
    return np.linspace(lo, hi, n + 2)[1:-1]


def richardson(values):
    a, b, c = values
    return (4 * (2 * c - b) - (2 * b - a)) / 3


def test_criterion_1_simulator(criterion):
    with criterion("C1 simulator self-certification") as c:
        start = time.perf_counter()
        checks = simulator_checks(P_STAR, SimConfig(n_paths=MILLION, seed=1001), threshold=3.0)
        elapsed = time.perf_counter() - start
        c.detail = f"{summarise(checks)}, {elapsed:.1f} s"
        assert not failed(checks), failed(checks)
        assert elapsed < 60


def test_criterion_2_psi_residual(criterion):
    with criterion("C2 psi ODE residual") as c:
        start = time.perf_counter()
        worst = 0.0
        for r in (0.5, 1.0, 5.0):
            for i in (1, 2, 3, 4):
                worst = max(worst, float(np.max(np.abs(ode_residual(P_STAR, r, contour_grid(P_STAR, i))))))
        elapsed = time.perf_counter() - start
        c.detail = f"max residual {worst:.2e}, {elapsed:.3f} s"
        assert worst < 1e-10
        assert elapsed < 1.0


def test_criterion_3_contour_oracle(criterion):
    with criterion("C3 contour integrals vs brute force") as c:
        start = time.perf_counter()
        worst, where = 0.0, ""
        for i in (1, 2, 3, 4):
            for x in (-0.5, 0.0, 0.5):
                # the brute-force D and C are the rho = xi = 0 integrals
                cases = (
                    ("F", contour_F(P_STAR, 1.0, i, x), brute_contour(P_STAR, 1.0, i, x, "F")),
                    ("F'", contour_F_prime(P_STAR, 1.0, i, x), brute_contour(P_STAR, 1.0, i, x, "F", order=1)),
                    ("D", contour_D(P_STAR, 1.0, i, 0.0, x), brute_contour(P_STAR, 1.0, i, x, "D")),
                    ("C", contour_C(P_STAR, 1.0, i, 0.0, x), brute_contour(P_STAR, 1.0, i, x, "C")),
                )
                for kind, lib, ref in cases:
                    err = abs(lib / ref - 1)
                    if err > worst:
                        worst, where = err, f"{kind}_{i}(x={x})"
        elapsed = time.perf_counter() - start
        c.detail = f"max rel err {worst:.2e} at {where}, {elapsed:.1f} s"
        assert worst < 1e-6
        assert elapsed < 30


def test_criterion_4_exit(criterion):
    with criterion("C4 exit transforms") as c:
        checks = exit_checks(P_STAR, SimConfig(n_paths=MILLION, seed=1004), level=0.0, offset=0.5, r=1.0,
                             threshold=3.0)
        down = [(P_STAR.theta_down + xi) * downward_exit(P_STAR, 0.5, 0.0, 1.0, xi).jump_part
                for xi in (0.0, 0.5, 2.0, 10.0)]
        up = [(P_STAR.eta + rho) * upward_exit(P_STAR, -0.5, 0.0, 1.0, rho).jump_part
              for rho in (0.0, 0.5, 2.0, 10.0)]
        memo = max(np.ptp(down) / abs(down[0]), np.ptp(up) / abs(up[0]))
        ratio = max(abs(downward_exit_ratio(P_STAR, 0.5, 0.0, 1.0, xi) / downward_exit(P_STAR, 0.5, 0.0, 1.0, xi)
                        .jump_part - 1) for xi in (0.0, 2.0))
        c.detail = f"{summarise(checks)}, memorylessness {memo:.1e}, ratio {ratio:.1e}"
        assert not failed(checks), failed(checks)
        assert memo < 1e-10
        assert ratio < 1e-10


def test_criterion_5_structure(criterion):
    with criterion("C5 occupation structural checks") as c:
        q = Q_STAR
        b, s, k, th = q.b, q.s, q.k, q.theta_T
        sol = solve_occupation(P_STAR, q)
        residual = sol.residual / np.max(np.abs(sol.rhs))

        grid = np.linspace(b - 1.0, b + 1.0, 11)
        free = solve_occupation(P_STAR, OccupationQuery(b, s, 0.0, th))
        reduction = max(abs(v_eval(free, x) / v1(P_STAR, x, s, th) - 1) for x in grid)

        continuity = abs(v_eval(sol, b, branch="below") / v_eval(sol, b, branch="above") - 1)

        # one-sided difference quotients, extrapolated in h to remove the kink in V''
        def slope(side, h):
            return side * (v_eval(sol, b + side * h) - v_eval(sol, b)) / h

        left = 2 * slope(-1, 5e-4) - slope(-1, 1e-3)
        right = 2 * slope(1, 5e-4) - slope(1, 1e-3)
        pasting = abs(left / right - 1)

        bounds_ok = all(
            s / k * v1(P_STAR, x, k, th) <= v_eval(sol, x) <= v1(P_STAR, x, s, th) for x in grid)

        j1, j2, n1, n2 = sol.coeffs
        eta, vt = P_STAR.eta, P_STAR.theta_down
        up_avg = kernel_average_up(lambda y: v_eval(sol, y), b, eta, reach=60.0 / (eta - th))
        up_rhs = t_eta(P_STAR, b, s, th) + n1 * contour_D(P_STAR, s, 1, 0.0, b) + n2 * contour_D(P_STAR, s, 2, 0.0, b)
        dn_avg = kernel_average_down(lambda y: v_eval(sol, y), b, vt, reach=60.0 / (vt + th))
        dn_rhs = s / k * t_theta(P_STAR, b, k, th) + j1 * contour_C(P_STAR, k, 3, 0.0, b) \
            + j2 * contour_C(P_STAR, k, 4, 0.0, b)
        kernel = max(abs(up_avg / up_rhs - 1), abs(dn_avg / dn_rhs - 1))

        c.detail = (f"residual {residual:.1e}, reduction {reduction:.1e}, continuity {continuity:.1e}, "
                    f"pasting {pasting:.1e}, bounds {'ok' if bounds_ok else 'violated'}, kernels {kernel:.1e}")
        assert residual < 1e-8
        assert reduction < 1e-8
        assert continuity < 1e-8
        assert pasting < 1e-4
        assert bounds_ok
        assert kernel < 1e-6


def test_criterion_6_occupation_mc(criterion):
    with criterion("C6 occupation transform vs Monte Carlo") as c:
        start = time.perf_counter()
        checks = occupation_checks(P_STAR, Q_STAR, SimConfig(n_paths=MILLION, seed=1006), threshold=3.0)
        elapsed = time.perf_counter() - start
        c.detail = f"{len(checks)} points, {summarise(checks)}, {elapsed:.0f} s"
        assert len(checks) == 9
        assert not failed(checks), failed(checks)
        assert elapsed < 600


def test_criterion_7_smooth_pasting(criterion):
    with criterion("C7 smooth-pasting limits") as c:
        b, r, eps = 0.3, 1.0, (0.02, 0.01, 0.005)
        first, second = smooth_pasting_ratios(P_STAR, b, r)
        pairs = [diffusion_two_sided_exit(P_STAR, b, e, r) for e in eps]
        lim1 = richardson([(0.5 - d) / e for (_, d), e in zip(pairs, eps)])
        lim2 = richardson([(1 - u - d) / e**2 for (u, d), e in zip(pairs, eps)])
        err1, err2 = abs(lim1 / first - 1), abs(lim2 / second - 1)
        c.detail = f"first-order err {err1:.1e}, second-order err {err2:.1e} (eps {eps})"
        assert err1 < 1e-3
        assert err2 < 1e-3


def test_criterion_8_barrier_limits(criterion):
    with criterion("C8 barrier limits") as c:
        x, q = 0.0, Q_STAR
        low = solve_occupation(P_STAR, OccupationQuery(x - 20 * SD, q.s, q.omega, q.theta_T))
        high = solve_occupation(P_STAR, OccupationQuery(x + 20 * SD, q.s, q.omega, q.theta_T))
        err_low = abs(v_eval(low, x) / v1(P_STAR, x, q.s, q.theta_T) - 1)
        err_high = abs(v_eval(high, x) / (q.s / q.k * v1(P_STAR, x, q.k, q.theta_T)) - 1)
        c.detail = f"b below: {err_low:.1e}, b above: {err_high:.1e} (x={x})"
        assert err_low < 1e-4
        assert err_high < 1e-4


def test_criterion_9_determinism(criterion):
    with criterion("C9 validate determinism") as c:
        sim = SimConfig(n_paths=40_000, seed=1009)
        reports = [report_json(run_validation(P_STAR, Q_STAR, sim.replace(workers=w))) for w in (1, 2, 2)]
        c.detail = f"workers 1/2/2, {len(reports[0])} bytes"
        assert reports[0] == reports[1] == reports[2]
