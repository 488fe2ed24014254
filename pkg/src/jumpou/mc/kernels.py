"""Per-path numba kernels. Each kernel fills ``out[start:stop]`` and touches
nothing else, so chunks can run on any thread in any order.

Model parameters travel as ``pv = [kappa, alpha, mu, sigma, lam, p_up, eta, theta_down]``.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .rng import exponential, inverse_gaussian, new_stream, normal, uniform

KAPPA, ALPHA, MU, SIGMA, LAM, P_UP, ETA, THETA = range(8)

# Far-field steps keep the barrier this many diffusion SDs away.
FAR_FIELD_SDS = 8.0

EXIT_NONE, EXIT_CREEP, EXIT_JUMP = 0, 1, 2


@njit(cache=True, nogil=True)
def ou_step(pv, x, h, z):
    """Exact transition of the continuous part over ``h`` driven by the normal draw ``z``."""
    k = pv[KAPPA]
    decay = math.exp(-k * h)
    one_minus = -math.expm1(-k * h)
    sd = pv[SIGMA] * math.sqrt(-math.expm1(-2.0 * k * h) / (2.0 * k))
    return pv[ALPHA] + (x - pv[ALPHA]) * decay + pv[MU] / k * one_minus + sd * z


@njit(cache=True, nogil=True)
def jump_size(pv, state, buf):
    if uniform(state, buf) < pv[P_UP]:
        return exponential(state, buf, pv[ETA])
    return -exponential(state, buf, pv[THETA])


@njit(cache=True, nogil=True)
def step_size(pv, x, dist, grid_dt, h_max):
    """Largest step keeping ``dist`` beyond drift plus FAR_FIELD_SDS diffusion SDs.

    Falls back to ``grid_dt`` near the barrier; ``h_max <= grid_dt`` disables it.
    """
    if h_max <= grid_dt:
        return grid_dt
    drift = abs(pv[MU] + pv[KAPPA] * (pv[ALPHA] - x)) + pv[KAPPA] * dist
    c = FAR_FIELD_SDS * pv[SIGMA]
    if drift > 0.0:
        y = (-c + math.sqrt(c * c + 4.0 * drift * dist)) / (2.0 * drift)
    else:
        y = dist / c
    h = y * y
    if h <= grid_dt:
        return grid_dt
    return min(h, h_max)


@njit(cache=True, nogil=True)
def terminal_paths(pv, x0, t_end, seed, stream_id, start, stop, out_x, out_n, out_up):
    """X at ``t_end`` stepping exactly from jump to jump; also counts jumps."""
    lam = pv[LAM]
    for i in range(start, stop):
        state, buf = new_stream(seed, stream_id, i)
        x = x0
        t = 0.0
        n = 0
        up = 0
        while True:
            w = exponential(state, buf, lam)
            if t + w >= t_end:
                x = ou_step(pv, x, t_end - t, normal(state, buf))
                break
            x = ou_step(pv, x, w, normal(state, buf))
            t += w
            y = jump_size(pv, state, buf)
            x += y
            n += 1
            if y > 0.0:
                up += 1
        out_x[i] = x
        out_n[i] = n
        out_up[i] = up


@njit(cache=True, nogil=True)
def levy_paths(pv, t_end, seed, stream_id, start, stop, out_l):
    """Increment of the driving Levy process over ``[0, t_end]``."""
    lam = pv[LAM]
    for i in range(start, stop):
        state, buf = new_stream(seed, stream_id, i)
        total = pv[MU] * t_end + pv[SIGMA] * math.sqrt(t_end) * normal(state, buf)
        t = exponential(state, buf, lam)
        while t < t_end:
            total += jump_size(pv, state, buf)
            t += exponential(state, buf, lam)
        out_l[i] = total


@njit(cache=True, nogil=True)
def _cell_below(x0, x1, h, b):
    # Time below b in one cell, linear interpolation where the indicator flips.
    if x0 <= b and x1 <= b:
        return h
    if x0 > b and x1 > b:
        return 0.0
    frac = (b - x0) / (x1 - x0)
    if x0 <= b:
        return h * frac
    return h * (1.0 - frac)


@njit(cache=True, nogil=True)
def occupation_paths(pv, x0, b, s, grid_dt, h_max, seed, stream_id, start, stop, out_occ, out_x, out_clock):
    """Draw e(s), run to it and record time spent at or below ``b`` and X_e(s)."""
    lam = pv[LAM]
    for i in range(start, stop):
        state, buf = new_stream(seed, stream_id, i)
        clock = exponential(state, buf, s)
        x = x0
        t = 0.0
        occ = 0.0
        next_jump = exponential(state, buf, lam)
        while True:
            seg_end = min(next_jump, clock)
            while t < seg_end:
                h = step_size(pv, x, abs(x - b), grid_dt, h_max)
                last = seg_end - t <= h
                if last:
                    h = seg_end - t
                x1 = ou_step(pv, x, h, normal(state, buf))
                occ += _cell_below(x, x1, h, b)
                x = x1
                t = seg_end if last else t + h
            if next_jump >= clock:
                break
            x += jump_size(pv, state, buf)
            next_jump += exponential(state, buf, lam)
        out_occ[i] = occ
        out_x[i] = x
        out_clock[i] = clock


@njit(cache=True, nogil=True)
def _bridge_hit_time(state, buf, t, h, d0, d1, var):
    if d1 == 0.0:
        return t + h
    sv = inverse_gaussian(state, buf, d0 / d1, d0 * d0 / (var * h))
    return t + h * sv / (1.0 + sv)


@njit(cache=True, nogil=True)
def exit_paths(pv, x0, level, direction, horizon, grid_dt, h_max, seed, stream_id, start, stop,
               out_tau, out_kind, out_over):
    """First passage above (``direction=+1``) or below (``-1``) ``level``.

    Between lattice points a Brownian-bridge test catches touches the endpoints
    miss; the in-cell hitting time is then drawn from its exact bridge law
    (an inverse Gaussian after the map tau = h S / (1 + S)).
    """
    lam = pv[LAM]
    var = pv[SIGMA] * pv[SIGMA]
    for i in range(start, stop):
        state, buf = new_stream(seed, stream_id, i)
        x = x0
        t = 0.0
        kind = EXIT_NONE
        tau = math.inf
        over = 0.0
        next_jump = exponential(state, buf, lam)
        while kind == EXIT_NONE and t < horizon:
            seg_end = min(next_jump, horizon)
            while t < seg_end:
                d0 = direction * (level - x)
                h = step_size(pv, x, d0, grid_dt, h_max)
                last = seg_end - t <= h
                if last:
                    h = seg_end - t
                x1 = ou_step(pv, x, h, normal(state, buf))
                d1 = direction * (level - x1)
                if d1 <= 0.0:
                    hit = True
                else:
                    hit = uniform(state, buf) < math.exp(-2.0 * d0 * d1 / (var * h))
                if hit:
                    tau = _bridge_hit_time(state, buf, t, h, d0, abs(d1), var)
                    kind = EXIT_CREEP
                    break
                x = x1
                t = seg_end if last else t + h
            if kind != EXIT_NONE or next_jump >= horizon:
                break
            x += jump_size(pv, state, buf)
            d = direction * (level - x)
            if d < 0.0:
                kind = EXIT_JUMP
                tau = next_jump
                over = -d
            elif d == 0.0:
                kind = EXIT_CREEP
                tau = next_jump
            next_jump += exponential(state, buf, lam)
        out_tau[i] = tau
        out_kind[i] = kind
        out_over[i] = over


@njit(cache=True, nogil=True)
def lattice_path(pv, x0, horizon, grid_dt, seed, stream_id, path_index):
    """Event list on the grid_dt lattice plus jump epochs.

    Returns times, values and a tag per point: the lattice index for lattice
    points, -1 just before a jump and -2 just after it.
    """
    cap = int(horizon / grid_dt) + 16
    times = np.empty(cap)
    values = np.empty(cap)
    tags = np.empty(cap, dtype=np.int64)
    state, buf = new_stream(seed, stream_id, path_index)
    lam = pv[LAM]
    n = 0
    times[0] = 0.0
    values[0] = x0
    tags[0] = 0
    n = 1
    x = x0
    t = 0.0
    k = 0
    next_jump = exponential(state, buf, lam)
    while t < horizon:
        t_grid = min((k + 1) * grid_dt, horizon)
        if n + 3 > cap:
            cap *= 2
            times2 = np.empty(cap)
            values2 = np.empty(cap)
            tags2 = np.empty(cap, dtype=np.int64)
            times2[:n] = times[:n]
            values2[:n] = values[:n]
            tags2[:n] = tags[:n]
            times, values, tags = times2, values2, tags2
        if next_jump < t_grid:
            x = ou_step(pv, x, next_jump - t, normal(state, buf))
            t = next_jump
            times[n] = t
            values[n] = x
            tags[n] = -1
            x += jump_size(pv, state, buf)
            times[n + 1] = t
            values[n + 1] = x
            tags[n + 1] = -2
            n += 2
            next_jump += exponential(state, buf, lam)
        else:
            x = ou_step(pv, x, t_grid - t, normal(state, buf))
            t = t_grid
            k += 1
            times[n] = t
            values[n] = x
            tags[n] = k
            n += 1
    return times[:n].copy(), values[:n].copy(), tags[:n].copy()


@njit(cache=True, nogil=True)
def two_sided_diffusion_paths(pv, x0, lo, hi, horizon, grid_dt, seed, stream_id, start, stop, out_tau, out_side):
    """Exit of ``(lo, hi)`` by the continuous component alone (jumps switched off).

    ``out_side`` is +1 for the upper end, -1 for the lower end, 0 if the
    horizon came first.
    """
    var = pv[SIGMA] * pv[SIGMA]
    for i in range(start, stop):
        state, buf = new_stream(seed, stream_id, i)
        x = x0
        t = 0.0
        side = 0
        tau = math.inf
        while t < horizon:
            h = min(grid_dt, horizon - t)
            x1 = ou_step(pv, x, h, normal(state, buf))
            du0, du1 = hi - x, hi - x1
            dl0, dl1 = x - lo, x1 - lo
            up = du1 <= 0.0 or uniform(state, buf) < math.exp(-2.0 * du0 * du1 / (var * h))
            down = dl1 <= 0.0 or uniform(state, buf) < math.exp(-2.0 * dl0 * dl1 / (var * h))
            if up or down:
                t_up = _bridge_hit_time(state, buf, t, h, du0, abs(du1), var) if up else math.inf
                t_down = _bridge_hit_time(state, buf, t, h, dl0, abs(dl1), var) if down else math.inf
                if t_up <= t_down:
                    side, tau = 1, t_up
                else:
                    side, tau = -1, t_down
                break
            x = x1
            t += h
        out_tau[i] = tau
        out_side[i] = side
