"""One-dimensional adaptive quadrature for the integral shapes used here.

Three entry points:

* :func:`integrate_singular` - finite interval, algebraic endpoint behaviour
  ``|z - endpoint|**gamma`` (gamma > -1) removed by a power substitution.
* :func:`integrate_semi_infinite` - half-line with a Gaussian envelope
  ``exp(-a2 z**2 + a1 z)``; truncated where the envelope is negligible.
* :func:`laplace_time_integral` - ``s * int_0^inf exp(-s t) g(t) dt`` mapped to
  ``(0, 1]`` through ``u = exp(-kappa t)``.

All three share a global adaptive Gauss-Kronrod (10/21 point) driver that
evaluates integrands on whole node vectors.

Integrands may be supplied in *log form* (``log_form=True``): the callable then
returns ``(log|f|, sign)``. Values are exponentiated at the node after removing
a common scale, so integrands spanning hundreds of orders of magnitude do not
overflow. With ``offsets=True`` the callable receives ``(z, d_lo, d_hi)`` where
``d_lo``/``d_hi`` are the distances to the interval ends, computed without
cancellation (needed when ``z`` sits within a few ulps of a singular endpoint).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, fields
from typing import Any, Callable, Mapping

import numpy as np

from .model import ModelParams, _log_mgf_in_u  # noqa: F401  (re-exported helper)

# QUADPACK dqk21 abscissae (positive half, descending) and Kronrod weights.
_XK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
])
_WK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
# Full symmetric 21-node rule on [-1, 1].
GK_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
GK_WEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
_gx, _gw = np.polynomial.legendre.leggauss(10)
GAUSS_INDEX = np.array([int(np.argmin(np.abs(GK_NODES - x))) for x in _gx])
GAUSS_WEIGHTS = np.zeros(21)
GAUSS_WEIGHTS[GAUSS_INDEX] = _gw

_EPS = np.finfo(float).eps
_RESCALE_HEADROOM = 400.0


@dataclass(frozen=True)
class QuadConfig:
    """Tolerances and limits for every integral.

    ``gaussian_truncation_z`` is normally ``None``: the truncation distance of a
    half-line integral is then solved per call from the envelope. A number
    forces a fixed truncation distance from the finite endpoint instead.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_subdivisions: int = 200
    gaussian_truncation_z: float | None = None

    def __post_init__(self) -> None:
        if not self.abs_tol > 0 or not self.rel_tol > 0:
            raise ValueError("abs_tol and rel_tol must be > 0")
        if self.max_subdivisions < 10:
            raise ValueError("max_subdivisions must be >= 10")
        if self.gaussian_truncation_z is not None and not self.gaussian_truncation_z > 0:
            raise ValueError("gaussian_truncation_z must be > 0 when given")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any] | None) -> "QuadConfig":
        data = dict(data or {})
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown quadrature keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def tightened(self, factor: float = 100.0) -> "QuadConfig":
        return QuadConfig(
            abs_tol=self.abs_tol / factor,
            rel_tol=self.rel_tol / factor,
            max_subdivisions=self.max_subdivisions * 2,
            gaussian_truncation_z=self.gaussian_truncation_z,
        )


@dataclass(frozen=True)
class IntegralResult:
    value: float
    abs_error_estimate: float
    evaluations: int
    converged: bool

    def __float__(self) -> float:
        return self.value


class _Piece:
    """Maps u in [0, 1] onto a sub-interval, optionally via z - e ~ u**p.

    ``anchor`` is the end of the piece the power law is centred on; ``sign`` is
    +1 if z grows away from it. ``total`` is the full interval length so the
    distance to the far end can be formed without cancellation.
    """

    __slots__ = ("anchor", "sign", "length", "power", "total", "from_lo")

    def __init__(self, anchor: float, sign: int, length: float, power: float, total: float, from_lo: bool):
        self.anchor = anchor
        self.sign = sign
        self.length = length
        self.power = power
        self.total = total
        self.from_lo = from_lo

    def map(self, u: np.ndarray):
        p = self.power
        if p == 1.0:
            dist = self.length * u
            log_jac = np.full_like(u, math.log(self.length))
        else:
            dist = self.length * u**p
            log_jac = math.log(self.length * p) + (p - 1.0) * np.log(u)
        z = self.anchor + self.sign * dist
        if self.from_lo:
            d_lo, d_hi = dist, self.total - dist
        else:
            d_lo, d_hi = self.total - dist, dist
        return z, d_lo, d_hi, log_jac


def _power_for(gamma: float) -> float:
    if gamma <= -1.0:
        raise ValueError(f"endpoint exponent must exceed -1, got {gamma}")
    return 1.0 / (1.0 + gamma) if gamma < 0.0 else 1.0


class _Evaluator:
    """Turns a user integrand into scaled values on u-nodes of a piece."""

    def __init__(self, f: Callable, log_form: bool, offsets: bool):
        self.f = f
        self.log_form = log_form
        self.offsets = offsets
        self.shift: float | None = None
        self.evaluations = 0

    def log_values(self, piece: _Piece, u: np.ndarray):
        z, d_lo, d_hi, log_jac = piece.map(u)
        args = (z, d_lo, d_hi) if self.offsets else (z,)
        self.evaluations += u.size
        if self.log_form:
            logabs, sign = self.f(*args)
            logabs = np.asarray(logabs, dtype=float) + log_jac
            sign = np.broadcast_to(np.asarray(sign, dtype=float), logabs.shape)
        else:
            vals = np.asarray(self.f(*args), dtype=float)
            vals = np.broadcast_to(vals, z.shape)
            with np.errstate(divide="ignore"):
                logabs = np.log(np.abs(vals)) + log_jac
            sign = np.sign(vals)
        return logabs, sign


def _gk21(ev: _Evaluator, piece: _Piece, a: float, b: float):
    """One Gauss-Kronrod pass on [a, b] in u; returns scaled (value, error, max log)."""
    half = 0.5 * (b - a)
    centre = 0.5 * (a + b)
    u = centre + half * GK_NODES
    logabs, sign = ev.log_values(piece, u)
    finite = np.isfinite(logabs)
    top = float(np.max(logabs[finite])) if finite.any() else -np.inf
    if np.any(np.isnan(logabs)) or np.any(logabs == np.inf):
        return math.nan, math.inf, top, None
    if ev.shift is None:
        ev.shift = top if np.isfinite(top) else 0.0
    vals = np.where(finite, sign * np.exp(logabs - ev.shift), 0.0)
    return _gk_sums(vals, half) + (top, vals)


def _gk_sums(vals: np.ndarray, half: float):
    resk = float(GK_WEIGHTS @ vals)
    resg = float(GAUSS_WEIGHTS @ vals)
    mean = 0.5 * resk
    resabs = float(GK_WEIGHTS @ np.abs(vals)) * abs(half)
    resasc = float(GK_WEIGHTS @ np.abs(vals - mean)) * abs(half)
    err = abs((resk - resg) * half)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    if resabs > 1e-290:
        err = max(50.0 * _EPS * resabs, err)
    return resk * half, err


def _scaled_abs_tol(abs_tol: float, shift: float) -> float:
    # abs_tol in units of exp(shift); clamped so tiny integrands cannot overflow it.
    return math.exp(min(math.log(abs_tol) - shift, 700.0))


def _adaptive(ev: _Evaluator, pieces: list[_Piece], cfg: QuadConfig, abs_scale: float = 1.0):
    """Global adaptive bisection across all pieces.

    Returns (scaled value, scaled error, converged). ``abs_scale`` multiplies
    abs_tol (the caller may be accumulating several partial integrals).
    """
    heap: list[tuple[float, int, int, float, float, float]] = []
    counter = 0
    total = 0.0
    total_err = 0.0
    # Probe every piece once so the common scale is set from real peaks.
    first = []
    for idx, piece in enumerate(pieces):
        value, err, top, _ = _gk21(ev, piece, 0.0, 1.0)
        if not math.isfinite(value):
            return math.nan, math.inf, False
        first.append((idx, value, err, top))
    peak = max((t for *_, t in first if math.isfinite(t)), default=-math.inf)
    if math.isfinite(peak) and ev.shift is not None and peak > ev.shift + 1.0:
        # Re-evaluate with the better scale; cheap and keeps later sums sane.
        factor = math.exp(ev.shift - peak)
        ev.shift = peak
        first = [(i, v * factor, e * factor, t) for i, v, e, t in first]
    for idx, value, err, _ in first:
        heapq.heappush(heap, (-err, counter, idx, 0.0, 1.0, value))
        counter += 1
        total += value
        total_err += err

    subdivisions = 0
    while True:
        tol = max(_scaled_abs_tol(cfg.abs_tol * abs_scale, ev.shift), cfg.rel_tol * abs(total))
        if total_err <= tol:
            return total, total_err, True
        if subdivisions >= cfg.max_subdivisions or not heap:
            return total, total_err, False
        neg_err, _, idx, a, b, value = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        if not (a < mid < b):
            # Interval can no longer be split in floating point.
            heapq.heappush(heap, (neg_err, counter, idx, a, b, value))
            return total, total_err, False
        left = _gk21(ev, pieces[idx], a, mid)
        right = _gk21(ev, pieces[idx], mid, b)
        if not (math.isfinite(left[0]) and math.isfinite(right[0])):
            return math.nan, math.inf, False
        peak_new = max(left[2], right[2])
        if peak_new > ev.shift + _RESCALE_HEADROOM:
            factor = math.exp(ev.shift - peak_new)
            ev.shift = peak_new
            heap = [(e * factor, c, i, aa, bb, v * factor) for e, c, i, aa, bb, v in heap]
            heapq.heapify(heap)
            total *= factor
            total_err *= factor
            value *= factor
            neg_err *= factor
            left = _gk21(ev, pieces[idx], a, mid)
            right = _gk21(ev, pieces[idx], mid, b)
        total += left[0] + right[0] - value
        total_err += left[1] + right[1] + neg_err
        heapq.heappush(heap, (-left[1], counter, idx, a, mid, left[0]))
        heapq.heappush(heap, (-right[1], counter + 1, idx, mid, b, right[0]))
        counter += 2
        subdivisions += 1
        if subdivisions % 64 == 0:
            # Re-sum to stop rounding drift in the running totals.
            total = sum(item[5] for item in heap)
            total_err = sum(-item[0] for item in heap)


def _finish(ev: _Evaluator, value: float, err: float, converged: bool) -> IntegralResult:
    shift = ev.shift if ev.shift is not None else 0.0
    if not math.isfinite(value):
        return IntegralResult(math.nan, math.inf, ev.evaluations, False)
    with np.errstate(over="ignore"):
        scale = math.exp(shift) if shift < 709.0 else math.inf
    out_value = value * scale if value != 0.0 else 0.0
    out_err = err * scale if err != 0.0 else 0.0
    ok = converged and math.isfinite(out_value) and math.isfinite(out_err)
    return IntegralResult(float(out_value), float(out_err), ev.evaluations, ok)


def _singular_pieces(lo: float, hi: float, gamma_lo: float, gamma_hi: float) -> list[_Piece]:
    if not hi > lo:
        raise ValueError(f"need lo < hi, got ({lo}, {hi})")
    p_lo, p_hi = _power_for(gamma_lo), _power_for(gamma_hi)
    total = hi - lo
    if p_lo != 1.0 and p_hi != 1.0:
        half = 0.5 * total
        return [_Piece(lo, +1, half, p_lo, total, True), _Piece(hi, -1, half, p_hi, total, False)]
    if p_hi != 1.0:
        return [_Piece(hi, -1, total, p_hi, total, False)]
    return [_Piece(lo, +1, total, p_lo, total, True)]


def integrate_singular(
    f: Callable,
    lo: float,
    hi: float,
    sing_exponent_lo: float = 0.0,
    sing_exponent_hi: float = 0.0,
    cfg: QuadConfig | None = None,
    *,
    log_form: bool = False,
    offsets: bool = False,
) -> IntegralResult:
    """Integrate ``f`` over ``(lo, hi)`` where ``f ~ |z - end|**gamma`` at each end.

    A negative exponent at an end is removed with ``z = end +- L u**(1/(1+gamma))``
    (two singular ends: split at the midpoint); the regularised integrand is then
    handled by adaptive Gauss-Kronrod. Non-negative exponents need no change of
    variable. Failure to reach tolerance is reported through ``converged``.
    """
    cfg = cfg or QuadConfig()
    ev = _Evaluator(f, log_form, offsets)
    value, err, ok = _adaptive(ev, _singular_pieces(lo, hi, sing_exponent_lo, sing_exponent_hi), cfg)
    return _finish(ev, value, err, ok)


def truncation_distance(a2: float, b1: float, log_ratio: float) -> float:
    """Distance t >= 0 past which ``exp(-a2 t**2 + b1 t)`` stays below
    ``exp(log_ratio)`` times its maximum over ``t >= 0``."""
    t_peak = max(0.0, b1 / (2.0 * a2))
    g_peak = -a2 * t_peak**2 + b1 * t_peak
    # a2 t^2 - b1 t + (g_peak + log_ratio) = 0, larger root.
    disc = b1 * b1 - 4.0 * a2 * (g_peak + log_ratio)
    return (b1 + math.sqrt(disc)) / (2.0 * a2)


def integrate_semi_infinite(
    f: Callable,
    lo: float,
    direction: int,
    envelope: tuple[float, float],
    sing_exponent_lo: float = 0.0,
    cfg: QuadConfig | None = None,
    *,
    log_form: bool = False,
    offsets: bool = False,
) -> IntegralResult:
    """Integrate over ``(lo, +inf)`` (direction +1) or ``(-inf, lo)`` (direction -1).

    ``envelope = (a2, a1)`` describes the decay ``exp(-a2 z**2 + a1 z)`` in the
    original variable ``z``. The ray is cut where the envelope falls below
    ``abs_tol * 1e-3`` of its peak, the finite part goes through
    :func:`integrate_singular`, and the cut is pushed out further if the
    integrand at the cut still implies a tail above tolerance. The Gaussian
    tail bound at the final cut is added to the error estimate.
    """
    cfg = cfg or QuadConfig()
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    a2, a1 = envelope
    if not a2 > 0:
        raise ValueError("envelope needs a2 > 0 (Gaussian decay)")
    # Envelope along t = (z - lo) * direction: -a2 t^2 + b1 t + const.
    b1 = direction * (a1 - 2.0 * a2 * lo)
    log_ratio = math.log(cfg.abs_tol * 1e-3)
    if cfg.gaussian_truncation_z is not None:
        t_cut = cfg.gaussian_truncation_z
    else:
        t_cut = truncation_distance(a2, b1, log_ratio)

    def g(t, _d_lo, _d_hi):
        # t itself is the exact distance from the finite end.
        z = lo + direction * t
        args = (z, t, np.full_like(t, np.inf)) if offsets else (z,)
        return f(*args)

    ev = _Evaluator(g, log_form, True)
    pieces = _singular_pieces(0.0, t_cut, sing_exponent_lo, 0.0)
    value, err, ok = _adaptive(ev, pieces, cfg)
    if not math.isfinite(value):
        return _finish(ev, value, err, False)

    width = 1.0 / math.sqrt(a2)
    for _ in range(40):
        slope = 2.0 * a2 * t_cut - b1
        edge_log, _sign = ev.log_values(_Piece(0.0, 1, 1.0, 1.0, t_cut, True), np.array([t_cut]))
        edge = math.exp(float(edge_log[0]) - ev.shift) if np.isfinite(edge_log[0]) else 0.0
        tail = edge / slope if slope > 0 else math.inf
        target = max(_scaled_abs_tol(cfg.abs_tol, ev.shift), cfg.rel_tol * abs(value))
        if tail <= 1e-3 * target:
            break
        t_next = t_cut + max(width, 0.5 * t_cut)
        extra = [_Piece(t_cut, 1, t_next - t_cut, 1.0, t_next - t_cut, True)]
        shift_before = ev.shift
        v2, e2, ok2 = _adaptive(ev, extra, cfg)
        if ev.shift != shift_before:  # pragma: no cover - rescale mid-extension
            factor = math.exp(shift_before - ev.shift)
            value *= factor
            err *= factor
        value += v2
        err += e2
        ok = ok and ok2
        t_cut = t_next
    else:
        ok = False
    err += tail
    return _finish(ev, value, err, ok)


def laplace_time_integral(
    g: Callable,
    s: float,
    params: ModelParams | float,
    cfg: QuadConfig | None = None,
    *,
    in_u: bool = False,
) -> IntegralResult:
    """``s * int_0^inf exp(-s t) g(t) dt`` through ``u = exp(-kappa t)``.

    The mapped integral is ``int_0^1 (s/kappa) u**(s/kappa - 1) g(-ln u / kappa) du``;
    the endpoint power is handled by :func:`integrate_singular`. With
    ``in_u=True`` the callable is evaluated directly as a function of ``u``,
    which avoids the round trip through ``t`` for integrands that are simpler
    in ``u``.
    """
    if not s > 0:
        raise ValueError("s must be > 0")
    kappa = params.kappa if isinstance(params, ModelParams) else float(params)
    ratio = s / kappa
    gamma = ratio - 1.0

    if ratio < 1.0:
        # w = exp(-s t) absorbs the weight exactly; going through the singular
        # map instead would underflow u for s/kappa near 0.
        def flat(w):
            with np.errstate(divide="ignore"):
                logw = np.log(w)
            arg = np.exp(logw / ratio) if in_u else -logw / s
            return np.asarray(g(arg), dtype=float) * np.ones_like(w)

        return integrate_singular(flat, 0.0, 1.0, 0.0, 0.0, cfg)

    def integrand(u):
        arg = u if in_u else -np.log(u) / kappa
        vals = np.asarray(g(arg), dtype=float)
        with np.errstate(divide="ignore"):
            return ratio * np.exp(gamma * np.log(u)) * vals

    return integrate_singular(integrand, 0.0, 1.0, gamma, 0.0, cfg)
