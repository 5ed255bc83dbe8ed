"""
Embedded explicit Runge-Kutta integration with PI step control.

The stepper is the Dormand-Prince 5(4) pair: seven stages, first-same-as-last,
5th order propagation and a 4th order embedded error estimate. Step sizes
follow a proportional-integral controller. Between accepted steps the
solution is represented by cubic Hermite interpolation, which is what event
location and resampling use.

States are plain tuples of floats; the systems integrated here have two or
three components and tuple arithmetic is faster than tiny numpy arrays.
"""
import math
from dataclasses import dataclass, field

import numpy as np


REACHED_END = 'ReachedTmax'
BLOW_UP = 'BlowUp'
STEP_LIMIT = 'StepLimitExceeded'
STEP_UNDERFLOW = 'StepUnderflow'
RUNAWAY = 'Runaway'

# Event and crossing location resolution in t
LOCATE_RESOLUTION = 1e-8

# Smallest admissible step relative to max(1, |t|)
MIN_STEP_FACTOR = 1e-13


# Butcher tableau (Dormand & Prince 1980)
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9

A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84

# b5 - b4, the local error estimate
E1, E3, E4, E5, E6, E7 = (71 / 57600, -71 / 16695, 71 / 1920,
                          -17253 / 339200, 22 / 525, -1 / 40)

ORDER = 5

# PI controller (Gustafsson) exponents and limits
SAFETY = 0.9
BETA1 = 0.7 / ORDER
BETA2 = 0.4 / ORDER
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


@dataclass
class RawSolution:
    '''Accepted steps of one integration, before domain wrapping.'''

    ts: list = field(default_factory=list)
    ys: list = field(default_factory=list)
    dys: list = field(default_factory=list)
    status: str = REACHED_END
    t_stop: float = None
    n_steps: int = 0
    n_rejected: int = 0


def hermite(t0, y0, d0, t1, y1, d1, t):
    '''
    Cubic Hermite interpolant between two accepted steps.

    Works on scalars, tuples or numpy arrays of components; `t` may be a
    scalar or an array of stations inside [t0, t1].
    '''
    h = t1 - t0
    s = (np.asarray(t, dtype=float) - t0) / h
    s2 = s * s
    s3 = s2 * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    y0, d0, y1, d1 = (np.asarray(v, dtype=float) for v in (y0, d0, y1, d1))
    if np.ndim(s):
        s_shape = (slice(None),) + (None,) * y0.ndim
        h00, h10, h01, h11 = (c[s_shape] for c in (h00, h10, h01, h11))
    return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1


def bisect_crossing(g, lo, hi, resolution=LOCATE_RESOLUTION):
    '''
    Locate where the predicate g switches from False (at lo) to True (at hi).

    Returns the first station known to satisfy g, within `resolution`.
    '''
    while abs(hi - lo) > resolution:
        mid = 0.5 * (lo + hi)
        if g(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _error_norm(y, y_new, err, rtol, atol):
    total = 0.0
    for yi, yn, ei in zip(y, y_new, err):
        scale = atol + rtol * max(abs(yi), abs(yn))
        total += (ei / scale) ** 2
    return math.sqrt(total / len(y))


def _initial_step(fun, t0, y0, f0, direction, rtol, atol, span):
    '''Starting step from the size of y, y' and an estimate of y'' (Hairer et al.).'''
    scale = [atol + rtol * abs(v) for v in y0]
    d0 = math.sqrt(sum((v / s) ** 2 for v, s in zip(y0, scale)) / len(y0))
    d1 = math.sqrt(sum((v / s) ** 2 for v, s in zip(f0, scale)) / len(y0))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)

    y1 = tuple(v + direction * h0 * d for v, d in zip(y0, f0))
    f1 = fun(t0 + direction * h0, y1)
    d2 = math.sqrt(sum(((a - b) / s) ** 2 for a, b, s in zip(f1, f0, scale)) / len(y0)) / h0

    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / ORDER)
    return min(100 * h0, h1, span)


def dormand_prince(fun, t0, y0, t_end, rtol, atol, max_steps, threshold=None, h_max=None,
                   stop=None):
    '''
    Integrate y' = fun(t, y) from t0 to t_end (either direction).

    Args:
        fun: callable (t, y) -> tuple of derivatives.
        t0, t_end (float): integration interval; t_end < t0 integrates backwards.
        y0 (tuple): initial state.
        rtol, atol (float): local error tolerances.
        max_steps (int): cap on attempted steps.
        threshold (float): stop with BlowUp as soon as any |component|
            exceeds it; the crossing is located on the interpolant.
        h_max (float): optional cap on the step size.
        stop: optional predicate (t, y) -> bool checked on every accepted
            step; when it holds the run ends with status Runaway at that step.

    Returns:
        RawSolution: accepted stations with their derivatives and the
        termination status.
    '''
    y = tuple(float(v) for v in y0)
    t = float(t0)
    direction = 1.0 if t_end >= t0 else -1.0
    span = abs(t_end - t0)
    k1 = fun(t, y)

    out = RawSolution(ts=[t], ys=[y], dys=[k1])
    if span == 0.0:
        return out

    h = _initial_step(fun, t, y, k1, direction, rtol, atol, span)
    if h_max is not None:
        h = min(h, h_max)
    err_prev = 1e-4
    rejected_last = False
    attempts = 0

    while direction * (t_end - t) > 0:
        if attempts >= max_steps:
            out.status = STEP_LIMIT
            return out
        attempts += 1

        if h < MIN_STEP_FACTOR * max(1.0, abs(t)):
            out.status = STEP_UNDERFLOW
            out.t_stop = t
            return out

        remaining = abs(t_end - t)
        last = h >= remaining
        step = direction * (remaining if last else h)

        k2 = fun(t + C2 * step, tuple(
            yi + step * A21 * a for yi, a in zip(y, k1)))
        k3 = fun(t + C3 * step, tuple(
            yi + step * (A31 * a + A32 * b) for yi, a, b in zip(y, k1, k2)))
        k4 = fun(t + C4 * step, tuple(
            yi + step * (A41 * a + A42 * b + A43 * c) for yi, a, b, c in zip(y, k1, k2, k3)))
        k5 = fun(t + C5 * step, tuple(
            yi + step * (A51 * a + A52 * b + A53 * c + A54 * d)
            for yi, a, b, c, d in zip(y, k1, k2, k3, k4)))
        k6 = fun(t + step, tuple(
            yi + step * (A61 * a + A62 * b + A63 * c + A64 * d + A65 * e)
            for yi, a, b, c, d, e in zip(y, k1, k2, k3, k4, k5)))
        y_new = tuple(
            yi + step * (B1 * a + B3 * c + B4 * d + B5 * e + B6 * g)
            for yi, a, c, d, e, g in zip(y, k1, k3, k4, k5, k6))

        if not all(math.isfinite(v) for v in y_new):
            # Overflow inside the step: treat as a rejection with a hard cut
            out.n_rejected += 1
            h *= MIN_FACTOR
            rejected_last = True
            continue

        k7 = fun(t + step, y_new)
        err = tuple(
            step * (E1 * a + E3 * c + E4 * d + E5 * e + E6 * g + E7 * q)
            for a, c, d, e, g, q in zip(k1, k3, k4, k5, k6, k7))
        err_norm = _error_norm(y, y_new, err, rtol, atol)

        if err_norm > 1.0:
            out.n_rejected += 1
            h *= max(MIN_FACTOR, SAFETY * err_norm ** (-1.0 / ORDER))
            rejected_last = True
            continue

        t_new = t_end if last else t + step

        if threshold is not None and max(abs(v) for v in y_new) > threshold:
            t_prev, y_prev, d_prev = t, y, k1

            def exceeded(tau):
                yi = hermite(t_prev, y_prev, d_prev, t_new, y_new, k7, tau)
                return float(np.max(np.abs(yi))) > threshold

            t_stop = bisect_crossing(exceeded, t_prev, t_new)
            y_stop = tuple(float(v) for v in hermite(t_prev, y_prev, d_prev, t_new, y_new, k7, t_stop))
            if t_stop != t_prev:
                out.ts.append(t_stop)
                out.ys.append(y_stop)
                out.dys.append(fun(t_stop, y_stop))
            out.status = BLOW_UP
            out.t_stop = t_stop
            out.n_steps += 1
            return out

        t, y, k1 = t_new, y_new, k7
        out.ts.append(t)
        out.ys.append(y)
        out.dys.append(k1)
        out.n_steps += 1

        if stop is not None and stop(t, y):
            out.status = RUNAWAY
            out.t_stop = t
            return out

        err_norm = max(err_norm, 1e-10)
        factor = SAFETY * err_norm ** (-BETA1) * err_prev ** BETA2
        factor = min(MAX_FACTOR, max(MIN_FACTOR, factor))
        if rejected_last:
            factor = min(1.0, factor)
        h = abs(step) * factor if not last else h
        if h_max is not None:
            h = min(h, h_max)
        err_prev = err_norm
        rejected_last = False

    return out
