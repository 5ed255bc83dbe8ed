import io
import logging
import math

import numpy as np
from django.conf import settings
from scipy.integrate import cumulative_trapezoid

from exceptions import FVanishes, InvalidParameters, PreconditionViolation
from integrator.models import EventKind, Termination
from integrator.solver import dormand_prince
from integrator.utils import SIGN_DEAD_BAND, default_tolerances
from .models import FixedPointClass, FixedPointInfo, PhaseState, PhaseTrajectory


logger = logging.getLogger(__name__)

# Eigenvalues with a smaller modulus make a fixed point Degenerate
DEGENERATE_EIGENVALUE = 1e-10


def phase_rhs(alpha, beta, u, v):
    """
    The planar system in the blowing-up coordinates.

    With ds = f dt, u = f'/f^2 and v = f''/f^3, the equation
    f''' = -alpha f f'' + beta f'^2 becomes

        du/ds = v - 2 u^2
        dv/ds = -alpha v + beta u^2 - 3 u v

    Works elementwise on numpy arrays.
    """
    return (v - 2 * u * u, -alpha * v + beta * u * u - 3 * u * v)


def sign_constant_intervals(profile):
    '''
    Maximal subintervals of [0, t_final] on which f keeps one sign.

    Interval ends are the located zeros of f; an end where f itself sits
    inside the dead-band (f(0) = 0 when gamma = 0) is not part of the
    transform's domain and has to be stepped off by the caller.
    '''
    zeros = [e.t for e in profile.events(EventKind.F_ZERO_CROSSING)]
    bounds = [float(profile.t[0])] + zeros + [profile.t_final]
    return [(lo, hi) for lo, hi in zip(bounds, bounds[1:]) if hi > lo]


def _quadrature(profile, ts):
    '''int_{ts[0]}^{t} f for every t in ts: trapezoid, refined by one Richardson step.'''
    f = profile.at(ts)[:, 0]
    mid = 0.5 * (ts[:-1] + ts[1:])
    fine_t = np.empty(2 * len(ts) - 1)
    fine_t[0::2], fine_t[1::2] = ts, mid
    fine_f = np.empty_like(fine_t)
    fine_f[0::2], fine_f[1::2] = f, profile.at(mid)[:, 0]

    coarse = cumulative_trapezoid(f, ts, initial=0.0)
    fine = cumulative_trapezoid(fine_f, fine_t, initial=0.0)[0::2]
    return (4.0 * fine - coarse) / 3.0


def to_phase(profile, tau=None, t_range=None):
    '''
    Push a physical Profile forward to the planar system.

    Args:
        profile (Profile): the trajectory; f must not vanish on t_range.
        tau (float): base point of s = int_tau^t f, the left end of the range
            by default.
        t_range (tuple): (t_lo, t_hi) inside the profile, the whole profile
            by default.

    Returns:
        PhaseTrajectory: stored in increasing s (so reversed in t when f < 0),
        with the physical stations in `t`.

    Raises:
        FVanishes: f has a zero in the range.
    '''
    t_lo, t_hi = (float(profile.t[0]), profile.t_final) if t_range is None else map(float, t_range)
    if not (profile.t[0] - 1e-12 <= t_lo < t_hi <= profile.t_final + 1e-12):
        raise PreconditionViolation(
            f"t_range ({t_lo}, {t_hi}) is not inside [{profile.t[0]}, {profile.t_final}]")
    if tau is None:
        tau = t_lo
    if not t_lo <= tau <= t_hi:
        raise PreconditionViolation(f"tau={tau!r} outside ({t_lo}, {t_hi})")

    zeros = [e.t for e in profile.events(EventKind.F_ZERO_CROSSING) if t_lo <= e.t <= t_hi]
    if zeros:
        raise FVanishes(zeros[0])

    inside = profile.t[(profile.t > t_lo) & (profile.t < t_hi)]
    ts = np.unique(np.concatenate([[t_lo, tau, t_hi], inside]))
    states = profile.at(ts)
    f, fp, fpp = states[:, 0], states[:, 1], states[:, 2]
    small = np.abs(f) <= SIGN_DEAD_BAND
    if small.any():
        raise FVanishes(float(ts[np.argmax(small)]))

    s = _quadrature(profile, ts)
    s -= s[np.searchsorted(ts, tau)]
    u = fp / f ** 2
    v = fpp / f ** 3
    du, dv = phase_rhs(profile.params.alpha, profile.params.beta, u, v)

    order = np.argsort(s, kind='stable')
    return PhaseTrajectory(
        s=s[order],
        y=np.column_stack([u, v])[order],
        dyds=np.column_stack([du, dv])[order],
        termination=profile.termination,
        t=ts[order],
    )


def _classify(jacobian, eigenvalues):
    '''Trace / determinant reading of a 2x2 linearisation.'''
    if np.min(np.abs(eigenvalues)) < DEGENERATE_EIGENVALUE:
        return FixedPointClass.DEGENERATE
    trace = float(np.trace(jacobian))
    det = float(np.linalg.det(jacobian))
    if det < 0:
        return FixedPointClass.SADDLE
    discriminant = trace * trace - 4 * det
    if discriminant < 0:
        if abs(trace) < 1e-12:
            return FixedPointClass.CENTER
        return FixedPointClass.STABLE_FOCUS if trace < 0 else FixedPointClass.UNSTABLE_FOCUS
    return FixedPointClass.STABLE_NODE if trace < 0 else FixedPointClass.UNSTABLE_NODE


def jacobian(alpha, beta, u, v):
    return np.array([[-4.0 * u, 1.0],
                     [2.0 * beta * u - 3.0 * v, -alpha - 3.0 * u]])


def fixed_points(alpha, beta):
    '''
    Fixed points of the planar system with their linear stability.

    The origin is always one; when beta != 2 alpha the parabola v = 2u^2
    meets the other nullcline again at u* = (beta - 2 alpha) / 6.

    Returns:
        list of FixedPointInfo, origin first.
    '''
    locations = [(0.0, 0.0)]
    if beta != 2 * alpha:
        u_star = (beta - 2.0 * alpha) / 6.0
        locations.append((u_star, 2.0 * u_star * u_star))

    points = []
    for u, v in locations:
        matrix = jacobian(alpha, beta, u, v)
        eigenvalues = np.linalg.eigvals(matrix)
        points.append(FixedPointInfo(
            location=(u, v),
            jacobian=matrix,
            eigenvalues=eigenvalues,
            classification=_classify(matrix, eigenvalues),
        ))
    return points


def fixed_point_residual(alpha, beta, point):
    '''|P| + |Q| at a FixedPointInfo location.'''
    du, dv = phase_rhs(alpha, beta, *point.location)
    return abs(du) + abs(dv)


def integrate_phase(alpha, beta, initial, s_span, rel_tol=None, abs_tol=None,
                    max_steps=None, blowup_threshold=None):
    '''
    Integrate the planar system from a PhaseState.

    Args:
        initial (PhaseState | tuple): (s, u, v) start; s is replaced by s_span[0].
        s_span (tuple): (s_start, s_end); s_end < s_start integrates backwards.
        rel_tol, abs_tol, max_steps, blowup_threshold: integrator controls,
            settings defaults.

    Returns:
        PhaseTrajectory stored in increasing s.

    Raises:
        InvalidParameters: non-finite start or span.
    '''
    initial = PhaseState(*initial)
    s_start, s_end = (float(v) for v in s_span)
    if not all(math.isfinite(x) for x in (initial.u, initial.v, s_start, s_end)):
        raise InvalidParameters(f"Phase integration needs a finite start, got {initial} on {s_span}")
    default_rel, default_abs = default_tolerances()

    def fun(s, y):
        return phase_rhs(alpha, beta, y[0], y[1])

    raw = dormand_prince(
        fun, s_start, (initial.u, initial.v), s_end,
        rtol=default_rel if rel_tol is None else rel_tol,
        atol=default_abs if abs_tol is None else abs_tol,
        max_steps=settings.MAX_STEPS if max_steps is None else max_steps,
        threshold=settings.BLOWUP_THRESHOLD if blowup_threshold is None else blowup_threshold)

    s = np.asarray(raw.ts, dtype=float)
    y = np.asarray(raw.ys, dtype=float).reshape(-1, 2)
    dyds = np.asarray(raw.dys, dtype=float).reshape(-1, 2)
    if s_end < s_start:
        s, y, dyds = s[::-1], y[::-1], dyds[::-1]
    if raw.status != Termination.REACHED_TMAX:
        logger.debug(f'Phase trajectory from {initial} ended with {raw.status}')
    return PhaseTrajectory(s=s, y=y, dyds=dyds, termination=raw.status)


def conjugacy_error(profile, tau=None, t_range=None, rel_tol=None, abs_tol=None):
    '''
    Sup-norm distance between to_phase(profile) and the planar flow started
    at its smallest s and run forward in s, over the common s-range.

    Forward in s is backward in t wherever f < 0.
    '''
    image = to_phase(profile, tau=tau, t_range=t_range)
    flow = integrate_phase(profile.params.alpha, profile.params.beta,
                           (image.s[0], image.u[0], image.v[0]),
                           (image.s[0], image.s[-1]), rel_tol=rel_tol, abs_tol=abs_tol)
    lo, hi = max(image.s[0], flow.s[0]), min(image.s[-1], flow.s[-1])
    common = (image.s >= lo) & (image.s <= hi)
    return float(np.max(np.abs(flow.at(image.s[common]) - image.y[common])))


def vector_field(alpha, beta, u_range, v_range, n):
    '''
    The planar vector field on an n x n grid.

    Returns:
        ndarray: (n*n, 4) rows of u, v, du/ds, dv/ds, u varying fastest.
    '''
    if n < 2:
        raise InvalidParameters(f"grid needs at least 2 points per axis, got {n}")
    uu, vv = np.meshgrid(np.linspace(*u_range, n), np.linspace(*v_range, n))
    du, dv = phase_rhs(alpha, beta, uu, vv)
    return np.column_stack([uu.ravel(), vv.ravel(), du.ravel(), dv.ravel()])


def default_window(points, margin=1.0):
    '''A (u_range, v_range) box around the fixed points.'''
    us = [p.location[0] for p in points]
    vs = [p.location[1] for p in points]
    return ((min(us) - margin, max(us) + margin), (min(vs) - margin, max(vs) + margin))


def phase_to_csv(trajectory):
    '''CSV text "s,u,v", 17 significant digits, increasing s.'''
    buffer = io.StringIO()
    buffer.write('s,u,v\n')
    for s, (u, v) in zip(trajectory.s, trajectory.y):
        buffer.write(f'{s:.17g},{u:.17g},{v:.17g}\n')
    return buffer.getvalue()


def vector_field_to_csv(rows):
    buffer = io.StringIO()
    buffer.write('u,v,du,dv\n')
    for row in rows:
        buffer.write(','.join(f'{x:.17g}' for x in row) + '\n')
    return buffer.getvalue()
