import io
import logging

import numpy as np
from django.conf import settings

from exceptions import InvalidParameters
from problems.models import State
from .models import Event, EventKind, IvpSpec, Profile, Termination
from .solver import bisect_crossing, dormand_prince, hermite


logger = logging.getLogger(__name__)

# |value| at or below this counts as zero when reading sign patterns
SIGN_DEAD_BAND = 1e-12


def default_tolerances():
    '''(rel_tol, abs_tol) from settings.'''
    return settings.INTEGRATOR_REL_TOL, settings.INTEGRATOR_ABS_TOL


def default_horizon(params, factor=None):
    '''
    Finite stand-in for t = infinity.

    t_max = factor * max(1, 1/alpha_eff) with alpha_eff = max(|alpha|, 0.1).
    The decay of f' in the bounded regimes is only known empirically; the
    factor defaults to settings.HORIZON_FACTOR.
    '''
    if factor is None:
        factor = settings.HORIZON_FACTOR
    alpha_eff = max(abs(params.alpha), 0.1)
    return factor * max(1.0, 1.0 / alpha_eff)


def make_spec(params, initial, t_max=None, rel_tol=None, abs_tol=None,
              blowup_threshold=None, max_steps=None):
    '''IvpSpec with every unset control taken from settings.'''
    if not isinstance(initial, State):
        initial = State(*initial)
    default_rel, default_abs = default_tolerances()
    return IvpSpec(
        params=params,
        initial=initial,
        t_max=default_horizon(params) if t_max is None else float(t_max),
        rel_tol=default_rel if rel_tol is None else float(rel_tol),
        abs_tol=default_abs if abs_tol is None else float(abs_tol),
        blowup_threshold=(settings.BLOWUP_THRESHOLD if blowup_threshold is None
                          else float(blowup_threshold)),
        max_steps=settings.MAX_STEPS if max_steps is None else int(max_steps),
    )


def system(alpha, beta):
    '''First-order form (f, f', f'')' = (f', f'', -alpha f f'' + beta f'^2).'''

    def fun(t, y):
        f, fp, fpp = y
        return (fp, fpp, -alpha * f * fpp + beta * fp * fp)

    return fun


def _sign(value):
    if value > SIGN_DEAD_BAND:
        return 1
    if value < -SIGN_DEAD_BAND:
        return -1
    return 0


def _dense(t, values, derivs, lo, hi, tau):
    '''Piecewise Hermite value on the stations lo..hi at tau.'''
    k = lo + int(np.searchsorted(t[lo:hi + 1], tau, side='right')) - 1
    k = min(max(k, lo), hi - 1)
    return float(hermite(t[k], values[k], derivs[k], t[k + 1], values[k + 1], derivs[k + 1], tau))


def detect_events(t, y, dydt):
    '''
    Sign changes of f'', f' and f between accepted steps.

    A change is a new nonzero sign (outside the dead-band) that differs from
    the last nonzero sign seen. It is located on the piecewise Hermite
    interpolant between that last nonzero station and the station where the
    new sign shows up, so stations inside the dead-band are bridged.
    '''
    columns = ((2, EventKind.FPP_SIGN_CHANGE),
               (1, EventKind.FP_SIGN_CHANGE),
               (0, EventKind.F_ZERO_CROSSING))
    events = []
    for column, kind in columns:
        values = y[:, column]
        derivs = dydt[:, column]
        signs = np.where(values > SIGN_DEAD_BAND, 1,
                         np.where(values < -SIGN_DEAD_BAND, -1, 0))
        nonzero = np.flatnonzero(signs)
        if len(nonzero) < 2:
            continue
        flipped = signs[nonzero[1:]] != signs[nonzero[:-1]]
        for lo, hi in zip(nonzero[:-1][flipped], nonzero[1:][flipped]):
            sign = int(signs[hi])

            def switched(tau, lo=lo, hi=hi, sign=sign):
                return _sign(_dense(t, values, derivs, lo, hi, tau)) == sign

            events.append(Event(float(bisect_crossing(switched, t[lo], t[hi])), kind, sign))
    events.sort(key=lambda e: e.t)
    return tuple(events)


def integrate(spec, stop=None):
    '''
    Integrate the initial value problem described by an IvpSpec.

    `stop` is an optional predicate (t, y) -> bool; the run ends with
    termination Runaway on the first accepted step where it holds.

    Returns:
        Profile: accepted steps, termination and event log. BlowUp carries
        the first station where a component exceeds the threshold;
        StepUnderflow and StepLimitExceeded are reported through
        `termination` rather than raised, callers decide what they mean.
    '''
    params = spec.params
    raw = dormand_prince(
        system(params.alpha, params.beta), 0.0, spec.initial.as_tuple(), spec.t_max,
        rtol=spec.rel_tol, atol=spec.abs_tol, max_steps=spec.max_steps,
        threshold=spec.blowup_threshold, stop=stop)

    t = np.asarray(raw.ts, dtype=float)
    y = np.asarray(raw.ys, dtype=float).reshape(-1, 3)
    dydt = np.asarray(raw.dys, dtype=float).reshape(-1, 3)

    if raw.status != Termination.REACHED_TMAX:
        logger.debug(f'{params}: integration from {spec.initial.as_tuple()} ended with '
                     f'{raw.status} at t={raw.t_stop if raw.t_stop is not None else t[-1]}')

    return Profile(t=t, y=y, dydt=dydt, termination=raw.status, params=params,
                   t_stop=raw.t_stop, event_log=detect_events(t, y, dydt))


def closed_form_profile(solution, params, t_max, n=2001):
    '''
    A Profile sampled from a closed form on n stations of [0, t_max].

    Used where forward integration from the closed form's initial state is
    ill-conditioned (m = 1 with gamma > 0 has f(0) < 0, where the linearised
    flow grows like exp(gamma t)).
    '''
    if not t_max > 0:
        raise InvalidParameters(f"t_max must be positive, got {t_max!r}")
    t = np.linspace(0.0, float(t_max), n)
    f, fp, fpp, fppp = solution.derivatives(t)
    y = np.column_stack([f, fp, fpp])
    dydt = np.column_stack([fp, fpp, fppp])
    return Profile(t=t, y=y, dydt=dydt, termination=Termination.REACHED_TMAX, params=params,
                   event_log=detect_events(t, y, dydt))


def scale_solution(profile, kappa):
    '''
    The rescaled solution t -> (k f(k t), k^2 f'(k t), k^3 f''(k t)).

    If f solves the equation so does t -> k f(k t), for any k > 0; the
    stations are mapped to t/k.
    '''
    if not kappa > 0:
        raise InvalidParameters(f"kappa must be positive, got {kappa!r}")
    powers = np.array([kappa, kappa ** 2, kappa ** 3])
    return Profile(
        t=profile.t / kappa,
        y=profile.y * powers,
        dydt=profile.dydt * powers * kappa,
        termination=profile.termination,
        params=profile.params,
        t_stop=None if profile.t_stop is None else profile.t_stop / kappa,
        event_log=tuple(Event(e.t / kappa, e.kind, e.direction) for e in profile.event_log),
    )


def first_integral(profile):
    '''f'' + alpha f f' along the profile; constant whenever beta = -alpha.'''
    return profile.fpp + profile.params.alpha * profile.f * profile.fp


def profile_to_csv(profile, ts=None):
    '''
    CSV text with header "t,f,fp,fpp", 17 significant digits.

    Accepted steps are written unless stations `ts` are given, in which case
    the dense output is sampled there.
    '''
    rows = np.column_stack([profile.t, profile.y]) if ts is None else profile.resample(ts)
    buffer = io.StringIO()
    buffer.write('t,f,fp,fpp\n')
    for row in rows:
        buffer.write(','.join(f'{v:.17g}' for v in row) + '\n')
    return buffer.getvalue()
