import logging
import math
from concurrent.futures import ProcessPoolExecutor

import django
import numpy as np
from django.conf import settings
from scipy import optimize

from classify.models import Boundedness
from classify.utils import classify_asymptotics, classify_shape
from exceptions import (Indeterminate, NoSignChange, PreconditionViolation,
                        SameStatusAtEndpoints)
from integrator.models import Termination
from integrator.utils import integrate
from problems.models import Family
from problems.utils import boundary_conditions, make_params
from .models import (Band, CriticalGamma, HorizonSettings, RecordKind,
                     ResidualOutcome, ScanReport, ShootResidual, Side,
                     SolutionRecord)


logger = logging.getLogger(__name__)

INDETERMINATE = 'Indeterminate'
# Records closer than this in free value are the same solution
DEDUP_RESOLUTION = 1e-6
# Interior points added between scan neighbours of different outcome class
REFINE_POINTS = 3


def default_scan_range(params):
    '''[-10 (1 + |gamma|), 10 (1 + |gamma|)].'''
    half_width = 10.0 * (1.0 + abs(params.gamma))
    return (-half_width, half_width)


def scan_horizon(params, horizon=None):
    '''The horizon used for scans: same t_max, the looser scan tolerances.'''
    horizon = (horizon or HorizonSettings()).resolved(params)
    return HorizonSettings(horizon.t_max,
                           max(horizon.rel_tol, settings.SCAN_REL_TOL),
                           max(horizon.abs_tol, settings.SCAN_ABS_TOL),
                           horizon.blowup_threshold, horizon.max_steps)


def parallel_map(fn, items, threads):
    '''Ordered map over items, fanned out to worker processes when threads > 1.'''
    items = list(items)
    if threads is None:
        threads = settings.SIMBVP_THREADS
    if threads <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    chunksize = max(1, len(items) // (4 * threads))
    with ProcessPoolExecutor(max_workers=threads, initializer=django.setup) as executor:
        return list(executor.map(fn, items, chunksize=chunksize))


def runaway_test(params, bc_tol, abs_tol):
    """
    Stop predicate for trajectories whose residual sign is already decided.

    With beta >= 0, f''' >= -alpha f f'' keeps f'' positive once it is, so
    f' > bc_tol and f'' > 0 mean f' only grows from there on. With beta <= 0
    the same holds with every sign reversed. These trajectories turn stiff
    (alpha f >> 1 damps f'') long before any threshold is crossed.
    """
    margin = 100.0 * abs_tol
    positive = params.beta >= 0
    negative = params.beta <= 0

    def stop(t, y):
        _, fp, fpp = y
        return ((positive and fp > bc_tol and fpp > margin)
                or (negative and fp < -bc_tol and fpp < -margin))

    return stop


def evaluate_residual(params, free_value, horizon=None, keep_profile=False, bc_tol=None):
    '''
    Integrate the shooting problem for one free value and report f'(t_max).

    The initial state is (-gamma, 1, free_value) for the temperature family
    and (-gamma, free_value, -1) for the flux family.

    Returns:
        ShootResidual: Evaluated with f'(t_max), or BlewUpPositive /
        BlewUpNegative with the sign of f' where the threshold was crossed.
        A Runaway stop (see runaway_test) counts as a blow-up with the sign
        of f' at the stop.

    Raises:
        PreconditionViolation: generic family.
        Indeterminate: the integrator stopped on StepUnderflow or StepLimitExceeded.
    '''
    if params.family == Family.GENERIC:
        raise PreconditionViolation("Shooting needs the temperature or flux boundary conditions")
    if bc_tol is None:
        bc_tol = settings.BC_TOL
    horizon = (horizon or HorizonSettings()).resolved(params)
    initial = boundary_conditions(params, free_value).initial_state()
    profile = integrate(horizon.spec_for(params, initial),
                        stop=runaway_test(params, bc_tol, horizon.abs_tol))

    fp_end = float(profile.fp[-1])
    if profile.termination == Termination.REACHED_TMAX:
        outcome = ResidualOutcome.EVALUATED
    elif profile.termination in (Termination.BLOW_UP, Termination.RUNAWAY):
        outcome = (ResidualOutcome.BLEW_UP_POSITIVE if fp_end >= 0
                   else ResidualOutcome.BLEW_UP_NEGATIVE)
    else:
        raise Indeterminate(f"{params}, free value {free_value!r}: {profile.termination} "
                            f"at t={profile.t_stop}", termination=profile.termination)

    return ShootResidual(float(free_value), fp_end, outcome,
                         profile if keep_profile else None)


def _scan_point(task):
    params, free_value, horizon, bc_tol = task
    try:
        r = evaluate_residual(params, free_value, horizon, bc_tol=bc_tol)
        return (r.free_value, r.outcome, r.residual)
    except Indeterminate:
        return (float(free_value), INDETERMINATE, math.nan)


def _build_record(params, free_value, profile, verdict, horizon, kind):
    shape = classify_shape(profile, noise_floor=10 * horizon.abs_tol)
    return SolutionRecord(
        params=params,
        free_value=float(free_value),
        profile=profile,
        bounded=verdict.bounded,
        shape=shape,
        limit_lambda=verdict.limit_lambda,
        growth_exponent=verdict.growth_exponent,
        decay_exponent=verdict.decay_exponent,
        fit=verdict.fit,
        kind=kind,
    )


def _finish_root(params, free_value, bc_tol, horizon):
    '''Integrate at the refined free value and turn it into a SolutionRecord.'''
    r = evaluate_residual(params, free_value, horizon, keep_profile=True, bc_tol=bc_tol)
    if r.outcome != ResidualOutcome.EVALUATED or abs(r.residual) >= bc_tol:
        raise NoSignChange(f"{params}: bracket refined to {free_value!r} where "
                           f"{r.outcome} with f'(t_max)={r.residual:.3e}; not a solution")
    verdict = classify_asymptotics(r.profile, bc_tol)
    if not verdict.admissible:
        raise Indeterminate(f"{params}: root at {free_value!r} is neither settled nor a power law")
    return _build_record(params, free_value, r.profile, verdict, horizon, RecordKind.ROOT)


def solve_bvp(params, bracket, bc_tol=None, horizon=None):
    '''
    Refine a bracket of the free initial value to a solution of the BVP.

    Bisection on the sign of the extended residual (blow-ups count as +-inf)
    until both ends reach t_max, then Brent's method (secant steps guarded by
    bisection) to |hi - lo| < 1e-10 max(1, |free value|).

    Args:
        params (ModelParams): temperature or flux problem.
        bracket (tuple): (lo, hi) with differing residual sign or outcome.
        bc_tol (float): required |f'(t_max)|, settings.BC_TOL by default.
        horizon (HorizonSettings): integration controls.

    Returns:
        SolutionRecord

    Raises:
        NoSignChange: no root evidence in the bracket, or the bracket closes
            on a point that is not a solution.
        Indeterminate: an integration inside the bracket failed.
    '''
    if bc_tol is None:
        bc_tol = settings.BC_TOL
    horizon = (horizon or HorizonSettings()).resolved(params)
    lo, hi = sorted(float(v) for v in bracket)
    r_lo = evaluate_residual(params, lo, horizon, bc_tol=bc_tol)
    r_hi = evaluate_residual(params, hi, horizon, bc_tol=bc_tol)

    for r in (r_lo, r_hi):
        if r.outcome == ResidualOutcome.EVALUATED and abs(r.residual) < bc_tol:
            return _finish_root(params, r.free_value, bc_tol, horizon)
    if r_lo.sign == r_hi.sign:
        raise NoSignChange(f"{params}: no sign change of the residual on [{lo!r}, {hi!r}]")

    def width_reached():
        return hi - lo < 1e-10 * max(1.0, abs(lo), abs(hi))

    # Bisection until both ends are finite residuals of opposite sign
    while not width_reached() and not (r_lo.outcome == ResidualOutcome.EVALUATED
                                       and r_hi.outcome == ResidualOutcome.EVALUATED):
        mid = 0.5 * (lo + hi)
        r_mid = evaluate_residual(params, mid, horizon, bc_tol=bc_tol)
        if r_mid.outcome == ResidualOutcome.EVALUATED and abs(r_mid.residual) < bc_tol:
            return _finish_root(params, mid, bc_tol, horizon)
        if r_mid.sign == r_lo.sign:
            lo, r_lo = mid, r_mid
        else:
            hi, r_hi = mid, r_mid

    if width_reached():
        return _finish_root(params, 0.5 * (lo + hi), bc_tol, horizon)

    cap = horizon.blowup_threshold

    def residual(x):
        value = evaluate_residual(params, x, horizon, bc_tol=bc_tol).extended
        return min(cap, max(-cap, value))

    root = optimize.brentq(residual, lo, hi, xtol=1e-12, rtol=1e-10, maxiter=200)
    return _finish_root(params, root, bc_tol, horizon)


def _solve_task(task):
    params, bracket, bc_tol, horizon = task
    try:
        return solve_bvp(params, bracket, bc_tol, horizon)
    except (NoSignChange, Indeterminate) as exc:
        logger.info(f'Bracket {bracket} discarded: {exc}')
        return None


def _band_member(task):
    '''Classify one representative of a band; None when it is not admissible.'''
    params, free_value, bc_tol, horizon, extended_t_max, unbounded_ok = task
    try:
        r = evaluate_residual(params, free_value, horizon, keep_profile=True, bc_tol=bc_tol)
    except Indeterminate:
        return None
    if r.outcome != ResidualOutcome.EVALUATED:
        return None

    verdict = classify_asymptotics(r.profile, bc_tol)
    if not verdict.bounded:
        try:
            extended = evaluate_residual(params, free_value, horizon.with_horizon(extended_t_max),
                                         keep_profile=True, bc_tol=bc_tol)
        except Indeterminate:
            return None
        if extended.outcome != ResidualOutcome.EVALUATED:
            return None
        verdict = classify_asymptotics(extended.profile, bc_tol)

    if not verdict.admissible:
        return None
    if verdict.status == Boundedness.UNBOUNDED and not unbounded_ok:
        return None
    return _build_record(params, free_value, r.profile, verdict, horizon, RecordKind.BAND_MEMBER)


def _scan_grid(lo, hi, step):
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [float(v) for v in np.round(lo + step * np.arange(n), 12)]


def _class_of(point):
    return point[1]


def _residual_sign(point, bc_tol):
    free_value, outcome, residual = point
    if outcome == ResidualOutcome.BLEW_UP_POSITIVE:
        return 1
    if outcome == ResidualOutcome.BLEW_UP_NEGATIVE:
        return -1
    if abs(residual) < bc_tol:
        return 0
    return 1 if residual > 0 else -1


def scan_residuals(params, scan_range=None, scan_step=None, horizon=None, threads=None, refine=True,
                   bc_tol=None):
    '''
    Residual outcome at every scan point, sorted by free value.

    Neighbours of different outcome class (Evaluated, BlewUpPositive,
    BlewUpNegative) get extra interior points so narrow transitions are not
    stepped over.

    Returns:
        list of (free_value, outcome, residual) tuples.
    '''
    if scan_range is None:
        scan_range = default_scan_range(params)
    if scan_step is None:
        scan_step = settings.SCAN_STEP
    if bc_tol is None:
        bc_tol = settings.BC_TOL
    if not scan_step > 0:
        raise PreconditionViolation(f"scan_step must be positive, got {scan_step!r}")
    horizon = scan_horizon(params, horizon)

    grid = _scan_grid(*sorted(scan_range), scan_step)
    points = parallel_map(_scan_point, [(params, x, horizon, bc_tol) for x in grid], threads)

    if refine:
        extra = []
        for a, b in zip(points, points[1:]):
            if INDETERMINATE in (a[1], b[1]) or _class_of(a) == _class_of(b):
                continue
            extra.extend(a[0] + (b[0] - a[0]) * k / (REFINE_POINTS + 1)
                         for k in range(1, REFINE_POINTS + 1))
        if extra:
            points += parallel_map(_scan_point, [(params, x, horizon, bc_tol) for x in extra], threads)
            points.sort(key=lambda p: p[0])
    return points


def _brackets_and_bands(points, bc_tol):
    '''Sign-change brackets, near-zero points and Evaluated runs of one sign.'''
    valid = [p for p in points if p[1] != INDETERMINATE]
    signed = [(p, _residual_sign(p, bc_tol)) for p in valid]

    brackets = []
    nonzero = [(p, s) for p, s in signed if s != 0]
    for (a, sa), (b, sb) in zip(nonzero, nonzero[1:]):
        if sa != sb:
            brackets.append((a[0], b[0]))
    zeros = [p[0] for p, s in signed if s == 0
             and not any(lo <= p[0] <= hi for lo, hi in brackets)]

    bands = []
    run = []
    for p, s in signed:
        if p[1] == ResidualOutcome.EVALUATED and s != 0 and (not run or run[-1][1] == s):
            run.append((p, s))
            continue
        if run:
            bands.append(run)
        run = [(p, s)] if p[1] == ResidualOutcome.EVALUATED and s != 0 else []
    if run:
        bands.append(run)

    return brackets, zeros, [[p[0] for p, _ in band] for band in bands], [band[0][1] for band in bands]


def _representatives(values, count):
    if count <= 0:
        return []
    indices = np.unique(np.round(np.linspace(0, len(values) - 1, min(count, len(values)))).astype(int))
    return [values[i] for i in indices]


def _dedupe(records):
    records = sorted(records, key=lambda r: (r.free_value, r.kind != RecordKind.ROOT))
    kept = []
    for record in records:
        if kept and abs(record.free_value - kept[-1].free_value) < DEDUP_RESOLUTION:
            if kept[-1].kind != RecordKind.ROOT and record.kind == RecordKind.ROOT:
                kept[-1] = record
            continue
        kept.append(record)
    return kept


def scan_solutions(params, scan_range=None, scan_step=None, bc_tol=None, unbounded_ok=True,
                   horizon=None, threads=None, band_representatives=None, stop_at_first=False):
    '''
    Scan the free value, refine every root and sample every band.

    Roots are the sign changes of the extended residual, refined with
    solve_bvp at the full tolerances. A band is a run of scan points whose
    trajectories reach t_max with one residual sign; it is represented by
    evenly spaced members (ends included), each classified at the standard
    horizon and, unless clearly bounded there, at the asymptotic horizon.

    Returns:
        ScanReport
    '''
    if bc_tol is None:
        bc_tol = settings.BC_TOL
    if band_representatives is None:
        band_representatives = settings.BAND_REPRESENTATIVES
    horizon = (horizon or HorizonSettings()).resolved(params)
    report = ScanReport(params)

    points = scan_residuals(params, scan_range, scan_step, horizon, threads, bc_tol=bc_tol)
    report.n_points = len(points)
    report.n_indeterminate = sum(1 for p in points if p[1] == INDETERMINATE)
    brackets, zeros, band_values, band_signs = _brackets_and_bands(points, bc_tol)

    root_tasks = [(params, b, bc_tol, horizon) for b in brackets]
    root_tasks += [(params, (z, z), bc_tol, horizon) for z in zeros]
    if stop_at_first:
        for task in root_tasks:
            record = _solve_task(task)
            if record is not None:
                report.records.append(record)
                return report
        roots = []
    else:
        roots = [r for r in parallel_map(_solve_task, root_tasks, threads) if r is not None]

    extended_t_max = horizon.t_max * settings.ASYMPTOTIC_HORIZON_FACTOR
    members = []
    for values, sign in zip(band_values, band_signs):
        report.bands.append(Band(values[0], values[-1], sign, len(values)))
        tasks = [(params, x, bc_tol, horizon, extended_t_max, unbounded_ok)
                 for x in _representatives(values, band_representatives)]
        if stop_at_first:
            for task in tasks:
                record = _band_member(task)
                if record is not None:
                    report.records.append(record)
                    return report
            continue
        members.extend(r for r in parallel_map(_band_member, tasks, threads) if r is not None)

    report.records = _dedupe(roots + members)
    logger.info(f'{params}: {len(report.records)} solution(s) from {report.n_points} scan points, '
                f'{len(brackets)} bracket(s), {len(report.bands)} run(s)')
    return report


def enumerate_solutions(params, scan_range=None, scan_step=None, bc_tol=None, unbounded_ok=True,
                        horizon=None, threads=None):
    '''
    Every solution found by scanning the free value, sorted by free value.

    An empty list is a finding ("none found in range"), not an error.
    '''
    return scan_solutions(params, scan_range, scan_step, bc_tol, unbounded_ok,
                          horizon, threads).records


def has_solution(params, **scan_kwargs):
    '''True as soon as the scan yields one admissible solution.'''
    return bool(scan_solutions(params, stop_at_first=True, **scan_kwargs).records)


def flux_gamma_star_lower_bound(m):
    '''cbrt(2 / (m+2)^2): gamma* of the flux family exceeds it for m < -2.'''
    if not m < -2:
        return None
    return (2.0 / (m + 2.0) ** 2) ** (1.0 / 3.0)


def critical_gamma(family, m, gamma_bracket, tol=1e-3, **scan_kwargs):
    '''
    Bisection on gamma for the threshold between "no solution" and "solutions".

    Args:
        family (Family): temperature or flux.
        m (float): power-law exponent.
        gamma_bracket (tuple): (lo, hi) whose solvability differs.
        tol (float): final bracket width.
        scan_kwargs: passed to the per-gamma scans (scan_range, scan_step, ...).

    Returns:
        CriticalGamma

    Raises:
        SameStatusAtEndpoints: both ends solvable or both unsolvable.
    '''
    def solvable(gamma):
        found = has_solution(make_params(family, m, gamma), **scan_kwargs)
        logger.info(f'{family}(m={m:g}): gamma={gamma:.6g} solvable={found}')
        return found

    lo, hi = sorted(float(v) for v in gamma_bracket)
    s_lo, s_hi = solvable(lo), solvable(hi)
    if s_lo == s_hi:
        raise SameStatusAtEndpoints(
            f"{family}(m={m:g}): solvability is {s_lo} at both gamma={lo:g} and gamma={hi:g}")

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if solvable(mid) == s_lo:
            lo = mid
        else:
            hi = mid

    side = Side.ABOVE if s_hi else Side.BELOW
    width = hi - lo
    gamma_star = 0.5 * (lo + hi)
    direction = 1.0 if side == Side.ABOVE else -1.0
    verified = (solvable(gamma_star + 2 * width * direction)
                and not solvable(gamma_star - 2 * width * direction))
    if not verified:
        logger.warning(f'{family}(m={m:g}): solvability not confirmed around gamma*={gamma_star:.6g}')

    return CriticalGamma(
        m=float(m),
        family=Family(family),
        gamma_star=gamma_star,
        bracket_width=width,
        side_with_solutions=side,
        verified=verified,
        lower_bound=flux_gamma_star_lower_bound(m) if Family(family) == Family.FLUX else None,
    )


def verify_flux_slope_bound(record, params):
    '''
    f'(0) >= -1 / ((m+2) gamma) for flux solutions with -2 < m <= -1, gamma < 0.

    Raises:
        PreconditionViolation: outside that parameter range.
    '''
    if params.family != Family.FLUX or not (-2 < params.m <= -1) or not params.gamma < 0:
        raise PreconditionViolation(
            f"The slope bound holds for the flux family with -2 < m <= -1 and gamma < 0, got {params}")
    bound = -1.0 / ((params.m + 2.0) * params.gamma)
    return record.free_value >= bound - 1e-9
