import logging
import math

import django_filters
import numpy as np
from django.conf import settings
from scipy import stats

from exceptions import PoorFit, RefusesBlowUpProfile, WindowTooShort
from integrator.models import Termination
from integrator.utils import SIGN_DEAD_BAND
from problems.models import Family
from .models import (AsymptoticClass, AsymptoticFit, AtlasEntry, Boundedness,
                     LambdaReport, Outcome, Shape, ShapeClass)


logger = logging.getLogger(__name__)

MIN_FIT_SAMPLES = 20
# Resampled stations used for the regression itself
FIT_STATIONS = 200
# |log f(t_hi) - log f(t_lo)| below this means f has settled: no power law
MIN_LOG_CHANGE = 1e-3


def expected_exponent(alpha, beta):
    '''alpha / (alpha - beta), the growth (or decay) exponent of |f|; None if alpha = beta.'''
    if alpha == beta:
        return None
    return alpha / (alpha - beta)


def classify_shape(profile, dead_band=SIGN_DEAD_BAND, noise_floor=0.0):
    '''
    Shape class from the sign pattern of f''.

    Values within the dead-band count as zero. Runs of one sign whose peak
    |f''| stays below `noise_floor` are dropped as integration chatter
    (callers pass a multiple of the absolute tolerance they integrated with).

    Raises:
        RefusesBlowUpProfile: the profile did not reach t_max.
    '''
    if profile.termination != Termination.REACHED_TMAX:
        raise RefusesBlowUpProfile(f"Cannot classify a profile that ended with {profile.termination}")

    fpp = profile.fpp
    signs = np.where(fpp > dead_band, 1, np.where(fpp < -dead_band, -1, 0))
    runs = []
    for sign, magnitude in zip(signs, np.abs(fpp)):
        if sign == 0:
            continue
        if runs and runs[-1][0] == sign:
            runs[-1][1] = max(runs[-1][1], magnitude)
        else:
            runs.append([sign, magnitude])

    pattern = []
    for sign, peak in runs:
        if peak < noise_floor:
            continue
        if not pattern or pattern[-1] != sign:
            pattern.append(sign)

    if not pattern:
        return ShapeClass(Shape.CONCAVE, 0, degenerate=True)
    if pattern == [-1]:
        return ShapeClass(Shape.CONCAVE)
    if pattern == [1]:
        return ShapeClass(Shape.CONVEX)
    if pattern == [1, -1]:
        return ShapeClass(Shape.CONVEX_CONCAVE, 1)
    if pattern == [-1, 1]:
        return ShapeClass(Shape.CONCAVE_CONVEX, 1)
    return ShapeClass(Shape.MIXED, len(pattern) - 1)


def is_unbounded_candidate(profile):
    '''|f(t_max)| > 10 |f(0)| + 10 on a profile that reached t_max.'''
    return (profile.termination == Termination.REACHED_TMAX
            and abs(profile.f[-1]) > 10 * abs(profile.f[0]) + 10)


def fit_asymptotic_exponent(profile, min_r_squared=None, window=None):
    '''
    Fit |f(t)| ~ c t^p over the final decade of the profile.

    The regression runs on log-spaced stations of the dense output so each
    part of the decade weighs the same; the window must still hold at least
    20 accepted steps.

    Args:
        profile (Profile): a profile that reached t_max.
        min_r_squared (float): acceptance threshold, settings.MIN_R_SQUARED by default.
        window (tuple): (t_lo, t_hi) override of the final decade.

    Returns:
        AsymptoticFit

    Raises:
        RefusesBlowUpProfile: the profile blew up or stopped early.
        WindowTooShort: fewer than 20 samples in the window.
        PoorFit: r^2 below the threshold or f vanishing in the window.
    '''
    if profile.termination != Termination.REACHED_TMAX:
        raise RefusesBlowUpProfile(f"Cannot fit a profile that ended with {profile.termination}")
    if min_r_squared is None:
        min_r_squared = settings.MIN_R_SQUARED

    t_hi = profile.t_final if window is None else window[1]
    t_lo = t_hi / 10.0 if window is None else window[0]
    inside = (profile.t >= t_lo) & (profile.t <= t_hi)
    n_samples = int(np.count_nonzero(inside))
    if t_lo <= 0 or n_samples < MIN_FIT_SAMPLES:
        raise WindowTooShort(f"{n_samples} samples in [{t_lo:g}, {t_hi:g}], need {MIN_FIT_SAMPLES}")

    ts = np.geomspace(t_lo, t_hi, FIT_STATIONS)
    f = np.abs(profile.at(ts)[:, 0])
    if np.any(f <= 0) or not np.all(np.isfinite(f)):
        raise PoorFit("f vanishes inside the fit window", r_squared=None)

    result = stats.linregress(np.log(ts), np.log(f))
    r_squared = float(result.rvalue ** 2)
    if not r_squared >= min_r_squared:
        raise PoorFit(f"r^2={r_squared:.6f} below {min_r_squared}", r_squared=r_squared)

    return AsymptoticFit(
        exponent=float(result.slope),
        c_constant=float(math.exp(result.intercept)),
        fit_window=(float(t_lo), float(t_hi)),
        r_squared=r_squared,
        n_samples=n_samples,
    )


def _settled_power_law(profile, min_r_squared):
    '''The accepted fit, or None when f has settled or no power law fits.'''
    t_hi = profile.t_final
    f_lo, f_hi = np.abs(profile.at(t_hi / 10.0)[0]), np.abs(profile.f[-1])
    if f_lo <= 0 or f_hi <= 0 or abs(math.log(f_hi / f_lo)) < MIN_LOG_CHANGE:
        return None
    try:
        return fit_asymptotic_exponent(profile, min_r_squared=min_r_squared)
    except (WindowTooShort, PoorFit) as exc:
        logger.debug(f'No power law on {profile.params}: {exc}')
        return None


def passes_bounded_test(profile, bc_tol):
    '''|f'(t_max)| < bc_tol and |f(t_max) - f(0.9 t_max)| < 100 bc_tol.'''
    t_final = profile.t_final
    return (abs(profile.fp[-1]) < bc_tol
            and abs(profile.f[-1] - profile.at(0.9 * t_final)[0]) < 100 * bc_tol)


def classify_asymptotics(profile, bc_tol=None, lambda_zero_tol=None, min_r_squared=None):
    '''
    Boundedness ladder for a profile that reached t_max.

    1. an accepted power law with negative exponent: bounded, lambda = 0 (decaying);
    2. the bounded test: bounded, lambda = f(t_max), reported as 0 below lambda_zero_tol;
    3. an accepted power law with exponent in (0, 1): unbounded;
    4. otherwise indeterminate.
    '''
    if bc_tol is None:
        bc_tol = settings.BC_TOL
    if lambda_zero_tol is None:
        lambda_zero_tol = settings.LAMBDA_ZERO_TOL
    if profile.termination != Termination.REACHED_TMAX:
        return AsymptoticClass(Boundedness.INDETERMINATE)

    fit = _settled_power_law(profile, min_r_squared)
    if fit is not None and fit.exponent < 0:
        return AsymptoticClass(Boundedness.DECAYING, limit_lambda=0.0,
                               decay_exponent=fit.exponent, fit=fit)

    if passes_bounded_test(profile, bc_tol):
        limit = float(profile.f[-1])
        if abs(limit) < lambda_zero_tol:
            limit = 0.0
        return AsymptoticClass(Boundedness.BOUNDED, limit_lambda=limit)

    if fit is not None and 0 < fit.exponent < 1:
        return AsymptoticClass(Boundedness.UNBOUNDED, growth_exponent=fit.exponent, fit=fit)

    return AsymptoticClass(Boundedness.INDETERMINATE, fit=fit)


def check_lambda_limits(records, family, m, gamma=None, gamma_star=None):
    '''
    Count the limits of the bounded records found at one (m, gamma) point and
    compare them with the known pattern:

    - temperature m < -1 (flux m < -2) above gamma*: exactly two records with
      lambda < 0, the others tend to 0;
    - m > 1: exactly one concave-convex record with lambda > 0.

    Violations are returned as findings, never raised. Without gamma_star a
    point with more than one record is taken to lie above gamma*.
    '''
    bounded = [r for r in records if r.bounded]
    negative = [r for r in bounded if r.limit_lambda < 0]
    zero = [r for r in bounded if r.limit_lambda == 0]
    positive = [r for r in bounded if r.limit_lambda > 0]
    cc_positive = [r for r in positive if r.shape.value == Shape.CONCAVE_CONVEX]
    findings = []

    below_critical_m = ((family == Family.TEMPERATURE and m < -1)
                        or (family == Family.FLUX and m < -2))
    if below_critical_m and records:
        if gamma_star is not None and gamma is not None:
            expected = 2 if gamma > gamma_star else 1
        else:
            expected = 2 if len(records) > 1 else 1
        if len(negative) != expected:
            findings.append(f"expected {expected} solution(s) with lambda < 0, found {len(negative)}")
        if positive:
            findings.append(f"{len(positive)} solution(s) with lambda > 0")

    if m > 1 and records and family in (Family.TEMPERATURE, Family.FLUX):
        if len(cc_positive) != 1:
            findings.append(f"expected 1 concave-convex solution with lambda > 0, found {len(cc_positive)}")

    for finding in findings:
        logger.warning(f'{family}(m={m:g}, gamma={gamma}): {finding}')

    return LambdaReport(len(negative), len(zero), len(positive), len(cc_positive), tuple(findings))


def monotonicity_findings(records, family, m, bc_tol=None):
    '''
    Qualitative checks on the profiles of the records found:

    - temperature m in (-1, 1] (bounded records) and flux m in (-2, 1]:
      f' > 0 on [0, t_max), allowing -bc_tol at the horizon;
    - temperature m < -1: f < 0 throughout.
    '''
    if bc_tol is None:
        bc_tol = settings.BC_TOL
    findings = []
    for record in records:
        profile = record.profile
        increasing_expected = (
            (family == Family.TEMPERATURE and -1 < m <= 1 and record.bounded)
            or (family == Family.FLUX and -2 < m <= 1))
        if increasing_expected and np.any(profile.fp < -bc_tol):
            findings.append(f"free value {record.free_value:.10g}: f' changes sign")
        if family == Family.TEMPERATURE and m < -1 and np.any(profile.f > bc_tol):
            findings.append(f"free value {record.free_value:.10g}: f becomes positive")
    return findings


def atlas_outcome(n_records, has_band):
    '''Outcome label from the number of records and the presence of a band.'''
    if n_records == 0:
        return Outcome.NO_SOLUTION
    if has_band:
        return Outcome.BAND_OF_SOLUTIONS
    if n_records == 1:
        return Outcome.UNIQUE
    return Outcome.FINITE_MULTIPLE


class AtlasEntryFilter(django_filters.FilterSet):
    '''
    Filter set for stored AtlasEntry rows, used by the `atlas` command.

    Attributes:
        family (ChoiceFilter): exact family.
        outcome (ChoiceFilter): exact outcome.
        m_min, m_max (NumberFilter): m range, inclusive.
        gamma_min, gamma_max (NumberFilter): gamma range, inclusive.
    '''

    family = django_filters.ChoiceFilter(field_name='family', choices=Family.choices)
    outcome = django_filters.ChoiceFilter(field_name='outcome', choices=Outcome.choices)
    m_min = django_filters.NumberFilter(field_name='m', lookup_expr='gte')
    m_max = django_filters.NumberFilter(field_name='m', lookup_expr='lte')
    gamma_min = django_filters.NumberFilter(field_name='gamma', lookup_expr='gte')
    gamma_max = django_filters.NumberFilter(field_name='gamma', lookup_expr='lte')

    class Meta:
        model = AtlasEntry
        fields = [
            'family',
            'outcome',
            'm_min',
            'm_max',
            'gamma_min',
            'gamma_max',
        ]
