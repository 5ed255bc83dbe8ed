import math

import numpy as np

from exceptions import InvalidParameters, PreconditionViolation
from .models import (BoundaryConditionSet, ClosedFormKind, ClosedFormSolution,
                     Family, FixedSlot, ModelParams, State)


def _require_finite(**values):
    for name, value in values.items():
        if value is None or not math.isfinite(value):
            raise InvalidParameters(f"{name} must be a finite real, got {value!r}")


def make_params(family, m=None, gamma=0.0, alpha=None, beta=None):
    '''
    Build the ModelParams of one problem.

    Temperature: alpha = (m+1)/2, beta = m.
    Flux:        alpha = m+2,     beta = 2m+1.
    Generic:     alpha and beta are passed directly and m is ignored.

    Raises:
        InvalidParameters: on non-finite inputs or an unknown family.
    '''
    family = Family(family)
    _require_finite(gamma=gamma)

    if family == Family.GENERIC:
        _require_finite(alpha=alpha, beta=beta)
        return ModelParams(family, None, float(alpha), float(beta), float(gamma))

    _require_finite(m=m)
    m = float(m)
    if family == Family.TEMPERATURE:
        return ModelParams(family, m, (m + 1.0) / 2.0, m, float(gamma))
    return ModelParams(family, m, m + 2.0, 2.0 * m + 1.0, float(gamma))


def m_from_coefficients(family, alpha):
    '''Inverse of the family maps: m = 2 alpha - 1 (temperature), alpha - 2 (flux).'''
    family = Family(family)
    if family == Family.TEMPERATURE:
        return 2.0 * alpha - 1.0
    if family == Family.FLUX:
        return alpha - 2.0
    raise InvalidParameters("The generic family has no exponent m")


def rhs(params, state):
    """f''' = -alpha f f'' + beta f'^2."""
    if isinstance(state, State):
        f, fp, fpp = state.f, state.fp, state.fpp
    else:
        f, fp, fpp = state
    return -params.alpha * f * fpp + params.beta * fp * fp


def boundary_conditions(params, free_value):
    '''
    The boundary data of the shooting problem for one free value.

    Temperature fixes f'(0) = 1 and frees f''(0); flux fixes f''(0) = -1
    and frees f'(0).
    '''
    if params.family == Family.TEMPERATURE:
        slot = FixedSlot.SLOPE_FIXED
    elif params.family == Family.FLUX:
        slot = FixedSlot.CURVATURE_FIXED
    else:
        raise PreconditionViolation("Boundary conditions are defined for temperature and flux only")
    return BoundaryConditionSet(-params.gamma, slot, float(free_value))


def closed_form_m1(gamma):
    '''
    Explicit solution for m = 1 (alpha = beta = 1) and any gamma:

        f(t) = c - (c + gamma) exp(-c t),  c = (-gamma + sqrt(gamma^2 + 4)) / 2

    so that c (c + gamma) = 1 and f'(0) = 1, f''(0) = -c.
    '''
    _require_finite(gamma=gamma)
    # Written as 2/(gamma + sqrt(gamma^2+4)) when gamma > 0 to avoid cancellation
    root = math.hypot(gamma, 2.0)
    c = 2.0 / (gamma + root) if gamma > 0 else (root - gamma) / 2.0
    a = c + gamma

    def evaluator(t):
        e = np.exp(-c * np.asarray(t, dtype=float))
        return (c - a * e, a * c * e, -a * c * c * e, a * c ** 3 * e)

    return ClosedFormSolution(ClosedFormKind.M1_ANY_GAMMA, float(gamma), 1.0, 1.0,
                              {'c': c}, evaluator)


def closed_form_m_third(gamma):
    '''
    Explicit solution for m = -1/3 (alpha = 1/3, beta = -1/3) and any gamma.

    The equation integrates once to f'' + f f'/3 = C; the bounded branch has
    C = 0, which gives

        f(t) = L tanh(L (t + t0) / 6),  L = sqrt(6 + gamma^2),  tanh(L t0 / 6) = -gamma / L

    with f''(0) = gamma / 3.
    '''
    _require_finite(gamma=gamma)
    L = math.sqrt(6.0 + gamma * gamma)
    k = L / 6.0
    t0 = math.atanh(-gamma / L) / k

    def evaluator(t):
        x = k * (np.asarray(t, dtype=float) + t0)
        T = np.tanh(x)
        S = 1.0 / np.cosh(x) ** 2
        return (L * T,
                L * k * S,
                -2.0 * L * k * k * S * T,
                2.0 * L * k ** 3 * S * (2.0 * T * T - S))

    return ClosedFormSolution(ClosedFormKind.M_THIRD_ANY_GAMMA, float(gamma),
                              1.0 / 3.0, -1.0 / 3.0, {'L': L, 't0': t0}, evaluator)


def closed_form_residual(solution, t):
    """Pointwise |f''' + alpha f f'' - beta f'^2| of a closed form."""
    f, fp, fpp, fppp = solution.derivatives(t)
    return np.abs(fppp + solution.alpha * f * fpp - solution.beta * fp * fp)


def gamma_from_physical(omega, m, mu, rho_inf, beta_thermal, g, k, A, lambda_diff):
    '''
    Dimensionless mass-transfer parameter from the wall transpiration rate:

        gamma = (2 omega / (m + 1)) sqrt(mu / (rho_inf beta_thermal g k A lambda_diff))

    Args:
        omega (float): wall velocity coefficient, any sign (negative: suction).
        m (float): wall temperature exponent, m != -1.
        mu, rho_inf, beta_thermal, g, k, A, lambda_diff (float): viscosity,
            ambient density, thermal expansion coefficient, gravity,
            permeability, wall temperature amplitude and thermal diffusivity.
            All strictly positive.

    Raises:
        InvalidParameters: m = -1, a non-positive physical constant or a
        non-finite input.
    '''
    _require_finite(omega=omega, m=m)
    if m == -1:
        raise InvalidParameters("gamma is undefined for m = -1")

    constants = {'mu': mu, 'rho_inf': rho_inf, 'beta_thermal': beta_thermal,
                 'g': g, 'k': k, 'A': A, 'lambda_diff': lambda_diff}
    _require_finite(**constants)
    for name, value in constants.items():
        if value <= 0:
            raise InvalidParameters(f"{name} must be positive, got {value!r}")

    return (2.0 * omega / (m + 1.0)) * math.sqrt(
        mu / (rho_inf * beta_thermal * g * k * A * lambda_diff))
